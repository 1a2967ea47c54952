use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::ols;

/// `R^2` above this is treated as exact collinearity.
const COLLINEAR_R2: f64 = 1.0 - 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VifRemoval {
    pub column: String,
    /// Infinite for an exactly collinear column.
    pub vif: f64,
    pub collinear: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VifResult {
    pub kept: Vec<String>,
    pub removed: Vec<VifRemoval>,
    /// VIFs of the kept columns after the last removal.
    pub final_vif: Vec<f64>,
}

/// VIF of every column: `1 / (1 - R_j^2)` from the least-squares regression
/// of column `j` on an intercept and the remaining columns.
pub fn variance_inflation(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let (n, k) = m.shape();
    if k < 2 {
        return Err(Error::InvalidData("VIF needs at least two columns".into()));
    }
    if n <= k {
        return Err(Error::InvalidData("VIF needs more rows than columns".into()));
    }
    (0..k)
        .map(|j| {
            let y: DVector<f64> = m.column(j).into_owned();
            let mut others = DMatrix::from_element(n, k, 1.0);
            for (c, l) in (1..).zip((0..k).filter(|&l| l != j)) {
                others.set_column(c, &m.column(l));
            }
            let fit = ols(&others, &y)?;
            let ybar = y.mean();
            let tss: f64 = y.iter().map(|v| (v - ybar).powi(2)).sum();
            if tss == 0.0 {
                return Ok(f64::INFINITY);
            }
            let r2 = 1.0 - fit.rss / tss;
            Ok(if r2 >= COLLINEAR_R2 { f64::INFINITY } else { 1.0 / (1.0 - r2) })
        })
        .collect()
}

/// Remove the column with the largest VIF while that VIF is at least
/// `threshold`, recomputing after every removal.
pub fn vif_select(candidates: &DMatrix<f64>, names: &[String], threshold: f64) -> Result<VifResult> {
    if names.len() != candidates.ncols() {
        return Err(Error::InvalidData("one name per candidate column is required".into()));
    }
    let mut cols: Vec<usize> = (0..candidates.ncols()).collect();
    let mut removed = Vec::new();
    loop {
        if cols.len() < 2 {
            let final_vif = vec![1.0; cols.len()];
            return Ok(VifResult {
                kept: cols.iter().map(|&c| names[c].clone()).collect(),
                removed,
                final_vif,
            });
        }
        let sub = candidates.select_columns(&cols);
        let vifs = variance_inflation(&sub)?;
        let (worst, &v) = vifs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("at least two columns");
        if v < threshold {
            return Ok(VifResult {
                kept: cols.iter().map(|&c| names[c].clone()).collect(),
                removed,
                final_vif: vifs,
            });
        }
        removed.push(VifRemoval {
            column: names[cols[worst]].clone(),
            vif: v,
            collinear: v.is_infinite(),
        });
        cols.remove(worst);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn orthogonal_columns() {
        // centered, mutually orthogonal columns
        let m = DMatrix::from_row_slice(4, 2, &[1.0, 1.0, -1.0, 1.0, 1.0, -1.0, -1.0, -1.0]);
        let r = vif_select(&m, &names(2), 5.0).unwrap();
        assert!(r.removed.is_empty());
        assert!(r.final_vif.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn duplicate_removed_first() {
        let m = DMatrix::from_fn(20, 3, |i, j| match j {
            0 => (i as f64).sin(),
            1 => (i as f64 * 0.7).cos(),
            _ => (i as f64).sin(),
        });
        let r = vif_select(&m, &names(3), 5.0).unwrap();
        assert_eq!(r.removed.len(), 1);
        assert!(r.removed[0].collinear && r.removed[0].vif.is_infinite());
    }
}
