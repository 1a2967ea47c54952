use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::require_full_rank;

/// Ingested responses closer than this to 0 or 1 are rejected.
pub const BOUNDARY_TOL: f64 = 1e-10;

/// Responses in (0,1) with mean design `X` (n x p) and precision design
/// `V` (n x q).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    z: Vec<f64>,
    x: DMatrix<f64>,
    v: DMatrix<f64>,
    x_names: Vec<String>,
    v_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        z: Vec<f64>,
        x: DMatrix<f64>,
        v: DMatrix<f64>,
        x_names: Vec<String>,
        v_names: Vec<String>,
    ) -> Result<Self> {
        let n = z.len();
        if n == 0 {
            return Err(Error::InvalidData("no rows".into()));
        }
        if x.nrows() != n || v.nrows() != n {
            return Err(Error::InvalidData(format!(
                "row mismatch: {n} responses, X has {} rows, V has {}",
                x.nrows(),
                v.nrows()
            )));
        }
        if x_names.len() != x.ncols() || v_names.len() != v.ncols() {
            return Err(Error::InvalidData("column name count does not match design".into()));
        }
        if x.ncols() == 0 || v.ncols() == 0 {
            return Err(Error::InvalidData("both designs need at least one column".into()));
        }
        for (i, &zi) in z.iter().enumerate() {
            if !(zi > 0.0 && zi < 1.0) {
                return Err(Error::InvalidData(format!("response {zi} at row {} is not inside (0,1)", i + 1)));
            }
        }
        if x.iter().chain(v.iter()).any(|e| !e.is_finite()) {
            return Err(Error::InvalidData("design matrices must be finite".into()));
        }
        if x.ncols() + v.ncols() >= n {
            return Err(Error::InvalidData(format!(
                "need p + q < n, got p={} q={} n={n}",
                x.ncols(),
                v.ncols()
            )));
        }
        require_full_rank(&x, "mean")?;
        require_full_rank(&v, "precision")?;
        Ok(Self {
            z,
            x,
            v,
            x_names,
            v_names,
        })
    }

    /// Intercept-only mean and precision designs.
    pub fn intercept_only(z: Vec<f64>) -> Result<Self> {
        let n = z.len();
        Self::new(
            z,
            DMatrix::from_element(n, 1, 1.0),
            DMatrix::from_element(n, 1, 1.0),
            vec!["(intercept)".into()],
            vec!["(intercept)".into()],
        )
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }
    pub fn p(&self) -> usize {
        self.x.ncols()
    }
    pub fn q(&self) -> usize {
        self.v.ncols()
    }
    pub fn z(&self) -> &[f64] {
        &self.z
    }
    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }
    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }
    pub fn x_names(&self) -> &[String] {
        &self.x_names
    }
    pub fn v_names(&self) -> &[String] {
        &self.v_names
    }

    /// Coefficient labels, mean block first.
    pub fn coef_names(&self) -> Vec<String> {
        self.x_names
            .iter()
            .map(|s| format!("mean:{s}"))
            .chain(self.v_names.iter().map(|s| format!("precision:{s}")))
            .collect()
    }

    /// First column of `V` that is identically one.
    pub fn v_intercept(&self) -> Option<usize> {
        (0..self.q()).find(|&j| self.v.column(j).iter().all(|&e| e == 1.0))
    }

    /// Rows `idx` (in that order), revalidated.
    pub fn subset(&self, idx: &[usize]) -> Result<Self> {
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.n()) {
            return Err(Error::InvalidData(format!("row index {bad} out of range")));
        }
        Self::new(
            idx.iter().map(|&i| self.z[i]).collect(),
            self.x.select_rows(idx),
            self.v.select_rows(idx),
            self.x_names.clone(),
            self.v_names.clone(),
        )
    }

    /// Rows `idx` without the rank and size checks, for evaluating an
    /// already fitted model on a few held-out rows.
    pub(crate) fn subset_unchecked(&self, idx: &[usize]) -> Self {
        Self {
            z: idx.iter().map(|&i| self.z[i]).collect(),
            x: self.x.select_rows(idx),
            v: self.v.select_rows(idx),
            x_names: self.x_names.clone(),
            v_names: self.v_names.clone(),
        }
    }

    /// Same designs with a new response vector.
    pub fn with_response(&self, z: Vec<f64>) -> Result<Self> {
        if z.len() != self.n() {
            return Err(Error::InvalidData("response length mismatch".into()));
        }
        for &zi in &z {
            if !(zi > 0.0 && zi < 1.0) {
                return Err(Error::InvalidData(format!("response {zi} is not inside (0,1)")));
            }
        }
        let mut d = self.clone();
        d.z = z;
        Ok(d)
    }
}
