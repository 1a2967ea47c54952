//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative singular-value threshold used for rank decisions.
pub const RANK_TOL: f64 = 1e-10;

#[inline]
pub fn logistic(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub fn logit(mu: f64) -> f64 {
    (mu / (1.0 - mu)).ln()
}

/// Numerical column rank from the singular values.
pub fn rank(m: &DMatrix<f64>) -> usize {
    if m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.max();
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOL * smax).count()
}

pub fn require_full_rank(m: &DMatrix<f64>, matrix: &'static str) -> Result<()> {
    let r = rank(m);
    if r < m.ncols() {
        return Err(Error::RankDeficient {
            matrix,
            rank: r,
            cols: m.ncols(),
        });
    }
    Ok(())
}

/// Ordinary least squares fit.
#[derive(Debug, Clone)]
pub struct Ols {
    pub coef: DVector<f64>,
    pub residuals: DVector<f64>,
    pub rss: f64,
}

impl Ols {
    /// `RSS / (n - p)`.
    pub fn residual_variance(&self) -> f64 {
        let n = self.residuals.len();
        let p = self.coef.len();
        self.rss / (n.saturating_sub(p)).max(1) as f64
    }
}

pub fn ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<Ols> {
    if x.nrows() != y.len() {
        return Err(Error::InvalidData(format!(
            "design has {} rows but response has {}",
            x.nrows(),
            y.len()
        )));
    }
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let coef = svd
        .solve(y, RANK_TOL * smax.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::Solver(e.to_string()))?;
    let residuals = y - x * &coef;
    let rss = residuals.norm_squared();
    Ok(Ols {
        coef,
        residuals,
        rss,
    })
}

/// Inverse of a symmetric matrix, through Cholesky when it is positive
/// definite and LU otherwise. The flag reports positive definiteness.
pub fn symmetric_inverse(m: &DMatrix<f64>) -> Option<(DMatrix<f64>, bool)> {
    if let Some(ch) = m.clone().cholesky() {
        return Some((ch.inverse(), true));
    }
    m.clone().try_inverse().map(|inv| (inv, false))
}

/// Index of the column most involved in the near null space of a symmetric
/// matrix.
pub fn weakest_column(m: &DMatrix<f64>) -> usize {
    let eig = m.clone().symmetric_eigen();
    let (k, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .expect("non-empty matrix");
    let v = eig.eigenvectors.column(k);
    v.iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// Symmetrize in place: `(A + A^T) / 2`.
pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let s = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = s;
            m[(j, i)] = s;
        }
    }
}
