//! Maps a flat parameter vector to per-observation means and precisions and
//! pulls per-observation derivatives back to parameter space.

use nalgebra::{DMatrix, DVector};

use super::Dataset;
use crate::linalg::logistic;

#[derive(Debug, Clone, Copy)]
pub(crate) enum Layout<'a> {
    /// Parameters are `(kappa, lambda)`.
    Full,
    /// Parameters are `lambda`; the means are held at the given values.
    FixedMean(&'a [f64]),
}

pub(crate) struct Linear {
    pub mu: Vec<f64>,
    pub phi: Vec<f64>,
}

impl<'a> Layout<'a> {
    /// Means and precisions, or `None` if any mean saturates at 0 or 1 or
    /// any precision is zero or infinite.
    pub fn eval(&self, data: &Dataset, params: &DVector<f64>) -> Option<Linear> {
        let p = data.p();
        let (mu, lambda) = match self {
            Layout::Full => {
                let eta = data.x() * params.rows(0, p);
                let mu: Vec<f64> = eta.iter().map(|&e| logistic(e)).collect();
                (mu, params.rows(p, data.q()).into_owned())
            }
            Layout::FixedMean(m) => (m.to_vec(), params.clone()),
        };
        if mu.iter().any(|&m| !(m > 0.0 && m < 1.0)) {
            return None;
        }
        let tau = data.v() * lambda;
        let phi: Vec<f64> = tau.iter().map(|t| t.exp()).collect();
        if phi.iter().any(|&f| !(f > 0.0 && f.is_finite())) {
            return None;
        }
        Some(Linear { mu, phi })
    }

    /// Gradient in parameter space from derivatives with respect to the
    /// linear predictors `eta_i` and `tau_i`.
    pub fn chain_grad(&self, data: &Dataset, g_eta: &[f64], g_tau: &[f64]) -> DVector<f64> {
        let gt = data.v().tr_mul(&DVector::from_column_slice(g_tau));
        match self {
            Layout::Full => {
                let ge = data.x().tr_mul(&DVector::from_column_slice(g_eta));
                let mut out = DVector::zeros(data.p() + data.q());
                out.rows_mut(0, data.p()).copy_from(&ge);
                out.rows_mut(data.p(), data.q()).copy_from(&gt);
                out
            }
            Layout::FixedMean(_) => gt,
        }
    }

    /// Second-order pull-back of per-observation 2x2 blocks
    /// `[[w_ee, w_et], [w_et, w_tt]]`.
    pub fn chain_hess(&self, data: &Dataset, w_ee: &[f64], w_et: &[f64], w_tt: &[f64]) -> DMatrix<f64> {
        let v = data.v();
        let vv = weighted_cross(v, w_tt, v);
        match self {
            Layout::Full => {
                let x = data.x();
                let (p, q) = (data.p(), data.q());
                let mut out = DMatrix::zeros(p + q, p + q);
                out.view_mut((0, 0), (p, p)).copy_from(&weighted_cross(x, w_ee, x));
                let xv = weighted_cross(x, w_et, v);
                out.view_mut((0, p), (p, q)).copy_from(&xv);
                out.view_mut((p, 0), (q, p)).copy_from(&xv.transpose());
                out.view_mut((p, p), (q, q)).copy_from(&vv);
                out
            }
            Layout::FixedMean(_) => vv,
        }
    }
}

/// `A^T diag(w) B`.
fn weighted_cross(a: &DMatrix<f64>, w: &[f64], b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut scaled = b.clone();
    for (i, mut row) in scaled.row_iter_mut().enumerate() {
        row *= w[i];
    }
    a.tr_mul(&scaled)
}
