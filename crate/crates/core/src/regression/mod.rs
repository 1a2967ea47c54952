//! Regression models for responses in (0,1) with a logit link for the mean
//! and a log link for the precision.
//!
//! [`fit_bessel_em`] fits the bessel regression by EM and reports Louis
//! standard errors; [`fit_beta_ml`] fits the mean-precision beta regression
//! by direct maximum likelihood.

mod bessel;
mod beta;
mod dataset;
mod inference;
mod layout;

pub use bessel::{
    default_em_options, e_step, fit_bessel_em, fit_bessel_em_with, loglik_bessel, louis_information, q_function,
    q_score, EStep, EmOptions,
};
pub use beta::{fit_beta_ml, fit_beta_ml_with, loglik_beta, score_beta, BetaOptions};
pub use dataset::{Dataset, BOUNDARY_TOL};
pub use inference::{wald_inference, WaldRow};

pub(crate) use bessel::fit_bessel_lambda;
pub(crate) use beta::fit_beta_lambda;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::distributions::Family;
use crate::error::Result;
use crate::linalg::{logistic, logit, ols};

/// Mean coefficients `kappa` (logit link) and precision coefficients
/// `lambda` (log link).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theta {
    pub kappa: Vec<f64>,
    pub lambda: Vec<f64>,
}

impl Theta {
    pub fn new(kappa: Vec<f64>, lambda: Vec<f64>) -> Self {
        Self { kappa, lambda }
    }

    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.kappa.len() + self.lambda.len(),
            self.kappa.iter().chain(self.lambda.iter()).copied(),
        )
    }

    pub fn from_vector(v: &DVector<f64>, p: usize) -> Self {
        Self {
            kappa: v.rows(0, p).iter().copied().collect(),
            lambda: v.rows(p, v.len() - p).iter().copied().collect(),
        }
    }

    /// Fitted means `logistic(X kappa)`.
    pub fn mu(&self, data: &Dataset) -> Vec<f64> {
        let eta = data.x() * DVector::from_column_slice(&self.kappa);
        eta.iter().map(|&e| logistic(e)).collect()
    }

    /// Fitted precisions `exp(V lambda)`.
    pub fn phi(&self, data: &Dataset) -> Vec<f64> {
        let tau = data.v() * DVector::from_column_slice(&self.lambda);
        tau.iter().map(|t| t.exp()).collect()
    }
}

/// Outcome of a model fit.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub model: Family,
    pub theta: Theta,
    /// Square roots of the diagonal of the inverse information; NaN where
    /// that diagonal is not positive.
    pub std_errors: Vec<f64>,
    /// Observed information (Louis for bessel, numerical Hessian for beta).
    pub information: DMatrix<f64>,
    pub information_pd: bool,
    pub loglik: f64,
    pub iterations: usize,
    pub loglik_trace: Vec<f64>,
    pub converged: bool,
    /// Coefficient labels, mean block first.
    pub names: Vec<String>,
}

impl FitResult {
    pub fn mu(&self, data: &Dataset) -> Vec<f64> {
        self.theta.mu(data)
    }

    pub fn phi(&self, data: &Dataset) -> Vec<f64> {
        self.theta.phi(data)
    }

    /// Variance scale `g(phi_i)` per observation.
    pub fn g_values(&self, data: &Dataset) -> Vec<f64> {
        self.phi(data)
            .into_iter()
            .map(|p| self.model.g(p).expect("positive precision"))
            .collect()
    }
}

/// Fit `model` with its default options.
pub fn fit(model: Family, data: &Dataset, init: Option<&Theta>) -> Result<FitResult> {
    match model {
        Family::Bessel => fit_bessel_em(data, init),
        Family::Beta => fit_beta_ml(data, init),
    }
}

/// Starting values from a linear regression of `logit(z)` on `X`.
///
/// The precision intercept starts at `ln(max(phi_check, 0.1))` with
/// `phi_check = mean(mu_i (1 - mu_i) / sigma_i^2 - 1)`; for the bessel model
/// it is then mapped through `ln 2 + ln(1 + e^lambda)`. Other precision
/// coefficients start at zero.
pub fn default_init(data: &Dataset, model: Family) -> Result<Theta> {
    let y = DVector::from_iterator(data.n(), data.z().iter().map(|&z| logit(z)));
    let fit = ols(data.x(), &y)?;
    let sigma2 = fit.residual_variance();
    let eta = data.x() * &fit.coef;
    let n = data.n() as f64;
    let phi_check = eta
        .iter()
        .map(|&e| {
            let m = logistic(e);
            let v = m * (1.0 - m);
            let s2 = sigma2 * v * v;
            v / s2 - 1.0
        })
        .sum::<f64>()
        / n;
    let mut lambda0 = phi_check.max(0.1).ln();
    if !lambda0.is_finite() {
        lambda0 = 0.0;
    }
    if model == Family::Bessel {
        lambda0 = bessel_lambda_adapt(lambda0);
    }
    let mut lambda = vec![0.0; data.q()];
    lambda[data.v_intercept().unwrap_or(0)] = lambda0;
    Ok(Theta::new(fit.coef.iter().copied().collect(), lambda))
}

/// `ln 2 + ln(1 + e^lambda)`, the map applied to the precision intercept
/// when starting the bessel fit.
pub fn bessel_lambda_adapt(lambda: f64) -> f64 {
    let softplus = if lambda > 30.0 { lambda + (-lambda).exp().ln_1p() } else { lambda.exp().ln_1p() };
    std::f64::consts::LN_2 + softplus
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adaptation_at_zero() {
        assert!((bessel_lambda_adapt(0.0) - 4.0f64.ln()).abs() < 1e-15);
        assert!((bessel_lambda_adapt(50.0) - (50.0 + std::f64::consts::LN_2)).abs() < 1e-12);
    }

    #[test]
    fn constant_response_init() {
        let n = 20;
        let z: Vec<f64> = (0..n).map(|i| 0.3 + 1e-4 * (i as f64 - 9.5)).collect();
        let data = Dataset::intercept_only(z).unwrap();
        let th = default_init(&data, Family::Beta).unwrap();
        assert!((th.kappa[0] - logit(0.3)).abs() < 1e-3);
    }
}
