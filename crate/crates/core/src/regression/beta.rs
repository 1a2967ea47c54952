//! Mean-precision beta regression by direct maximum likelihood.

use nalgebra::DVector;
use statrs::function::gamma::{digamma, ln_gamma};

use super::bessel::standard_errors;
use super::layout::{Layout, Linear};
use super::{default_init, Dataset, FitResult, Theta};
use crate::distributions::Family;
use crate::error::{Error, Result};
use crate::optim::{minimize, numerical_hessian, BfgsOptions};

#[derive(Debug, Clone, Copy)]
pub struct BetaOptions {
    pub optim: BfgsOptions,
    /// Relative step for the finite-difference Hessian.
    pub hessian_step: f64,
}

impl Default for BetaOptions {
    fn default() -> Self {
        Self {
            optim: BfgsOptions {
                gtol: 1e-8,
                max_iter: 2000,
            },
            hessian_step: 1e-5,
        }
    }
}

fn loglik_lin(data: &Dataset, lin: &Linear) -> f64 {
    let mut ll = 0.0;
    for (i, &z) in data.z().iter().enumerate() {
        let (m, f) = (lin.mu[i], lin.phi[i]);
        let (a, b) = (m * f, (1.0 - m) * f);
        ll += ln_gamma(f) - ln_gamma(a) - ln_gamma(b) + (a - 1.0) * z.ln() + (b - 1.0) * (1.0 - z).ln();
    }
    ll
}

fn grad_parts(data: &Dataset, lin: &Linear) -> (Vec<f64>, Vec<f64>) {
    let n = data.n();
    let mut ge = Vec::with_capacity(n);
    let mut gt = Vec::with_capacity(n);
    for (i, &z) in data.z().iter().enumerate() {
        let (m, f) = (lin.mu[i], lin.phi[i]);
        let (da, db) = (digamma(m * f), digamma((1.0 - m) * f));
        let ystar = (z / (1.0 - z)).ln();
        let mstar = da - db;
        ge.push(m * (1.0 - m) * f * (ystar - mstar));
        gt.push(f * (m * (ystar - mstar) + (1.0 - z).ln() - db + digamma(f)));
    }
    (ge, gt)
}

fn eval(theta: &Theta, data: &Dataset) -> Result<Linear> {
    if theta.kappa.len() != data.p() || theta.lambda.len() != data.q() {
        return Err(Error::InvalidData("coefficient lengths do not match designs".into()));
    }
    Layout::Full
        .eval(data, &theta.to_vector())
        .ok_or_else(|| Error::NonFinite("mean or precision saturated at these coefficients".into()))
}

/// Exact beta log-likelihood.
pub fn loglik_beta(theta: &Theta, data: &Dataset) -> Result<f64> {
    let ll = loglik_lin(data, &eval(theta, data)?);
    if !ll.is_finite() {
        return Err(Error::NonFinite(format!("beta log-likelihood is {ll}")));
    }
    Ok(ll)
}

/// Analytic score of [`loglik_beta`].
pub fn score_beta(theta: &Theta, data: &Dataset) -> Result<DVector<f64>> {
    let lin = eval(theta, data)?;
    let (ge, gt) = grad_parts(data, &lin);
    Ok(Layout::Full.chain_grad(data, &ge, &gt))
}

fn maximize(
    data: &Dataset,
    layout: Layout<'_>,
    x0: DVector<f64>,
    opts: BfgsOptions,
) -> Result<crate::optim::BfgsResult> {
    let objective = |x: &DVector<f64>| {
        let lin = layout.eval(data, x)?;
        let (ge, gt) = grad_parts(data, &lin);
        Some((-loglik_lin(data, &lin), -layout.chain_grad(data, &ge, &gt)))
    };
    minimize(objective, x0, opts)
        .ok_or_else(|| Error::NonFinite("beta log-likelihood undefined at the starting values".into()))
}

pub fn fit_beta_ml(data: &Dataset, init: Option<&Theta>) -> Result<FitResult> {
    fit_beta_ml_with(data, init, &BetaOptions::default())
}

pub fn fit_beta_ml_with(data: &Dataset, init: Option<&Theta>, opts: &BetaOptions) -> Result<FitResult> {
    let theta0 = match init {
        Some(t) => t.clone(),
        None => default_init(data, Family::Beta)?,
    };
    let ll0 = loglik_beta(&theta0, data)?;
    let res = maximize(data, Layout::Full, theta0.to_vector(), opts.optim)?;
    let theta = Theta::from_vector(&res.x, data.p());
    let grad = |x: &DVector<f64>| -> DVector<f64> {
        match Layout::Full.eval(data, x) {
            Some(lin) => {
                let (ge, gt) = grad_parts(data, &lin);
                Layout::Full.chain_grad(data, &ge, &gt)
            }
            None => DVector::from_element(x.len(), f64::NAN),
        }
    };
    let information = -numerical_hessian(grad, &res.x, opts.hessian_step);
    let (std_errors, information_pd) = standard_errors(&information);
    Ok(FitResult {
        model: Family::Beta,
        theta,
        std_errors,
        information,
        information_pd,
        loglik: -res.f,
        iterations: res.iterations,
        loglik_trace: vec![ll0, -res.f],
        converged: res.converged,
        names: data.coef_names(),
    })
}

/// Maximum likelihood over the precision coefficients with the means frozen.
pub(crate) fn fit_beta_lambda(data: &Dataset, mu: &[f64], lambda0: DVector<f64>) -> Result<(DVector<f64>, bool)> {
    let res = maximize(data, Layout::FixedMean(mu), lambda0, BetaOptions::default().optim)?;
    Ok((res.x, res.converged))
}
