//! Bessel regression: observed log-likelihood, EM with an analytic E-step,
//! and the Louis observed information.

use nalgebra::{DMatrix, DVector};

use super::layout::{Layout, Linear};
use super::{default_init, Dataset, FitResult, Theta};
use crate::distributions::{bessel_logpdf_unchecked, Family};
use crate::error::{Error, Result};
use crate::linalg::symmetric_inverse;
use crate::optim::{minimize_from, BfgsOptions};
use crate::specfun::bessel_k_scaled_all;

/// EM controls. The outer loop stops when
/// `||theta_new - theta|| / ||theta|| < epsilon`.
#[derive(Debug, Clone, Copy)]
pub struct EmOptions {
    pub epsilon: f64,
    pub max_iter: usize,
    /// Quasi-Newton settings for each M-step.
    pub inner: BfgsOptions,
}

impl Default for EmOptions {
    fn default() -> Self {
        Self {
            epsilon: 1e-5,
            max_iter: 10_000,
            inner: BfgsOptions {
                gtol: 1e-8,
                max_iter: 200,
            },
        }
    }
}

pub fn default_em_options() -> EmOptions {
    EmOptions::default()
}

/// Conditional moments of the latent `W_i` given `z_i`:
/// `psi_i = E(1/W_i | z_i)` and `chi_i = E(1/W_i^2 | z_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EStep {
    pub psi: Vec<f64>,
    pub chi: Vec<f64>,
}

#[inline]
fn zeta_sq(mu: f64, z: f64) -> f64 {
    let d = z - mu;
    1.0 + d * d / (z * (1.0 - z))
}

fn e_step_lin(data: &Dataset, lin: &Linear) -> EStep {
    let n = data.n();
    let mut psi = Vec::with_capacity(n);
    let mut chi = Vec::with_capacity(n);
    for i in 0..n {
        let x = lin.phi[i] * zeta_sq(lin.mu[i], data.z()[i]).sqrt();
        let k = bessel_k_scaled_all(x);
        psi.push(k[2] / (x * k[1]));
        chi.push(k[3] / (x * x * k[1]));
    }
    EStep { psi, chi }
}

fn eval_full(theta: &Theta, data: &Dataset) -> Result<Linear> {
    check_dims(theta, data)?;
    Layout::Full
        .eval(data, &theta.to_vector())
        .ok_or_else(|| Error::NonFinite("mean or precision saturated at these coefficients".into()))
}

fn check_dims(theta: &Theta, data: &Dataset) -> Result<()> {
    if theta.kappa.len() != data.p() || theta.lambda.len() != data.q() {
        return Err(Error::InvalidData(format!(
            "coefficient lengths ({}, {}) do not match designs ({}, {})",
            theta.kappa.len(),
            theta.lambda.len(),
            data.p(),
            data.q()
        )));
    }
    Ok(())
}

/// Conditional moments at `theta`, from ratios of scaled Bessel functions.
pub fn e_step(theta: &Theta, data: &Dataset) -> Result<EStep> {
    Ok(e_step_lin(data, &eval_full(theta, data)?))
}

fn loglik_lin(data: &Dataset, lin: &Linear) -> f64 {
    data.z()
        .iter()
        .zip(lin.mu.iter().zip(&lin.phi))
        .map(|(&z, (&m, &f))| bessel_logpdf_unchecked(m, f, z))
        .sum()
}

/// Exact observed log-likelihood, constants included.
pub fn loglik_bessel(theta: &Theta, data: &Dataset) -> Result<f64> {
    let ll = loglik_lin(data, &eval_full(theta, data)?);
    if !ll.is_finite() {
        return Err(Error::NonFinite(format!("bessel log-likelihood is {ll}")));
    }
    Ok(ll)
}

fn q_lin(data: &Dataset, lin: &Linear, psi: &[f64]) -> f64 {
    let mut q = 0.0;
    for i in 0..data.n() {
        let (m, f) = (lin.mu[i], lin.phi[i]);
        q += m.ln() + (1.0 - m).ln() + 2.0 * f.ln() + f - 0.5 * psi[i] * f * f * zeta_sq(m, data.z()[i]);
    }
    q
}

/// Derivatives of Q with respect to `eta_i` and `tau_i`.
fn q_grad_parts(data: &Dataset, lin: &Linear, psi: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = data.n();
    let mut ge = Vec::with_capacity(n);
    let mut gt = Vec::with_capacity(n);
    for i in 0..n {
        let (m, f, z) = (lin.mu[i], lin.phi[i], data.z()[i]);
        let v = m * (1.0 - m);
        ge.push(1.0 - 2.0 * m + psi[i] * f * f * v * (z - m) / (z * (1.0 - z)));
        gt.push(2.0 + f - psi[i] * f * f * zeta_sq(m, z));
    }
    (ge, gt)
}

/// The EM surrogate `Q(theta | theta_r)` with `psi` computed at `theta_r`.
pub fn q_function(theta: &Theta, psi: &[f64], data: &Dataset) -> Result<f64> {
    if psi.len() != data.n() {
        return Err(Error::InvalidData("psi length must equal n".into()));
    }
    Ok(q_lin(data, &eval_full(theta, data)?, psi))
}

/// Gradient of [`q_function`] in `(kappa, lambda)`.
pub fn q_score(theta: &Theta, psi: &[f64], data: &Dataset) -> Result<DVector<f64>> {
    if psi.len() != data.n() {
        return Err(Error::InvalidData("psi length must equal n".into()));
    }
    let lin = eval_full(theta, data)?;
    let (ge, gt) = q_grad_parts(data, &lin, psi);
    Ok(Layout::Full.chain_grad(data, &ge, &gt))
}

struct EmOutcome {
    params: DVector<f64>,
    trace: Vec<f64>,
    iterations: usize,
    converged: bool,
}

fn run_em(data: &Dataset, layout: Layout<'_>, x0: DVector<f64>, opts: &EmOptions) -> Result<EmOutcome> {
    let mut params = x0;
    let lin = layout
        .eval(data, &params)
        .ok_or_else(|| Error::NonFinite("starting values give a saturated mean or precision".into()))?;
    let mut trace = vec![loglik_lin(data, &lin)];
    let mut psi = e_step_lin(data, &lin).psi;
    let mut converged = false;
    let mut iterations = 0;
    let mut inv_h = None;
    while iterations < opts.max_iter {
        iterations += 1;
        let objective = |x: &DVector<f64>| {
            let lin = layout.eval(data, x)?;
            let (ge, gt) = q_grad_parts(data, &lin, &psi);
            Some((-q_lin(data, &lin, &psi), -layout.chain_grad(data, &ge, &gt)))
        };
        let step = minimize_from(objective, params.clone(), inv_h.take(), opts.inner)
            .ok_or_else(|| Error::NonFinite("Q-function undefined at the current iterate".into()))?;
        inv_h = Some(step.inv_hessian);
        let next = step.x;
        let lin = layout
            .eval(data, &next)
            .ok_or_else(|| Error::NonFinite("M-step left the parameter domain".into()))?;
        let ll = loglik_lin(data, &lin);
        if !ll.is_finite() {
            return Err(Error::NonFinite(format!("log-likelihood {ll} at EM iteration {iterations}")));
        }
        trace.push(ll);
        let denom = params.norm();
        let change = (&next - &params).norm();
        let rel = if denom > 0.0 { change / denom } else { change };
        params = next;
        psi = e_step_lin(data, &lin).psi;
        if rel < opts.epsilon {
            converged = true;
            break;
        }
    }
    Ok(EmOutcome {
        params,
        trace,
        iterations,
        converged,
    })
}

fn louis_lin(data: &Dataset, layout: Layout<'_>, lin: &Linear) -> DMatrix<f64> {
    let es = e_step_lin(data, lin);
    let n = data.n();
    let (mut w_ee, mut w_et, mut w_tt) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let (mut s_e, mut s_t) = (vec![0.0; n], vec![0.0; n]);
    for i in 0..n {
        let (m, f, z) = (lin.mu[i], lin.phi[i], data.z()[i]);
        let (psi, chi) = (es.psi[i], es.chi[i]);
        let v = m * (1.0 - m);
        let zz = z * (1.0 - z);
        let zeta2 = zeta_sq(m, z);
        // complete-data score: eta part a + b/W, tau part c - d/W
        let a = 1.0 - 2.0 * m;
        let b = f * f * v * (z - m) / zz;
        let c = 2.0 + f;
        let d = f * f * zeta2;
        // conditional expectation of the negative complete-data Hessian
        let h_ee = v * (2.0 + psi * f * f / zz * (v - (1.0 - 2.0 * m) * (z - m)));
        let h_tt = f * (2.0 * f * psi * zeta2 - 1.0);
        let h_et = -2.0 * psi * b;
        // conditional second moments of the score
        let ss_ee = a * a + 2.0 * a * b * psi + b * b * chi;
        let ss_tt = c * c - 2.0 * c * d * psi + d * d * chi;
        let ss_et = a * c - a * d * psi + b * c * psi - b * d * chi;
        let (me, mt) = (a + b * psi, c - d * psi);
        // Cross terms over i != k are (sum E s)(sum E s)^T minus the diagonal,
        // so each observation contributes E s_i E s_i^T back here.
        w_ee[i] = h_ee - ss_ee + me * me;
        w_tt[i] = h_tt - ss_tt + mt * mt;
        w_et[i] = h_et - ss_et + me * mt;
        s_e[i] = me;
        s_t[i] = mt;
    }
    let total = layout.chain_grad(data, &s_e, &s_t);
    let mut info = layout.chain_hess(data, &w_ee, &w_et, &w_tt) - &total * total.transpose();
    crate::linalg::symmetrize(&mut info);
    info
}

/// Louis observed information at `theta`, and whether it is positive
/// definite.
pub fn louis_information(theta: &Theta, data: &Dataset) -> Result<(DMatrix<f64>, bool)> {
    let lin = eval_full(theta, data)?;
    let info = louis_lin(data, Layout::Full, &lin);
    let pd = info.clone().cholesky().is_some();
    Ok((info, pd))
}

pub(crate) fn standard_errors(info: &DMatrix<f64>) -> (Vec<f64>, bool) {
    match symmetric_inverse(info) {
        Some((inv, pd)) => (
            inv.diagonal()
                .iter()
                .map(|&d| if d > 0.0 { d.sqrt() } else { f64::NAN })
                .collect(),
            pd,
        ),
        None => (vec![f64::NAN; info.nrows()], false),
    }
}

/// Bessel regression by EM with default options.
pub fn fit_bessel_em(data: &Dataset, init: Option<&Theta>) -> Result<FitResult> {
    fit_bessel_em_with(data, init, &EmOptions::default())
}

pub fn fit_bessel_em_with(data: &Dataset, init: Option<&Theta>, opts: &EmOptions) -> Result<FitResult> {
    let theta0 = match init {
        Some(t) => {
            check_dims(t, data)?;
            t.clone()
        }
        None => default_init(data, Family::Bessel)?,
    };
    let out = run_em(data, Layout::Full, theta0.to_vector(), opts)?;
    let theta = Theta::from_vector(&out.params, data.p());
    let lin = Layout::Full.eval(data, &out.params).expect("validated in EM");
    let information = louis_lin(data, Layout::Full, &lin);
    let (std_errors, information_pd) = standard_errors(&information);
    Ok(FitResult {
        model: Family::Bessel,
        theta,
        std_errors,
        information,
        information_pd,
        loglik: *out.trace.last().expect("non-empty trace"),
        iterations: out.iterations,
        loglik_trace: out.trace,
        converged: out.converged,
        names: data.coef_names(),
    })
}

/// EM over the precision coefficients only, with the means frozen.
pub(crate) fn fit_bessel_lambda(
    data: &Dataset,
    mu: &[f64],
    lambda0: DVector<f64>,
    opts: &EmOptions,
) -> Result<(DVector<f64>, bool)> {
    let out = run_em(data, Layout::FixedMean(mu), lambda0, opts)?;
    Ok((out.params, out.converged))
}
