//! Discrimination between the bessel and beta regressions (DBB).
//!
//! The means are estimated once by quasi-likelihood, which needs no
//! distributional assumption. With those means frozen the precision
//! coefficients are re-estimated under each model, and the model whose
//! implied second moment is closest to the sample mean of `z^2` wins.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::distributions::Family;
use crate::error::{Error, Result};
use crate::linalg::logistic;
use crate::regression::{default_init, fit_bessel_lambda, fit_beta_lambda, Dataset, EmOptions};

/// Weight applied to `(z_i - mu_i) x_i` in the quasi-likelihood equation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuasiWeight {
    /// `sum (z_i - mu_i) x_i = 0`, the quasi-score for variance
    /// `mu (1 - mu)` under the logit link.
    #[default]
    Canonical,
    /// `sum (z_i - mu_i) sqrt(mu_i (1 - mu_i)) x_i = 0`.
    SqrtVariance,
}

fn means(kappa: &DVector<f64>, data: &Dataset) -> Vec<f64> {
    (data.x() * kappa).iter().map(|&e| logistic(e)).collect()
}

fn score_at(kappa: &DVector<f64>, data: &Dataset, weight: QuasiWeight) -> DVector<f64> {
    let mu = means(kappa, data);
    let r = DVector::from_iterator(
        data.n(),
        data.z().iter().zip(&mu).map(|(&z, &m)| {
            let w = match weight {
                QuasiWeight::Canonical => 1.0,
                QuasiWeight::SqrtVariance => (m * (1.0 - m)).sqrt(),
            };
            (z - m) * w
        }),
    );
    data.x().tr_mul(&r)
}

/// Quasi-score `U(kappa)`.
pub fn quasi_score(kappa: &[f64], data: &Dataset, weight: QuasiWeight) -> Result<DVector<f64>> {
    if kappa.len() != data.p() {
        return Err(Error::InvalidData("kappa length must equal p".into()));
    }
    Ok(score_at(&DVector::from_column_slice(kappa), data, weight))
}

/// Root of the quasi-likelihood equation.
#[derive(Debug, Clone, Serialize)]
pub struct QlSolution {
    pub kappa: Vec<f64>,
    pub mu: Vec<f64>,
    /// `||U(kappa)||_inf` at the returned root.
    pub residual: f64,
    pub iterations: usize,
}

const QL_MAX_ITER: usize = 200;

fn newton(data: &Dataset, weight: QuasiWeight, start: DVector<f64>) -> (DVector<f64>, f64, usize) {
    let p = data.p();
    let tol = 1e-10 * data.n() as f64;
    let mut k = start;
    let mut u = score_at(&k, data, weight);
    let mut res = u.amax();
    let mut it = 0;
    while res > tol && it < QL_MAX_ITER {
        it += 1;
        let mut jac = nalgebra::DMatrix::zeros(p, p);
        for j in 0..p {
            let h = 1e-6 * k[j].abs().max(1.0);
            let mut kp = k.clone();
            let mut km = k.clone();
            kp[j] += h;
            km[j] -= h;
            jac.set_column(j, &((score_at(&kp, data, weight) - score_at(&km, data, weight)) / (2.0 * h)));
        }
        let Some(delta) = jac.lu().solve(&(-&u)) else { break };
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..40 {
            let kn = &k + t * &delta;
            let un = score_at(&kn, data, weight);
            let rn = un.amax();
            if rn.is_finite() && rn < res {
                k = kn;
                u = un;
                res = rn;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    (k, res, it)
}

/// Solve `U(kappa) = 0` by damped Newton with a finite-difference Jacobian,
/// to `||U||_inf <= 1e-10 n`. Starts from the least-squares fit of
/// `logit(z)`, then from a constant-mean start if that fails.
pub fn solve_ql(data: &Dataset, weight: QuasiWeight) -> Result<QlSolution> {
    let tol = 1e-10 * data.n() as f64;
    let first = DVector::from_vec(default_init(data, Family::Beta)?.kappa);
    let mut best = newton(data, weight, first);
    if best.1 > tol {
        let zbar = data.z().iter().sum::<f64>() / data.n() as f64;
        let mut start = DVector::zeros(data.p());
        if let Some(j) = (0..data.p()).find(|&j| data.x().column(j).iter().all(|&e| e == 1.0)) {
            start[j] = crate::linalg::logit(zbar);
        }
        let retry = newton(data, weight, start);
        if retry.1 < best.1 {
            best = retry;
        }
    }
    let (k, res, it) = best;
    if !(res <= tol) {
        return Err(Error::Solver(format!(
            "quasi-likelihood Newton did not converge (||U||_inf = {res:.3e})"
        )));
    }
    Ok(QlSolution {
        mu: means(&k, data),
        kappa: k.iter().copied().collect(),
        residual: res,
        iterations: it,
    })
}

/// Precision fit with the means held fixed.
#[derive(Debug, Clone, Serialize)]
pub struct PrecisionFit {
    pub model: Family,
    pub lambda: Vec<f64>,
    pub phi: Vec<f64>,
    pub converged: bool,
}

/// Maximize the model likelihood over `lambda` alone with `mu_i` frozen
/// (EM over the precision block for bessel, direct ML for beta).
pub fn fit_precision_fixed_mu(data: &Dataset, mu: &[f64], model: Family) -> Result<PrecisionFit> {
    if mu.len() != data.n() {
        return Err(Error::InvalidData("mean vector length must equal n".into()));
    }
    if mu.iter().any(|&m| !(m > 0.0 && m < 1.0)) {
        return Err(Error::Domain("frozen means must lie in (0,1)".into()));
    }
    let lambda0 = DVector::from_vec(default_init(data, model)?.lambda);
    let (lambda, converged) = match model {
        Family::Bessel => fit_bessel_lambda(data, mu, lambda0, &EmOptions::default())?,
        Family::Beta => fit_beta_lambda(data, mu, lambda0)?,
    };
    let phi = (data.v() * &lambda).iter().map(|t| t.exp()).collect();
    Ok(PrecisionFit {
        model,
        lambda: lambda.iter().copied().collect(),
        phi,
        converged,
    })
}

/// Outcome of the DBB test. The `d_*` entries and precision fits are absent
/// when the pre-check already selects beta.
#[derive(Debug, Clone, Serialize)]
pub struct DbbReport {
    /// `T = sum z_i^2 / n`.
    pub mean_sq_response: f64,
    /// `B = (1/n) sum [mu_i (1 - mu_i) / 2 + mu_i^2]`.
    pub variance_bound: f64,
    /// `n B`.
    pub variance_bound_sum: f64,
    pub d_bessel: Option<f64>,
    pub d_beta: Option<f64>,
    pub decision: Family,
    pub weight: QuasiWeight,
    pub kappa_tilde: Vec<f64>,
    pub mu_tilde: Vec<f64>,
    pub bessel_precision: Option<PrecisionFit>,
    pub beta_precision: Option<PrecisionFit>,
}

/// Decision rule: beta when `t >= bound`; otherwise the smaller absolute
/// discrepancy, bessel on ties.
pub fn decide(mean_sq: f64, bound: f64, d_bessel: Option<f64>, d_beta: Option<f64>) -> Family {
    if mean_sq >= bound {
        return Family::Beta;
    }
    match (d_bessel, d_beta) {
        (Some(a), Some(b)) if a.abs() > b.abs() => Family::Beta,
        _ => Family::Bessel,
    }
}

fn discrepancy(mean_sq: f64, mu: &[f64], phi: &[f64], model: Family) -> Result<f64> {
    let mut s = 0.0;
    for (&m, &f) in mu.iter().zip(phi) {
        s += model.second_moment(m, f)?;
    }
    Ok(mean_sq - s / mu.len() as f64)
}

pub fn dbb_test(data: &Dataset) -> Result<DbbReport> {
    dbb_test_with(data, QuasiWeight::default())
}

pub fn dbb_test_with(data: &Dataset, weight: QuasiWeight) -> Result<DbbReport> {
    let n = data.n() as f64;
    let ql = solve_ql(data, weight)?;
    let mean_sq = data.z().iter().map(|z| z * z).sum::<f64>() / n;
    let bound_sum: f64 = ql.mu.iter().map(|&m| 0.5 * m * (1.0 - m) + m * m).sum();
    let bound = bound_sum / n;
    let mut report = DbbReport {
        mean_sq_response: mean_sq,
        variance_bound: bound,
        variance_bound_sum: bound_sum,
        d_bessel: None,
        d_beta: None,
        decision: Family::Beta,
        weight,
        kappa_tilde: ql.kappa,
        mu_tilde: ql.mu,
        bessel_precision: None,
        beta_precision: None,
    };
    if mean_sq >= bound {
        return Ok(report);
    }
    let (pb, pt) = rayon::join(
        || fit_precision_fixed_mu(data, &report.mu_tilde, Family::Bessel),
        || fit_precision_fixed_mu(data, &report.mu_tilde, Family::Beta),
    );
    let (pb, pt) = (pb?, pt?);
    let db = discrepancy(mean_sq, &report.mu_tilde, &pb.phi, Family::Bessel)?;
    let dt = discrepancy(mean_sq, &report.mu_tilde, &pt.phi, Family::Beta)?;
    report.d_bessel = Some(db);
    report.d_beta = Some(dt);
    report.decision = decide(mean_sq, bound, Some(db), Some(dt));
    report.bessel_precision = Some(pb);
    report.beta_precision = Some(pt);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tie_goes_to_bessel_and_precheck_dominates() {
        assert_eq!(decide(0.1, 0.2, Some(0.01), Some(-0.01)), Family::Bessel);
        assert_eq!(decide(0.1, 0.2, Some(0.02), Some(0.01)), Family::Beta);
        assert_eq!(decide(0.1, 0.2, Some(0.001), Some(0.01)), Family::Bessel);
        assert_eq!(decide(0.3, 0.2, Some(0.0), Some(1.0)), Family::Beta);
        assert_eq!(decide(0.2, 0.2, None, None), Family::Beta);
    }

    #[test]
    fn intercept_only_root_is_the_sample_mean() {
        let z = vec![0.1, 0.25, 0.3, 0.45, 0.6, 0.2];
        let data = Dataset::intercept_only(z.clone()).unwrap();
        let zbar = z.iter().sum::<f64>() / z.len() as f64;
        for w in [QuasiWeight::Canonical, QuasiWeight::SqrtVariance] {
            let s = solve_ql(&data, w).unwrap();
            assert!((s.mu[0] - zbar).abs() < 1e-10);
            assert!((s.kappa[0] - crate::linalg::logit(zbar)).abs() < 1e-9);
        }
    }

    #[test]
    fn precheck_report_has_no_discrepancies() {
        // Mass near both ends: the sample second moment exceeds the bound.
        let z = vec![0.02, 0.97, 0.03, 0.98, 0.01, 0.99, 0.05, 0.95];
        let data = Dataset::intercept_only(z).unwrap();
        let r = dbb_test(&data).unwrap();
        assert!(r.mean_sq_response >= r.variance_bound);
        assert_eq!(r.decision, Family::Beta);
        assert!(r.d_bessel.is_none() && r.d_beta.is_none());
    }
}
