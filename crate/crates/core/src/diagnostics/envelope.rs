use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use super::residuals::{residuals, ResidualKind};
use crate::distributions::Family;
use crate::error::{Error, Result};
use crate::regression::{fit, Dataset, FitResult, Theta};
use crate::rng::{stream, Purpose};

#[derive(Debug, Clone, Copy)]
pub struct EnvelopeOptions {
    pub replications: usize,
    pub coverage: f64,
    pub seed: u64,
}

impl EnvelopeOptions {
    pub fn new(seed: u64) -> Self {
        Self {
            replications: 1000,
            coverage: 0.95,
            seed,
        }
    }
}

/// Simulated envelope for sorted residuals.
#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeResult {
    pub model: Family,
    pub kind: ResidualKind,
    pub sorted_observed: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub band_mean: Vec<f64>,
    /// Standard normal quantiles at `(i - 3/8) / (n + 1/4)`.
    pub theoretical_quantiles: Vec<f64>,
    /// Percentage of sorted observed residuals inside `[lower, upper]`.
    pub coverage_pct: f64,
    /// Replications that produced residuals.
    pub replications: usize,
    /// Replications dropped after a failed refit and a failed retry.
    pub dropped: usize,
    /// 1-based rows of the column-sorted matrix used as band limits.
    pub band_rows: (usize, usize),
}

fn refit(model: Family, data: &Dataset, init: &Theta, rng: &mut impl Rng) -> Option<FitResult> {
    if let Ok(f) = fit(model, data, Some(init)) {
        if f.converged {
            return Some(f);
        }
    }
    let mut v = init.to_vector();
    for e in v.iter_mut() {
        let j: f64 = rng.sample(StandardNormal);
        *e += 0.1 * j;
    }
    let jittered = Theta::from_vector(&v, init.kappa.len());
    fit(model, data, Some(&jittered)).ok().filter(|f| f.converged)
}

/// Envelope for a single residual kind.
pub fn simulated_envelope(
    fitted: &FitResult,
    data: &Dataset,
    kind: ResidualKind,
    opts: &EnvelopeOptions,
) -> Result<EnvelopeResult> {
    Ok(simulated_envelopes(fitted, data, &[kind], opts)?.remove(0))
}

/// Envelopes for several residual kinds built from the same simulated
/// datasets and refits.
///
/// Replication `b` simulates responses from the fitted model with the
/// original covariates, refits the model (starting from the fitted
/// coefficients, retrying once from a jittered start) and sorts its
/// residuals. The replications form the rows of a `B x n` matrix whose
/// columns are then sorted; the band limits are rows
/// `ceil(B (1 - coverage) / 2)` and `floor(B (1 + coverage) / 2)`.
pub fn simulated_envelopes(
    fitted: &FitResult,
    data: &Dataset,
    kinds: &[ResidualKind],
    opts: &EnvelopeOptions,
) -> Result<Vec<EnvelopeResult>> {
    if kinds.is_empty() {
        return Err(Error::Config("no residual kind requested".into()));
    }
    if opts.replications == 0 {
        return Err(Error::Config("envelope needs at least one replication".into()));
    }
    if !(opts.coverage > 0.0 && opts.coverage < 1.0) {
        return Err(Error::Config(format!("coverage {} must lie in (0,1)", opts.coverage)));
    }
    let model = fitted.model;
    let mu = fitted.mu(data);
    let phi = fitted.phi(data);
    let n = data.n();

    let rows: Vec<Option<Vec<Vec<f64>>>> = (0..opts.replications)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(opts.seed, b as u64, Purpose::Response);
            let z: Vec<f64> = (0..n)
                .map(|i| model.sample(mu[i], phi[i], &mut rng).expect("fitted parameters are valid"))
                .collect();
            let sim = data.with_response(z).ok()?;
            let mut jrng = stream(opts.seed, b as u64, Purpose::Jitter);
            let f = refit(model, &sim, &fitted.theta, &mut jrng)?;
            kinds
                .iter()
                .map(|&k| {
                    let mut r = residuals(&f, &sim, k).ok()?;
                    if r.iter().any(|e| !e.is_finite()) {
                        return None;
                    }
                    r.sort_by(f64::total_cmp);
                    Some(r)
                })
                .collect()
        })
        .collect();
    let kept: Vec<Vec<Vec<f64>>> = rows.into_iter().flatten().collect();
    let survivors = kept.len();
    if survivors == 0 {
        return Err(Error::Solver("every envelope refit failed".into()));
    }
    let dropped = opts.replications - survivors;
    let lo_row = ((survivors as f64 * (1.0 - opts.coverage) / 2.0).ceil() as usize).clamp(1, survivors);
    let hi_row = ((survivors as f64 * (1.0 + opts.coverage) / 2.0).floor() as usize).clamp(lo_row, survivors);
    let normal = Normal::standard();
    let theoretical: Vec<f64> = (1..=n)
        .map(|i| normal.inverse_cdf((i as f64 - 0.375) / (n as f64 + 0.25)))
        .collect();

    kinds
        .iter()
        .enumerate()
        .map(|(k, &kind)| {
            let mut observed = residuals(fitted, data, kind)?;
            observed.sort_by(f64::total_cmp);
            let mut lower = Vec::with_capacity(n);
            let mut upper = Vec::with_capacity(n);
            let mut mean = Vec::with_capacity(n);
            let mut column = vec![0.0; survivors];
            for i in 0..n {
                for (b, rep) in kept.iter().enumerate() {
                    column[b] = rep[k][i];
                }
                column.sort_by(f64::total_cmp);
                lower.push(column[lo_row - 1]);
                upper.push(column[hi_row - 1]);
                mean.push(column.iter().sum::<f64>() / survivors as f64);
            }
            let inside = observed
                .iter()
                .zip(lower.iter().zip(&upper))
                .filter(|(o, (l, u))| *o >= *l && *o <= *u)
                .count();
            Ok(EnvelopeResult {
                model,
                kind,
                sorted_observed: observed,
                lower,
                upper,
                band_mean: mean,
                theoretical_quantiles: theoretical.clone(),
                coverage_pct: 100.0 * inside as f64 / n as f64,
                replications: survivors,
                dropped,
                band_rows: (lo_row, hi_row),
            })
        })
        .collect()
}
