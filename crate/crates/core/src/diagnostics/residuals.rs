use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::Result;
use crate::regression::{Dataset, FitResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResidualKind {
    Pearson,
    Quantile,
}

impl std::str::FromStr for ResidualKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pearson" => Ok(ResidualKind::Pearson),
            "quantile" => Ok(ResidualKind::Quantile),
            other => Err(crate::Error::Config(format!("unknown residual kind `{other}`"))),
        }
    }
}

/// `(z_i - mu_i) / sqrt(mu_i (1 - mu_i) g(phi_i))` under the fitted model.
pub fn pearson_residuals(fit: &FitResult, data: &Dataset) -> Vec<f64> {
    let mu = fit.mu(data);
    let g = fit.g_values(data);
    data.z()
        .iter()
        .zip(mu.iter().zip(&g))
        .map(|(&z, (&m, &gi))| (z - m) / (m * (1.0 - m) * gi).sqrt())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantileResiduals {
    pub values: Vec<f64>,
    /// Fitted CDF values pushed into `[1e-12, 1 - 1e-12]` before inversion.
    pub clamped: usize,
}

const CDF_CLAMP: f64 = 1e-12;

/// `Phi^{-1}(F(z_i; mu_i, phi_i))` with the fitted model's CDF.
pub fn quantile_residuals(fit: &FitResult, data: &Dataset) -> Result<QuantileResiduals> {
    let mu = fit.mu(data);
    let phi = fit.phi(data);
    let normal = Normal::standard();
    let mut clamped = 0;
    let mut values = Vec::with_capacity(data.n());
    for (i, &z) in data.z().iter().enumerate() {
        let u = fit.model.cdf(mu[i], phi[i], z)?;
        let c = u.clamp(CDF_CLAMP, 1.0 - CDF_CLAMP);
        if c != u {
            clamped += 1;
        }
        values.push(normal.inverse_cdf(c));
    }
    Ok(QuantileResiduals { values, clamped })
}

/// Per-observation `|z - E Z| + |z^2 - E Z^2|` under the fitted model.
pub fn fsmd_terms(fit: &FitResult, data: &Dataset) -> Vec<f64> {
    let mu = fit.mu(data);
    let phi = fit.phi(data);
    data.z()
        .iter()
        .enumerate()
        .map(|(i, &z)| {
            let m2 = fit.model.second_moment(mu[i], phi[i]).expect("fitted parameters are valid");
            (z - mu[i]).abs() + (z * z - m2).abs()
        })
        .collect()
}

pub(crate) fn residuals(fit: &FitResult, data: &Dataset, kind: ResidualKind) -> Result<Vec<f64>> {
    match kind {
        ResidualKind::Pearson => Ok(pearson_residuals(fit, data)),
        ResidualKind::Quantile => Ok(quantile_residuals(fit, data)?.values),
    }
}
