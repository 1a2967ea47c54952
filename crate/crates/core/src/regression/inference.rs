use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erfc;

use super::FitResult;
use crate::error::{Error, Result};
use crate::linalg::{symmetric_inverse, weakest_column};

/// One row of a Wald table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaldRow {
    pub name: String,
    pub estimate: f64,
    pub se: f64,
    pub z: f64,
    pub p_value: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl WaldRow {
    /// Wald statistic, two-sided normal p-value and interval at `level`.
    pub fn new(name: impl Into<String>, estimate: f64, se: f64, level: f64) -> Result<Self> {
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::Domain(format!("confidence level must lie in (0,1), got {level}")));
        }
        let zq = Normal::standard().inverse_cdf(0.5 + level / 2.0);
        let z = estimate / se;
        Ok(Self {
            name: name.into(),
            estimate,
            se,
            z,
            p_value: erfc(z.abs() / std::f64::consts::SQRT_2),
            ci_lo: estimate - zq * se,
            ci_hi: estimate + zq * se,
        })
    }
}

/// Wald table for every coefficient of `fit`.
pub fn wald_inference(fit: &FitResult, level: f64) -> Result<Vec<WaldRow>> {
    let info = &fit.information;
    let singular = || Error::SingularInformation {
        column: fit.names[weakest_column(info)].clone(),
    };
    let (inv, _) = symmetric_inverse(info).ok_or_else(singular)?;
    let estimates = fit.theta.to_vector();
    (0..estimates.len())
        .map(|j| {
            let var = inv[(j, j)];
            if !(var > 0.0) || !var.is_finite() {
                return Err(Error::SingularInformation {
                    column: fit.names[j].clone(),
                });
            }
            WaldRow::new(fit.names[j].clone(), estimates[j], var.sqrt(), level)
        })
        .collect()
}
