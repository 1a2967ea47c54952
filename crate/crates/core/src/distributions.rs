//! The bessel (normalized inverse-Gaussian) and beta laws on (0,1) in the
//! mean-precision parameterization, the inverse-Gaussian building block, and
//! their samplers.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Result};
use crate::quadrature;
use crate::specfun::{bessel_k_scaled_all, exp_integral_e1_scaled};

/// Evaluations closer than this to 0 or 1 are clamped.
pub const UNIT_CLAMP: f64 = 1e-12;

/// The two response models compared throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Bessel,
    Beta,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Bessel => "bessel",
            Family::Beta => "beta",
        }
    }

    /// Variance scale: `Var(Z) = mu (1 - mu) g(phi)`.
    pub fn g(self, phi: f64) -> Result<f64> {
        match self {
            Family::Bessel => g_bessel(phi),
            Family::Beta => g_beta(phi),
        }
    }

    /// `E(Z^2) = mu (1 - mu) g(phi) + mu^2`.
    pub fn second_moment(self, mu: f64, phi: f64) -> Result<f64> {
        Ok(mu * (1.0 - mu) * self.g(phi)? + mu * mu)
    }

    pub fn logpdf(self, mu: f64, phi: f64, z: f64) -> Result<f64> {
        match self {
            Family::Bessel => bessel_logpdf(&BesselParams::new(mu, phi)?, z),
            Family::Beta => beta_logpdf(&BetaParams::new(mu, phi)?, z),
        }
    }

    pub fn cdf(self, mu: f64, phi: f64, z: f64) -> Result<f64> {
        match self {
            Family::Bessel => bessel_cdf(&BesselParams::new(mu, phi)?, z),
            Family::Beta => beta_cdf(&BetaParams::new(mu, phi)?, z),
        }
    }

    pub fn sample<R: Rng + ?Sized>(self, mu: f64, phi: f64, rng: &mut R) -> Result<f64> {
        match self {
            Family::Bessel => Ok(sample_bessel(&BesselParams::new(mu, phi)?, rng)),
            Family::Beta => Ok(sample_beta(&BetaParams::new(mu, phi)?, rng)),
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Family {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bessel" => Ok(Family::Bessel),
            "beta" => Ok(Family::Beta),
            other => Err(crate::Error::Config(format!("unknown model `{other}`"))),
        }
    }
}

fn check_mean_precision(mu: f64, phi: f64) -> Result<()> {
    if !(mu > 0.0 && mu < 1.0) {
        return domain(format!("mean must lie in (0,1), got {mu}"));
    }
    if !(phi > 0.0) || !phi.is_finite() {
        return domain(format!("precision must be positive and finite, got {phi}"));
    }
    Ok(())
}

/// Mean `mu` in (0,1) and precision `phi > 0` of a bessel law; the
/// inverse-Gaussian shapes are `mu phi` and `(1 - mu) phi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesselParams {
    pub mu: f64,
    pub phi: f64,
}

impl BesselParams {
    pub fn new(mu: f64, phi: f64) -> Result<Self> {
        check_mean_precision(mu, phi)?;
        Ok(Self { mu, phi })
    }

    pub fn alpha(&self) -> f64 {
        self.mu * self.phi
    }

    pub fn beta(&self) -> f64 {
        (1.0 - self.mu) * self.phi
    }
}

/// Beta law with shapes `mu phi` and `(1 - mu) phi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    pub mu: f64,
    pub phi: f64,
}

impl BetaParams {
    pub fn new(mu: f64, phi: f64) -> Result<Self> {
        check_mean_precision(mu, phi)?;
        Ok(Self { mu, phi })
    }

    pub fn shapes(&self) -> (f64, f64) {
        (self.mu * self.phi, (1.0 - self.mu) * self.phi)
    }
}

/// Validate `z` in (0,1) and clamp it to `[UNIT_CLAMP, 1 - UNIT_CLAMP]`.
/// The flag reports whether clamping happened.
pub fn clamp_unit(z: f64) -> Result<(f64, bool)> {
    if !(z > 0.0 && z < 1.0) {
        return domain(format!("response must lie strictly inside (0,1), got {z}"));
    }
    let c = z.clamp(UNIT_CLAMP, 1.0 - UNIT_CLAMP);
    Ok((c, c != z))
}

/// `zeta_mu(z) = sqrt(1 + (z - mu)^2 / (z (1 - z)))`.
pub fn zeta(mu: f64, z: f64) -> Result<f64> {
    if !(mu > 0.0 && mu < 1.0) {
        return domain(format!("mean must lie in (0,1), got {mu}"));
    }
    let (z, _) = clamp_unit(z)?;
    Ok(zeta_unchecked(mu, z))
}

#[inline]
pub(crate) fn zeta_unchecked(mu: f64, z: f64) -> f64 {
    let d = z - mu;
    (1.0 + d * d / (z * (1.0 - z))).sqrt()
}

/// Log-density of the bessel law for already-validated arguments.
#[inline]
pub(crate) fn bessel_logpdf_unchecked(mu: f64, phi: f64, z: f64) -> f64 {
    let zt = zeta_unchecked(mu, z);
    let arg = phi * zt;
    let k1s = bessel_k_scaled_all(arg)[1];
    mu.ln() + (1.0 - mu).ln() + phi.ln() + phi * (1.0 - zt) - PI.ln()
        - 1.5 * (z * (1.0 - z)).ln()
        - zt.ln()
        + k1s.ln()
}

/// Log-density of `Bessel(mu, phi)` at `z`.
pub fn bessel_logpdf(params: &BesselParams, z: f64) -> Result<f64> {
    let (z, _) = clamp_unit(z)?;
    Ok(bessel_logpdf_unchecked(params.mu, params.phi, z))
}

/// Same as [`bessel_logpdf`], also reporting whether `z` was clamped.
pub fn bessel_logpdf_flagged(params: &BesselParams, z: f64) -> Result<(f64, bool)> {
    let (z, clamped) = clamp_unit(z)?;
    Ok((bessel_logpdf_unchecked(params.mu, params.phi, z), clamped))
}

/// Distribution function of `Bessel(mu, phi)` by adaptive quadrature of the
/// density (absolute error below 1e-9). The shorter tail is integrated.
pub fn bessel_cdf(params: &BesselParams, z: f64) -> Result<f64> {
    let (z, _) = clamp_unit(z)?;
    let (mu, phi) = (params.mu, params.phi);
    let pdf = |t: f64| {
        if t <= 0.0 || t >= 1.0 {
            0.0
        } else {
            bessel_logpdf_unchecked(mu, phi, t).exp()
        }
    };
    let value = if z <= mu {
        quadrature::integrate(pdf, 0.0, z, &[], 1e-13, 1e-12).value
    } else {
        1.0 - quadrature::integrate(pdf, z, 1.0, &[], 1e-13, 1e-12).value
    };
    Ok(value.clamp(0.0, 1.0))
}

fn check_phi_nonneg(phi: f64) -> Result<()> {
    if !(phi >= 0.0) || !phi.is_finite() {
        return domain(format!("precision must be non-negative and finite, got {phi}"));
    }
    Ok(())
}

/// `g_bessel(phi) = (1 - phi + phi^2 e^phi E_1(phi)) / 2`, in (0, 1/2].
pub fn g_bessel(phi: f64) -> Result<f64> {
    check_phi_nonneg(phi)?;
    if phi == 0.0 {
        return Ok(0.5);
    }
    if phi <= 40.0 {
        let s = exp_integral_e1_scaled(phi)?;
        return Ok(0.5 * (1.0 - phi + phi * phi * s));
    }
    // 1 - phi + phi^2 e^phi E1(phi) = sum_{k>=2} (-1)^k k! phi^{1-k}
    let mut term = 2.0 / phi;
    let mut sum = term;
    let mut k = 2.0;
    loop {
        let next = -term * (k + 1.0) / phi;
        if next.abs() >= term.abs() || next.abs() < 1e-17 * sum.abs() {
            break;
        }
        sum += next;
        term = next;
        k += 1.0;
    }
    Ok(0.5 * sum)
}

/// `g_beta(phi) = 1 / (1 + phi)`.
pub fn g_beta(phi: f64) -> Result<f64> {
    check_phi_nonneg(phi)?;
    Ok(1.0 / (1.0 + phi))
}

/// Mean and variance of `Bessel(mu, phi)`.
pub fn bessel_mean_var(params: &BesselParams) -> (f64, f64) {
    let g = g_bessel(params.phi).expect("validated precision");
    (params.mu, params.mu * (1.0 - params.mu) * g)
}

/// Mean and variance of the mean-precision beta law.
pub fn beta_mean_var(params: &BetaParams) -> (f64, f64) {
    (params.mu, params.mu * (1.0 - params.mu) / (1.0 + params.phi))
}

/// Log-density `h(y)` of the inverse-Gaussian with mean = variance = `alpha`.
pub fn ig_logpdf(alpha: f64, y: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return domain(format!("IG shape must be positive, got {alpha}"));
    }
    if !(y > 0.0) {
        return domain(format!("IG support is y > 0, got {y}"));
    }
    Ok(alpha.ln() - 0.5 * (2.0 * PI).ln() - 1.5 * y.ln() - 0.5 * (alpha * alpha / y + y) + alpha)
}

/// Log-density of the inverse-Gaussian in the (mean, shape) parameterization.
pub fn ig_logpdf_mean_shape(mean: f64, shape: f64, y: f64) -> Result<f64> {
    if !(mean > 0.0 && shape > 0.0) {
        return domain("IG mean and shape must be positive");
    }
    if !(y > 0.0) {
        return domain(format!("IG support is y > 0, got {y}"));
    }
    let d = y - mean;
    Ok(0.5 * (shape / (2.0 * PI * y * y * y)).ln() - shape * d * d / (2.0 * mean * mean * y))
}

/// Draw from the inverse-Gaussian with mean = variance = `alpha`
/// (mean `alpha`, shape `alpha^2`) by the transformation-with-rejection
/// method of Michael, Schucany and Haas.
pub fn sample_ig<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return domain(format!("IG shape must be positive, got {alpha}"));
    }
    Ok(sample_ig_unchecked(alpha, rng))
}

fn sample_ig_unchecked<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let n: f64 = rng.sample(StandardNormal);
    let v = n * n;
    // Smaller root of the quadratic, written without cancellation:
    // x = alpha + v/2 - sqrt(4 alpha v + v^2)/2 = 4 alpha^2 v / (v + s)^2.
    let s = (v * v + 4.0 * alpha * v).sqrt();
    let x = if v == 0.0 {
        alpha
    } else {
        4.0 * alpha * alpha * v / ((v + s) * (v + s))
    };
    let u: f64 = rng.random();
    if u <= alpha / (alpha + x) {
        x
    } else {
        alpha * alpha / x
    }
}

/// Draw `Y1 / (Y1 + Y2)` with `Y1 ~ IG(mu phi)`, `Y2 ~ IG((1 - mu) phi)`.
pub fn sample_bessel<R: Rng + ?Sized>(params: &BesselParams, rng: &mut R) -> f64 {
    let y1 = sample_ig_unchecked(params.alpha(), rng);
    let y2 = sample_ig_unchecked(params.beta(), rng);
    y1 / (y1 + y2)
}

/// Log-density of the beta law with shapes `(mu phi, (1 - mu) phi)`.
pub fn beta_logpdf(params: &BetaParams, z: f64) -> Result<f64> {
    let (z, _) = clamp_unit(z)?;
    let (a, b) = params.shapes();
    Ok(beta_logpdf_unchecked(a, b, z))
}

#[inline]
pub(crate) fn beta_logpdf_unchecked(a: f64, b: f64, z: f64) -> f64 {
    (a - 1.0) * z.ln() + (b - 1.0) * (1.0 - z).ln() - ln_beta(a, b)
}

pub(crate) fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Regularized incomplete beta distribution function.
pub fn beta_cdf(params: &BetaParams, z: f64) -> Result<f64> {
    let (z, _) = clamp_unit(z)?;
    let (a, b) = params.shapes();
    Ok(beta_reg(a, b, z))
}

/// Draw from the mean-precision beta law as a ratio of two unit-scale gammas.
pub fn sample_beta<R: Rng + ?Sized>(params: &BetaParams, rng: &mut R) -> f64 {
    let (a, b) = params.shapes();
    let ga = Gamma::new(a, 1.0).expect("positive shape");
    let gb = Gamma::new(b, 1.0).expect("positive shape");
    let y1 = ga.sample(rng);
    let y2 = gb.sample(rng);
    y1 / (y1 + y2)
}
