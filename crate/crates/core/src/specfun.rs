//! Special functions: exponentially scaled modified Bessel functions of the
//! second kind for integer orders 0..=3, and the exponential integral E1.
//!
//! `K_0` and `K_1` use their ascending series (with the logarithmic term) for
//! `x <= 2` and Steed's continued fraction (Temme's CF2) for `x > 2`; the
//! latter yields `e^x K_0(x)` and `e^x K_1(x)` directly. Higher orders follow
//! from the forward recurrence `K_{n+1} = K_{n-1} + (2n/x) K_n`, which is
//! stable for `K`.

use std::f64::consts::PI;

use crate::error::{domain, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const SERIES_CUTOFF: f64 = 2.0;
const MAX_TERMS: usize = 10_000;

/// Scaled values `e^x K_n(x)` for `n = 0, 1, 2, 3`.
///
/// The caller guarantees `x > 0` and finite.
pub(crate) fn bessel_k_scaled_all(x: f64) -> [f64; 4] {
    let (k0, k1) = if x <= SERIES_CUTOFF {
        let (k0, k1) = k01_series(x);
        let ex = x.exp();
        (k0 * ex, k1 * ex)
    } else {
        k01_steed_scaled(x)
    };
    let k2 = k0 + 2.0 / x * k1;
    let k3 = k1 + 4.0 / x * k2;
    [k0, k1, k2, k3]
}

/// Unscaled `K_0(x)` and `K_1(x)` from the ascending series, `0 < x <= 2`.
fn k01_series(x: f64) -> (f64, f64) {
    let y = 0.25 * x * x;
    let log_half = (0.5 * x).ln();

    // I_0, I_1 and the digamma-weighted sums, accumulated together.
    // term0_k = y^k / (k!)^2, term1_k = y^k / (k! (k+1)!)
    let mut term0 = 1.0;
    let mut term1 = 1.0;
    let mut harmonic = 0.0; // H_k
    let mut i0 = 0.0;
    let mut i1_over = 0.0; // I_1(x) / (x/2)
    let mut sum0 = 0.0; // sum psi(k+1) term0_k
    let mut sum1 = 0.0; // sum [psi(k+1)+psi(k+2)] term1_k
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        let psi1 = harmonic - EULER_GAMMA;
        let psi2 = psi1 + 1.0 / (kf + 1.0);
        i0 += term0;
        i1_over += term1;
        sum0 += psi1 * term0;
        sum1 += (psi1 + psi2) * term1;
        if term0 < 1e-18 * i0 && term1 < 1e-18 * i1_over {
            break;
        }
        harmonic += 1.0 / (kf + 1.0);
        term0 *= y / ((kf + 1.0) * (kf + 1.0));
        term1 *= y / ((kf + 1.0) * (kf + 2.0));
    }
    let i1 = 0.5 * x * i1_over;
    let k0 = -log_half * i0 + sum0;
    let k1 = 1.0 / x + log_half * i1 - 0.25 * x * sum1;
    (k0, k1)
}

/// Scaled `e^x K_0(x)`, `e^x K_1(x)` by Steed's continued fraction, `x > 2`.
fn k01_steed_scaled(x: f64) -> (f64, f64) {
    // Order mu = 0, so a1 = 1/4.
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..MAX_TERMS {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let k0 = (PI / (2.0 * x)).sqrt() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

fn check_order(order: u32) -> Result<usize> {
    if order > 3 {
        return domain(format!("Bessel K order {order} unsupported (0..=3)"));
    }
    Ok(order as usize)
}

fn check_positive(x: f64, what: &str) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("{what} requires a positive finite argument, got {x}"));
    }
    Ok(())
}

/// Exponentially scaled modified Bessel function of the second kind,
/// `e^x K_order(x)`, for `order` in `0..=3` and `x > 0`.
pub fn bessel_k_scaled(order: u32, x: f64) -> Result<f64> {
    let n = check_order(order)?;
    check_positive(x, "bessel_k_scaled")?;
    Ok(bessel_k_scaled_all(x)[n])
}

/// `ln K_order(x)`, finite for every positive `x` that does not overflow the
/// scaled value (all `x >= 1e-8` for order 3).
pub fn log_bessel_k(order: u32, x: f64) -> Result<f64> {
    let n = check_order(order)?;
    check_positive(x, "log_bessel_k")?;
    Ok(bessel_k_scaled_all(x)[n].ln() - x)
}

/// Exponential integral `E_1(x) = ∫_1^∞ e^{-xu}/u du`, `x > 0`.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    check_positive(x, "exp_integral_e1")?;
    if x <= 1.0 {
        Ok(e1_series(x))
    } else {
        Ok(e1_cf_scaled(x) * (-x).exp())
    }
}

/// `e^x E_1(x)`, finite for all `x > 0`.
pub fn exp_integral_e1_scaled(x: f64) -> Result<f64> {
    check_positive(x, "exp_integral_e1_scaled")?;
    if x <= 1.0 {
        Ok(e1_series(x) * x.exp())
    } else {
        Ok(e1_cf_scaled(x))
    }
}

fn e1_series(x: f64) -> f64 {
    // E_1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
    let mut sum = 0.0;
    let mut fact = 1.0;
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        fact *= -x / kf;
        let del = fact / kf;
        sum += del;
        if del.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

/// Modified Lentz evaluation of the continued fraction for `e^x E_1(x)`.
fn e1_cf_scaled(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_TERMS {
        let fi = i as f64;
        let an = -fi * fi;
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}
