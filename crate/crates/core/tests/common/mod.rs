#![allow(dead_code)]

pub mod suites;

use besselreg::linalg::logistic;
use besselreg::Dataset;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Trapezoid rule on `[lo, hi]` with step `h`. Spectrally accurate for
/// smooth integrands that decay to negligible values at both ends.
pub fn trapezoid<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, h: f64) -> f64 {
    let m = ((hi - lo) / h).ceil() as usize;
    let h = (hi - lo) / m as f64;
    let mut s = 0.5 * (f(lo) + f(hi));
    for k in 1..m {
        s += f(lo + k as f64 * h);
    }
    s * h
}

/// `K_nu(x) = ∫_0^∞ exp(-x cosh t) cosh(nu t) dt`, scaled by `e^x`.
pub fn k_scaled_oracle(nu: f64, x: f64) -> f64 {
    let f = |t: f64| (-x * (t.cosh() - 1.0)).exp() * (nu * t).cosh();
    let hi = ((60.0 / x) + 1.0).acosh() + 1.0;
    trapezoid(f, 0.0, hi, 1e-3)
}

/// `e^x E_1(x) = ∫ exp(-x e^s) e^s / (1 + e^s) ds` over the real line.
pub fn e1_scaled_oracle(x: f64) -> f64 {
    let f = |s: f64| {
        let u = s.exp();
        (-x * u).exp() * u / (1.0 + u)
    };
    trapezoid(f, -60.0, (80.0 / x).ln().max(1.0) + 1.0, 2e-3)
}

/// Random well-conditioned regression data: X = [1, U(-1,1)], V = [1, U(0,1)].
pub fn random_dataset(seed: u64, n: usize, kappa: [f64; 2], lambda: [f64; 2], family: besselreg::Family) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = DMatrix::from_fn(n, 2, |_, j| if j == 0 { 1.0 } else { rng.random_range(-1.0..1.0) });
    let v = DMatrix::from_fn(n, 2, |_, j| if j == 0 { 1.0 } else { rng.random_range(0.0..1.0) });
    let z = (0..n)
        .map(|i| {
            let mu = logistic(kappa[0] + kappa[1] * x[(i, 1)]);
            let phi = (lambda[0] + lambda[1] * v[(i, 1)]).exp();
            family.sample(mu, phi, &mut rng).unwrap().clamp(1e-12, 1.0 - 1e-12)
        })
        .collect();
    Dataset::new(
        z,
        x,
        v,
        vec!["(intercept)".into(), "x1".into()],
        vec!["(intercept)".into(), "v1".into()],
    )
    .unwrap()
}
