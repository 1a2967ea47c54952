//! Checks shared by the unit-level test targets and the acceptance report.

use super::{k_scaled_oracle, random_dataset, trapezoid};
use besselreg::cli::datasets::bodyfat_candidates;
use besselreg::dbb::{dbb_test, decide};
use besselreg::diagnostics::vif_select;
use besselreg::distributions::{bessel_logpdf, bessel_mean_var, sample_bessel, sample_beta, sample_ig};
use besselreg::optim::numerical_hessian;
use besselreg::regression::{e_step, fit_bessel_em, louis_information, q_function, q_score};
use besselreg::specfun::{bessel_k_scaled, log_bessel_k};
use besselreg::{BesselParams, BetaParams, Dataset, Family, Theta};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Named checks, each panicking on failure.
pub const ALL: &[(&str, fn())] = &[
    ("density normalization", bessel_density_integrates_to_one),
    ("EM ascent", em_loglik_never_decreases),
    ("Louis vs numerical Hessian", louis_information_matches_numerical_hessian),
    ("E-step vs GIG quadrature", e_step_matches_gig_quadrature),
    ("Bessel K oracle", bessel_k_matches_integral_representation),
    ("Bessel K recurrence", bessel_k_recurrence_and_derivative),
    ("Q-score vs finite differences", q_score_matches_finite_differences),
    ("sampler moments", sampler_moments_within_three_standard_errors),
    ("DBB tie and pre-check rules", dbb_rules),
    ("VIF on body measurements", vif_on_body_measurements),
];

const XS: [f64; 12] = [1e-3, 0.05, 0.3, 0.9, 1.5, 1.99, 2.0, 2.01, 3.7, 10.0, 55.0, 400.0];

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn density_mass(mu: f64, phi: f64) -> f64 {
    let p = BesselParams::new(mu, phi).unwrap();
    // z = logistic(s), dz = z (1 - z) ds
    let f = |s: f64| {
        let z = 1.0 / (1.0 + (-s).exp());
        if z <= 0.0 || z >= 1.0 {
            return 0.0;
        }
        bessel_logpdf(&p, z).unwrap().exp() * z * (1.0 - z)
    };
    trapezoid(f, -60.0, 60.0, 2e-3)
}

/// Conditional moments of W ~ GIG(a = 1, b, p = -1) by direct quadrature of
/// `w^{p-1} exp(-(a w + b / w) / 2)` on a log scale.
fn gig_inverse_moments(b: f64) -> (f64, f64) {
    let centre = b.sqrt().ln();
    let integ = |k: i32| {
        trapezoid(
            |s: f64| {
                let w = s.exp();
                // w^{p-1} dw = w^{-2} w ds; shift the exponent by sqrt(b)
                (-0.5 * (w + b / w) + b.sqrt()).exp() * w.powi(-1 - k)
            },
            centre - 40.0,
            centre + 40.0,
            1e-3,
        )
    };
    let m0 = integ(0);
    (integ(1) / m0, integ(2) / m0)
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}

fn rel_matrix(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm()
}

pub fn bessel_k_matches_integral_representation() {
    for &x in &XS {
        for nu in 0..=3u32 {
            let got = bessel_k_scaled(nu, x).unwrap();
            let want = k_scaled_oracle(nu as f64, x);
            assert!(rel(got, want) < 1e-9, "K_{nu}({x}): {got} vs {want}");
        }
    }
}

pub fn bessel_k_recurrence_and_derivative() {
    for &x in &XS {
        let k: Vec<f64> = (0..=3).map(|n| bessel_k_scaled(n, x).unwrap()).collect();
        for nu in 1..=2usize {
            let lhs = k[nu + 1] - k[nu - 1];
            let rhs = 2.0 * nu as f64 / x * k[nu];
            assert!(rel(lhs, rhs) < 1e-9, "recurrence nu={nu} x={x}");
        }
        // d/dx K_0 = -K_1, on the unscaled log scale: d ln K0 / dx = -K1/K0.
        let h = 1e-5 * x;
        let d = (log_bessel_k(0, x + h).unwrap() - log_bessel_k(0, x - h).unwrap()) / (2.0 * h);
        assert!(rel(d, -k[1] / k[0]) < 1e-6, "derivative at {x}");
    }
}

pub fn bessel_density_integrates_to_one() {
    for &mu in &[0.05, 0.2, 0.5, 0.77, 0.95] {
        for &phi in &[0.3, 1.0, 4.0, 20.0, 150.0] {
            let m = density_mass(mu, phi);
            assert!((m - 1.0).abs() < 1e-8, "mass {m} at mu={mu} phi={phi}");
        }
    }
}

pub fn e_step_matches_gig_quadrature() {
    let z = vec![0.02, 0.3, 0.5, 0.81, 0.999];
    let data = Dataset::intercept_only(z.clone()).unwrap();
    for &(k, l) in &[(0.3f64, 0.5f64), (-1.2, 2.0), (2.0, -0.7), (0.0, 4.0)] {
        let theta = Theta::new(vec![k], vec![l]);
        let es = e_step(&theta, &data).unwrap();
        let mu = 1.0 / (1.0 + (-k).exp());
        let phi = l.exp();
        for (i, &zi) in z.iter().enumerate() {
            let zeta2 = 1.0 + (zi - mu) * (zi - mu) / (zi * (1.0 - zi));
            let (psi, chi) = gig_inverse_moments(phi * phi * zeta2);
            assert!(rel(es.psi[i], psi) < 1e-8, "psi at z={zi}: {} vs {psi}", es.psi[i]);
            assert!(rel(es.chi[i], chi) < 1e-8, "chi at z={zi}: {} vs {chi}", es.chi[i]);
        }
    }
}

pub fn sampler_moments_within_three_standard_errors() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let n = 200_000;
    for &alpha in &[0.05, 1.0, 30.0] {
        let ys: Vec<f64> = (0..n).map(|_| sample_ig(alpha, &mut rng).unwrap()).collect();
        let (m, sd) = mean_sd(&ys);
        assert!((m - alpha).abs() < 3.0 * sd / (n as f64).sqrt(), "IG mean alpha={alpha}");
        // variance = alpha; check the second moment through its own standard error
        let sq: Vec<f64> = ys.iter().map(|y| (y - alpha).powi(2)).collect();
        let (v, vsd) = mean_sd(&sq);
        assert!((v - alpha).abs() < 3.0 * vsd / (n as f64).sqrt(), "IG variance alpha={alpha}");
    }
    for &(mu, phi) in &[(0.3, 1.5), (0.8, 20.0)] {
        let p = BesselParams::new(mu, phi).unwrap();
        let zs: Vec<f64> = (0..n).map(|_| sample_bessel(&p, &mut rng)).collect();
        let (m, sd) = mean_sd(&zs);
        let (_, var) = bessel_mean_var(&p);
        assert!((m - mu).abs() < 3.0 * sd / (n as f64).sqrt());
        let sq: Vec<f64> = zs.iter().map(|z| (z - mu).powi(2)).collect();
        let (v, vsd) = mean_sd(&sq);
        assert!((v - var).abs() < 3.0 * vsd / (n as f64).sqrt(), "bessel variance {v} vs {var}");
        let b = BetaParams::new(mu, phi).unwrap();
        let zs: Vec<f64> = (0..n).map(|_| sample_beta(&b, &mut rng)).collect();
        let (m, sd) = mean_sd(&zs);
        assert!((m - mu).abs() < 3.0 * sd / (n as f64).sqrt());
        let sq: Vec<f64> = zs.iter().map(|z| (z - mu).powi(2)).collect();
        let (v, vsd) = mean_sd(&sq);
        let bvar = mu * (1.0 - mu) / (1.0 + phi);
        assert!((v - bvar).abs() < 3.0 * vsd / (n as f64).sqrt(), "beta variance {v} vs {bvar}");
    }
}

pub fn q_score_matches_finite_differences() {
    let data = random_dataset(3, 120, [0.4, -1.1], [1.2, 0.8], Family::Bessel);
    let at = Theta::new(vec![0.2, -0.9], vec![1.0, 0.5]);
    let psi = e_step(&at, &data).unwrap().psi;
    let theta = Theta::new(vec![0.35, -1.2], vec![1.4, 0.6]);
    let g = q_score(&theta, &psi, &data).unwrap();
    let v = theta.to_vector();
    for j in 0..v.len() {
        let h = 1e-6 * v[j].abs().max(1.0);
        let mut up = v.clone();
        let mut dn = v.clone();
        up[j] += h;
        dn[j] -= h;
        let fd = (q_function(&Theta::from_vector(&up, 2), &psi, &data).unwrap()
            - q_function(&Theta::from_vector(&dn, 2), &psi, &data).unwrap())
            / (2.0 * h);
        assert!((fd - g[j]).abs() <= 1e-6 * g[j].abs().max(1.0), "component {j}: {fd} vs {}", g[j]);
    }
}

pub fn em_loglik_never_decreases() {
    for seed in 0..20 {
        let fam = if seed % 2 == 0 { Family::Bessel } else { Family::Beta };
        let data = random_dataset(100 + seed, 80, [0.5, -0.8], [1.5, 0.7], fam);
        let f = fit_bessel_em(&data, None).unwrap();
        assert!(f.loglik_trace.len() >= 2, "seed {seed}");
        for w in f.loglik_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-8, "seed {seed}: {} -> {}", w[0], w[1]);
        }
        assert!(f.converged, "seed {seed}");
    }
}

pub fn louis_information_matches_numerical_hessian() {
    let data = random_dataset(7, 500, [0.5, -1.0], [1.5, 1.0], Family::Bessel);
    let f = fit_bessel_em(&data, None).unwrap();
    assert!(f.converged);
    let (louis, pd) = louis_information(&f.theta, &data).unwrap();
    assert!(pd);
    let grad = |v: &DVector<f64>| {
        let t = Theta::from_vector(v, 2);
        let psi = e_step(&t, &data).unwrap().psi;
        q_score(&t, &psi, &data).unwrap()
    };
    let hess = -numerical_hessian(grad, &f.theta.to_vector(), 1e-5);
    let r = rel_matrix(&louis, &hess);
    assert!(r < 1e-3, "relative difference {r}\n{louis}\n{hess}");
}

pub fn dbb_rules() {
    assert_eq!(decide(0.2, 0.1, None, None), Family::Beta);
    assert_eq!(decide(0.1, 0.1, Some(0.0), Some(1.0)), Family::Beta);
    assert_eq!(decide(0.05, 0.1, Some(0.01), Some(-0.01)), Family::Bessel);
    assert_eq!(decide(0.05, 0.1, Some(0.02), Some(0.01)), Family::Beta);
    assert_eq!(decide(0.05, 0.1, Some(-0.001), Some(0.002)), Family::Bessel);

    // Responses near the boundary push T above the bound: beta without refits.
    let z: Vec<f64> = (0..40).map(|i| if i % 2 == 0 { 0.02 } else { 0.98 }).collect();
    let r = dbb_test(&Dataset::intercept_only(z).unwrap()).unwrap();
    assert!(r.mean_sq_response >= r.variance_bound);
    assert_eq!(r.decision, Family::Beta);
    assert!(r.d_bessel.is_none() && r.bessel_precision.is_none());
}

pub fn vif_on_body_measurements() {
    let (m, names) = bodyfat_candidates().unwrap();
    assert_eq!(m.shape(), (250, 13));
    let r = vif_select(&m, &names, 5.0).unwrap();
    let removed: Vec<&str> = r.removed.iter().map(|x| x.column.as_str()).collect();
    assert_eq!(removed, ["weight", "abdom", "hip"]);
    assert!(r.final_vif.iter().all(|v| *v < 5.0));
}
