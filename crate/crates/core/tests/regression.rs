mod common;

use common::suites;

use besselreg::regression::{
    e_step, fit, fit_beta_ml, loglik_bessel, loglik_beta, q_score, score_beta, wald_inference,
};
use besselreg::{Dataset, Family, Theta};
use common::random_dataset;

#[test]
fn q_score_matches_finite_differences() {
    suites::q_score_matches_finite_differences();
}

#[test]
fn q_score_equals_loglik_gradient_at_expansion_point() {
    let data = random_dataset(8, 150, [-0.3, 0.9], [2.0, -0.6], Family::Bessel);
    let theta = Theta::new(vec![-0.2, 0.7], vec![1.7, -0.2]);
    let psi = e_step(&theta, &data).unwrap().psi;
    let g = q_score(&theta, &psi, &data).unwrap();
    let v = theta.to_vector();
    for j in 0..v.len() {
        let h = 1e-5;
        let mut up = v.clone();
        let mut dn = v.clone();
        up[j] += h;
        dn[j] -= h;
        let fd = (loglik_bessel(&Theta::from_vector(&up, 2), &data).unwrap()
            - loglik_bessel(&Theta::from_vector(&dn, 2), &data).unwrap())
            / (2.0 * h);
        assert!((fd - g[j]).abs() < 1e-5 * g[j].abs().max(1.0), "component {j}");
    }
}

#[test]
fn em_loglik_never_decreases() {
    suites::em_loglik_never_decreases();
}

#[test]
fn louis_information_matches_numerical_hessian() {
    suites::louis_information_matches_numerical_hessian();
}

#[test]
fn beta_score_and_information() {
    let data = random_dataset(5, 300, [-0.4, 0.6], [2.5, -1.0], Family::Beta);
    let theta = Theta::new(vec![-0.3, 0.5], vec![2.2, -0.7]);
    let g = score_beta(&theta, &data).unwrap();
    let v = theta.to_vector();
    for j in 0..v.len() {
        let h = 1e-6;
        let mut up = v.clone();
        let mut dn = v.clone();
        up[j] += h;
        dn[j] -= h;
        let fd = (loglik_beta(&Theta::from_vector(&up, 2), &data).unwrap()
            - loglik_beta(&Theta::from_vector(&dn, 2), &data).unwrap())
            / (2.0 * h);
        assert!((fd - g[j]).abs() < 1e-5 * g[j].abs().max(1.0));
    }
    let f = fit_beta_ml(&data, None).unwrap();
    assert!(f.converged && f.information_pd);
    assert!(score_beta(&f.theta, &data).unwrap().amax() < 1e-4);
}

fn reflected(data: &Dataset) -> Dataset {
    data.with_response(data.z().iter().map(|z| 1.0 - z).collect()).unwrap()
}

#[test]
fn relabeling_symmetry() {
    // Z -> 1 - Z maps (kappa, lambda) to (-kappa, lambda) for both families.
    for fam in [Family::Bessel, Family::Beta] {
        let data = random_dataset(21, 200, [0.7, -0.5], [1.8, 0.4], fam);
        let a = fit(fam, &data, None).unwrap();
        let b = fit(fam, &reflected(&data), None).unwrap();
        for (x, y) in a.theta.kappa.iter().zip(&b.theta.kappa) {
            assert!((x + y).abs() < 1e-4, "{fam}: {x} vs {y}");
        }
        for (x, y) in a.theta.lambda.iter().zip(&b.theta.lambda) {
            assert!((x - y).abs() < 1e-4, "{fam}: {x} vs {y}");
        }
        for (x, y) in a.std_errors.iter().zip(&b.std_errors) {
            assert!((x - y).abs() < 1e-3 * x, "{fam} se");
        }
        assert!((a.loglik - b.loglik).abs() < 1e-6 * a.loglik.abs());
    }
}

#[test]
fn covariate_scaling_equivariance() {
    let data = random_dataset(33, 200, [0.2, 1.1], [1.5, -0.5], Family::Bessel);
    let c = 4.0;
    let mut x = data.x().clone();
    x.column_mut(1).scale_mut(c);
    let scaled = Dataset::new(data.z().to_vec(), x, data.v().clone(), data.x_names().to_vec(), data.v_names().to_vec())
        .unwrap();
    for fam in [Family::Bessel, Family::Beta] {
        let a = fit(fam, &data, None).unwrap();
        let b = fit(fam, &scaled, None).unwrap();
        assert!((a.theta.kappa[1] - c * b.theta.kappa[1]).abs() < 1e-4, "{fam} slope");
        assert!((a.std_errors[1] - c * b.std_errors[1]).abs() < 1e-3 * a.std_errors[1], "{fam} se");
        assert!((a.theta.kappa[0] - b.theta.kappa[0]).abs() < 1e-4);
    }
}

#[test]
fn wald_table_shape() {
    let data = random_dataset(2, 150, [0.1, 0.5], [2.0, 0.3], Family::Beta);
    let f = fit(Family::Beta, &data, None).unwrap();
    let rows = wald_inference(&f, 0.95).unwrap();
    assert_eq!(rows.len(), 4);
    for r in rows {
        assert!(r.ci_lo < r.estimate && r.estimate < r.ci_hi);
        assert!((0.0..=1.0).contains(&r.p_value));
    }
    assert!(wald_inference(&f, 1.5).is_err());
}
