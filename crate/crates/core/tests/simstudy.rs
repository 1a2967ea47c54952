use besselreg::simstudy::{gen_dataset, generate, run_mc, CovariateScheme, Generator, McConfig};
use besselreg::Family;

fn intercept_only(generator: Generator, n: usize) -> McConfig {
    McConfig { true_kappa: vec![0.5], true_lambda: vec![1.0], ..McConfig::well_specified(generator, n, 1, 31) }
}

#[test]
fn generated_means_match_the_linear_predictor() {
    let target = 1.0 / (1.0 + (-0.5f64).exp());
    for g in [Generator::Bessel, Generator::Beta] {
        let d = gen_dataset(&intercept_only(g, 100_000), 0).unwrap();
        assert_eq!(d.x().ncols(), 1);
        let m = d.z().iter().sum::<f64>() / d.n() as f64;
        // sd of Z is below 0.5, so the mean has sd below 0.0016
        assert!((m - target).abs() < 0.005, "{g:?}: {m}");
    }
}

#[test]
fn contamination_rate_and_location() {
    let cfg = McConfig::contaminated(50_000, 1, 0.1, 3);
    let s = generate(&cfg, 0).unwrap();
    let k = s.contaminated.iter().filter(|c| **c).count();
    let frac = k as f64 / s.data.n() as f64;
    assert!((frac - 0.1).abs() < 0.005, "{frac}");
    let m = s.data.z().iter().zip(&s.contaminated).filter(|(_, c)| **c).map(|(z, _)| z).sum::<f64>() / k as f64;
    assert!((m - 0.2).abs() < 0.005, "{m}");
}

#[test]
fn mc_is_deterministic_across_thread_counts() {
    let cfg = McConfig { fit_models: vec![Family::Bessel, Family::Beta], run_dbb: true, ..McConfig::well_specified(Generator::Beta, 40, 12, 8) };
    let run = |t| {
        rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap().install(|| run_mc(&cfg).unwrap())
    };
    let (a, b) = (run(1), run(4));
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    for (x, y) in a.models.iter().zip(&b.models) {
        for (f, g) in x.fits.iter().zip(&y.fits) {
            assert_eq!(f.estimates, g.estimates);
        }
    }
}

#[test]
fn standard_errors_match_monte_carlo_spread() {
    let r = run_mc(&McConfig::well_specified(Generator::Bessel, 200, 400, 2024)).unwrap();
    let s = r.model(Family::Bessel).unwrap();
    assert_eq!(s.failures, 0);
    for j in 0..s.truth.len() {
        let ratio = s.mean_se[j] / s.mc_sd[j];
        assert!((ratio - 1.0).abs() < 0.15, "{}: se/sd {ratio}", s.names[j]);
        assert!((s.mean[j] - s.truth[j]).abs() < 0.05, "{}: mean {}", s.names[j], s.mean[j]);
    }
}

#[test]
fn wald_coverage_and_mean_at_moderate_n() {
    let r = run_mc(&McConfig::well_specified(Generator::Bessel, 500, 200, 2024)).unwrap();
    let s = r.model(Family::Bessel).unwrap();
    let avg = s.ci_coverage.iter().sum::<f64>() / s.ci_coverage.len() as f64;
    assert!((avg - 0.95).abs() < 0.03, "average coverage {avg}");
    for j in 0..3 {
        assert!((s.mean[j] - s.truth[j]).abs() < 0.02, "{}: {}", s.names[j], s.mean[j]);
    }
}

#[test]
fn covariate_scheme_does_not_shift_estimates() {
    let redraw = McConfig::well_specified(Generator::Bessel, 500, 100, 77);
    let fixed = McConfig { covariate_scheme: CovariateScheme::Fixed, ..redraw.clone() };
    let a = run_mc(&redraw).unwrap();
    let b = run_mc(&fixed).unwrap();
    let (a, b) = (a.model(Family::Bessel).unwrap(), b.model(Family::Bessel).unwrap());
    for j in 0..a.truth.len() {
        assert!((a.mean[j] - b.mean[j]).abs() < 0.05, "{}: {} vs {}", a.names[j], a.mean[j], b.mean[j]);
    }
}
