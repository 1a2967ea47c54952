//! Monte Carlo harness for regression simulations.
//!
//! Covariates follow a fixed recipe: an intercept followed by alternating
//! Bernoulli(0.5) and Uniform(-1, 1) columns. The mean and precision designs
//! are drawn separately; a precision design with a single coefficient is a
//! column of ones. Every replication draws from its own random streams, so a
//! report depends only on the configuration and never on the worker count.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dbb::dbb_test;
use crate::distributions::{Family, UNIT_CLAMP};
use crate::error::{Error, Result};
use crate::linalg::logistic;
use crate::regression::{fit, Dataset};
use crate::rng::{stream, Purpose};

/// Response generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    Bessel,
    Beta,
    BetaContaminated,
}

/// Whether covariates are drawn once or anew for every replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovariateScheme {
    #[default]
    Redraw,
    Fixed,
}

fn default_contamination_mu() -> f64 {
    0.2
}

fn default_contamination_phi() -> f64 {
    50.0
}

fn default_fit_models() -> Vec<Family> {
    vec![Family::Bessel]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub generator: Generator,
    pub n: usize,
    pub replications: usize,
    pub true_kappa: Vec<f64>,
    pub true_lambda: Vec<f64>,
    #[serde(default)]
    pub contamination_prob: f64,
    #[serde(default = "default_contamination_mu")]
    pub contamination_mu: f64,
    #[serde(default = "default_contamination_phi")]
    pub contamination_phi: f64,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub covariate_scheme: CovariateScheme,
    /// Models fitted to every replication.
    #[serde(default = "default_fit_models")]
    pub fit_models: Vec<Family>,
    /// Also run the DBB test on every replication.
    #[serde(default)]
    pub run_dbb: bool,
}

impl McConfig {
    /// Well-specified design with three mean and three precision
    /// coefficients.
    pub fn well_specified(generator: Generator, n: usize, replications: usize, master_seed: u64) -> Self {
        McConfig {
            generator,
            n,
            replications,
            true_kappa: vec![0.5, -0.5, 1.0],
            true_lambda: vec![1.5, 1.0, -0.5],
            contamination_prob: 0.0,
            contamination_mu: default_contamination_mu(),
            contamination_phi: default_contamination_phi(),
            master_seed,
            covariate_scheme: CovariateScheme::default(),
            fit_models: default_fit_models(),
            run_dbb: false,
        }
    }

    /// Contaminated beta design with constant precision 5, fitted by both
    /// models.
    pub fn contaminated(n: usize, replications: usize, contamination_prob: f64, master_seed: u64) -> Self {
        McConfig {
            generator: Generator::BetaContaminated,
            true_lambda: vec![5f64.ln()],
            contamination_prob,
            fit_models: vec![Family::Bessel, Family::Beta],
            ..McConfig::well_specified(Generator::BetaContaminated, n, replications, master_seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        if self.true_kappa.is_empty() || self.true_lambda.is_empty() {
            return bad("true_kappa and true_lambda must be non-empty".into());
        }
        if self.true_kappa.len() + self.true_lambda.len() >= self.n {
            return bad(format!(
                "n = {} is too small for {} coefficients",
                self.n,
                self.true_kappa.len() + self.true_lambda.len()
            ));
        }
        if self.true_kappa.iter().chain(&self.true_lambda).any(|c| !c.is_finite()) {
            return bad("true coefficients must be finite".into());
        }
        if !(0.0..=1.0).contains(&self.contamination_prob) {
            return bad(format!("contamination_prob must lie in [0,1], got {}", self.contamination_prob));
        }
        if self.contamination_prob > 0.0 && self.generator != Generator::BetaContaminated {
            return bad("contamination_prob is only used by the beta_contaminated generator".into());
        }
        if !(self.contamination_mu > 0.0 && self.contamination_mu < 1.0) || !(self.contamination_phi > 0.0) {
            return bad("contamination mean must lie in (0,1) and precision must be positive".into());
        }
        Ok(())
    }
}

/// One generated replication.
#[derive(Debug, Clone)]
pub struct Simulated {
    pub data: Dataset,
    /// Contamination indicator per observation.
    pub contaminated: Vec<bool>,
    /// Draws that fell on the boundary of (0,1) and were pulled inside.
    pub clamped: usize,
}

fn design<R: Rng>(n: usize, k: usize, prefix: &str, rng: &mut R) -> (DMatrix<f64>, Vec<String>) {
    let mut m = DMatrix::from_element(n, k, 1.0);
    for j in 1..k {
        for i in 0..n {
            m[(i, j)] = if j % 2 == 1 {
                if rng.random::<f64>() < 0.5 {
                    1.0
                } else {
                    0.0
                }
            } else {
                rng.random_range(-1.0..1.0)
            };
        }
    }
    let mut names = vec!["(intercept)".to_string()];
    names.extend((1..k).map(|j| format!("{prefix}{j}")));
    (m, names)
}

/// Generate replication `rep`, keeping the contamination indicators.
pub fn generate(config: &McConfig, rep: usize) -> Result<Simulated> {
    config.validate()?;
    let n = config.n;
    let cov_index = match config.covariate_scheme {
        CovariateScheme::Redraw => rep as u64,
        CovariateScheme::Fixed => 0,
    };
    let mut cov_rng = stream(config.master_seed, cov_index, Purpose::Covariates);
    let (x, x_names) = design(n, config.true_kappa.len(), "x", &mut cov_rng);
    let (v, v_names) = design(n, config.true_lambda.len(), "v", &mut cov_rng);

    let mut resp_rng = stream(config.master_seed, rep as u64, Purpose::Response);
    let mut cont_rng = stream(config.master_seed, rep as u64, Purpose::Contamination);
    let mut z = Vec::with_capacity(n);
    let mut contaminated = vec![false; n];
    let mut clamped = 0;
    for i in 0..n {
        let eta: f64 = (0..x.ncols()).map(|j| x[(i, j)] * config.true_kappa[j]).sum();
        let tau: f64 = (0..v.ncols()).map(|j| v[(i, j)] * config.true_lambda[j]).sum();
        let (mut mu, mut phi) = (logistic(eta), tau.exp());
        let family = match config.generator {
            Generator::Bessel => Family::Bessel,
            Generator::Beta => Family::Beta,
            Generator::BetaContaminated => {
                if config.contamination_prob > 0.0 && cont_rng.random::<f64>() < config.contamination_prob {
                    contaminated[i] = true;
                    mu = config.contamination_mu;
                    phi = config.contamination_phi;
                }
                Family::Beta
            }
        };
        let draw = family.sample(mu, phi, &mut resp_rng)?;
        let zi = draw.clamp(UNIT_CLAMP, 1.0 - UNIT_CLAMP);
        clamped += (zi != draw) as usize;
        z.push(zi);
    }
    let data = Dataset::new(z, x, v, x_names, v_names)?;
    Ok(Simulated { data, contaminated, clamped })
}

/// Generate replication `rep` of `config`.
pub fn gen_dataset(config: &McConfig, rep: usize) -> Result<Dataset> {
    generate(config, rep).map(|s| s.data)
}

/// Mean over replications of `|(estimate_j - truth_j) / truth_j|`.
pub fn relative_bias(estimates: &[Vec<f64>], truth: &[f64]) -> Result<Vec<f64>> {
    if let Some(j) = truth.iter().position(|&t| t == 0.0) {
        return Err(Error::Config(format!(
            "true coefficient {j} is zero; relative bias is undefined, use the absolute bias instead"
        )));
    }
    if estimates.is_empty() {
        return Err(Error::InvalidData("no estimates".into()));
    }
    let mut out = vec![0.0; truth.len()];
    for est in estimates {
        if est.len() != truth.len() {
            return Err(Error::InvalidData(format!(
                "estimate has {} entries, truth has {}",
                est.len(),
                truth.len()
            )));
        }
        for (o, (e, t)) in out.iter_mut().zip(est.iter().zip(truth)) {
            *o += ((e - t) / t).abs();
        }
    }
    let r = estimates.len() as f64;
    Ok(out.into_iter().map(|s| s / r).collect())
}

/// Outcome of one fit within a replication.
#[derive(Debug, Clone, Serialize)]
pub struct RepFit {
    pub replication: usize,
    pub estimates: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub converged: bool,
    pub error: Option<String>,
}

/// Aggregates for one fitted model.
#[derive(Debug, Clone, Serialize)]
pub struct ModelSummary {
    pub model: Family,
    pub names: Vec<String>,
    pub truth: Vec<f64>,
    #[serde(skip)]
    pub fits: Vec<RepFit>,
    /// Replications entering the aggregates (fit succeeded and converged).
    pub used: usize,
    pub failures: usize,
    pub mean: Vec<f64>,
    pub bias: Vec<f64>,
    /// `None` where the true coefficient is zero.
    pub abs_relative_bias: Vec<Option<f64>>,
    pub mc_sd: Vec<f64>,
    /// Mean of the finite standard errors.
    pub mean_se: Vec<f64>,
    /// Fraction of replications whose 95% Wald interval covers the truth.
    pub ci_coverage: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DbbRate {
    pub selected_bessel: usize,
    pub evaluated: usize,
    pub failures: usize,
    pub bessel_pct: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct McReport {
    pub config: McConfig,
    pub generation_failures: usize,
    pub clamped: usize,
    pub contaminated: usize,
    pub models: Vec<ModelSummary>,
    pub dbb: Option<DbbRate>,
}

impl McReport {
    pub fn model(&self, model: Family) -> Option<&ModelSummary> {
        self.models.iter().find(|m| m.model == model)
    }
}

struct RepOutcome {
    simulated: std::result::Result<(usize, usize), String>,
    fits: Vec<RepFit>,
    dbb: Option<std::result::Result<Family, String>>,
}

fn run_rep(config: &McConfig, rep: usize) -> RepOutcome {
    let sim = match generate(config, rep) {
        Ok(s) => s,
        Err(e) => {
            let fits = config
                .fit_models
                .iter()
                .map(|_| RepFit {
                    replication: rep,
                    estimates: vec![],
                    std_errors: vec![],
                    converged: false,
                    error: Some(e.to_string()),
                })
                .collect();
            let dbb = config.run_dbb.then(|| Err(e.to_string()));
            return RepOutcome { simulated: Err(e.to_string()), fits, dbb };
        }
    };
    let fits = config
        .fit_models
        .iter()
        .map(|&model| match fit(model, &sim.data, None) {
            Ok(f) => RepFit {
                replication: rep,
                estimates: f.theta.kappa.iter().chain(&f.theta.lambda).copied().collect(),
                std_errors: f.std_errors,
                converged: f.converged,
                error: None,
            },
            Err(e) => RepFit {
                replication: rep,
                estimates: vec![],
                std_errors: vec![],
                converged: false,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let dbb = config
        .run_dbb
        .then(|| dbb_test(&sim.data).map(|r| r.decision).map_err(|e| e.to_string()));
    let ncont = sim.contaminated.iter().filter(|&&c| c).count();
    RepOutcome { simulated: Ok((sim.clamped, ncont)), fits, dbb }
}

fn summarize(model: Family, names: Vec<String>, truth: Vec<f64>, fits: Vec<RepFit>) -> ModelSummary {
    let k = truth.len();
    let good: Vec<&RepFit> = fits.iter().filter(|f| f.error.is_none() && f.converged).collect();
    let used = good.len();
    let mut mean = vec![f64::NAN; k];
    let mut mc_sd = vec![f64::NAN; k];
    let mut mean_se = vec![f64::NAN; k];
    let mut ci_coverage = vec![f64::NAN; k];
    for j in 0..k {
        if used == 0 {
            break;
        }
        let m = good.iter().map(|f| f.estimates[j]).sum::<f64>() / used as f64;
        mean[j] = m;
        if used > 1 {
            let ss: f64 = good.iter().map(|f| (f.estimates[j] - m).powi(2)).sum();
            mc_sd[j] = (ss / (used - 1) as f64).sqrt();
        }
        let ses: Vec<f64> = good.iter().map(|f| f.std_errors[j]).filter(|s| s.is_finite()).collect();
        if !ses.is_empty() {
            mean_se[j] = ses.iter().sum::<f64>() / ses.len() as f64;
        }
        let covered = good
            .iter()
            .filter(|f| (f.estimates[j] - truth[j]).abs() <= 1.959963984540054 * f.std_errors[j])
            .count();
        ci_coverage[j] = covered as f64 / used as f64;
    }
    let bias = mean.iter().zip(&truth).map(|(m, t)| m - t).collect();
    let abs_relative_bias = (0..k)
        .map(|j| {
            let est: Vec<Vec<f64>> = good.iter().map(|f| vec![f.estimates[j]]).collect();
            relative_bias(&est, &truth[j..=j]).ok().map(|v| v[0])
        })
        .collect();
    ModelSummary {
        model,
        names,
        truth,
        failures: fits.len() - used,
        fits,
        used,
        mean,
        bias,
        abs_relative_bias,
        mc_sd,
        mean_se,
        ci_coverage,
    }
}

/// Run every replication of `config` and aggregate.
pub fn run_mc(config: &McConfig) -> Result<McReport> {
    config.validate()?;
    let outcomes: Vec<RepOutcome> = (0..config.replications)
        .into_par_iter()
        .map(|rep| run_rep(config, rep))
        .collect();

    let mut names: Vec<String> = vec!["(intercept)".into()];
    names.extend((1..config.true_kappa.len()).map(|j| format!("x{j}")));
    let mut coef_names: Vec<String> = names.iter().map(|s| format!("mean:{s}")).collect();
    coef_names.push("precision:(intercept)".into());
    coef_names.extend((1..config.true_lambda.len()).map(|j| format!("precision:v{j}")));
    let truth: Vec<f64> = config.true_kappa.iter().chain(&config.true_lambda).copied().collect();

    let models = config
        .fit_models
        .iter()
        .enumerate()
        .map(|(m, &model)| {
            let fits = outcomes.iter().map(|o| o.fits[m].clone()).collect();
            summarize(model, coef_names.clone(), truth.clone(), fits)
        })
        .collect();

    let dbb = config.run_dbb.then(|| {
        let mut selected = 0;
        let mut evaluated = 0;
        let mut failures = 0;
        for o in &outcomes {
            match &o.dbb {
                Some(Ok(f)) => {
                    evaluated += 1;
                    selected += (*f == Family::Bessel) as usize;
                }
                _ => failures += 1,
            }
        }
        DbbRate {
            selected_bessel: selected,
            evaluated,
            failures,
            bessel_pct: if evaluated > 0 { 100.0 * selected as f64 / evaluated as f64 } else { f64::NAN },
        }
    });

    let mut generation_failures = 0;
    let mut clamped = 0;
    let mut contaminated = 0;
    for o in &outcomes {
        match o.simulated {
            Ok((c, k)) => {
                clamped += c;
                contaminated += k;
            }
            Err(_) => generation_failures += 1,
        }
    }
    Ok(McReport { config: config.clone(), generation_failures, clamped, contaminated, models, dbb })
}

/// Selection rates of the DBB test under a bessel and a beta generator.
#[derive(Debug, Clone, Serialize)]
pub struct DbbStudy {
    pub n: usize,
    pub replications: usize,
    pub bessel_generator: DbbRate,
    pub beta_generator: DbbRate,
}

/// Run the DBB test on every replication of a bessel-generated and a
/// beta-generated configuration that share their covariates.
pub fn run_dbb_study(bessel: &McConfig, beta: &McConfig) -> Result<DbbStudy> {
    if bessel.generator != Generator::Bessel || beta.generator != Generator::Beta {
        return Err(Error::Config("expected a bessel generator and a beta generator".into()));
    }
    let shared = bessel.n == beta.n
        && bessel.replications == beta.replications
        && bessel.master_seed == beta.master_seed
        && bessel.covariate_scheme == beta.covariate_scheme
        && bessel.true_kappa.len() == beta.true_kappa.len()
        && bessel.true_lambda.len() == beta.true_lambda.len();
    if !shared {
        return Err(Error::Config(
            "both generators must share n, replications, seed, covariate scheme and design dimensions".into(),
        ));
    }
    let only_dbb = |c: &McConfig| McConfig { fit_models: vec![], run_dbb: true, ..c.clone() };
    let a = run_mc(&only_dbb(bessel))?;
    let b = run_mc(&only_dbb(beta))?;
    Ok(DbbStudy {
        n: bessel.n,
        replications: bessel.replications,
        bessel_generator: a.dbb.expect("dbb requested"),
        beta_generator: b.dbb.expect("dbb requested"),
    })
}
