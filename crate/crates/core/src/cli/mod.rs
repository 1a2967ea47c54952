//! Command-line front end.
//!
//! Every subcommand writes `summary.json` (the run manifest plus a result
//! object) and one or more CSV tables into the output directory. CSV numbers
//! carry 17 significant digits; JSON numbers use the shortest representation
//! that round-trips.

pub mod datasets;
pub mod ingest;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::{json, Value};

use crate::dbb::{dbb_test_with, QuasiWeight};
use crate::diagnostics::{
    cross_validate, pearson_residuals, quantile_residuals, simulated_envelopes, vif_select, CvOptions,
    EnvelopeOptions, ResidualKind,
};
use crate::distributions::Family;
use crate::error::{Error, Result};
use crate::regression::{fit, wald_inference, BetaOptions, EmOptions, FitResult};
use crate::simstudy::{run_dbb_study, run_mc, Generator, McConfig, ModelSummary};
use datasets::{bodyfat_candidates, Preset};
use ingest::{ingest_csv, IngestSpec, Ingested, Table};

/// Version of the `summary.json` layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "BESSELREG_OUT";

#[derive(Debug, Parser)]
#[command(name = "besselreg", version, about = "Bessel and beta regression for responses in (0,1)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output directory.
    #[arg(long, global = true, env = OUT_ENV, default_value = "besselreg-out")]
    pub out: PathBuf,

    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the bessel and/or beta regression.
    Fit(FitArgs),
    /// Discrimination test between the bessel and beta models.
    Dbb(DbbArgs),
    /// Simulated envelopes for sorted residuals.
    Envelope(EnvelopeArgs),
    /// Random-partition cross-validation of bessel against beta.
    Cv(CvArgs),
    /// Monte Carlo study driven by a TOML configuration.
    Mc(McArgs),
    /// Iterative variance-inflation screening of candidate covariates.
    Vif(VifArgs),
}

fn parse_preset(s: &str) -> Result<Preset> {
    s.parse()
}

fn parse_range(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected MIN,MAX, got `{s}`"))?;
    let lo: f64 = a.trim().parse().map_err(|_| format!("bad number `{a}`"))?;
    let hi: f64 = b.trim().parse().map_err(|_| format!("bad number `{b}`"))?;
    Ok((lo, hi))
}

/// Data source and column roles.
#[derive(Debug, Args, Clone)]
pub struct InputArgs {
    /// Bundled dataset: stress-anxiety, weather-task or bodyfat.
    #[arg(long, value_parser = parse_preset, conflicts_with = "input", required_unless_present = "input")]
    pub dataset: Option<Preset>,
    /// CSV file with a header row.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Response column (required with --input).
    #[arg(long, requires = "input")]
    pub response: Option<String>,
    /// Mean covariates, comma separated.
    #[arg(long, value_delimiter = ',', requires = "input")]
    pub mean: Vec<String>,
    /// Precision covariates, comma separated.
    #[arg(long, value_delimiter = ',', requires = "input")]
    pub precision: Vec<String>,
    /// Omit the intercept column from the mean design.
    #[arg(long, requires = "input")]
    pub no_mean_intercept: bool,
    /// Omit the intercept column from the precision design.
    #[arg(long, requires = "input")]
    pub no_precision_intercept: bool,
    /// Rescale the response with (y - MIN) / (MAX - MIN).
    #[arg(long, value_parser = parse_range, value_name = "MIN,MAX", requires = "input")]
    pub rescale: Option<(f64, f64)>,
    /// Clamp rescaled responses into [EPS, 1 - EPS].
    #[arg(long, requires = "input")]
    pub clamp_eps: Option<f64>,
    /// Divide every covariate by this value.
    #[arg(long, requires = "input")]
    pub covariate_divisor: Option<f64>,
    /// Column holding row ids.
    #[arg(long, requires = "input")]
    pub id_column: Option<String>,
    /// Row ids to drop (needs --id-column).
    #[arg(long, value_delimiter = ',', requires = "input")]
    pub exclude: Vec<String>,
}

impl InputArgs {
    fn spec(&self) -> Result<IngestSpec> {
        if let Some(p) = self.dataset {
            return Ok(p.spec());
        }
        let response = self
            .response
            .clone()
            .ok_or_else(|| Error::Config("--response is required with --input".into()))?;
        let mut spec = IngestSpec::new(response);
        spec.mean = self.mean.clone();
        spec.precision = self.precision.clone();
        spec.mean_intercept = !self.no_mean_intercept;
        spec.precision_intercept = !self.no_precision_intercept;
        spec.rescale = self.rescale;
        if let Some(e) = self.clamp_eps {
            spec.clamp_eps = e;
        }
        if let Some(d) = self.covariate_divisor {
            spec.covariate_divisor = d;
        }
        spec.id_column = self.id_column.clone();
        spec.exclude = self.exclude.clone();
        Ok(spec)
    }

    fn source(&self) -> String {
        match (&self.dataset, &self.input) {
            (Some(p), _) => format!("dataset:{}", p.name()),
            (None, Some(path)) => path.display().to_string(),
            (None, None) => String::new(),
        }
    }

    fn load(&self) -> Result<(Ingested, IngestSpec)> {
        let spec = self.spec()?;
        let ing = match (&self.dataset, &self.input) {
            (Some(p), _) => p.load()?,
            (None, Some(path)) => ingest_csv(path, &spec)?,
            (None, None) => return Err(Error::Config("either --dataset or --input is required".into())),
        };
        Ok((ing, spec))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelChoice {
    Bessel,
    Beta,
    Both,
}

impl ModelChoice {
    fn families(self) -> Vec<Family> {
        match self {
            ModelChoice::Bessel => vec![Family::Bessel],
            ModelChoice::Beta => vec![Family::Beta],
            ModelChoice::Both => vec![Family::Bessel, Family::Beta],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ResidualChoice {
    Pearson,
    Quantile,
    Both,
}

impl ResidualChoice {
    fn kinds(self) -> Vec<ResidualKind> {
        match self {
            ResidualChoice::Pearson => vec![ResidualKind::Pearson],
            ResidualChoice::Quantile => vec![ResidualKind::Quantile],
            ResidualChoice::Both => vec![ResidualKind::Pearson, ResidualKind::Quantile],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightChoice {
    Canonical,
    SqrtVariance,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value = "both")]
    pub model: ModelChoice,
    /// Confidence level of the Wald intervals.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
}

#[derive(Debug, Args)]
pub struct DbbArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Quasi-likelihood estimating equation.
    #[arg(long, value_enum, default_value = "canonical")]
    pub weight: WeightChoice,
}

#[derive(Debug, Args)]
pub struct EnvelopeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value = "both")]
    pub model: ModelChoice,
    #[arg(long, value_enum, default_value = "both")]
    pub residual: ResidualChoice,
    #[arg(long, default_value_t = 1000)]
    pub replications: usize,
    #[arg(long, default_value_t = 0.95)]
    pub coverage: f64,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 10)]
    pub test_size: usize,
    #[arg(long, default_value_t = 1000)]
    pub partitions: usize,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct McArgs {
    /// TOML file describing the study.
    #[arg(long)]
    pub config: PathBuf,
    /// Master seed; replaces any `master_seed` in the file.
    #[arg(long)]
    pub seed: u64,
    /// Run the DBB test on the configured bessel design and on the same
    /// design with a beta generator.
    #[arg(long)]
    pub dbb_study: bool,
}

#[derive(Debug, Args)]
pub struct VifArgs {
    /// Bundled dataset (bodyfat ships its candidate list).
    #[arg(long, value_parser = parse_preset, conflicts_with = "input", required_unless_present = "input")]
    pub dataset: Option<Preset>,
    /// CSV file with a header row.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Candidate columns, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub columns: Vec<String>,
    /// Divide every candidate by this value.
    #[arg(long, default_value_t = 1.0)]
    pub covariate_divisor: f64,
    /// Column holding row ids.
    #[arg(long)]
    pub id_column: Option<String>,
    /// Row ids to drop (needs --id-column).
    #[arg(long, value_delimiter = ',')]
    pub exclude: Vec<String>,
    /// Remove the worst column while its VIF exceeds this value.
    #[arg(long, default_value_t = 5.0)]
    pub threshold: f64,
}

/// Provenance block embedded in every summary.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema_version: u32,
    pub subcommand: &'static str,
    pub inputs: Vec<String>,
    pub roles: Option<Roles>,
    pub links: Links,
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
    pub options: Value,
    pub output_dir: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Roles {
    pub response: String,
    pub mean: Vec<String>,
    pub precision: Vec<String>,
    pub mean_intercept: bool,
    pub precision_intercept: bool,
    pub rescale: Option<(f64, f64)>,
    pub clamp_eps: f64,
    pub covariate_divisor: f64,
    pub exclude: Vec<String>,
}

impl From<&IngestSpec> for Roles {
    fn from(s: &IngestSpec) -> Self {
        Roles {
            response: s.response.clone(),
            mean: s.mean.clone(),
            precision: s.precision.clone(),
            mean_intercept: s.mean_intercept,
            precision_intercept: s.precision_intercept,
            rescale: s.rescale,
            clamp_eps: s.clamp_eps,
            covariate_divisor: s.covariate_divisor,
            exclude: s.exclude.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Links {
    pub mean: &'static str,
    pub precision: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    pub em_epsilon: f64,
    pub em_max_iter: usize,
    pub m_step_gtol: f64,
    pub beta_gtol: f64,
    pub beta_max_iter: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        let em = EmOptions::default();
        let beta = BetaOptions::default();
        Tolerances {
            em_epsilon: em.epsilon,
            em_max_iter: em.max_iter,
            m_step_gtol: em.inner.gtol,
            beta_gtol: beta.optim.gtol,
            beta_max_iter: beta.optim.max_iter,
        }
    }
}

fn manifest(
    cmd: &'static str,
    out: &Path,
    inputs: Vec<String>,
    roles: Option<Roles>,
    seed: Option<u64>,
    options: Value,
) -> RunManifest {
    RunManifest {
        tool: "besselreg",
        version: env!("CARGO_PKG_VERSION"),
        schema_version: SCHEMA_VERSION,
        subcommand: cmd,
        inputs,
        roles,
        links: Links { mean: "logit", precision: "log" },
        seed,
        tolerances: Tolerances::default(),
        options,
        output_dir: out.display().to_string(),
    }
}

/// Format a float for CSV output with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    fn new<S: AsRef<str>>(header: &[S]) -> Self {
        CsvTable { header: header.iter().map(|s| s.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Files produced by a run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub summary: Value,
    pub files: Vec<PathBuf>,
}

struct Writer {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Writer { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn table(&mut self, name: &str, t: &CsvTable) -> Result<()> {
        let p = self.dir.join(name);
        t.write(&p)?;
        self.files.push(p);
        Ok(())
    }

    fn finish(mut self, manifest: RunManifest, result: Value) -> Result<RunOutput> {
        let summary = json!({ "manifest": manifest, "result": result });
        let p = self.dir.join("summary.json");
        let mut f = fs::File::create(&p)?;
        serde_json::to_writer_pretty(&mut f, &summary)?;
        f.write_all(b"\n")?;
        self.files.insert(0, p);
        Ok(RunOutput { summary, files: self.files })
    }
}

/// Parse arguments and run, configuring the worker pool first.
pub fn run(cli: &Cli) -> Result<RunOutput> {
    match cli.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
            pool.install(|| dispatch(cli))
        }
        None => dispatch(cli),
    }
}

fn dispatch(cli: &Cli) -> Result<RunOutput> {
    let out = cli.out.as_path();
    match &cli.command {
        Command::Fit(a) => cmd_fit(a, out),
        Command::Dbb(a) => cmd_dbb(a, out),
        Command::Envelope(a) => cmd_envelope(a, out),
        Command::Cv(a) => cmd_cv(a, out),
        Command::Mc(a) => cmd_mc(a, out),
        Command::Vif(a) => cmd_vif(a, out),
    }
}

fn ids_or_index(ing: &Ingested) -> Vec<String> {
    if ing.ids.len() == ing.dataset.n() {
        ing.ids.clone()
    } else {
        (1..=ing.dataset.n()).map(|i| i.to_string()).collect()
    }
}

#[derive(Serialize)]
struct FitSummary {
    model: Family,
    loglik: f64,
    iterations: usize,
    converged: bool,
    information_pd: bool,
    coefficients: Value,
}

fn fit_summary(f: &FitResult, level: f64) -> FitSummary {
    let coefficients = match wald_inference(f, level) {
        Ok(rows) => serde_json::to_value(rows).expect("serializable"),
        Err(e) => json!({
            "error": e.to_string(),
            "estimates": f.names.iter().zip(f.theta.kappa.iter().chain(&f.theta.lambda))
                .map(|(n, v)| json!({ "name": n, "estimate": v })).collect::<Vec<_>>(),
        }),
    };
    FitSummary {
        model: f.model,
        loglik: f.loglik,
        iterations: f.iterations,
        converged: f.converged,
        information_pd: f.information_pd,
        coefficients,
    }
}

pub fn cmd_fit(a: &FitArgs, out: &Path) -> Result<RunOutput> {
    let (ing, spec) = a.input.load()?;
    let data = &ing.dataset;
    let mut w = Writer::new(out)?;
    let ids = ids_or_index(&ing);
    let mut fits = Vec::new();
    for model in a.model.families() {
        let f = fit(model, data, None)?;
        let mut coef = CsvTable::new(&["name", "estimate", "se", "z", "p_value", "ci_lo", "ci_hi"]);
        if let Ok(rows) = wald_inference(&f, a.level) {
            for r in rows {
                coef.push(vec![
                    r.name,
                    fmt_f64(r.estimate),
                    fmt_f64(r.se),
                    fmt_f64(r.z),
                    fmt_f64(r.p_value),
                    fmt_f64(r.ci_lo),
                    fmt_f64(r.ci_hi),
                ]);
            }
        }
        w.table(&format!("detail_fit_{model}.csv"), &coef)?;

        let mu = f.mu(data);
        let phi = f.phi(data);
        let pr = pearson_residuals(&f, data);
        let qr = quantile_residuals(&f, data)?;
        let mut obs = CsvTable::new(&["id", "z", "mu", "phi", "pearson", "quantile"]);
        for i in 0..data.n() {
            obs.push(vec![
                ids[i].clone(),
                fmt_f64(data.z()[i]),
                fmt_f64(mu[i]),
                fmt_f64(phi[i]),
                fmt_f64(pr[i]),
                fmt_f64(qr.values[i]),
            ]);
        }
        w.table(&format!("detail_fitted_{model}.csv"), &obs)?;
        if model == Family::Bessel {
            let mut tr = CsvTable::new(&["iteration", "loglik"]);
            for (k, l) in f.loglik_trace.iter().enumerate() {
                tr.push(vec![k.to_string(), fmt_f64(*l)]);
            }
            w.table("plotdata_em_trace.csv", &tr)?;
        }
        fits.push(fit_summary(&f, a.level));
    }
    let m = manifest(
        "fit",
        out,
        vec![a.input.source()],
        Some(Roles::from(&spec)),
        None,
        json!({ "model": format!("{:?}", a.model).to_lowercase(), "level": a.level }),
    );
    w.finish(m, json!({ "n": data.n(), "clamped": ing.clamped, "fits": fits }))
}

pub fn cmd_dbb(a: &DbbArgs, out: &Path) -> Result<RunOutput> {
    let (ing, spec) = a.input.load()?;
    let weight = match a.weight {
        WeightChoice::Canonical => QuasiWeight::Canonical,
        WeightChoice::SqrtVariance => QuasiWeight::SqrtVariance,
    };
    let report = dbb_test_with(&ing.dataset, weight)?;
    let mut w = Writer::new(out)?;
    let ids = ids_or_index(&ing);
    let mut t = CsvTable::new(&["id", "z", "mu_tilde"]);
    for i in 0..ing.dataset.n() {
        t.push(vec![ids[i].clone(), fmt_f64(ing.dataset.z()[i]), fmt_f64(report.mu_tilde[i])]);
    }
    w.table("detail_dbb.csv", &t)?;
    let m = manifest(
        "dbb",
        out,
        vec![a.input.source()],
        Some(Roles::from(&spec)),
        None,
        json!({ "weight": weight }),
    );
    let mut result = serde_json::to_value(&report)?;
    if let Value::Object(o) = &mut result {
        o.remove("mu_tilde");
        o.insert("n".into(), json!(ing.dataset.n()));
    }
    w.finish(m, result)
}

pub fn cmd_envelope(a: &EnvelopeArgs, out: &Path) -> Result<RunOutput> {
    let (ing, spec) = a.input.load()?;
    let data = &ing.dataset;
    let opts = EnvelopeOptions { replications: a.replications, coverage: a.coverage, seed: a.seed };
    let kinds = a.residual.kinds();
    let mut w = Writer::new(out)?;
    let mut results = Vec::new();
    for model in a.model.families() {
        let f = fit(model, data, None)?;
        for env in simulated_envelopes(&f, data, &kinds, &opts)? {
            let kind = format!("{:?}", env.kind).to_lowercase();
            let mut t = CsvTable::new(&["rank", "theoretical", "observed", "lower", "mean", "upper", "inside"]);
            for i in 0..data.n() {
                let o = env.sorted_observed[i];
                t.push(vec![
                    (i + 1).to_string(),
                    fmt_f64(env.theoretical_quantiles[i]),
                    fmt_f64(o),
                    fmt_f64(env.lower[i]),
                    fmt_f64(env.band_mean[i]),
                    fmt_f64(env.upper[i]),
                    (env.lower[i] <= o && o <= env.upper[i]).to_string(),
                ]);
            }
            w.table(&format!("plotdata_envelope_{model}_{kind}.csv"), &t)?;
            results.push(json!({
                "model": model,
                "residual": env.kind,
                "coverage_pct": env.coverage_pct,
                "replications": env.replications,
                "dropped": env.dropped,
                "band_rows": [env.band_rows.0, env.band_rows.1],
            }));
        }
    }
    let m = manifest(
        "envelope",
        out,
        vec![a.input.source()],
        Some(Roles::from(&spec)),
        Some(a.seed),
        json!({
            "model": format!("{:?}", a.model).to_lowercase(),
            "residual": format!("{:?}", a.residual).to_lowercase(),
            "replications": a.replications,
            "coverage": a.coverage,
        }),
    );
    w.finish(m, json!({ "n": data.n(), "envelopes": results }))
}

fn median(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let k = s.len();
    if k % 2 == 1 {
        s[k / 2]
    } else {
        0.5 * (s[k / 2 - 1] + s[k / 2])
    }
}

pub fn cmd_cv(a: &CvArgs, out: &Path) -> Result<RunOutput> {
    let (ing, spec) = a.input.load()?;
    let opts = CvOptions { test_size: a.test_size, partitions: a.partitions, seed: a.seed };
    let r = cross_validate(&ing.dataset, &opts)?;
    let mut w = Writer::new(out)?;
    let mut t = CsvTable::new(&[
        "partition",
        "split_hash",
        "rss_bessel",
        "rss_beta",
        "fsmd_bessel",
        "fsmd_beta",
        "rss_ratio",
        "fsmd_ratio",
        "test_rows",
    ]);
    for k in 0..r.rss_ratio.len() {
        let rows: Vec<String> = r.test_indices[k].iter().map(|i| (i + 1).to_string()).collect();
        t.push(vec![
            r.partition_ids[k].to_string(),
            format!("{:016x}", r.split_hashes[k]),
            fmt_f64(r.rss_bessel[k]),
            fmt_f64(r.rss_beta[k]),
            fmt_f64(r.fsmd_bessel[k]),
            fmt_f64(r.fsmd_beta[k]),
            fmt_f64(r.rss_ratio[k]),
            fmt_f64(r.fsmd_ratio[k]),
            rows.join(";"),
        ]);
    }
    w.table("plotdata_cv.csv", &t)?;
    let m = manifest(
        "cv",
        out,
        vec![a.input.source()],
        Some(Roles::from(&spec)),
        Some(a.seed),
        json!({ "test_size": a.test_size, "partitions": a.partitions }),
    );
    let result = json!({
        "n": ing.dataset.n(),
        "partitions": a.partitions,
        "evaluated": r.rss_ratio.len(),
        "dropped": r.dropped,
        "rss_bessel_wins": r.rss_bessel_wins(),
        "fsmd_bessel_wins": r.fsmd_bessel_wins(),
        "median_rss_bessel": median(&r.rss_bessel),
        "median_rss_beta": median(&r.rss_beta),
        "median_fsmd_bessel": median(&r.fsmd_bessel),
        "median_fsmd_beta": median(&r.fsmd_beta),
    });
    w.finish(m, result)
}

fn mc_tables(w: &mut Writer, s: &ModelSummary) -> Result<()> {
    let mut header = vec!["replication".to_string(), "converged".into(), "error".into()];
    header.extend(s.names.iter().map(|n| format!("est:{n}")));
    header.extend(s.names.iter().map(|n| format!("se:{n}")));
    let mut t = CsvTable::new(&header);
    for f in &s.fits {
        let mut row = vec![f.replication.to_string(), f.converged.to_string(), f.error.clone().unwrap_or_default()];
        if f.estimates.len() == s.names.len() {
            row.extend(f.estimates.iter().map(|&e| fmt_f64(e)));
            row.extend(f.std_errors.iter().map(|&e| fmt_f64(e)));
        } else {
            row.extend(std::iter::repeat_n(String::new(), 2 * s.names.len()));
        }
        t.push(row);
    }
    w.table(&format!("detail_mc_{}.csv", s.model), &t)?;
    Ok(())
}

pub fn cmd_mc(a: &McArgs, out: &Path) -> Result<RunOutput> {
    let text = fs::read_to_string(&a.config)
        .map_err(|e| Error::Input { path: a.config.display().to_string(), message: e.to_string() })?;
    let mut cfg: McConfig = toml::from_str(&text)
        .map_err(|e| Error::Input { path: a.config.display().to_string(), message: e.to_string() })?;
    cfg.master_seed = a.seed;
    cfg.validate()?;
    let mut w = Writer::new(out)?;
    let result = if a.dbb_study {
        if cfg.generator != Generator::Bessel {
            return Err(Error::Config("--dbb-study expects generator = \"bessel\"".into()));
        }
        let beta = McConfig { generator: Generator::Beta, ..cfg.clone() };
        let study = run_dbb_study(&cfg, &beta)?;
        let mut t = CsvTable::new(&["generator", "n", "replications", "evaluated", "failures", "bessel_pct"]);
        for (g, r) in [("bessel", &study.bessel_generator), ("beta", &study.beta_generator)] {
            t.push(vec![
                g.into(),
                study.n.to_string(),
                study.replications.to_string(),
                r.evaluated.to_string(),
                r.failures.to_string(),
                fmt_f64(r.bessel_pct),
            ]);
        }
        w.table("detail_dbb_study.csv", &t)?;
        serde_json::to_value(&study)?
    } else {
        let report = run_mc(&cfg)?;
        let mut t = CsvTable::new(&[
            "model",
            "parameter",
            "truth",
            "mean",
            "bias",
            "abs_relative_bias",
            "mc_sd",
            "mean_se",
            "ci_coverage",
        ]);
        for s in &report.models {
            mc_tables(&mut w, s)?;
            for j in 0..s.names.len() {
                t.push(vec![
                    s.model.to_string(),
                    s.names[j].clone(),
                    fmt_f64(s.truth[j]),
                    fmt_f64(s.mean[j]),
                    fmt_f64(s.bias[j]),
                    s.abs_relative_bias[j].map(fmt_f64).unwrap_or_default(),
                    fmt_f64(s.mc_sd[j]),
                    fmt_f64(s.mean_se[j]),
                    fmt_f64(s.ci_coverage[j]),
                ]);
            }
        }
        w.table("plotdata_mc_summary.csv", &t)?;
        serde_json::to_value(&report)?
    };
    let m = manifest(
        "mc",
        out,
        vec![a.config.display().to_string()],
        None,
        Some(a.seed),
        json!({ "config": cfg, "dbb_study": a.dbb_study }),
    );
    w.finish(m, result)
}

fn vif_candidates(a: &VifArgs) -> Result<(DMatrix<f64>, Vec<String>, String)> {
    if a.dataset == Some(Preset::Bodyfat) && a.columns.is_empty() {
        let (m, names) = bodyfat_candidates()?;
        return Ok((m, names, "dataset:bodyfat".into()));
    }
    if a.columns.len() < 2 {
        return Err(Error::Config("vif needs at least two --columns".into()));
    }
    let (table, source) = match (&a.dataset, &a.input) {
        (Some(p), _) => (p.table(), format!("dataset:{}", p.name())),
        (None, Some(path)) => (Table::from_path(path)?, path.display().to_string()),
        (None, None) => return Err(Error::Config("either --dataset or --input is required".into())),
    };
    let rows: Vec<usize> = match &a.id_column {
        Some(id) => {
            let c = table
                .headers
                .iter()
                .position(|h| h == id)
                .ok_or_else(|| Error::Input { path: source.clone(), message: format!("missing column `{id}`") })?;
            (0..table.raw.len()).filter(|&i| !a.exclude.contains(&table.raw[i][c])).collect()
        }
        None if !a.exclude.is_empty() => return Err(Error::Config("--exclude needs --id-column".into())),
        None => (0..table.raw.len()).collect(),
    };
    if rows.is_empty() {
        return Err(Error::InvalidData("no rows".into()));
    }
    let cols: Vec<Vec<f64>> = a
        .columns
        .iter()
        .map(|c| table.numeric(c, &rows, &source))
        .collect::<Result<_>>()?;
    let m = DMatrix::from_fn(rows.len(), cols.len(), |i, j| cols[j][i] / a.covariate_divisor);
    Ok((m, a.columns.clone(), source))
}

pub fn cmd_vif(a: &VifArgs, out: &Path) -> Result<RunOutput> {
    let (m, names, source) = vif_candidates(a)?;
    let r = vif_select(&m, &names, a.threshold)?;
    let mut w = Writer::new(out)?;
    let mut t = CsvTable::new(&["step", "column", "vif", "collinear"]);
    for (k, rm) in r.removed.iter().enumerate() {
        t.push(vec![(k + 1).to_string(), rm.column.clone(), fmt_f64(rm.vif), rm.collinear.to_string()]);
    }
    w.table("detail_vif_removed.csv", &t)?;
    let mut k = CsvTable::new(&["column", "vif"]);
    for (c, v) in r.kept.iter().zip(&r.final_vif) {
        k.push(vec![c.clone(), fmt_f64(*v)]);
    }
    w.table("detail_vif_kept.csv", &k)?;
    let mnf = manifest(
        "vif",
        out,
        vec![source],
        None,
        None,
        json!({ "threshold": a.threshold, "columns": names, "rows": m.nrows() }),
    );
    w.finish(mnf, serde_json::to_value(&r)?)
}

/// Error report printed on failure.
pub fn error_json(e: &Error) -> Value {
    json!({ "error": { "kind": e.kind(), "message": e.to_string() } })
}
