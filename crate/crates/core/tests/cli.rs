use besselreg::cli::datasets::Preset;
use besselreg::cli::ingest::{ingest_csv, write_dataset_csv, IngestSpec};
use besselreg::regression::fit;
use besselreg::Family;
use serde_json::Value;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn besselreg(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_besselreg"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("BESSELREG_OUT")
        .output()
        .unwrap()
}

fn ok(out: &Path, args: &[&str]) {
    let o = besselreg(out, args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    v.sort();
    v
}

const MC_TOML: &str = "generator = \"beta\"\nn = 30\nreplications = 6\n\
true_kappa = [0.5, -0.5]\ntrue_lambda = [1.5]\nfit_models = [\"bessel\", \"beta\"]\nrun_dbb = true\n";

fn all_runs(root: &Path) -> Vec<(String, Vec<String>)> {
    let cfg = root.join("mc.toml");
    fs::write(&cfg, MC_TOML).unwrap();
    let cfg = cfg.to_string_lossy().into_owned();
    let study = root.join("study.toml");
    fs::write(&study, MC_TOML.replace("\"beta\"\nn", "\"bessel\"\nn")).unwrap();
    let study = study.to_string_lossy().into_owned();
    let runs: Vec<Vec<&str>> = vec![
        vec!["fit", "--dataset", "stress-anxiety", "--model", "both"],
        vec!["dbb", "--dataset", "weather-task"],
        vec!["envelope", "--dataset", "stress-anxiety", "--model", "both", "--replications", "20", "--seed", "3"],
        vec!["cv", "--dataset", "stress-anxiety", "--partitions", "4", "--test-size", "20", "--seed", "3"],
        vec!["mc", "--config", &cfg, "--seed", "3"],
        vec!["mc", "--config", &study, "--seed", "3", "--dbb-study"],
        vec!["vif", "--dataset", "bodyfat"],
    ];
    runs.into_iter()
        .enumerate()
        .map(|(i, a)| (format!("run{i}"), a.into_iter().map(String::from).collect()))
        .collect()
}

#[test]
fn summaries_validate_against_the_schema() {
    let schema: Value =
        serde_json::from_str(include_str!("../schema/summary.schema.json")).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let root = tempfile::tempdir().unwrap();
    for (name, args) in all_runs(root.path()) {
        let dir = root.path().join(&name);
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        ok(&dir, &args);
        let s = summary(&dir);
        let errors: Vec<String> = validator.iter_errors(&s).map(|e| format!("{} at {}", e, e.instance_path)).collect();
        assert!(errors.is_empty(), "{args:?}: {errors:?}");
        let m = &s["manifest"];
        assert_eq!(m["subcommand"], args[0]);
        assert_eq!(m["schema_version"], 1);
        assert!(m["tolerances"]["em_epsilon"].is_number());
        let mut broken = s.clone();
        broken["manifest"]["extra"] = Value::Bool(true);
        assert!(!validator.is_valid(&broken));
        broken = s.clone();
        broken["result"] = Value::Null;
        assert!(!validator.is_valid(&broken));
    }
}

#[test]
fn reruns_are_byte_identical_for_any_thread_count() {
    let root = tempfile::tempdir().unwrap();
    for (name, args) in all_runs(root.path()) {
        let dir = root.path().join(&name);
        let mut args: Vec<&str> = args.iter().map(String::as_str).collect();
        ok(&dir, &args);
        let first = snapshot(&dir);
        args.splice(0..0, ["--threads", "1"]);
        ok(&dir, &args);
        assert_eq!(first, snapshot(&dir), "{args:?}");
        args[1] = "3";
        ok(&dir, &args);
        assert_eq!(first, snapshot(&dir), "{args:?}");
    }
}

#[test]
fn fit_reproduces_stress_estimates() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["fit", "--dataset", "stress-anxiety", "--model", "bessel"]);
    let table = fs::read_to_string(dir.path().join("detail_fit_bessel.csv")).unwrap();
    let row = table.lines().find(|l| l.starts_with("mean:stress")).unwrap();
    let est: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!((est - 3.2005).abs() < 1e-3, "{est}");
}

#[test]
fn dbb_selects_bessel_for_weather_data() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["dbb", "--dataset", "weather-task"]);
    let s = summary(dir.path());
    assert_eq!(s["result"]["decision"], "bessel", "{}", s["result"]);
}

#[test]
fn empty_input_fails_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("empty.csv");
    fs::write(&csv, "y,x\n").unwrap();
    let o = besselreg(&dir.path().join("out"), &["fit", "--input", csv.to_str().unwrap(), "--response", "y"]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("no rows"), "{err}");
    assert!(err.contains("\"kind\""), "{err}");
}

#[test]
fn missing_seed_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = besselreg(dir.path(), &["envelope", "--dataset", "stress-anxiety"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dataset_csv_round_trip_preserves_fits() {
    let data = Preset::StressAnxiety.load().unwrap().dataset;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("stress.csv");
    write_dataset_csv(&data, &path).unwrap();
    let mut spec = IngestSpec::new("z");
    spec.mean = vec!["x_stress".into()];
    let back = ingest_csv(&path, &spec).unwrap().dataset;
    assert_eq!(back.z(), data.z());
    assert_eq!(back.x().column(1), data.x().column(1));
    for fam in [Family::Bessel, Family::Beta] {
        let a = fit(fam, &data, None).unwrap();
        let b = fit(fam, &back, None).unwrap();
        for (u, v) in a.theta.to_vector().iter().zip(b.theta.to_vector().iter()) {
            assert!((u - v).abs() < 1e-12);
        }
    }
}
