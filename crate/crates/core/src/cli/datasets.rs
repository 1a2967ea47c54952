//! Bundled example datasets and their standard column roles.

use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::ingest::{ingest_table, IngestSpec, Ingested, Table};
use crate::error::{Error, Result};

const STRESS_ANXIETY: &str = include_str!("../../data/stress_anxiety.csv");
const WEATHER_TASK: &str = include_str!("../../data/weather_task.csv");
const BODYFAT: &str = include_str!("../../data/bodyfat.csv");

/// The thirteen body measurements screened for collinearity.
pub const BODYFAT_CANDIDATES: [&str; 13] = [
    "age", "weight", "height", "neck", "chest", "abdom", "hip", "thigh", "knee", "ankle", "biceps", "forearm", "wrist",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Anxiety score against stress score, 166 women.
    StressAnxiety,
    /// Agreement probability against priming and eliciting, 345 students.
    WeatherTask,
    /// Siri body fat fraction against age, chest, thigh and wrist, 251 men.
    Bodyfat,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stress-anxiety" | "stress" => Ok(Preset::StressAnxiety),
            "weather-task" | "weather" => Ok(Preset::WeatherTask),
            "bodyfat" | "body-fat" => Ok(Preset::Bodyfat),
            other => Err(Error::Config(format!(
                "unknown dataset `{other}` (expected stress-anxiety, weather-task or bodyfat)"
            ))),
        }
    }
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::StressAnxiety => "stress-anxiety",
            Preset::WeatherTask => "weather-task",
            Preset::Bodyfat => "bodyfat",
        }
    }

    pub fn csv(self) -> &'static str {
        match self {
            Preset::StressAnxiety => STRESS_ANXIETY,
            Preset::WeatherTask => WEATHER_TASK,
            Preset::Bodyfat => BODYFAT,
        }
    }

    pub fn spec(self) -> IngestSpec {
        match self {
            Preset::StressAnxiety => {
                let mut s = IngestSpec::new("anxiety");
                s.mean = vec!["stress".into()];
                s
            }
            Preset::WeatherTask => {
                let mut s = IngestSpec::new("agreement");
                s.mean = vec!["priming".into(), "eliciting".into()];
                s
            }
            Preset::Bodyfat => {
                let mut s = IngestSpec::new("siri");
                s.mean = vec!["age".into(), "chest".into(), "thigh".into(), "wrist".into()];
                s.rescale = Some((0.0, 100.0));
                // one subject records 0% body fat
                s.clamp_eps = 1e-5;
                s.covariate_divisor = 100.0;
                s.id_column = Some("subject".into());
                s.exclude = vec!["42".into()];
                s
            }
        }
    }

    pub fn table(self) -> Table {
        Table::from_reader(self.csv().as_bytes(), self.name()).expect("bundled CSV parses")
    }

    pub fn load(self) -> Result<Ingested> {
        self.load_with(&self.spec())
    }

    pub fn load_with(self, spec: &IngestSpec) -> Result<Ingested> {
        ingest_table(&self.table(), spec, self.name())
    }
}

/// Body fat candidate covariates divided by 100, with subjects 39 and 42
/// removed, in [`BODYFAT_CANDIDATES`] order.
pub fn bodyfat_candidates() -> Result<(DMatrix<f64>, Vec<String>)> {
    let t = Preset::Bodyfat.table();
    let sid = t.headers.iter().position(|h| h == "subject").expect("subject column");
    let rows: Vec<usize> = (0..t.raw.len()).filter(|&i| !matches!(t.raw[i][sid].as_str(), "39" | "42")).collect();
    let cols: Vec<Vec<f64>> = BODYFAT_CANDIDATES
        .iter()
        .map(|c| t.numeric(c, &rows, "bodyfat").map(|v| v.into_iter().map(|e| e / 100.0).collect()))
        .collect::<Result<_>>()?;
    let m = DMatrix::from_fn(rows.len(), cols.len(), |i, j| cols[j][i]);
    Ok((m, BODYFAT_CANDIDATES.iter().map(|s| s.to_string()).collect()))
}
