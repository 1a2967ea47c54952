//! CSV ingestion into a [`Dataset`].

use std::collections::HashSet;
use std::io::Read;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regression::{Dataset, BOUNDARY_TOL};

/// Column roles and preprocessing for one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSpec {
    pub response: String,
    /// Mean covariates (an intercept is prepended unless disabled).
    #[serde(default)]
    pub mean: Vec<String>,
    /// Precision covariates (an intercept is prepended unless disabled).
    #[serde(default)]
    pub precision: Vec<String>,
    #[serde(default = "yes")]
    pub mean_intercept: bool,
    #[serde(default = "yes")]
    pub precision_intercept: bool,
    /// Map the response through `(y - min) / (max - min)`.
    #[serde(default)]
    pub rescale: Option<(f64, f64)>,
    /// Rescaled responses are clamped into `[eps, 1 - eps]`.
    #[serde(default = "default_eps")]
    pub clamp_eps: f64,
    /// Every covariate is divided by this.
    #[serde(default = "one")]
    pub covariate_divisor: f64,
    /// Column holding row identifiers, used by `exclude`.
    #[serde(default)]
    pub id_column: Option<String>,
    #[serde(default)]
    pub exclude: Vec<String>,
}

fn yes() -> bool {
    true
}
fn one() -> f64 {
    1.0
}
fn default_eps() -> f64 {
    1e-6
}

impl IngestSpec {
    pub fn new(response: impl Into<String>) -> Self {
        Self {
            response: response.into(),
            mean: Vec::new(),
            precision: Vec::new(),
            mean_intercept: true,
            precision_intercept: true,
            rescale: None,
            clamp_eps: default_eps(),
            covariate_divisor: 1.0,
            id_column: None,
            exclude: Vec::new(),
        }
    }
}

/// A parsed numeric table.
#[derive(Debug, Clone)]
pub struct Table {
    pub headers: Vec<String>,
    /// Raw cell text, kept for identifier matching.
    pub raw: Vec<Vec<String>>,
}

impl Table {
    pub fn from_reader<R: Read>(reader: R, origin: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut raw = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Input {
                path: origin.into(),
                message: format!("row {}: {e}", i + 1),
            })?;
            raw.push(rec.iter().map(str::to_string).collect());
        }
        Ok(Self { headers, raw })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::Input {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_reader(f, &path.display().to_string())
    }

    fn index(&self, name: &str, origin: &str) -> Result<usize> {
        self.headers.iter().position(|h| h == name).ok_or_else(|| Error::Input {
            path: origin.into(),
            message: format!("missing column `{name}`"),
        })
    }

    /// Numeric column restricted to `rows`.
    pub fn numeric(&self, name: &str, rows: &[usize], origin: &str) -> Result<Vec<f64>> {
        let j = self.index(name, origin)?;
        rows.iter()
            .map(|&i| {
                let cell = &self.raw[i][j];
                cell.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::Input {
                    path: origin.into(),
                    message: format!("non-numeric value `{cell}` at row {}, column `{name}`", i + 1),
                })
            })
            .collect()
    }
}

/// Result of ingestion.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub dataset: Dataset,
    /// Number of responses moved by the boundary clamp.
    pub clamped: usize,
    /// Identifiers of the retained rows (row numbers when no id column).
    pub ids: Vec<String>,
}

pub fn ingest_csv(path: &Path, spec: &IngestSpec) -> Result<Ingested> {
    let table = Table::from_path(path)?;
    ingest_table(&table, spec, &path.display().to_string())
}

pub fn ingest_table(table: &Table, spec: &IngestSpec, origin: &str) -> Result<Ingested> {
    if table.raw.is_empty() {
        return Err(Error::Input {
            path: origin.into(),
            message: "no rows".into(),
        });
    }
    let exclude: HashSet<&str> = spec.exclude.iter().map(String::as_str).collect();
    let id_col = match &spec.id_column {
        Some(c) => Some(table.index(c, origin)?),
        None => None,
    };
    if id_col.is_none() && !exclude.is_empty() {
        return Err(Error::Config("`exclude` requires an id column".into()));
    }
    let mut rows = Vec::new();
    let mut ids = Vec::new();
    for i in 0..table.raw.len() {
        let id = match id_col {
            Some(j) => table.raw[i][j].clone(),
            None => (i + 1).to_string(),
        };
        if !exclude.contains(id.as_str()) {
            rows.push(i);
            ids.push(id);
        }
    }
    if rows.is_empty() {
        return Err(Error::Input {
            path: origin.into(),
            message: "no rows".into(),
        });
    }

    let mut z = table.numeric(&spec.response, &rows, origin)?;
    let mut clamped = 0;
    if let Some((lo, hi)) = spec.rescale {
        if !(hi > lo) {
            return Err(Error::Config(format!("rescale range ({lo}, {hi}) is empty")));
        }
        let eps = spec.clamp_eps;
        if !(eps > 0.0 && eps < 0.5) {
            return Err(Error::Config(format!("clamp epsilon {eps} must lie in (0, 0.5)")));
        }
        for (k, y) in z.iter_mut().enumerate() {
            if *y < lo || *y > hi {
                return Err(Error::Input {
                    path: origin.into(),
                    message: format!("response {y} at row {} lies outside [{lo}, {hi}]", rows[k] + 1),
                });
            }
            let r = (*y - lo) / (hi - lo);
            let c = r.clamp(eps, 1.0 - eps);
            if c != r {
                clamped += 1;
            }
            *y = c;
        }
    }

    for (k, &y) in z.iter().enumerate() {
        if !(y > BOUNDARY_TOL && y < 1.0 - BOUNDARY_TOL) {
            return Err(Error::Input {
                path: origin.into(),
                message: format!(
                    "response {y} at row {} is not inside (0,1) by more than {BOUNDARY_TOL:e}; rescale it \
                     linearly into the unit interval first (rescale option with a boundary clamp)",
                    rows[k] + 1
                ),
            });
        }
    }

    let n = rows.len();
    let design = |cols: &[String], intercept: bool| -> Result<(DMatrix<f64>, Vec<String>)> {
        let mut columns = Vec::new();
        let mut names = Vec::new();
        if intercept {
            columns.push(vec![1.0; n]);
            names.push("(intercept)".to_string());
        }
        for c in cols {
            let v = table.numeric(c, &rows, origin)?;
            columns.push(v.into_iter().map(|e| e / spec.covariate_divisor).collect());
            names.push(c.clone());
        }
        let m = DMatrix::from_fn(n, columns.len(), |i, j| columns[j][i]);
        Ok((m, names))
    };
    let (x, xn) = design(&spec.mean, spec.mean_intercept)?;
    let (v, vn) = design(&spec.precision, spec.precision_intercept)?;
    let dataset = Dataset::new(z, x, v, xn, vn)?;
    Ok(Ingested { dataset, clamped, ids })
}

/// Write a dataset as CSV with columns `z`, the mean design and the
/// precision design (prefixed `x_` and `v_`).
pub fn write_dataset_csv(data: &Dataset, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["z".to_string()];
    header.extend(data.x_names().iter().map(|s| format!("x_{s}")));
    header.extend(data.v_names().iter().map(|s| format!("v_{s}")));
    w.write_record(&header)?;
    for i in 0..data.n() {
        let mut rec = vec![format!("{:?}", data.z()[i])];
        rec.extend(data.x().row(i).iter().map(|e| format!("{e:?}")));
        rec.extend(data.v().row(i).iter().map(|e| format!("{e:?}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
