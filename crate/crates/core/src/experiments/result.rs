//! Sweep results and their CSV, JSON and plot-data forms.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::config::{EmitFormat, ExperimentKind};
use crate::error::{ConifoldError, Result};

/// JSON has no NaN or infinities; they are written as `null` and read back as NaN.
mod nullable {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

mod nullable_rows {
    use super::*;

    pub fn serialize<S: Serializer>(rows: &[Vec<f64>], s: S) -> std::result::Result<S::Ok, S::Error> {
        let opt: Vec<Vec<Option<f64>>> =
            rows.iter().map(|r| r.iter().map(|v| v.is_finite().then_some(*v)).collect()).collect();
        opt.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Vec<f64>>, D::Error> {
        let opt = Vec::<Vec<Option<f64>>>::deserialize(d)?;
        Ok(opt.into_iter().map(|r| r.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect()).collect())
    }
}

/// One tolerance test. Non-gating checks are reported but do not decide `pass`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(with = "nullable")]
    pub value: f64,
    #[serde(with = "nullable")]
    pub bound: f64,
    pub pass: bool,
    pub gating: bool,
}

impl Check {
    /// Passes when `value <= bound`.
    pub fn at_most(name: &str, value: f64, bound: f64) -> Check {
        Check { name: name.into(), value, bound, pass: value <= bound, gating: true }
    }

    pub fn info(mut self) -> Check {
        self.gating = false;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// `max / min` of the swept constant.
    pub max_min_ratio: Option<f64>,
    /// Slope of `log constant` against `log t`.
    pub trend_slope: Option<f64>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl Summary {
    pub fn new(max_min_ratio: Option<f64>, trend_slope: Option<f64>, checks: Vec<Check>) -> Summary {
        let pass = checks.iter().filter(|c| c.gating).all(|c| c.pass);
        Summary { max_min_ratio, trend_slope, checks, pass }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub experiment: ExperimentKind,
    pub label: String,
    pub model: Option<String>,
    pub seed: u64,
    pub columns: Vec<String>,
    #[serde(with = "nullable_rows")]
    pub rows: Vec<Vec<f64>>,
    pub summary: Summary,
    /// Legends and remarks attached to the table.
    pub notes: Vec<String>,
}

impl SweepResult {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn failed_checks(&self) -> Vec<&Check> {
        self.summary.checks.iter().filter(|c| c.gating && !c.pass).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<SweepResult> {
        Ok(serde_json::from_str(text)?)
    }

    /// The table as CSV; empty cells mark undefined values.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|&v| fmt_value(v)))?;
        }
        let bytes = w.into_inner().map_err(|e| ConifoldError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Two-column curves: one per class for the region atlas, otherwise one per
    /// column against the first column.
    pub fn curves(&self) -> BTreeMap<String, Vec<(f64, f64)>> {
        let mut out: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
        if self.experiment == ExperimentKind::RegionAtlas {
            let class = self.columns.iter().position(|c| c == "class").unwrap_or(2);
            for r in &self.rows {
                out.entry(class_name(r[class]).to_string()).or_default().push((r[0], r[1]));
            }
            return out;
        }
        for (j, name) in self.columns.iter().enumerate().skip(1) {
            let pts = self.rows.iter().filter(|r| r[0].is_finite() && r[j].is_finite()).map(|r| (r[0], r[j])).collect();
            out.insert(name.clone(), pts);
        }
        out
    }

    /// Writes the requested formats into `dir`; returns the written paths.
    pub fn emit(&self, formats: &[EmitFormat], dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for f in formats {
            match f {
                EmitFormat::Csv => {
                    let p = dir.join(format!("{}.csv", self.label));
                    std::fs::write(&p, self.to_csv()?)?;
                    written.push(p);
                }
                EmitFormat::Json => {
                    let p = dir.join(format!("{}.json", self.label));
                    std::fs::write(&p, self.to_json()? + "\n")?;
                    written.push(p);
                }
                EmitFormat::Plotdata => {
                    let xname = if self.experiment == ExperimentKind::RegionAtlas { "beta_1 beta_2" } else { &self.columns[0] };
                    for (name, pts) in self.curves() {
                        let p = dir.join(format!("{}.{name}.dat", self.label));
                        let mut file = std::io::BufWriter::new(std::fs::File::create(&p)?);
                        writeln!(file, "# {xname} {name}")?;
                        for (x, y) in pts {
                            writeln!(file, "{} {}", fmt_value(x), fmt_value(y))?;
                        }
                        file.flush()?;
                        written.push(p);
                    }
                }
            }
        }
        Ok(written)
    }
}

fn fmt_value(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

/// Region codes used by the atlas.
pub const CLASS_NAMES: [&str; 5] = ["exceptional", "fredholm", "injective", "surjective", "isomorphism"];

pub fn class_name(code: f64) -> &'static str {
    CLASS_NAMES.get(code as usize).copied().unwrap_or("unknown")
}
