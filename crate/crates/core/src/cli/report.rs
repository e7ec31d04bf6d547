//! Reports: deterministic JSON and CSV renderings.

use super::spec::ExperimentSpec;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

/// Named metrics in column order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Metrics(pub Vec<(&'static str, f64)>);

impl Serialize for Metrics {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl Metrics {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.iter().find(|(k, _)| *k == name).map(|(_, v)| *v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseResult {
    pub index: usize,
    pub label: String,
    pub pass: bool,
    pub metrics: Metrics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub detail: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub cases: usize,
    pub passed: usize,
    pub failed: usize,
    pub pass: bool,
}

/// Everything except wall-clock time, which lives in [`Timings`] so the
/// report stays byte-identical across runs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub spec: ExperimentSpec,
    pub columns: Vec<&'static str>,
    pub cases: Vec<CaseResult>,
    pub summary: Summary,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Timings {
    pub name: String,
    pub total_seconds: f64,
    pub case_seconds: Vec<f64>,
}

impl Report {
    pub fn new(spec: ExperimentSpec, cases: Vec<CaseResult>) -> Self {
        let passed = cases.iter().filter(|c| c.pass).count();
        Report {
            columns: spec.kind.metrics().to_vec(),
            summary: Summary {
                cases: cases.len(),
                passed,
                failed: cases.len() - passed,
                pass: passed == cases.len(),
            },
            spec,
            cases,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Both,
}

fn csv_number(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Renders the report. JSON fields keep declaration order; CSV has one row
/// per case with columns `case,label,pass,<metrics>,error`.
pub fn emit_report(report: &Report, csv: bool) -> Vec<u8> {
    if !csv {
        let mut out = serde_json::to_vec_pretty(report).expect("reports serialize");
        out.push(b'\n');
        return out;
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["case", "label", "pass"];
    header.extend(&report.columns);
    header.push("error");
    w.write_record(&header).expect("in-memory write");
    for case in &report.cases {
        let mut row = vec![case.index.to_string(), case.label.clone(), case.pass.to_string()];
        for col in &report.columns {
            row.push(case.metrics.get(col).map(csv_number).unwrap_or_default());
        }
        row.push(case.error.clone().unwrap_or_default());
        w.write_record(&row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}
