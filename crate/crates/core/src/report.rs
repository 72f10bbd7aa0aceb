//! Experiment result tables and their three output formats.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    /// Values for the report's descriptive columns, in order.
    pub labels: Vec<String>,
    pub correct: usize,
    pub total: usize,
}

impl ReportRow {
    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }

    /// Whole percent, rounded half away from zero.
    pub fn percent(&self) -> u32 {
        (100.0 * self.accuracy()).round() as u32
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub title: String,
    /// Names of the descriptive columns.
    pub columns: Vec<String>,
    pub rows: Vec<ReportRow>,
    pub metadata: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Csv,
    Records,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(ReportFormat::Table),
            "csv" => Ok(ReportFormat::Csv),
            "records" | "structured" | "jsonl" => Ok(ReportFormat::Records),
            other => Err(Error::Config(format!("unknown report format `{other}`"))),
        }
    }
}

impl ExperimentReport {
    pub fn new(title: impl Into<String>, columns: &[&str]) -> Self {
        ExperimentReport {
            title: title.into(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, labels: Vec<String>, correct: usize, total: usize) {
        debug_assert_eq!(labels.len(), self.columns.len());
        self.rows.push(ReportRow {
            labels,
            correct,
            total,
        });
    }

    pub fn meta(&mut self, key: &str, value: impl Into<String>) {
        self.metadata.insert(key.to_string(), value.into());
    }

    /// First row whose labels match `labels`.
    pub fn row(&self, labels: &[&str]) -> Option<&ReportRow> {
        self.rows.iter().find(|r| {
            r.labels
                .iter()
                .map(String::as_str)
                .eq(labels.iter().copied())
        })
    }

    pub fn emit(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Table => self.to_table(),
            ReportFormat::Csv => self.to_csv(),
            ReportFormat::Records => self.to_records(),
        }
    }

    pub fn to_table(&self) -> String {
        let mut headers: Vec<String> = self.columns.clone();
        headers.push("no. correct".into());
        headers.push("percent correct".into());
        let body: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                let mut cells = r.labels.clone();
                cells.push(format!("{}/{}", r.correct, r.total));
                cells.push(r.percent().to_string());
                cells
            })
            .collect();
        let widths: Vec<usize> = (0..headers.len())
            .map(|i| {
                body.iter()
                    .map(|r| r[i].len())
                    .chain(std::iter::once(headers[i].len()))
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.title);
        let line = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        let _ = writeln!(out, "{}", line(&headers));
        let _ = writeln!(
            out,
            "{}",
            widths
                .iter()
                .map(|w| "-".repeat(*w))
                .collect::<Vec<_>>()
                .join("  ")
        );
        for r in &body {
            let _ = writeln!(out, "{}", line(r));
        }
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}: {v}");
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = self.columns.clone();
        header.extend(["correct", "total", "percent", "accuracy"].map(String::from));
        w.write_record(&header).expect("in-memory write");
        for r in &self.rows {
            let mut rec = r.labels.clone();
            rec.push(r.correct.to_string());
            rec.push(r.total.to_string());
            rec.push(r.percent().to_string());
            rec.push(format!("{:?}", r.accuracy()));
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    /// One JSON object per line, each carrying the metadata.
    pub fn to_records(&self) -> String {
        let mut out = String::new();
        let meta: Map<String, Value> = self
            .metadata
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        for (i, r) in self.rows.iter().enumerate() {
            let mut obj = Map::new();
            obj.insert("report".into(), Value::String(self.title.clone()));
            obj.insert("row".into(), Value::from(i));
            let config: Map<String, Value> = self
                .columns
                .iter()
                .zip(&r.labels)
                .map(|(k, v)| (k.clone(), Value::String(v.clone())))
                .collect();
            obj.insert("config".into(), Value::Object(config));
            obj.insert("correct".into(), Value::from(r.correct));
            obj.insert("total".into(), Value::from(r.total));
            obj.insert("percent".into(), Value::from(r.percent()));
            obj.insert("accuracy".into(), Value::from(r.accuracy()));
            obj.insert("metadata".into(), Value::Object(meta.clone()));
            out.push_str(&serde_json::to_string(&Value::Object(obj)).expect("json"));
            out.push('\n');
        }
        out
    }

    /// Rebuilds a report from [`to_records`](Self::to_records) output.
    pub fn from_records(text: &str) -> Result<ExperimentReport> {
        let mut report: Option<ExperimentReport> = None;
        for (i, line) in text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
        {
            let err = |m: String| Error::Parse {
                line: i + 1,
                message: m,
            };
            let v: Value = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
            let obj = v
                .as_object()
                .ok_or_else(|| err("record is not an object".into()))?;
            let str_map = |key: &str| -> Result<Vec<(String, String)>> {
                obj.get(key)
                    .and_then(Value::as_object)
                    .ok_or_else(|| err(format!("missing `{key}`")))?
                    .iter()
                    .map(|(k, v)| {
                        v.as_str()
                            .map(|s| (k.clone(), s.to_string()))
                            .ok_or_else(|| err(format!("`{key}.{k}` is not a string")))
                    })
                    .collect()
            };
            let num = |key: &str| {
                obj.get(key)
                    .and_then(Value::as_u64)
                    .map(|n| n as usize)
                    .ok_or_else(|| err(format!("missing `{key}`")))
            };
            let config = str_map("config")?;
            let rep = report.get_or_insert_with(|| ExperimentReport {
                title: obj
                    .get("report")
                    .and_then(Value::as_str)
                    .unwrap_or_default()
                    .to_string(),
                columns: config.iter().map(|(k, _)| k.clone()).collect(),
                rows: Vec::new(),
                metadata: BTreeMap::new(),
            });
            if rep.metadata.is_empty() {
                rep.metadata = str_map("metadata")?.into_iter().collect();
            }
            let labels = rep
                .columns
                .iter()
                .map(|c| {
                    config
                        .iter()
                        .find(|(k, _)| k == c)
                        .map(|(_, v)| v.clone())
                        .ok_or_else(|| err(format!("missing config column `{c}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            rep.rows.push(ReportRow {
                labels,
                correct: num("correct")?,
                total: num("total")?,
            });
        }
        report.ok_or_else(|| Error::Parse {
            line: 0,
            message: "no records".into(),
        })
    }
}
