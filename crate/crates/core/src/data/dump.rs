//! Canonical CSV interchange format.
//!
//! ```text
//! # classes=healthy;fault1
//! class,fold,group,baseline,p0:primary:continuous,c0:contextual:continuous
//! healthy,0,0,1,0.25,-1.2
//! ```
//!
//! The `# classes=` line fixes class order and is optional on input (first
//! appearance order otherwise). `fold`, `group` and `baseline` are optional
//! on input; empty cells mean "absent". Feature headers default to
//! `primary:continuous` when role or kind is omitted.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::dataset::{Column, Dataset, FeatureKind, FeatureRole, FeatureSchema, Observation};
use crate::error::{Error, Result};

const META: [&str; 4] = ["class", "fold", "group", "baseline"];

pub fn write_dump(dataset: &Dataset) -> String {
    let schema = dataset.schema();
    let mut out = String::new();
    let _ = writeln!(out, "# classes={}", schema.class_values().join(";"));
    let mut header: Vec<String> = META.iter().map(|s| s.to_string()).collect();
    header.extend(
        schema
            .columns()
            .iter()
            .map(|c| format!("{}:{}:{}", c.name, c.role.as_str(), c.kind.as_str())),
    );
    out.push_str(&header.join(","));
    out.push('\n');
    for o in dataset.observations() {
        let mut cells = vec![
            schema.class_values()[o.label].clone(),
            o.fold.map(|f| f.to_string()).unwrap_or_default(),
            o.group.map(|g| g.to_string()).unwrap_or_default(),
            (o.baseline as u8).to_string(),
        ];
        cells.extend(o.features.iter().map(|v| format!("{v:?}")));
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Short content hash of the canonical dump.
pub fn fingerprint(dataset: &Dataset) -> String {
    let digest = Sha256::digest(write_dump(dataset).as_bytes());
    hex::encode(&digest[..8])
}

pub fn load_dump(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_dump(&text)
}

fn parse_header_column(h: &str) -> Result<Column> {
    let mut parts = h.split(':');
    let name = parts.next().unwrap_or_default().trim();
    if name.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "empty column name".into(),
        });
    }
    let role = parts
        .next()
        .map(str::parse)
        .transpose()?
        .unwrap_or(FeatureRole::Primary);
    let kind = parts
        .next()
        .map(str::parse)
        .transpose()?
        .unwrap_or(FeatureKind::Continuous);
    Ok(Column::new(name, role, kind))
}

pub fn parse_dump(text: &str) -> Result<Dataset> {
    let mut classes: Option<Vec<String>> = None;
    let mut skipped = 0;
    for l in text.lines() {
        let t = l.trim();
        if t.is_empty() || t.starts_with('#') {
            if let Some(list) = t.strip_prefix("# classes=") {
                classes = Some(list.split(';').map(|s| s.trim().to_string()).collect());
            }
            skipped += 1;
        } else {
            break;
        }
    }
    let body: String = text.lines().skip(skipped).collect::<Vec<_>>().join("\n");
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let line_of = |pos: Option<&csv::Position>| pos.map_or(0, |p| p.line() as usize) + skipped;
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse {
            line: skipped + 1,
            message: e.to_string(),
        })?
        .clone();

    let mut meta = [None; 4];
    let mut feature_cols = Vec::new();
    let mut columns = Vec::new();
    for (i, h) in headers.iter().enumerate() {
        if let Some(m) = META.iter().position(|&m| m == h) {
            meta[m] = Some(i);
        } else {
            columns.push(parse_header_column(h).map_err(|e| match e {
                Error::Parse { message, .. } => Error::Parse {
                    line: skipped + 1,
                    message,
                },
                other => other,
            })?);
            feature_cols.push(i);
        }
    }
    let class_col = meta[0].ok_or(Error::Parse {
        line: skipped + 1,
        message: "missing `class` column".into(),
    })?;

    let mut rows = Vec::new();
    let mut seen_classes: Vec<String> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: line_of(e.position()),
            message: e.to_string(),
        })?;
        let line = line_of(rec.position());
        let class = rec[class_col].to_string();
        if !seen_classes.contains(&class) {
            seen_classes.push(class.clone());
        }
        let opt_num = |idx: Option<usize>, what: &str| -> Result<Option<u32>> {
            match idx.map(|i| &rec[i]) {
                None | Some("") => Ok(None),
                Some(s) => s.parse().map(Some).map_err(|_| Error::Parse {
                    line,
                    message: format!("{what} `{s}` is not a non-negative integer"),
                }),
            }
        };
        let fold = opt_num(meta[1], "fold")?;
        let group = opt_num(meta[2], "group")?;
        let baseline = opt_num(meta[3], "baseline")?.unwrap_or(0) != 0;
        let features = feature_cols
            .iter()
            .map(|&i| {
                rec[i].parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    message: format!(
                        "value `{}` in column `{}` is not numeric",
                        &rec[i], &headers[i]
                    ),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        let fold = fold
            .map(|f| {
                u8::try_from(f).map_err(|_| Error::Parse {
                    line,
                    message: format!("fold {f} out of range"),
                })
            })
            .transpose()?;
        rows.push((line, class, fold, group, baseline, features));
    }

    let class_values = match classes {
        Some(c) => c,
        None => seen_classes,
    };
    let schema = FeatureSchema::new(columns, class_values)?;
    let mut observations = Vec::with_capacity(rows.len());
    for (line, class, fold, group, baseline, features) in rows {
        let label = schema.class_index(&class).ok_or_else(|| Error::Parse {
            line,
            message: format!("class `{class}` is not in the declared class list"),
        })?;
        observations.push(Observation {
            label,
            features,
            group,
            baseline,
            fold,
        });
    }
    Dataset::new(schema, observations)
}
