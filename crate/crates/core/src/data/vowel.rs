//! Loader for the Deterding vowel recognition data (UCI `vowel-context.data`).
//!
//! Each row holds a train/test flag, speaker number, speaker sex, ten
//! log-area-ratio features and the vowel class. Fields may be separated by
//! whitespace or commas.

use std::path::Path;

use crate::dataset::{Column, Dataset, FeatureKind, FeatureRole, FeatureSchema, Observation};
use crate::error::{Error, Result};

/// Vowel labels in class-code order.
pub const VOWEL_CLASSES: [&str; 11] = [
    "hid", "hId", "hEd", "hAd", "hYd", "had", "hOd", "hod", "hUd", "hud", "hed",
];

const EXPECTED_TOTAL: usize = 990;
const EXPECTED_TRAIN: usize = 528;
const EXPECTED_TEST: usize = 462;

/// Zero-based field positions within a row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VowelColumns {
    pub split: usize,
    pub speaker: usize,
    pub sex: usize,
    pub features: [usize; 10],
    pub class: usize,
}

impl Default for VowelColumns {
    fn default() -> Self {
        VowelColumns {
            split: 0,
            speaker: 1,
            sex: 2,
            features: [3, 4, 5, 6, 7, 8, 9, 10, 11, 12],
            class: 13,
        }
    }
}

impl VowelColumns {
    fn width(&self) -> usize {
        let mut w = self.split.max(self.speaker).max(self.sex).max(self.class);
        for &f in &self.features {
            w = w.max(f);
        }
        w + 1
    }
}

#[derive(Debug, Clone)]
pub struct VowelData {
    /// Ten primary features, then `sex` and `speaker` (contextual, discrete).
    /// The speaker is also the group tag; fold 0 = train, 1 = test.
    pub dataset: Dataset,
    /// Count mismatches against the canonical 990/528/462 layout.
    pub warnings: Vec<String>,
}

impl VowelData {
    pub fn train(&self) -> Dataset {
        self.dataset.filter(|o| o.fold == Some(0))
    }

    pub fn test(&self) -> Dataset {
        self.dataset.filter(|o| o.fold == Some(1))
    }

    pub fn train_test(&self) -> (Dataset, Dataset) {
        self.dataset.split_by(|o| o.fold == Some(0))
    }
}

pub fn vowel_schema() -> FeatureSchema {
    let mut columns: Vec<Column> = (0..10)
        .map(|i| {
            Column::new(
                format!("f{i}"),
                FeatureRole::Primary,
                FeatureKind::Continuous,
            )
        })
        .collect();
    columns.push(Column::new(
        "sex",
        FeatureRole::Contextual,
        FeatureKind::Discrete,
    ));
    columns.push(Column::new(
        "speaker",
        FeatureRole::Contextual,
        FeatureKind::Discrete,
    ));
    FeatureSchema::new(
        columns,
        VOWEL_CLASSES.iter().map(|s| s.to_string()).collect(),
    )
    .expect("static schema is valid")
}

pub fn load_vowel(path: impl AsRef<Path>, columns: &VowelColumns) -> Result<VowelData> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_vowel(&text, columns)
}

fn parse_code(field: &str, what: &str, line: usize) -> Result<u32> {
    let v: f64 = field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("{what} `{field}` is not numeric"),
    })?;
    if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
        return Err(Error::Parse {
            line,
            message: format!("{what} `{field}` is not a non-negative integer"),
        });
    }
    Ok(v as u32)
}

pub fn parse_vowel(text: &str, columns: &VowelColumns) -> Result<VowelData> {
    let width = columns.width();
    let mut observations = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let raw = raw.trim();
        if raw.is_empty() || raw.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = raw
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() < width {
            return Err(Error::Parse {
                line,
                message: format!("expected {width} fields, found {}", fields.len()),
            });
        }
        let split = parse_code(fields[columns.split], "split flag", line)?;
        if split > 1 {
            return Err(Error::Parse {
                line,
                message: format!("split flag must be 0 or 1, found {split}"),
            });
        }
        let speaker = parse_code(fields[columns.speaker], "speaker", line)?;
        let sex = parse_code(fields[columns.sex], "sex", line)?;
        if sex > 1 {
            return Err(Error::Parse {
                line,
                message: format!("sex must be 0 or 1, found {sex}"),
            });
        }
        let class = parse_code(fields[columns.class], "class", line)? as usize;
        if class >= VOWEL_CLASSES.len() {
            return Err(Error::Parse {
                line,
                message: format!("class {class} outside 0..=10"),
            });
        }
        let mut features = Vec::with_capacity(12);
        for &f in &columns.features {
            let v: f64 = fields[f].parse().map_err(|_| Error::Parse {
                line,
                message: format!("feature `{}` is not numeric", fields[f]),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("feature `{}` is not finite", fields[f]),
                });
            }
            features.push(v);
        }
        features.push(sex as f64);
        features.push(speaker as f64);
        observations.push(
            Observation::new(class, features)
                .with_group(speaker)
                .with_fold(split as u8),
        );
    }

    let dataset = Dataset::new(vowel_schema(), observations)?;
    let warnings = count_warnings(&dataset);
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(VowelData { dataset, warnings })
}

fn count_warnings(ds: &Dataset) -> Vec<String> {
    let mut warnings = Vec::new();
    let train = ds
        .observations()
        .iter()
        .filter(|o| o.fold == Some(0))
        .count();
    let test = ds.len() - train;
    if ds.len() != EXPECTED_TOTAL {
        warnings.push(format!(
            "expected {EXPECTED_TOTAL} rows, found {}",
            ds.len()
        ));
    }
    if train != EXPECTED_TRAIN {
        warnings.push(format!(
            "expected {EXPECTED_TRAIN} training rows, found {train}"
        ));
    }
    if test != EXPECTED_TEST {
        warnings.push(format!("expected {EXPECTED_TEST} test rows, found {test}"));
    }
    let train_speakers = ds.filter(|o| o.fold == Some(0)).groups();
    let test_speakers = ds.filter(|o| o.fold == Some(1)).groups();
    if train_speakers.iter().any(|s| test_speakers.contains(s)) {
        warnings.push("a speaker appears in both the training and the test split".into());
    }
    warnings
}
