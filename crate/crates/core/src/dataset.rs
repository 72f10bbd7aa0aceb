//! Row-oriented data model shared by every other module.
//!
//! Every feature column lives in one `f64` vector per observation. Discrete
//! columns (speaker id, sex, synthetic categories) hold small non-negative
//! integer codes and are marked [`FeatureKind::Discrete`] in the schema.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureRole {
    Primary,
    Contextual,
    Irrelevant,
}

impl FeatureRole {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureRole::Primary => "primary",
            FeatureRole::Contextual => "contextual",
            FeatureRole::Irrelevant => "irrelevant",
        }
    }
}

impl std::str::FromStr for FeatureRole {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "primary" => Ok(FeatureRole::Primary),
            "contextual" => Ok(FeatureRole::Contextual),
            "irrelevant" => Ok(FeatureRole::Irrelevant),
            other => Err(Error::Config(format!("unknown feature role `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Continuous,
    Discrete,
}

impl FeatureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::Continuous => "continuous",
            FeatureKind::Discrete => "discrete",
        }
    }
}

impl std::str::FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "continuous" => Ok(FeatureKind::Continuous),
            "discrete" => Ok(FeatureKind::Discrete),
            other => Err(Error::Config(format!("unknown feature kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub role: FeatureRole,
    pub kind: FeatureKind,
}

impl Column {
    pub fn new(name: impl Into<String>, role: FeatureRole, kind: FeatureKind) -> Self {
        Column {
            name: name.into(),
            role,
            kind,
        }
    }
}

/// Feature columns plus the finite class set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    columns: Vec<Column>,
    class_values: Vec<String>,
}

impl FeatureSchema {
    pub fn new(columns: Vec<Column>, class_values: Vec<String>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::Config("schema needs at least one feature".into()));
        }
        if class_values.is_empty() {
            return Err(Error::Config("schema needs at least one class".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for c in &columns {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::Config(format!("duplicate column `{}`", c.name)));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for c in &class_values {
            if !seen.insert(c.as_str()) {
                return Err(Error::Config(format!("duplicate class `{c}`")));
            }
        }
        Ok(FeatureSchema {
            columns,
            class_values,
        })
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn class_values(&self) -> &[String] {
        &self.class_values
    }

    pub fn n_classes(&self) -> usize {
        self.class_values.len()
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.class_values.iter().position(|c| c == name)
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    /// Indices of the columns with `role`, in schema order.
    pub fn indices_with_role(&self, role: FeatureRole) -> Vec<usize> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.role == role)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn primary_indices(&self) -> Vec<usize> {
        self.indices_with_role(FeatureRole::Primary)
    }

    pub fn contextual_indices(&self) -> Vec<usize> {
        self.indices_with_role(FeatureRole::Contextual)
    }

    pub(crate) fn with_columns(&self, columns: Vec<Column>) -> FeatureSchema {
        FeatureSchema {
            columns,
            class_values: self.class_values.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    /// Index into the schema's class values.
    pub label: usize,
    pub features: Vec<f64>,
    /// Discrete context key carried outside the feature vector (speaker id).
    pub group: Option<u32>,
    /// Member of the healthy baseline set.
    pub baseline: bool,
    /// Source partition (train/test flag, context regime).
    pub fold: Option<u8>,
}

impl Observation {
    pub fn new(label: usize, features: Vec<f64>) -> Self {
        Observation {
            label,
            features,
            group: None,
            baseline: false,
            fold: None,
        }
    }

    pub fn with_group(mut self, group: u32) -> Self {
        self.group = Some(group);
        self
    }

    pub fn with_baseline(mut self, baseline: bool) -> Self {
        self.baseline = baseline;
        self
    }

    pub fn with_fold(mut self, fold: u8) -> Self {
        self.fold = Some(fold);
        self
    }

    /// Values of the given columns, in order.
    pub fn select(&self, columns: &[usize]) -> Vec<f64> {
        columns.iter().map(|&c| self.features[c]).collect()
    }
}

/// One schema violation found by [`Dataset::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub row: usize,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "row {}: {}", self.row, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    schema: FeatureSchema,
    observations: Vec<Observation>,
}

impl Dataset {
    /// Builds a dataset and rejects it if any row violates the schema.
    pub fn new(schema: FeatureSchema, observations: Vec<Observation>) -> Result<Self> {
        let ds = Dataset {
            schema,
            observations,
        };
        ds.validate().map_err(Error::Invalid)?;
        Ok(ds)
    }

    /// Builds without validation. Callers must uphold the schema invariants.
    pub(crate) fn from_parts(schema: FeatureSchema, observations: Vec<Observation>) -> Self {
        Dataset {
            schema,
            observations,
        }
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.observations.iter().map(|o| o.label).collect()
    }

    /// Lists every row that breaks the schema; `Ok` when there are none.
    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        let n = self.schema.len();
        let n_classes = self.schema.n_classes();
        let mut violations = Vec::new();
        for (row, obs) in self.observations.iter().enumerate() {
            if obs.features.len() != n {
                violations.push(Violation {
                    row,
                    message: format!("expected {n} features, found {}", obs.features.len()),
                });
                continue;
            }
            if obs.label >= n_classes {
                violations.push(Violation {
                    row,
                    message: format!("label {} is not in the class set", obs.label),
                });
            }
            for (col, (&v, column)) in obs.features.iter().zip(self.schema.columns()).enumerate() {
                if !v.is_finite() {
                    violations.push(Violation {
                        row,
                        message: format!("column {col} (`{}`) is not finite", column.name),
                    });
                } else if column.kind == FeatureKind::Discrete && (v < 0.0 || v.fract() != 0.0) {
                    violations.push(Violation {
                        row,
                        message: format!(
                            "column {col} (`{}`) is discrete but holds {v}",
                            column.name
                        ),
                    });
                }
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(violations)
        }
    }

    /// Keeps only the columns with `role`; rows and labels are untouched.
    pub fn project(&self, role: FeatureRole) -> Result<Dataset> {
        let keep = self.schema.indices_with_role(role);
        if keep.is_empty() {
            return Err(Error::NoColumnsWithRole(role));
        }
        Ok(self.select_columns(&keep))
    }

    /// Reorders/subsets columns by index.
    pub fn select_columns(&self, keep: &[usize]) -> Dataset {
        let columns = keep
            .iter()
            .map(|&i| self.schema.columns()[i].clone())
            .collect();
        let observations = self
            .observations
            .iter()
            .map(|o| Observation {
                features: o.select(keep),
                ..o.clone()
            })
            .collect();
        Dataset::from_parts(self.schema.with_columns(columns), observations)
    }

    /// Rows satisfying `pred` first, the rest second; order preserved in both.
    pub fn split_by<F>(&self, mut pred: F) -> (Dataset, Dataset)
    where
        F: FnMut(&Observation) -> bool,
    {
        let (yes, no): (Vec<_>, Vec<_>) = self.observations.iter().cloned().partition(|o| pred(o));
        (
            Dataset::from_parts(self.schema.clone(), yes),
            Dataset::from_parts(self.schema.clone(), no),
        )
    }

    pub fn filter<F>(&self, pred: F) -> Dataset
    where
        F: FnMut(&Observation) -> bool,
    {
        self.split_by(pred).0
    }

    /// Primary-feature vectors of every row, in row order.
    pub fn primary_matrix(&self) -> Vec<Vec<f64>> {
        let cols = self.schema.primary_indices();
        self.observations.iter().map(|o| o.select(&cols)).collect()
    }

    /// Distinct group tags in ascending order.
    pub fn groups(&self) -> Vec<u32> {
        let mut g: Vec<u32> = self.observations.iter().filter_map(|o| o.group).collect();
        g.sort_unstable();
        g.dedup();
        g
    }

    pub(crate) fn map_observations<F>(&self, schema: FeatureSchema, f: F) -> Result<Dataset>
    where
        F: FnMut(&Observation) -> Result<Observation>,
    {
        let observations = self
            .observations
            .iter()
            .map(f)
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset::from_parts(schema, observations))
    }
}
