//! Context-free and contextual normalization of primary features.
//!
//! Contextual normalization maps each primary feature to
//! `v = (x - mu(c)) / sigma(c)` where `mu` and `sigma` come from a
//! [`ContextEstimator`] fitted on reference rows. Only primary columns are
//! transformed; contextual columns pass through untouched.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, FeatureKind, FeatureRole, Observation};
use crate::error::{DegenerateFeature, Error, Result};
use crate::linalg::{design_with_intercept, solve_least_squares};
use crate::stats::{column_moments, floor_sigma, mean, sample_std, SIGMA_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    None,
    MinMax,
    AvgDev,
    Percentile,
    BaselineAvgDev,
    Contextual,
}

/// The context-free methods that [`fit_plain`] accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlainMethod {
    MinMax,
    AvgDev,
    Percentile,
    BaselineAvgDev,
}

impl PlainMethod {
    pub fn name(self) -> &'static str {
        match self {
            PlainMethod::MinMax => "minmax",
            PlainMethod::AvgDev => "avgdev",
            PlainMethod::Percentile => "percentile",
            PlainMethod::BaselineAvgDev => "baseline-avgdev",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub std: f64,
}

impl Moments {
    pub const STANDARD: Moments = Moments {
        mean: 0.0,
        std: 1.0,
    };

    fn floored(mean: f64, std: f64) -> Moments {
        Moments {
            mean,
            std: floor_sigma(std),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
enum Params {
    None,
    MinMax {
        min: Vec<f64>,
        max: Vec<f64>,
    },
    AvgDev {
        moments: Vec<Moments>,
        baseline: bool,
    },
    Percentile {
        sorted: Vec<Vec<f64>>,
    },
    Contextual {
        estimator: ContextEstimator,
    },
}

/// Fitted per-feature transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationModel {
    /// Primary column indices in the schema the model was fitted on.
    columns: Vec<usize>,
    names: Vec<String>,
    params: Params,
}

impl NormalizationModel {
    /// A model that leaves every value as is.
    pub fn identity(dataset: &Dataset) -> NormalizationModel {
        let columns = dataset.schema().primary_indices();
        NormalizationModel {
            names: names_of(dataset, &columns),
            columns,
            params: Params::None,
        }
    }

    pub fn contextual(estimator: ContextEstimator) -> NormalizationModel {
        NormalizationModel {
            columns: estimator.primary.clone(),
            names: estimator.names.clone(),
            params: Params::Contextual { estimator },
        }
    }

    pub fn method(&self) -> Method {
        match &self.params {
            Params::None => Method::None,
            Params::MinMax { .. } => Method::MinMax,
            Params::AvgDev {
                baseline: false, ..
            } => Method::AvgDev,
            Params::AvgDev { baseline: true, .. } => Method::BaselineAvgDev,
            Params::Percentile { .. } => Method::Percentile,
            Params::Contextual { .. } => Method::Contextual,
        }
    }

    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    pub fn feature_names(&self) -> &[String] {
        &self.names
    }

    /// (min, max) per feature for minmax models.
    pub fn min_max(&self) -> Option<Vec<(f64, f64)>> {
        match &self.params {
            Params::MinMax { min, max } => {
                Some(min.iter().copied().zip(max.iter().copied()).collect())
            }
            _ => None,
        }
    }

    /// (mean, stddev) per feature for avgdev-style models.
    pub fn moments(&self) -> Option<&[Moments]> {
        match &self.params {
            Params::AvgDev { moments, .. } => Some(moments),
            _ => None,
        }
    }

    pub fn estimator(&self) -> Option<&ContextEstimator> {
        match &self.params {
            Params::Contextual { estimator } => Some(estimator),
            _ => None,
        }
    }

    /// Transforms a vector of primary-feature values with a context-free model.
    pub fn apply_plain(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.columns.len() {
            return Err(Error::Shape {
                expected: self.columns.len(),
                found: x.len(),
            });
        }
        Ok(match &self.params {
            Params::None => x.to_vec(),
            Params::MinMax { min, max } => x
                .iter()
                .zip(min.iter().zip(max))
                .map(|(v, (lo, hi))| (v - lo) / (hi - lo))
                .collect(),
            Params::AvgDev { moments, .. } => x
                .iter()
                .zip(moments)
                .map(|(v, m)| (v - m.mean) / m.std)
                .collect(),
            Params::Percentile { sorted } => {
                x.iter().zip(sorted).map(|(v, s)| mid_rank(s, *v)).collect()
            }
            Params::Contextual { .. } => {
                return Err(Error::Config(
                    "contextual model needs a context; use apply".into(),
                ))
            }
        })
    }

    /// Normalizes the primary columns of one observation.
    pub fn apply(&self, obs: &Observation) -> Result<Observation> {
        let x = obs.select(&self.columns);
        let v = match &self.params {
            Params::Contextual { estimator } => {
                let ctx = estimator.context_of(obs)?;
                contextual_normalize(estimator, &x, &ctx)?
            }
            _ => self.apply_plain(&x)?,
        };
        let mut out = obs.clone();
        for (&c, val) in self.columns.iter().zip(v) {
            out.features[c] = val;
        }
        Ok(out)
    }

    /// Normalizes every row. Transformed columns become continuous.
    pub fn apply_dataset(&self, dataset: &Dataset) -> Result<Dataset> {
        let schema = dataset.schema();
        if schema.primary_indices() != self.columns {
            return Err(Error::SchemaMismatch(
                "primary columns differ from those the model was fitted on".into(),
            ));
        }
        let mut columns = schema.columns().to_vec();
        for &c in &self.columns {
            columns[c].kind = FeatureKind::Continuous;
        }
        dataset.map_observations(schema.with_columns(columns), |o| self.apply(o))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(s: &str) -> Result<NormalizationModel> {
        serde_json::from_str(s).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })
    }
}

fn names_of(dataset: &Dataset, columns: &[usize]) -> Vec<String> {
    columns
        .iter()
        .map(|&c| dataset.schema().columns()[c].name.clone())
        .collect()
}

/// Fraction of reference values strictly below `x` plus half the tied mass.
fn mid_rank(sorted: &[f64], x: f64) -> f64 {
    let below = sorted.partition_point(|&v| v < x);
    let upto = sorted.partition_point(|&v| v <= x);
    let frac = (below as f64 + 0.5 * (upto - below) as f64) / sorted.len() as f64;
    frac.clamp(0.0, 1.0)
}

/// Fits one of the context-free normalizations on the primary columns of `train`.
pub fn fit_plain(train: &Dataset, method: PlainMethod) -> Result<NormalizationModel> {
    let columns = train.schema().primary_indices();
    if columns.is_empty() {
        return Err(Error::NoColumnsWithRole(FeatureRole::Primary));
    }
    let names = names_of(train, &columns);
    let rows: Vec<Vec<f64>> = match method {
        PlainMethod::BaselineAvgDev => train
            .observations()
            .iter()
            .filter(|o| o.baseline)
            .map(|o| o.select(&columns))
            .collect(),
        _ => train
            .observations()
            .iter()
            .map(|o| o.select(&columns))
            .collect(),
    };
    let needed = match method {
        PlainMethod::AvgDev | PlainMethod::BaselineAvgDev => 2,
        _ => 1,
    };
    if rows.len() < needed {
        return Err(Error::InsufficientData(format!(
            "{} needs at least {needed} rows, got {}",
            method.name(),
            rows.len()
        )));
    }

    let params = match method {
        PlainMethod::MinMax => {
            let mut min = vec![f64::INFINITY; columns.len()];
            let mut max = vec![f64::NEG_INFINITY; columns.len()];
            for r in &rows {
                for (j, &v) in r.iter().enumerate() {
                    min[j] = min[j].min(v);
                    max[j] = max[j].max(v);
                }
            }
            let bad: Vec<DegenerateFeature> = names
                .iter()
                .zip(min.iter().zip(&max))
                .filter(|(_, (lo, hi))| lo == hi)
                .map(|(n, (lo, _))| DegenerateFeature {
                    feature: n.clone(),
                    reason: format!("constant value {lo}"),
                })
                .collect();
            if !bad.is_empty() {
                return Err(Error::Degenerate(bad));
            }
            Params::MinMax { min, max }
        }
        PlainMethod::AvgDev | PlainMethod::BaselineAvgDev => {
            let raw = column_moments(rows.iter().map(|r| r.as_slice()), columns.len());
            let bad: Vec<DegenerateFeature> = names
                .iter()
                .zip(&raw)
                .filter(|(_, (_, s))| *s < SIGMA_FLOOR)
                .map(|(n, (_, s))| DegenerateFeature {
                    feature: n.clone(),
                    reason: format!("stddev {s} below floor"),
                })
                .collect();
            if !bad.is_empty() {
                return Err(Error::Degenerate(bad));
            }
            Params::AvgDev {
                moments: raw
                    .into_iter()
                    .map(|(m, s)| Moments::floored(m, s))
                    .collect(),
                baseline: method == PlainMethod::BaselineAvgDev,
            }
        }
        PlainMethod::Percentile => {
            let mut sorted: Vec<Vec<f64>> = vec![Vec::with_capacity(rows.len()); columns.len()];
            for r in &rows {
                for (s, &v) in sorted.iter_mut().zip(r) {
                    s.push(v);
                }
            }
            for s in &mut sorted {
                s.sort_by(f64::total_cmp);
            }
            Params::Percentile { sorted }
        }
    };
    Ok(NormalizationModel {
        columns,
        names,
        params,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    /// Per-group mean and stddev keyed on the observation's group tag.
    GroupStats,
    /// Mean and stddev of the k nearest reference rows in context space.
    KnnRegress,
    /// Least-squares fit on the context; stddev from the residuals.
    LinearRegress,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::GroupStats => "group",
            EstimatorKind::KnnRegress => "knn",
            EstimatorKind::LinearRegress => "linear",
        }
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "group" | "group-stats" => Ok(EstimatorKind::GroupStats),
            "knn" | "knn-regress" | "ibl" => Ok(EstimatorKind::KnnRegress),
            "linear" | "linear-regress" | "mlr" => Ok(EstimatorKind::LinearRegress),
            other => Err(Error::Config(format!("unknown estimator `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorOptions {
    /// Neighbours for the knn estimator; at least 2 so a stddev exists.
    pub k: usize,
    /// Fit knn/linear estimators on baseline-flagged rows only.
    pub baseline_only: bool,
    /// Context columns for knn/linear; `None` means every contextual column.
    pub context_columns: Option<Vec<usize>>,
    /// Group-stats answers unseen groups with global moments instead of failing.
    pub global_fallback: bool,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        EstimatorOptions {
            k: 5,
            baseline_only: true,
            context_columns: None,
            global_fallback: false,
        }
    }
}

/// Context value used to query an estimator.
#[derive(Debug, Clone, PartialEq)]
pub enum Context {
    Group(u32),
    Point(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum EstimatorState {
    GroupStats {
        #[serde(with = "group_entries")]
        groups: BTreeMap<u32, Vec<Moments>>,
        fallback: Option<Vec<Moments>>,
    },
    KnnRegress {
        k: usize,
        center: Vec<f64>,
        scale: Vec<f64>,
        /// Standardized contexts of the reference rows.
        points: Vec<Vec<f64>>,
        /// Primary values of the reference rows.
        values: Vec<Vec<f64>>,
    },
    LinearRegress {
        /// Per feature: intercept followed by one slope per context dimension.
        coefficients: Vec<Vec<f64>>,
        sigma: Vec<f64>,
        intercept_only: bool,
    },
}

/// Group maps as `[[group, moments], ...]`.
mod group_entries {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::Moments;

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<u32, Vec<Moments>>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        map.iter().collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<BTreeMap<u32, Vec<Moments>>, D::Error> {
        Ok(Vec::<(u32, Vec<Moments>)>::deserialize(d)?
            .into_iter()
            .collect())
    }
}

/// Maps a context to per-feature expected value and expected variation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextEstimator {
    primary: Vec<usize>,
    names: Vec<String>,
    context: Vec<usize>,
    state: EstimatorState,
}

impl ContextEstimator {
    pub fn kind(&self) -> EstimatorKind {
        match self.state {
            EstimatorState::GroupStats { .. } => EstimatorKind::GroupStats,
            EstimatorState::KnnRegress { .. } => EstimatorKind::KnnRegress,
            EstimatorState::LinearRegress { .. } => EstimatorKind::LinearRegress,
        }
    }

    pub fn n_features(&self) -> usize {
        self.primary.len()
    }

    pub fn context_columns(&self) -> &[usize] {
        &self.context
    }

    /// Whether a singular context design forced an intercept-only fit.
    pub fn intercept_only(&self) -> bool {
        matches!(
            self.state,
            EstimatorState::LinearRegress {
                intercept_only: true,
                ..
            }
        )
    }

    /// Groups seen while fitting a group-stats estimator.
    pub fn groups(&self) -> Vec<u32> {
        match &self.state {
            EstimatorState::GroupStats { groups, .. } => groups.keys().copied().collect(),
            _ => Vec::new(),
        }
    }

    /// Extracts the context this estimator keys on from an observation.
    pub fn context_of(&self, obs: &Observation) -> Result<Context> {
        match self.state {
            EstimatorState::GroupStats { .. } => {
                obs.group.map(Context::Group).ok_or(Error::MissingGroup)
            }
            _ => Ok(Context::Point(obs.select(&self.context))),
        }
    }

    /// Per-feature (mu, sigma) at `ctx`. Every sigma is at least the floor.
    pub fn moments(&self, ctx: &Context) -> Result<Vec<Moments>> {
        match (&self.state, ctx) {
            (EstimatorState::GroupStats { groups, fallback }, Context::Group(g)) => groups
                .get(g)
                .or(fallback.as_ref())
                .cloned()
                .ok_or(Error::UnknownGroup(*g)),
            (
                EstimatorState::KnnRegress {
                    k,
                    center,
                    scale,
                    points,
                    values,
                },
                Context::Point(c),
            ) => {
                check_len(center.len(), c.len())?;
                let q: Vec<f64> = c
                    .iter()
                    .zip(center.iter().zip(scale))
                    .map(|(v, (m, s))| (v - m) / s)
                    .collect();
                let mut order: Vec<(f64, usize)> = points
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (p.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum(), i))
                    .collect();
                order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let mut chosen: Vec<usize> = order.iter().take(*k).map(|&(_, i)| i).collect();
                // summation in row order keeps k = all identical to a global fit
                chosen.sort_unstable();
                let raw = column_moments(
                    chosen.iter().map(|&i| values[i].as_slice()),
                    self.primary.len(),
                );
                Ok(raw
                    .into_iter()
                    .map(|(m, s)| Moments::floored(m, s))
                    .collect())
            }
            (
                EstimatorState::LinearRegress {
                    coefficients,
                    sigma,
                    ..
                },
                Context::Point(c),
            ) => {
                check_len(self.context.len(), c.len())?;
                Ok(coefficients
                    .iter()
                    .zip(sigma)
                    .map(|(beta, &s)| {
                        let mu = beta[0] + beta[1..].iter().zip(c).map(|(b, x)| b * x).sum::<f64>();
                        Moments { mean: mu, std: s }
                    })
                    .collect())
            }
            _ => Err(Error::Config(format!(
                "{} estimator cannot be queried with {ctx:?}",
                self.kind().name()
            ))),
        }
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::Shape { expected, found });
    }
    Ok(())
}

/// Fits a context estimator for the primary columns of `train`.
pub fn fit_context_estimator(
    train: &Dataset,
    kind: EstimatorKind,
    options: &EstimatorOptions,
) -> Result<ContextEstimator> {
    let schema = train.schema();
    let primary = schema.primary_indices();
    if primary.is_empty() {
        return Err(Error::NoColumnsWithRole(FeatureRole::Primary));
    }
    let names = names_of(train, &primary);
    let context = match &options.context_columns {
        Some(c) => c.clone(),
        None => schema.contextual_indices(),
    };
    let width = primary.len();

    let state = match kind {
        EstimatorKind::GroupStats => {
            let mut by_group: BTreeMap<u32, Vec<Vec<f64>>> = BTreeMap::new();
            for o in train.observations() {
                let g = o.group.ok_or(Error::MissingGroup)?;
                by_group.entry(g).or_default().push(o.select(&primary));
            }
            if let Some((g, rows)) = by_group.iter().find(|(_, r)| r.len() < 2) {
                return Err(Error::InsufficientData(format!(
                    "group {g} has {} row(s); group statistics need at least 2",
                    rows.len()
                )));
            }
            let groups = by_group
                .iter()
                .map(|(&g, rows)| {
                    let m = column_moments(rows.iter().map(|r| r.as_slice()), width);
                    (
                        g,
                        m.into_iter().map(|(m, s)| Moments::floored(m, s)).collect(),
                    )
                })
                .collect();
            let fallback = options.global_fallback.then(|| {
                let all: Vec<Vec<f64>> = train
                    .observations()
                    .iter()
                    .map(|o| o.select(&primary))
                    .collect();
                column_moments(all.iter().map(|r| r.as_slice()), width)
                    .into_iter()
                    .map(|(m, s)| Moments::floored(m, s))
                    .collect()
            });
            EstimatorState::GroupStats { groups, fallback }
        }
        EstimatorKind::KnnRegress | EstimatorKind::LinearRegress => {
            if context.is_empty() {
                return Err(Error::NoColumnsWithRole(FeatureRole::Contextual));
            }
            let reference: Vec<&Observation> = train
                .observations()
                .iter()
                .filter(|o| o.baseline || !options.baseline_only)
                .collect();
            let d = context.len();
            let needed = match kind {
                EstimatorKind::KnnRegress => options.k.max(d + 2),
                _ => d + 2,
            };
            if reference.len() < needed {
                return Err(Error::InsufficientData(format!(
                    "{} estimator needs at least {needed} reference rows, got {}",
                    kind.name(),
                    reference.len()
                )));
            }
            let ctx_rows: Vec<Vec<f64>> = reference.iter().map(|o| o.select(&context)).collect();
            let values: Vec<Vec<f64>> = reference.iter().map(|o| o.select(&primary)).collect();
            if kind == EstimatorKind::KnnRegress {
                if options.k < 2 {
                    return Err(Error::Config("knn estimator needs k >= 2".into()));
                }
                let cm = column_moments(ctx_rows.iter().map(|r| r.as_slice()), d);
                let center: Vec<f64> = cm.iter().map(|&(m, _)| m).collect();
                let scale: Vec<f64> = cm.iter().map(|&(_, s)| floor_sigma(s)).collect();
                let points = ctx_rows
                    .iter()
                    .map(|r| {
                        r.iter()
                            .zip(center.iter().zip(&scale))
                            .map(|(v, (m, s))| (v - m) / s)
                            .collect()
                    })
                    .collect();
                EstimatorState::KnnRegress {
                    k: options.k,
                    center,
                    scale,
                    points,
                    values,
                }
            } else {
                fit_linear_state(&ctx_rows, &values, d, width)
            }
        }
    };
    Ok(ContextEstimator {
        primary,
        names,
        context,
        state,
    })
}

fn fit_linear_state(
    ctx_rows: &[Vec<f64>],
    values: &[Vec<f64>],
    d: usize,
    width: usize,
) -> EstimatorState {
    let n = ctx_rows.len();
    let design = design_with_intercept(ctx_rows, d);
    let targets = nalgebra::DMatrix::from_fn(n, width, |i, j| values[i][j]);
    let ls = solve_least_squares(&design, &targets);
    if ls.rank_deficient {
        log::warn!(
            "context design matrix is singular (rank {}); using intercept-only fit",
            ls.rank
        );
        let mut coefficients = Vec::with_capacity(width);
        let mut sigma = Vec::with_capacity(width);
        for j in 0..width {
            let col: Vec<f64> = values.iter().map(|r| r[j]).collect();
            let mut beta = vec![0.0; d + 1];
            beta[0] = mean(&col);
            coefficients.push(beta);
            sigma.push(floor_sigma(sample_std(&col)));
        }
        return EstimatorState::LinearRegress {
            coefficients,
            sigma,
            intercept_only: true,
        };
    }
    let dof = (n - d - 1) as f64;
    let coefficients = (0..width)
        .map(|j| ls.coefficients.column(j).iter().copied().collect())
        .collect();
    let sigma = ls
        .residual_norms
        .iter()
        .map(|r| floor_sigma((r * r / dof).sqrt()))
        .collect();
    EstimatorState::LinearRegress {
        coefficients,
        sigma,
        intercept_only: false,
    }
}

/// `v_i = (x_i - mu_i(c)) / sigma_i(c)` for every primary feature.
pub fn contextual_normalize(
    estimator: &ContextEstimator,
    x: &[f64],
    ctx: &Context,
) -> Result<Vec<f64>> {
    check_len(estimator.n_features(), x.len())?;
    let m = estimator.moments(ctx)?;
    Ok(x.iter()
        .zip(&m)
        .map(|(v, m)| (v - m.mean) / m.std)
        .collect())
}

/// Inverse of [`contextual_normalize`] given the same moments.
pub fn denormalize(v: &[f64], moments: &[Moments]) -> Vec<f64> {
    v.iter()
        .zip(moments)
        .map(|(v, m)| v * m.std + m.mean)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Column, FeatureSchema};

    fn one_feature(values: &[f64]) -> Dataset {
        let schema = FeatureSchema::new(
            vec![Column::new(
                "f",
                FeatureRole::Primary,
                FeatureKind::Continuous,
            )],
            vec!["a".into()],
        )
        .unwrap();
        Dataset::new(
            schema,
            values
                .iter()
                .map(|&v| Observation::new(0, vec![v]))
                .collect(),
        )
        .unwrap()
    }

    fn with_context(rows: &[(f64, f64, bool)]) -> Dataset {
        let schema = FeatureSchema::new(
            vec![
                Column::new("x", FeatureRole::Primary, FeatureKind::Continuous),
                Column::new("c", FeatureRole::Contextual, FeatureKind::Continuous),
            ],
            vec!["a".into()],
        )
        .unwrap();
        Dataset::new(
            schema,
            rows.iter()
                .map(|&(x, c, b)| Observation::new(0, vec![x, c]).with_baseline(b))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn minmax_reads_extremes() {
        let m = fit_plain(&one_feature(&[0.0, 5.0, 10.0]), PlainMethod::MinMax).unwrap();
        assert_eq!(m.min_max().unwrap(), vec![(0.0, 10.0)]);
        assert_eq!(m.apply_plain(&[5.0]).unwrap(), vec![0.5]);
        // unclamped outside the training range
        assert_eq!(m.apply_plain(&[20.0]).unwrap(), vec![2.0]);
    }

    #[test]
    fn minmax_constant_feature_is_degenerate() {
        let err = fit_plain(&one_feature(&[3.0, 3.0, 3.0]), PlainMethod::MinMax).unwrap_err();
        match err {
            Error::Degenerate(v) => assert_eq!(v[0].feature, "f"),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn avgdev_uses_sample_stddev() {
        let m = fit_plain(&one_feature(&[2.0, 4.0, 6.0]), PlainMethod::AvgDev).unwrap();
        // sum of squares 8 over n-1 = 2
        assert_eq!(
            m.moments().unwrap()[0],
            Moments {
                mean: 4.0,
                std: 2.0
            }
        );
        assert_eq!(m.apply_plain(&[8.0]).unwrap(), vec![2.0]);
        assert!(fit_plain(&one_feature(&[1.0, 1.0]), PlainMethod::AvgDev).is_err());
    }

    #[test]
    fn percentile_mid_rank() {
        let vals: Vec<f64> = (1..=10).map(f64::from).collect();
        let m = fit_plain(&one_feature(&vals), PlainMethod::Percentile).unwrap();
        assert!((m.apply_plain(&[2.0]).unwrap()[0] - 0.15).abs() < 1e-15);
        assert_eq!(m.apply_plain(&[1.5]).unwrap()[0], 0.1);
        assert_eq!(m.apply_plain(&[-100.0]).unwrap()[0], 0.0);
        assert_eq!(m.apply_plain(&[100.0]).unwrap()[0], 1.0);
    }

    #[test]
    fn baseline_avgdev_uses_flagged_rows_only() {
        let ds = with_context(&[(1.0, 0.0, true), (3.0, 0.0, true), (100.0, 0.0, false)]);
        let m = fit_plain(&ds, PlainMethod::BaselineAvgDev).unwrap();
        assert_eq!(m.method(), Method::BaselineAvgDev);
        assert_eq!(m.moments().unwrap()[0].mean, 2.0);
        let one = with_context(&[(1.0, 0.0, true), (3.0, 0.0, false)]);
        assert!(matches!(
            fit_plain(&one, PlainMethod::BaselineAvgDev),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn linear_estimator_exact_line() {
        let ds = with_context(&[
            (1.0, 0.0, true),
            (3.0, 1.0, true),
            (5.0, 2.0, true),
            (9.0, 4.0, true),
        ]);
        let est = fit_context_estimator(
            &ds,
            EstimatorKind::LinearRegress,
            &EstimatorOptions::default(),
        )
        .unwrap();
        let m = est.moments(&Context::Point(vec![3.0])).unwrap();
        assert!((m[0].mean - 7.0).abs() < 1e-12);
        assert_eq!(m[0].std, SIGMA_FLOOR);
    }

    #[test]
    fn linear_estimator_singular_context_falls_back() {
        // constant context column is collinear with the intercept
        let ds = with_context(&[(1.0, 2.0, true), (3.0, 2.0, true), (5.0, 2.0, true)]);
        let est = fit_context_estimator(
            &ds,
            EstimatorKind::LinearRegress,
            &EstimatorOptions::default(),
        )
        .unwrap();
        assert!(est.intercept_only());
        let m = est.moments(&Context::Point(vec![10.0])).unwrap();
        assert_eq!(
            m[0],
            Moments {
                mean: 3.0,
                std: 2.0
            }
        );
    }

    #[test]
    fn estimators_reject_too_few_rows() {
        let ds = with_context(&[(1.0, 0.0, true), (3.0, 1.0, true)]);
        assert!(matches!(
            fit_context_estimator(
                &ds,
                EstimatorKind::LinearRegress,
                &EstimatorOptions::default()
            ),
            Err(Error::InsufficientData(_))
        ));
        let opts = EstimatorOptions {
            k: 2,
            ..Default::default()
        };
        assert!(fit_context_estimator(&ds, EstimatorKind::KnnRegress, &opts).is_err());
    }

    #[test]
    fn group_stats_two_values() {
        let schema = FeatureSchema::new(
            vec![Column::new(
                "f",
                FeatureRole::Primary,
                FeatureKind::Continuous,
            )],
            vec!["a".into()],
        )
        .unwrap();
        let ds = Dataset::new(
            schema,
            vec![
                Observation::new(0, vec![1.0]).with_group(4),
                Observation::new(0, vec![3.0]).with_group(4),
            ],
        )
        .unwrap();
        let est =
            fit_context_estimator(&ds, EstimatorKind::GroupStats, &EstimatorOptions::default())
                .unwrap();
        let m = est.moments(&Context::Group(4)).unwrap();
        assert_eq!(m[0].mean, 2.0);
        assert!((m[0].std - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(
            est.moments(&Context::Group(9)).unwrap_err(),
            Error::UnknownGroup(9)
        );

        let opts = EstimatorOptions {
            global_fallback: true,
            ..Default::default()
        };
        let est = fit_context_estimator(&ds, EstimatorKind::GroupStats, &opts).unwrap();
        assert_eq!(est.moments(&Context::Group(9)).unwrap()[0].mean, 2.0);
    }

    #[test]
    fn group_stats_needs_two_rows_per_group() {
        let schema = FeatureSchema::new(
            vec![Column::new(
                "f",
                FeatureRole::Primary,
                FeatureKind::Continuous,
            )],
            vec!["a".into()],
        )
        .unwrap();
        let ds = Dataset::new(schema, vec![Observation::new(0, vec![1.0]).with_group(1)]).unwrap();
        assert!(fit_context_estimator(
            &ds,
            EstimatorKind::GroupStats,
            &EstimatorOptions::default()
        )
        .is_err());
    }

    #[test]
    fn contextual_formula_arithmetic() {
        let ds = with_context(&[
            (1.0, 0.0, true),
            (3.0, 1.0, true),
            (5.0, 2.0, true),
            (9.0, 4.0, true),
        ]);
        let est = fit_context_estimator(
            &ds,
            EstimatorKind::LinearRegress,
            &EstimatorOptions::default(),
        )
        .unwrap();
        // mu(c=1) = 3, sigma floored
        let v = contextual_normalize(&est, &[3.0 + 2.0 * SIGMA_FLOOR], &Context::Point(vec![1.0]))
            .unwrap();
        assert!((v[0] - 2.0).abs() < 1e-6);
        assert!(contextual_normalize(&est, &[1.0, 2.0], &Context::Point(vec![1.0])).is_err());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let vals = [0.1, 0.7, 1.0 / 3.0, 2.5e-7, 9.99];
        for method in [
            PlainMethod::MinMax,
            PlainMethod::AvgDev,
            PlainMethod::Percentile,
        ] {
            let m = fit_plain(&one_feature(&vals), method).unwrap();
            assert_eq!(NormalizationModel::from_json(&m.to_json()).unwrap(), m);
        }
        let ds = with_context(&[
            (1.1, 0.3, true),
            (3.7, 1.9, true),
            (5.2, 2.2, true),
            (9.0, 4.1, true),
        ]);
        for kind in [EstimatorKind::LinearRegress, EstimatorKind::KnnRegress] {
            let opts = EstimatorOptions {
                k: 3,
                ..Default::default()
            };
            let m =
                NormalizationModel::contextual(fit_context_estimator(&ds, kind, &opts).unwrap());
            assert_eq!(NormalizationModel::from_json(&m.to_json()).unwrap(), m);
        }
    }
}
