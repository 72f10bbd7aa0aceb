//! Empirical feature-role detection on discrete data.
//!
//! A feature is *primary* when its value alone moves the class posterior,
//! *contextual* when it is not primary but moves the posterior once every
//! other feature is known, and *irrelevant* otherwise. A primary feature is
//! *context-sensitive* to a contextual one when conditioning on both gives a
//! different posterior than conditioning on the primary alone.
//!
//! Probabilities are relative frequencies of the observed table. Gaps are
//! computed from integer counts so exact equalities come out as exactly zero.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, FeatureKind, FeatureRole};
use crate::error::{Error, Result};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_CELL_BUDGET: u128 = 1_000_000;
pub const MAX_FEATURES: usize = 12;

/// Joint frequency table over `(class, x1, ..., xn)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    feature_names: Vec<String>,
    n_classes: usize,
    /// Key is `[class, x1, ..., xn]`.
    counts: BTreeMap<Vec<u32>, u64>,
    total: u64,
}

impl EmpiricalDistribution {
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Relative frequency of one full cell `[class, x1, ..., xn]`.
    pub fn probability(&self, cell: &[u32]) -> f64 {
        self.counts.get(cell).copied().unwrap_or(0) as f64 / self.total as f64
    }

    pub fn cells(&self) -> impl Iterator<Item = (&[u32], f64)> + '_ {
        let t = self.total as f64;
        self.counts
            .iter()
            .map(move |(k, &c)| (k.as_slice(), c as f64 / t))
    }

    /// Counts marginalised onto `positions` (0 = class, i = feature i).
    fn marginal(&self, positions: &[usize]) -> BTreeMap<Vec<u32>, u64> {
        let mut out = BTreeMap::new();
        for (key, &c) in &self.counts {
            let k: Vec<u32> = positions.iter().map(|&p| key[p]).collect();
            *out.entry(k).or_insert(0) += c;
        }
        out
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.n_features() {
            return Err(Error::FeatureIndex {
                index: i,
                n: self.n_features(),
            });
        }
        Ok(())
    }

    /// Largest `|p(x0=a0 | A) - p(x0=a0 | B)|` over assignments of the
    /// conditioning set `a_pos` with positive mass, where `b_pos` is a subset of
    /// `a_pos`.
    fn max_conditional_gap(&self, a_pos: &[usize], b_pos: &[usize]) -> Option<Witness> {
        let with_class = |pos: &[usize]| {
            let mut p = vec![0];
            p.extend_from_slice(pos);
            p
        };
        let a_counts = self.marginal(a_pos);
        let b_counts = self.marginal(b_pos);
        let a0_counts = self.marginal(&with_class(a_pos));
        let b0_counts = self.marginal(&with_class(b_pos));
        let b_index: Vec<usize> = b_pos
            .iter()
            .map(|p| {
                a_pos
                    .iter()
                    .position(|q| q == p)
                    .expect("b_pos must be within a_pos")
            })
            .collect();

        let mut best: Option<Witness> = None;
        for (a_vals, &na) in &a_counts {
            let b_vals: Vec<u32> = b_index.iter().map(|&k| a_vals[k]).collect();
            let nb = b_counts[&b_vals];
            for class in 0..self.n_classes as u32 {
                let mut ka = vec![class];
                ka.extend_from_slice(a_vals);
                let mut kb = vec![class];
                kb.extend_from_slice(&b_vals);
                let ca = a0_counts.get(&ka).copied().unwrap_or(0) as u128;
                let cb = b0_counts.get(&kb).copied().unwrap_or(0) as u128;
                // |ca/na - cb/nb| without rounding in the comparison
                let lhs = ca * nb as u128;
                let rhs = cb * na as u128;
                let num = lhs.abs_diff(rhs);
                let gap = num as f64 / (na as u128 * nb as u128) as f64;
                if best.as_ref().is_none_or(|w| gap > w.gap) {
                    best = Some(Witness {
                        class: class as usize,
                        assignment: a_pos.iter().copied().zip(a_vals.iter().copied()).collect(),
                        gap,
                    });
                }
            }
        }
        best
    }
}

/// The value assignment realising a probability gap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    /// Class index `a0`.
    pub class: usize,
    /// `(feature index, value)` pairs, feature indices 1-based.
    pub assignment: Vec<(usize, u32)>,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleTest {
    pub holds: bool,
    pub witness: Option<Witness>,
}

impl RoleTest {
    fn from_witness(witness: Option<Witness>, tolerance: f64) -> RoleTest {
        let holds = witness.as_ref().is_some_and(|w| w.gap > tolerance);
        RoleTest { holds, witness }
    }
}

/// Tabulates a fully discrete dataset.
pub fn estimate_distribution(
    dataset: &Dataset,
    cell_budget: u128,
) -> Result<EmpiricalDistribution> {
    let schema = dataset.schema();
    if let Some(c) = schema
        .columns()
        .iter()
        .find(|c| c.kind == FeatureKind::Continuous)
    {
        return Err(Error::ContinuousFeature(c.name.clone()));
    }
    let n = schema.len();
    if n > MAX_FEATURES {
        return Err(Error::Config(format!(
            "role detection supports at most {MAX_FEATURES} features, got {n}"
        )));
    }
    if dataset.is_empty() {
        return Err(Error::InsufficientData("empty dataset".into()));
    }
    dataset.validate().map_err(Error::Invalid)?;

    let mut distinct: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); n];
    for o in dataset.observations() {
        for (set, v) in distinct.iter_mut().zip(&o.features) {
            set.insert(*v as u32);
        }
    }
    let cells = distinct.iter().fold(schema.n_classes() as u128, |acc, s| {
        acc.saturating_mul(s.len() as u128)
    });
    if cells > cell_budget {
        return Err(Error::TableTooLarge {
            cells,
            budget: cell_budget,
        });
    }

    let mut counts = BTreeMap::new();
    for o in dataset.observations() {
        let mut key = Vec::with_capacity(n + 1);
        key.push(o.label as u32);
        key.extend(o.features.iter().map(|&v| v as u32));
        *counts.entry(key).or_insert(0u64) += 1;
    }
    Ok(EmpiricalDistribution {
        feature_names: schema.columns().iter().map(|c| c.name.clone()).collect(),
        n_classes: schema.n_classes(),
        counts,
        total: dataset.len() as u64,
    })
}

/// Does feature `i` (1-based) alone change the class posterior?
pub fn is_primary(dist: &EmpiricalDistribution, i: usize, tolerance: f64) -> Result<RoleTest> {
    dist.check_index(i)?;
    Ok(RoleTest::from_witness(
        dist.max_conditional_gap(&[i], &[]),
        tolerance,
    ))
}

/// Is feature `i` (1-based) non-primary yet informative given all other features?
pub fn is_contextual(dist: &EmpiricalDistribution, i: usize, tolerance: f64) -> Result<RoleTest> {
    if is_primary(dist, i, tolerance)?.holds {
        return Ok(RoleTest {
            holds: false,
            witness: None,
        });
    }
    let all: Vec<usize> = (1..=dist.n_features()).collect();
    let rest: Vec<usize> = all.iter().copied().filter(|&j| j != i).collect();
    Ok(RoleTest::from_witness(
        dist.max_conditional_gap(&all, &rest),
        tolerance,
    ))
}

/// Does knowing contextual feature `j` change what primary feature `i` says?
pub fn is_context_sensitive(
    dist: &EmpiricalDistribution,
    i: usize,
    j: usize,
    tolerance: f64,
) -> Result<RoleTest> {
    dist.check_index(i)?;
    dist.check_index(j)?;
    Ok(RoleTest::from_witness(
        dist.max_conditional_gap(&[i, j], &[i]),
        tolerance,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureFinding {
    pub name: String,
    pub role: FeatureRole,
    pub primary: RoleTest,
    pub contextual: RoleTest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sensitivity {
    pub primary: String,
    pub contextual: String,
    pub test: RoleTest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleReport {
    pub tolerance: f64,
    pub class_values: Vec<String>,
    pub features: Vec<FeatureFinding>,
    pub sensitivities: Vec<Sensitivity>,
}

impl RoleReport {
    pub fn roles(&self) -> Vec<FeatureRole> {
        self.features.iter().map(|f| f.role).collect()
    }

    pub fn role_of(&self, name: &str) -> Option<FeatureRole> {
        self.features
            .iter()
            .find(|f| f.name == name)
            .map(|f| f.role)
    }

    pub fn sensitivity(&self, primary: &str, contextual: &str) -> Option<&Sensitivity> {
        self.sensitivities
            .iter()
            .find(|s| s.primary == primary && s.contextual == contextual)
    }

    fn describe(&self, w: &Option<Witness>) -> String {
        match w {
            None => "-".into(),
            Some(w) => {
                let cls = self
                    .class_values
                    .get(w.class)
                    .cloned()
                    .unwrap_or_else(|| w.class.to_string());
                let vals: Vec<String> = w
                    .assignment
                    .iter()
                    .map(|(f, v)| {
                        let name = self
                            .features
                            .get(f - 1)
                            .map(|x| x.name.as_str())
                            .unwrap_or("?");
                        format!("{name}={v}")
                    })
                    .collect();
                format!("class={cls} | {} (gap {:.6})", vals.join(", "), w.gap)
            }
        }
    }

    /// Human-readable rendering.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let width = self
            .features
            .iter()
            .map(|f| f.name.len())
            .max()
            .unwrap_or(7)
            .max(7);
        let _ = writeln!(out, "{:<width$}  {:<10}  witness", "feature", "role");
        for f in &self.features {
            let w = match f.role {
                FeatureRole::Primary => &f.primary.witness,
                FeatureRole::Contextual => &f.contextual.witness,
                FeatureRole::Irrelevant => &None,
            };
            let _ = writeln!(
                out,
                "{:<width$}  {:<10}  {}",
                f.name,
                f.role.as_str(),
                self.describe(w)
            );
        }
        if !self.sensitivities.is_empty() {
            let _ = writeln!(out);
            let _ = writeln!(out, "context-sensitive pairs:");
            for s in &self.sensitivities {
                let _ = writeln!(
                    out,
                    "  {} | {}: {}  {}",
                    s.primary,
                    s.contextual,
                    if s.test.holds { "yes" } else { "no" },
                    if s.test.holds {
                        self.describe(&s.test.witness)
                    } else {
                        String::new()
                    }
                );
            }
        }
        out
    }
}

/// Labels every feature and evaluates every (primary, contextual) pair.
pub fn classify_roles(dataset: &Dataset, tolerance: f64) -> Result<RoleReport> {
    classify_roles_with_budget(dataset, tolerance, DEFAULT_CELL_BUDGET)
}

pub fn classify_roles_with_budget(
    dataset: &Dataset,
    tolerance: f64,
    cell_budget: u128,
) -> Result<RoleReport> {
    if tolerance.is_nan() || tolerance < 0.0 {
        return Err(Error::Config(format!(
            "tolerance must be >= 0, got {tolerance}"
        )));
    }
    let dist = estimate_distribution(dataset, cell_budget)?;
    let mut features = Vec::with_capacity(dist.n_features());
    for (k, name) in dist.feature_names().iter().enumerate() {
        let i = k + 1;
        let primary = is_primary(&dist, i, tolerance)?;
        let contextual = if primary.holds {
            RoleTest {
                holds: false,
                witness: None,
            }
        } else {
            let all: Vec<usize> = (1..=dist.n_features()).collect();
            let rest: Vec<usize> = all.iter().copied().filter(|&j| j != i).collect();
            RoleTest::from_witness(dist.max_conditional_gap(&all, &rest), tolerance)
        };
        let role = if primary.holds {
            FeatureRole::Primary
        } else if contextual.holds {
            FeatureRole::Contextual
        } else {
            FeatureRole::Irrelevant
        };
        features.push(FeatureFinding {
            name: name.clone(),
            role,
            primary,
            contextual,
        });
    }

    let mut sensitivities = Vec::new();
    for (pi, p) in features.iter().enumerate() {
        if p.role != FeatureRole::Primary {
            continue;
        }
        for (ci, c) in features.iter().enumerate() {
            if c.role != FeatureRole::Contextual {
                continue;
            }
            let test = is_context_sensitive(&dist, pi + 1, ci + 1, tolerance)?;
            sensitivities.push(Sensitivity {
                primary: p.name.clone(),
                contextual: c.name.clone(),
                test,
            });
        }
    }
    Ok(RoleReport {
        tolerance,
        class_values: dataset.schema().class_values().to_vec(),
        features,
        sensitivities,
    })
}
