//! Seeded surrogate for fault diagnosis under a change of ambient context.
//!
//! Every row draws a context vector from its regime's range ("cold" or
//! "warm"), a class, and primary features
//!
//! ```text
//! x_j = scale_j * (base[class][j] + sum_d coupling[j][d] * c_d + noise * z)
//! ```
//!
//! with `z` standard normal. Class 0 is the healthy class; a prefix of the
//! healthy rows, alternating between regimes, forms the baseline set.
//!
//! Randomness comes from ChaCha8 seeded with the scenario seed (scenario
//! parameters on stream 0, rows on stream 1), so output is identical on
//! every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::{Column, Dataset, FeatureKind, FeatureRole, FeatureSchema, Observation};
use crate::error::{Error, Result};

pub const COLD: u8 = 0;
pub const WARM: u8 = 1;

/// Knobs from which a [`ShiftScenario`] is drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOptions {
    pub n_classes: usize,
    pub n_features: usize,
    pub context_dim: usize,
    pub rows: usize,
    /// Stddev of the entries of the context-coupling matrix.
    pub coupling: f64,
    /// Stddev of the class base means.
    pub class_separation: f64,
    pub noise: f64,
    /// Per-feature measurement scales are log-uniform in `[1/s, s]`.
    pub scale_spread: f64,
    /// Fraction of healthy rows flagged as baseline.
    pub baseline_fraction: f64,
    pub cold_range: (f64, f64),
    pub warm_range: (f64, f64),
}

impl Default for ScenarioOptions {
    fn default() -> Self {
        ScenarioOptions {
            n_classes: 8,
            n_features: 12,
            context_dim: 2,
            rows: 960,
            coupling: 1.0,
            class_separation: 1.0,
            noise: 0.8,
            scale_spread: 10.0,
            baseline_fraction: 0.5,
            cold_range: (-1.5, -0.5),
            warm_range: (0.5, 1.5),
        }
    }
}

/// Fully specified generator parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftScenario {
    pub seed: u64,
    pub rows: usize,
    /// `n_classes x n_features`.
    pub base_means: Vec<Vec<f64>>,
    /// `n_features x context_dim`.
    pub coupling: Vec<Vec<f64>>,
    pub feature_scales: Vec<f64>,
    pub noise: f64,
    pub baseline_fraction: f64,
    pub cold_range: (f64, f64),
    pub warm_range: (f64, f64),
}

impl ShiftScenario {
    /// Draws class means, coupling and scales from `seed`.
    pub fn new(seed: u64, opts: &ScenarioOptions) -> Result<ShiftScenario> {
        if opts.n_classes < 2 || opts.n_features == 0 || opts.context_dim == 0 {
            return Err(Error::Scenario(
                "need at least 2 classes, 1 feature and 1 context dimension".into(),
            ));
        }
        if opts.scale_spread.is_nan() || opts.scale_spread < 1.0 {
            return Err(Error::Scenario("scale spread must be >= 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut normal = |sd: f64| -> f64 {
            let z: f64 = StandardNormal.sample(&mut rng);
            sd * z
        };
        let base_means = (0..opts.n_classes)
            .map(|_| {
                (0..opts.n_features)
                    .map(|_| normal(opts.class_separation))
                    .collect()
            })
            .collect();
        let coupling = (0..opts.n_features)
            .map(|_| {
                (0..opts.context_dim)
                    .map(|_| normal(opts.coupling))
                    .collect()
            })
            .collect();
        let log_spread = opts.scale_spread.ln();
        let feature_scales = (0..opts.n_features)
            .map(|_| (rng.random_range(-1.0..=1.0) * log_spread).exp())
            .collect();
        let s = ShiftScenario {
            seed,
            rows: opts.rows,
            base_means,
            coupling,
            feature_scales,
            noise: opts.noise,
            baseline_fraction: opts.baseline_fraction,
            cold_range: opts.cold_range,
            warm_range: opts.warm_range,
        };
        s.check()?;
        Ok(s)
    }

    pub fn n_classes(&self) -> usize {
        self.base_means.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_scales.len()
    }

    pub fn context_dim(&self) -> usize {
        self.coupling.first().map_or(0, Vec::len)
    }

    /// Healthy rows the generator will emit.
    pub fn healthy_rows(&self) -> usize {
        (0..self.rows)
            .filter(|i| (i / 2) % self.n_classes() == 0)
            .count()
    }

    pub fn baseline_rows(&self) -> usize {
        (self.baseline_fraction * self.healthy_rows() as f64).round() as usize
    }

    /// Expected change of feature `j`'s mean when every context
    /// dimension moves by `delta`.
    pub fn expected_shift(&self, j: usize, delta: f64) -> f64 {
        self.feature_scales[j] * self.coupling[j].iter().map(|c| c * delta).sum::<f64>()
    }

    fn check(&self) -> Result<()> {
        let ok_range = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo < hi;
        if !ok_range(self.cold_range) || !ok_range(self.warm_range) {
            return Err(Error::Scenario(
                "context ranges must be finite with lo < hi".into(),
            ));
        }
        let (c, w) = (self.cold_range, self.warm_range);
        if !(c.1 < w.0 || w.1 < c.0) {
            return Err(Error::Scenario(
                "cold and warm context ranges overlap".into(),
            ));
        }
        if self.rows < 2 * self.n_classes() {
            return Err(Error::Scenario(format!(
                "{} rows cannot cover {} classes in both regimes",
                self.rows,
                self.n_classes()
            )));
        }
        if !(0.0..=1.0).contains(&self.baseline_fraction) {
            return Err(Error::Scenario(
                "baseline fraction must lie in [0, 1]".into(),
            ));
        }
        if self.noise.is_nan() || self.noise < 0.0 {
            return Err(Error::Scenario("noise must be >= 0".into()));
        }
        let d = self.context_dim();
        if self.coupling.iter().any(|r| r.len() != d) || self.coupling.len() != self.n_features() {
            return Err(Error::Scenario(
                "coupling matrix has the wrong shape".into(),
            ));
        }
        if self.base_means.iter().any(|r| r.len() != self.n_features()) {
            return Err(Error::Scenario("base means have the wrong shape".into()));
        }
        Ok(())
    }

    pub fn schema(&self) -> FeatureSchema {
        let mut columns: Vec<Column> = (0..self.n_features())
            .map(|j| {
                Column::new(
                    format!("p{j}"),
                    FeatureRole::Primary,
                    FeatureKind::Continuous,
                )
            })
            .collect();
        columns.extend((0..self.context_dim()).map(|d| {
            Column::new(
                format!("c{d}"),
                FeatureRole::Contextual,
                FeatureKind::Continuous,
            )
        }));
        let mut classes = vec!["healthy".to_string()];
        classes.extend((1..self.n_classes()).map(|c| format!("fault{c}")));
        FeatureSchema::new(columns, classes).expect("generated schema is valid")
    }
}

/// Generates the rows of `scenario`. Even rows are cold, odd rows warm; the
/// class cycles every two rows. Group tag and fold both hold the regime.
pub fn generate_shift(scenario: &ShiftScenario) -> Result<Dataset> {
    scenario.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    rng.set_stream(1);
    let k = scenario.n_classes();
    let d = scenario.context_dim();
    let mut baseline_left = scenario.baseline_rows();
    let mut observations = Vec::with_capacity(scenario.rows);
    for i in 0..scenario.rows {
        let regime = if i % 2 == 0 { COLD } else { WARM };
        let (lo, hi) = if regime == COLD {
            scenario.cold_range
        } else {
            scenario.warm_range
        };
        let class = (i / 2) % k;
        let ctx: Vec<f64> = (0..d).map(|_| rng.random_range(lo..hi)).collect();
        let mut features: Vec<f64> = (0..scenario.n_features())
            .map(|j| {
                let z: f64 = StandardNormal.sample(&mut rng);
                let shift: f64 = scenario.coupling[j]
                    .iter()
                    .zip(&ctx)
                    .map(|(a, c)| a * c)
                    .sum();
                scenario.feature_scales[j]
                    * (scenario.base_means[class][j] + shift + scenario.noise * z)
            })
            .collect();
        features.extend(&ctx);
        let baseline = class == 0 && baseline_left > 0;
        if baseline {
            baseline_left -= 1;
        }
        observations.push(
            Observation::new(class, features)
                .with_group(regime as u32)
                .with_fold(regime)
                .with_baseline(baseline),
        );
    }
    Dataset::new(scenario.schema(), observations)
}
