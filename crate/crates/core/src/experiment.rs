//! Experiment drivers: the eight strategy combinations on the vowel data
//! and the normalization comparison on synthetic context-shift data.

use serde::{Deserialize, Serialize};

use crate::classify::{evaluate, ClassifierKind, ContextKey, EvalResult, Metric, SelectionModel};
use crate::data::{
    fingerprint, generate_shift, ScenarioOptions, ShiftScenario, VowelData, COLD, WARM,
};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::normalize::{
    fit_context_estimator, fit_plain, EstimatorKind, EstimatorOptions, NormalizationModel,
    PlainMethod,
};
use crate::report::ExperimentReport;
use crate::strategies::{build_pipeline, run_pipeline, NormalizationStage, PipelineConfig, Side};

pub const STRATEGY_ORDER: &str = "normalize -> expand -> weight";

/// Which of contextual normalization, expansion and weighting are on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StrategySet {
    pub normalize: bool,
    pub expand: bool,
    pub weight: bool,
}

impl StrategySet {
    /// The eight combinations, normalization varying slowest.
    pub fn all_combinations() -> Vec<StrategySet> {
        (0..8)
            .map(|b| StrategySet {
                normalize: b & 4 != 0,
                expand: b & 2 != 0,
                weight: b & 1 != 0,
            })
            .collect()
    }

    fn yes_no(b: bool) -> String {
        if b { "Yes" } else { "No" }.to_string()
    }

    pub fn labels(&self) -> Vec<String> {
        vec![
            Self::yes_no(self.normalize),
            Self::yes_no(self.expand),
            Self::yes_no(self.weight),
        ]
    }
}

/// Parsed `--strategies` argument.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyPlan {
    pub sets: Vec<StrategySet>,
    /// Per-context classifier selection instead of a single classifier.
    pub select: bool,
}

/// Parses `norm,expand,weight[,select]` (any subset, possibly empty) or `all-combos`.
pub fn parse_strategies(text: &str) -> Result<StrategyPlan> {
    let mut set = StrategySet::default();
    let mut select = false;
    let mut all = false;
    for token in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match token {
            "norm" => set.normalize = true,
            "expand" => set.expand = true,
            "weight" => set.weight = true,
            "select" => select = true,
            "all-combos" => all = true,
            other => return Err(Error::Config(format!("unknown strategy token `{other}`"))),
        }
    }
    if all && set != StrategySet::default() {
        return Err(Error::Config(
            "`all-combos` cannot be combined with other strategy tokens".into(),
        ));
    }
    Ok(StrategyPlan {
        sets: if all {
            StrategySet::all_combinations()
        } else {
            vec![set]
        },
        select,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VowelOptions {
    pub classifier: ClassifierKind,
    pub select: bool,
}

impl Default for VowelOptions {
    fn default() -> Self {
        VowelOptions {
            classifier: ClassifierKind::NearestNeighbor {
                k: 1,
                metric: Metric::Manhattan,
            },
            select: false,
        }
    }
}

pub fn vowel_pipeline(set: StrategySet) -> PipelineConfig {
    PipelineConfig {
        normalization: set.normalize.then(NormalizationStage::group_stats),
        expand: if set.expand {
            vec!["sex".into()]
        } else {
            Vec::new()
        },
        weighting: set.weight,
    }
}

/// Trains on the training speakers and scores the test speakers for one combination.
pub fn vowel_run(
    train: &Dataset,
    test: &Dataset,
    set: StrategySet,
    opts: &VowelOptions,
) -> Result<EvalResult> {
    let pipeline = build_pipeline(train, &vowel_pipeline(set))?;
    let tr = run_pipeline(&pipeline, train, Side::Train)?;
    let te = run_pipeline(&pipeline, test, Side::Test)?;
    if opts.select {
        let sex = tr.schema().column_index("sex")?;
        let model = SelectionModel::fit(&tr, ContextKey::Column(sex), opts.classifier)?;
        evaluate(&model, &te)
    } else {
        let model = opts.classifier.fit(&tr)?;
        evaluate(&model, &te)
    }
}

pub fn run_vowel(
    data: &VowelData,
    sets: &[StrategySet],
    opts: &VowelOptions,
) -> Result<ExperimentReport> {
    let (train, test) = data.train_test();
    let mut report = ExperimentReport::new(
        "vowel recognition, training speakers vs. new test speakers",
        &["normalization", "expansion", "weighting"],
    );
    for &set in sets {
        let r = vowel_run(&train, &test, set, opts)?;
        report.push(set.labels(), r.correct, r.total);
    }
    report.meta("dataset", fingerprint(&data.dataset));
    report.meta("strategy_order", STRATEGY_ORDER);
    report.meta(
        "normalization_estimator",
        "group (per speaker mean/stddev; test speakers use their own rows)",
    );
    report.meta("expansion_columns", "sex");
    report.meta(
        "weighting",
        "inter/intra class deviation per speaker, from training rows",
    );
    report.meta(
        "classifier",
        if opts.select {
            format!("select[sex] over {}", opts.classifier.describe())
        } else {
            opts.classifier.describe()
        },
    );
    Ok(report)
}

/// One normalization row of the synthetic comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormChoice {
    None,
    Plain(PlainMethod),
    Contextual(EstimatorKind),
}

impl NormChoice {
    /// The seven rows in report order.
    pub const ALL: [NormChoice; 7] = [
        NormChoice::None,
        NormChoice::Plain(PlainMethod::MinMax),
        NormChoice::Plain(PlainMethod::AvgDev),
        NormChoice::Plain(PlainMethod::Percentile),
        NormChoice::Plain(PlainMethod::BaselineAvgDev),
        NormChoice::Contextual(EstimatorKind::KnnRegress),
        NormChoice::Contextual(EstimatorKind::LinearRegress),
    ];

    pub fn name(self) -> String {
        match self {
            NormChoice::None => "none".into(),
            NormChoice::Plain(m) => m.name().into(),
            NormChoice::Contextual(k) => format!("contextual-{}", k.name()),
        }
    }

    pub fn is_contextual(self) -> bool {
        matches!(self, NormChoice::Contextual(_))
    }
}

/// How the synthetic comparison classifies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SyntheticClassifier {
    Single(ClassifierKind),
    /// Per-regime selection over the base classifier.
    Select(ClassifierKind),
}

impl SyntheticClassifier {
    pub fn name(&self) -> String {
        match self {
            SyntheticClassifier::Single(ClassifierKind::NearestNeighbor { .. }) => "nn".into(),
            SyntheticClassifier::Single(ClassifierKind::Linear) => "mlr".into(),
            SyntheticClassifier::Select(base) => {
                format!("select[{}]", SyntheticClassifier::Single(*base).name())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticOptions {
    pub scenario: ScenarioOptions,
    pub classifiers: Vec<SyntheticClassifier>,
    /// Neighbours for the knn context estimator.
    pub estimator_k: usize,
}

impl Default for SyntheticOptions {
    fn default() -> Self {
        SyntheticOptions {
            scenario: ScenarioOptions::default(),
            classifiers: vec![
                SyntheticClassifier::Single(ClassifierKind::NearestNeighbor {
                    k: 1,
                    metric: Metric::Manhattan,
                }),
                SyntheticClassifier::Single(ClassifierKind::Linear),
            ],
            estimator_k: 5,
        }
    }
}

fn fit_normalizer(
    choice: NormChoice,
    train: &Dataset,
    baseline: &Dataset,
    k: usize,
) -> Result<NormalizationModel> {
    match choice {
        NormChoice::None => Ok(NormalizationModel::identity(train)),
        NormChoice::Plain(PlainMethod::BaselineAvgDev) => {
            fit_plain(baseline, PlainMethod::BaselineAvgDev)
        }
        NormChoice::Plain(m) => fit_plain(train, m),
        NormChoice::Contextual(kind) => {
            let opts = EstimatorOptions {
                k,
                ..EstimatorOptions::default()
            };
            fit_context_estimator(baseline, kind, &opts).map(NormalizationModel::contextual)
        }
    }
}

/// Two-fold cold/warm protocol on one generated dataset: train on one
/// regime, test on the other, swap, and sum the counts.
///
/// Baseline rows are reserved for fitting baseline-avgdev and the contextual
/// estimators; the classifiers see only the remaining rows.
pub fn two_fold(
    dataset: &Dataset,
    choice: NormChoice,
    classifier: SyntheticClassifier,
    estimator_k: usize,
) -> Result<EvalResult> {
    let (baseline, rest) = dataset.split_by(|o| o.baseline);
    let n = dataset.schema().n_classes();
    let mut total = EvalResult {
        correct: 0,
        total: 0,
        confusion: vec![vec![0; n]; n],
    };
    for (train_regime, test_regime) in [(COLD, WARM), (WARM, COLD)] {
        let train = rest.filter(|o| o.fold == Some(train_regime));
        let test = rest.filter(|o| o.fold == Some(test_regime));
        let model = fit_normalizer(choice, &train, &baseline, estimator_k)?;
        let tr = model.apply_dataset(&train)?;
        let te = model.apply_dataset(&test)?;
        let r = match classifier {
            SyntheticClassifier::Single(kind) => evaluate(&kind.fit(&tr)?, &te)?,
            SyntheticClassifier::Select(kind) => {
                evaluate(&SelectionModel::fit(&tr, ContextKey::Group, kind)?, &te)?
            }
        };
        total.merge(&r);
    }
    Ok(total)
}

/// Runs every classifier x normalization row, summing counts over `seeds`.
pub fn run_synthetic(seeds: &[u64], opts: &SyntheticOptions) -> Result<ExperimentReport> {
    if seeds.is_empty() {
        return Err(Error::Config("at least one seed is required".into()));
    }
    let datasets = seeds
        .iter()
        .map(|&s| ShiftScenario::new(s, &opts.scenario).and_then(|sc| generate_shift(&sc)))
        .collect::<Result<Vec<_>>>()?;
    let mut report = ExperimentReport::new(
        "normalization comparison, cold/warm context shift (two-fold)",
        &["classifier", "normalization"],
    );
    for classifier in &opts.classifiers {
        for choice in NormChoice::ALL {
            let (mut correct, mut total) = (0, 0);
            for ds in &datasets {
                let r = two_fold(ds, choice, *classifier, opts.estimator_k)?;
                correct += r.correct;
                total += r.total;
            }
            report.push(vec![classifier.name(), choice.name()], correct, total);
        }
    }
    report.meta(
        "seeds",
        seeds
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join(","),
    );
    report.meta(
        "datasets",
        datasets
            .iter()
            .map(fingerprint)
            .collect::<Vec<_>>()
            .join(","),
    );
    report.meta(
        "estimators",
        format!("knn(k={}), linear (residual stddev)", opts.estimator_k),
    );
    report.meta("estimator_fit", "baseline rows from both regimes");
    report.meta(
        "classifiers",
        opts.classifiers
            .iter()
            .map(|c| match c {
                SyntheticClassifier::Single(k) | SyntheticClassifier::Select(k) => {
                    format!("{}={}", c.name(), k.describe())
                }
            })
            .collect::<Vec<_>>()
            .join(", "),
    );
    report.meta(
        "scenario",
        serde_json::to_string(&opts.scenario).expect("scenario serializes"),
    );
    Ok(report)
}
