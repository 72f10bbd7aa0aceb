mod common;

use std::collections::BTreeSet;

use common::{continuous, vowel_path};
use ctxlearn::data::{
    fingerprint, generate_shift, load_vowel, parse_dump, parse_vowel, write_dump, ScenarioOptions,
    ShiftScenario, VowelColumns, COLD, WARM,
};
use ctxlearn::experiment::{vowel_pipeline, StrategySet};
use ctxlearn::stats::mean;
use ctxlearn::strategies::{build_pipeline, expand, run_pipeline, Side};
use ctxlearn::{Dataset, FeatureKind, FeatureRole, Observation};
use proptest::prelude::*;

fn vowel() -> ctxlearn::data::VowelData {
    load_vowel(vowel_path(), &VowelColumns::default()).unwrap()
}

#[test]
fn vowel_split_counts() {
    let data = vowel();
    assert!(data.warnings.is_empty(), "{:?}", data.warnings);
    let (train, test) = data.train_test();
    assert_eq!((train.len(), test.len()), (528, 462));
    assert_eq!(train.groups().len(), 8);
    assert_eq!(test.groups().len(), 7);
    assert!(train.groups().iter().all(|g| !test.groups().contains(g)));
    let sex = train.schema().column_index("sex").unwrap();
    let per_sex = |ds: &Dataset, v: f64| {
        ds.observations()
            .iter()
            .filter(|o| o.features[sex] == v)
            .filter_map(|o| o.group)
            .collect::<BTreeSet<_>>()
            .len()
    };
    assert_eq!((per_sex(&train, 0.0), per_sex(&train, 1.0)), (4, 4));
    assert_eq!(per_sex(&test, 0.0) + per_sex(&test, 1.0), 7);
    for c in 0..11 {
        assert_eq!(
            train.observations().iter().filter(|o| o.label == c).count(),
            48
        );
        assert_eq!(
            test.observations().iter().filter(|o| o.label == c).count(),
            42
        );
    }
}

#[test]
fn vowel_schema_roles() {
    let ds = vowel().dataset;
    let s = ds.schema();
    assert_eq!(s.primary_indices(), (0..10).collect::<Vec<_>>());
    assert_eq!(s.contextual_indices().len(), 2);
    assert_eq!(
        s.columns()[s.column_index("sex").unwrap()].kind,
        FeatureKind::Discrete
    );
    assert_eq!(s.n_classes(), 11);
}

#[test]
fn vowel_parse_reports_bad_lines() {
    let good = "0 0 0 1 2 3 4 5 6 7 8 9 10 0\n";
    let bad = format!("{good}0 0 0 1 2 3 x 5 6 7 8 9 10 0\n");
    let err = parse_vowel(&bad, &VowelColumns::default()).unwrap_err();
    assert!(
        matches!(err, ctxlearn::Error::Parse { line: 2, .. }),
        "{err:?}"
    );
    let short = parse_vowel(good, &VowelColumns::default()).unwrap();
    assert!(!short.warnings.is_empty());
    let commas = parse_vowel(&good.replace(' ', ","), &VowelColumns::default()).unwrap();
    assert_eq!(commas.dataset.observations(), short.dataset.observations());
}

#[test]
fn all_strategies_give_eleven_columns() {
    let (train, test) = vowel().train_test();
    let all = StrategySet {
        normalize: true,
        expand: true,
        weight: true,
    };
    let p = build_pipeline(&train, &vowel_pipeline(all)).unwrap();
    assert_eq!(p.weights().unwrap().len(), 10);
    for (side, ds) in [(Side::Train, &train), (Side::Test, &test)] {
        let out = run_pipeline(&p, ds, side).unwrap();
        let primary = out.schema().primary_indices();
        assert_eq!(primary.len(), 11);
        assert_eq!(out.schema().columns()[primary[10]].name, "sex");
        // expanded column keeps unit weight and raw values
        let sex = ds.schema().column_index("sex").unwrap();
        for (a, b) in out.observations().iter().zip(ds.observations()) {
            assert_eq!(a.features[primary[10]], b.features[sex]);
        }
    }
}

#[test]
fn pipeline_is_deterministic_and_label_blind() {
    let (train, test) = vowel().train_test();
    for set in StrategySet::all_combinations() {
        let p = build_pipeline(&train, &vowel_pipeline(set)).unwrap();
        let q = build_pipeline(&train, &vowel_pipeline(set)).unwrap();
        let a = run_pipeline(&p, &test, Side::Test).unwrap();
        let b = run_pipeline(&q, &test, Side::Test).unwrap();
        assert_eq!(a.observations(), b.observations());

        let shuffled = Dataset::new(
            test.schema().clone(),
            test.observations()
                .iter()
                .map(|o| Observation {
                    label: (o.label + 3) % 11,
                    ..o.clone()
                })
                .collect(),
        )
        .unwrap();
        let c = run_pipeline(&p, &shuffled, Side::Test).unwrap();
        for (x, y) in a.observations().iter().zip(c.observations()) {
            assert_eq!(x.features, y.features);
        }
    }
}

#[test]
fn test_speakers_are_standardized_by_their_own_rows() {
    let (train, test) = vowel().train_test();
    let norm_only = StrategySet {
        normalize: true,
        expand: false,
        weight: false,
    };
    let p = build_pipeline(&train, &vowel_pipeline(norm_only)).unwrap();
    let out = run_pipeline(&p, &test, Side::Test).unwrap();
    for g in test.groups() {
        let rows = out.filter(|o| o.group == Some(g));
        for j in 0..10 {
            let col: Vec<f64> = rows.observations().iter().map(|o| o.features[j]).collect();
            assert!(mean(&col).abs() < 1e-9);
        }
    }
}

#[test]
fn expansion_rejects_non_contextual_columns() {
    let ds = vowel().dataset;
    assert!(matches!(
        expand(&ds, &["f0"]),
        Err(ctxlearn::Error::WrongRole { .. })
    ));
    assert!(expand(&ds, &["nope"]).is_err());
    assert_eq!(expand(&ds, &[]).unwrap().observations(), ds.observations());
}

proptest! {
    #[test]
    fn split_partitions_rows(mask in prop::collection::vec(any::<bool>(), 1..40)) {
        let obs: Vec<Observation> = mask
            .iter()
            .enumerate()
            .map(|(i, &b)| Observation::new(i % 2, vec![i as f64, 0.5]).with_baseline(b))
            .collect();
        let ds = continuous(obs, 1, 1, 2);
        let (yes, no) = ds.split_by(|o| o.baseline);
        prop_assert_eq!(yes.len() + no.len(), ds.len());
        prop_assert!(yes.observations().iter().all(|o| o.baseline));
        prop_assert!(no.observations().iter().all(|o| !o.baseline));
        let order: Vec<f64> = yes.observations().iter().map(|o| o.features[0]).collect();
        prop_assert!(order.windows(2).all(|w| w[0] < w[1]));
        let p = ds.project(FeatureRole::Primary).unwrap();
        prop_assert_eq!(p.schema().len(), 1);
        prop_assert_eq!(p.labels(), ds.labels());
    }

    #[test]
    fn dump_round_trips(seed in 0u64..50) {
        let opts = ScenarioOptions { rows: 64, ..ScenarioOptions::default() };
        let ds = generate_shift(&ShiftScenario::new(seed, &opts).unwrap()).unwrap();
        let back = parse_dump(&write_dump(&ds)).unwrap();
        prop_assert_eq!(back.observations(), ds.observations());
        prop_assert_eq!(back.schema(), ds.schema());
        prop_assert_eq!(fingerprint(&back), fingerprint(&ds));
    }
}

#[test]
fn shift_generator_is_seeded() {
    let opts = ScenarioOptions::default();
    let a = generate_shift(&ShiftScenario::new(5, &opts).unwrap()).unwrap();
    let b = generate_shift(&ShiftScenario::new(5, &opts).unwrap()).unwrap();
    let c = generate_shift(&ShiftScenario::new(6, &opts).unwrap()).unwrap();
    assert_eq!(fingerprint(&a), fingerprint(&b));
    assert_ne!(fingerprint(&a), fingerprint(&c));
}

#[test]
fn shift_generator_baseline_and_regimes() {
    let s = ShiftScenario::new(2, &ScenarioOptions::default()).unwrap();
    let ds = generate_shift(&s).unwrap();
    let base = ds.filter(|o| o.baseline);
    assert_eq!(base.len(), s.baseline_rows());
    assert!(base.observations().iter().all(|o| o.label == 0));
    assert!(ds
        .observations()
        .iter()
        .all(|o| o.group == o.fold.map(u32::from)));
    let cold = ds.filter(|o| o.fold == Some(COLD)).len();
    let warm = ds.filter(|o| o.fold == Some(WARM)).len();
    assert_eq!(cold, warm);
}

fn healthy_gap(ds: &Dataset, j: usize) -> f64 {
    let m = |regime| {
        let v: Vec<f64> = ds
            .observations()
            .iter()
            .filter(|o| o.label == 0 && o.fold == Some(regime))
            .map(|o| o.features[j])
            .collect();
        mean(&v)
    };
    m(WARM) - m(COLD)
}

#[test]
fn shift_moves_feature_means_as_coupled() {
    let opts = ScenarioOptions {
        rows: 9600,
        ..ScenarioOptions::default()
    };
    let s = ShiftScenario::new(11, &opts).unwrap();
    let ds = generate_shift(&s).unwrap();
    // context centres are -1 and +1
    for j in 0..s.n_features() {
        let want = s.expected_shift(j, 2.0);
        let got = healthy_gap(&ds, j);
        let tol = 0.25 * s.feature_scales[j];
        assert!((got - want).abs() < tol, "feature {j}: {got} vs {want}");
    }
}

#[test]
fn zero_coupling_removes_the_shift() {
    let opts = ScenarioOptions {
        rows: 9600,
        coupling: 0.0,
        ..ScenarioOptions::default()
    };
    let s = ShiftScenario::new(11, &opts).unwrap();
    let ds = generate_shift(&s).unwrap();
    for j in 0..s.n_features() {
        assert_eq!(s.expected_shift(j, 2.0), 0.0);
        assert!(healthy_gap(&ds, j).abs() < 0.25 * s.feature_scales[j]);
    }
}
