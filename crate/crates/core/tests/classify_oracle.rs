mod common;

use common::{continuous, gaussian_fixture, labelled, normal_equations};
use ctxlearn::classify::{evaluate, ClassifierKind, LinearModel, Metric, NearestNeighbor};
use ctxlearn::strategies::{apply_weights, compute_weights, WeightVector};
use ctxlearn::{Dataset, Observation};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[test]
fn linear_model_matches_normal_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..100 {
        let p = rng.random_range(1..6);
        let k = rng.random_range(2..5);
        let n = rng.random_range(p + 5..40);
        let (rows, labels) = gaussian_fixture(&mut rng, n, p, k);
        let model = LinearModel::fit(&labelled(&rows, &labels, k)).unwrap();
        assert!(!model.diagnostics().rank_deficient);
        let want = normal_equations(&rows, &labels, k);
        for (got, want) in model.coefficients().iter().zip(&want) {
            for (g, w) in got.iter().zip(want) {
                assert!((g - w).abs() < 1e-8, "{g} vs {w}");
            }
        }
    }
}

#[test]
fn duplicate_feature_is_handled() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (rows, labels) = gaussian_fixture(&mut rng, 30, 1, 3);
    let doubled: Vec<Vec<f64>> = rows.iter().map(|r| vec![r[0], r[0]]).collect();
    let single = LinearModel::fit(&labelled(&rows, &labels, 3)).unwrap();
    let dup = LinearModel::fit(&labelled(&doubled, &labels, 3)).unwrap();
    assert!(dup.diagnostics().rank_deficient);
    assert_eq!(dup.diagnostics().rank, 2);
    for (s, d) in single.coefficients().iter().zip(dup.coefficients()) {
        assert!((s[0] - d[0]).abs() < 1e-9);
        // minimum norm splits the slope evenly
        assert!((d[1] - d[2]).abs() < 1e-9);
        assert!((s[1] - (d[1] + d[2])).abs() < 1e-9);
    }
}

#[test]
fn argmax_ties_go_to_lowest_class() {
    let rows = vec![vec![0.0], vec![0.0], vec![1.0], vec![1.0]];
    let m = LinearModel::fit(&labelled(&rows, &[0, 1, 0, 1], 2)).unwrap();
    assert_eq!(m.predict_features(&[0.5]).unwrap(), 0);
}

fn margin(r: &[f64]) -> f64 {
    let mut s = r.to_vec();
    s.sort_by(|a, b| b.total_cmp(a));
    s[0] - s[1]
}

proptest! {
    #[test]
    fn affine_feature_maps_keep_linear_predictions(
        seed in any::<u64>(),
        scale in prop::collection::vec(0.2..5.0f64, 3),
        shift in prop::collection::vec(-10.0..10.0f64, 3),
        shear in -1.0..1.0f64,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (rows, labels) = gaussian_fixture(&mut rng, 40, 3, 3);
        let map = |r: &Vec<f64>| {
            vec![
                scale[0] * r[0] + shear * r[1] + shift[0],
                scale[1] * r[1] + shift[1],
                scale[2] * r[2] + shift[2],
            ]
        };
        let mapped: Vec<Vec<f64>> = rows.iter().map(map).collect();
        let a = LinearModel::fit(&labelled(&rows, &labels, 3)).unwrap();
        let b = LinearModel::fit(&labelled(&mapped, &labels, 3)).unwrap();
        let (probes, _) = gaussian_fixture(&mut rng, 30, 3, 1);
        for q in &probes {
            let ra = a.responses(q).unwrap();
            let rb = b.responses(&map(q)).unwrap();
            for (x, y) in ra.iter().zip(&rb) {
                prop_assert!((x - y).abs() < 1e-7);
            }
            if margin(&ra) > 1e-6 {
                prop_assert_eq!(a.predict_features(q).unwrap(), b.predict_features(&map(q)).unwrap());
            }
        }
    }

    #[test]
    fn nearest_neighbour_ignores_uniform_scaling(
        seed in any::<u64>(),
        s in 0.01..100.0f64,
        manhattan in any::<bool>(),
    ) {
        let metric = if manhattan { Metric::Manhattan } else { Metric::Euclidean };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (rows, labels) = gaussian_fixture(&mut rng, 25, 4, 3);
        let scaled: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| v * s).collect()).collect();
        let a = NearestNeighbor::fit(&labelled(&rows, &labels, 3), 1, metric).unwrap();
        let b = NearestNeighbor::fit(&labelled(&scaled, &labels, 3), 1, metric).unwrap();
        let (probes, _) = gaussian_fixture(&mut rng, 20, 4, 1);
        for q in &probes {
            let qs: Vec<f64> = q.iter().map(|v| v * s).collect();
            prop_assert_eq!(a.nearest(q).unwrap(), b.nearest(&qs).unwrap());
        }
    }

    #[test]
    fn nearest_neighbour_reproduces_training_labels(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (rows, labels) = gaussian_fixture(&mut rng, 20, 3, 4);
        let ds = labelled(&rows, &labels, 4);
        let model = ClassifierKind::ONE_NN.fit(&ds).unwrap();
        prop_assert_eq!(evaluate(&model, &ds).unwrap().correct, 20);
    }
}

#[test]
fn nearest_neighbour_ties_go_to_first_row() {
    let rows = vec![vec![1.0], vec![-1.0], vec![1.0]];
    let m = NearestNeighbor::fit(&labelled(&rows, &[1, 0, 0], 2), 1, Metric::Euclidean).unwrap();
    assert_eq!(m.nearest(&[0.0]).unwrap(), 0);
    assert_eq!(m.predict_features(&[0.0]).unwrap(), 1);
}

fn weighting_set(rows: Vec<(u32, usize, f64)>) -> Dataset {
    let obs = rows
        .into_iter()
        .map(|(g, c, x)| Observation::new(c, vec![x]).with_group(g))
        .collect();
    continuous(obs, 1, 0, 2)
}

#[test]
fn weight_of_hand_built_table() {
    // group 1 is group 0 stretched by two
    let ds = weighting_set(vec![
        (0, 0, 0.0),
        (0, 0, 2.0),
        (0, 1, 4.0),
        (0, 1, 6.0),
        (1, 0, 0.0),
        (1, 0, 4.0),
        (1, 1, 8.0),
        (1, 1, 12.0),
    ]);
    let inter = 1.5 * (20.0f64 / 3.0).sqrt();
    let intra = 1.5 * 2.0f64.sqrt();
    let w = compute_weights(&ds).unwrap();
    assert!((w.as_slice()[0] - inter / intra).abs() < 1e-12);
    assert!((w.as_slice()[0] - (10.0f64 / 3.0).sqrt()).abs() < 1e-12);
}

#[test]
fn noise_features_weigh_about_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let rows: Vec<(u32, usize, f64)> = (0..1000)
        .map(|i| (i as u32 % 4, (i / 4) % 2, StandardNormal.sample(&mut rng)))
        .collect();
    let w = compute_weights(&weighting_set(rows)).unwrap().as_slice()[0];
    assert!((0.8..=1.25).contains(&w), "{w}");
}

#[test]
fn single_row_cells_are_rejected() {
    let ds = weighting_set(vec![(0, 0, 0.0), (0, 0, 1.0), (0, 1, 3.0)]);
    assert!(compute_weights(&ds).is_err());
}

#[test]
fn weighting_flips_a_nearest_neighbour_decision() {
    let rows = vec![vec![0.0, 0.0], vec![0.6, 1.0]];
    let query = [0.1, 1.0];
    let raw = NearestNeighbor::fit(&labelled(&rows, &[0, 1], 2), 1, Metric::Euclidean).unwrap();
    assert_eq!(raw.predict_features(&query).unwrap(), 1);
    let w = WeightVector::new(vec![1.0, 0.1]).unwrap();
    let weighted: Vec<Vec<f64>> = rows.iter().map(|r| apply_weights(&w, r).unwrap()).collect();
    let m = NearestNeighbor::fit(&labelled(&weighted, &[0, 1], 2), 1, Metric::Euclidean).unwrap();
    assert_eq!(
        m.predict_features(&apply_weights(&w, &query).unwrap())
            .unwrap(),
        0
    );
}

#[test]
fn weights_must_be_positive_and_finite() {
    assert!(WeightVector::new(vec![1.0, 0.0]).is_err());
    assert!(WeightVector::new(vec![f64::NAN]).is_err());
    assert!(WeightVector::new(vec![f64::INFINITY]).is_err());
    assert_eq!(
        WeightVector::new(vec![2.0]).unwrap().padded(3).as_slice(),
        [2.0, 1.0, 1.0]
    );
}
