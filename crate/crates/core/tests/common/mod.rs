#![allow(dead_code)]

use std::path::PathBuf;

use ctxlearn::{Column, Dataset, FeatureKind, FeatureRole, FeatureSchema, Observation};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn vowel_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/vowel-context.data")
}

/// Discrete dataset with every column marked primary; roles are what is being detected.
pub fn discrete(rows: &[(usize, Vec<u32>)], n_classes: usize) -> Dataset {
    let width = rows.first().map_or(0, |r| r.1.len());
    let columns = (0..width)
        .map(|i| {
            Column::new(
                format!("x{}", i + 1),
                FeatureRole::Primary,
                FeatureKind::Discrete,
            )
        })
        .collect();
    let classes = (0..n_classes).map(|c| format!("c{c}")).collect();
    let schema = FeatureSchema::new(columns, classes).unwrap();
    let obs = rows
        .iter()
        .map(|(c, x)| Observation::new(*c, x.iter().map(|&v| v as f64).collect()))
        .collect();
    Dataset::new(schema, obs).unwrap()
}

/// Continuous dataset: `primary` columns p0.., then `context` columns c0...
pub fn continuous(
    rows: Vec<Observation>,
    n_primary: usize,
    n_context: usize,
    n_classes: usize,
) -> Dataset {
    let mut columns: Vec<Column> = (0..n_primary)
        .map(|i| {
            Column::new(
                format!("p{i}"),
                FeatureRole::Primary,
                FeatureKind::Continuous,
            )
        })
        .collect();
    columns.extend((0..n_context).map(|i| {
        Column::new(
            format!("c{i}"),
            FeatureRole::Contextual,
            FeatureKind::Continuous,
        )
    }));
    let classes = (0..n_classes).map(|c| format!("k{c}")).collect();
    Dataset::new(FeatureSchema::new(columns, classes).unwrap(), rows).unwrap()
}

/// Brute-force role oracle over raw rows, by exact integer comparison.
pub struct Oracle<'a> {
    pub rows: &'a [(usize, Vec<u32>)],
    pub n_classes: usize,
}

impl Oracle<'_> {
    fn count(&self, class: Option<usize>, fixed: &[(usize, u32)]) -> u128 {
        self.rows
            .iter()
            .filter(|(c, x)| class.is_none_or(|k| k == *c) && fixed.iter().all(|&(i, v)| x[i] == v))
            .count() as u128
    }

    /// Is there a class and an observed assignment to `a` where
    /// p(class | a) differs from p(class | b), with `b` a subset of `a`?
    fn differs(&self, a: &[usize], b: &[usize]) -> bool {
        self.rows.iter().any(|(_, x)| {
            let fa: Vec<(usize, u32)> = a.iter().map(|&i| (i, x[i])).collect();
            let fb: Vec<(usize, u32)> = b.iter().map(|&i| (i, x[i])).collect();
            let (na, nb) = (self.count(None, &fa), self.count(None, &fb));
            (0..self.n_classes)
                .any(|c| self.count(Some(c), &fa) * nb != self.count(Some(c), &fb) * na)
        })
    }

    pub fn primary(&self, i: usize) -> bool {
        self.differs(&[i], &[])
    }

    pub fn contextual(&self, i: usize) -> bool {
        let n = self.rows[0].1.len();
        let all: Vec<usize> = (0..n).collect();
        let rest: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        !self.primary(i) && self.differs(&all, &rest)
    }

    pub fn role(&self, i: usize) -> FeatureRole {
        if self.primary(i) {
            FeatureRole::Primary
        } else if self.contextual(i) {
            FeatureRole::Contextual
        } else {
            FeatureRole::Irrelevant
        }
    }

    pub fn sensitive(&self, i: usize, j: usize) -> bool {
        self.differs(&[i, j], &[i])
    }
}

/// y = x1 xor x2 over the full 2x2 table.
pub fn xor_rows() -> Vec<(usize, Vec<u32>)> {
    let mut rows = Vec::new();
    for a in 0..2 {
        for b in 0..2 {
            rows.push(((a ^ b) as usize, vec![a, b]));
        }
    }
    rows
}

/// y = x1, x2 an independent fair coin.
pub fn copy_rows() -> Vec<(usize, Vec<u32>)> {
    let mut rows = Vec::new();
    for a in 0..2 {
        for b in 0..2 {
            rows.push((a as usize, vec![a, b]));
        }
    }
    rows
}

/// y = x1 xor x2 with p(x2 = 1) = 3/4.
pub fn biased_flip_rows() -> Vec<(usize, Vec<u32>)> {
    let mut rows = Vec::new();
    for a in 0..2u32 {
        rows.push((a as usize, vec![a, 0]));
        for _ in 0..3 {
            rows.push(((a ^ 1) as usize, vec![a, 1]));
        }
    }
    rows
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            let pivot = a[col].clone();
            for (x, p) in a[r][col..].iter_mut().zip(&pivot[col..]) {
                *x -= f * p;
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Per-class coefficients `[intercept, slopes..]` from the normal equations.
pub fn normal_equations(rows: &[Vec<f64>], labels: &[usize], n_classes: usize) -> Vec<Vec<f64>> {
    let p = rows[0].len() + 1;
    let design: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| std::iter::once(1.0).chain(r.iter().copied()).collect())
        .collect();
    let xtx: Vec<Vec<f64>> = (0..p)
        .map(|i| {
            (0..p)
                .map(|j| design.iter().map(|d| d[i] * d[j]).sum())
                .collect()
        })
        .collect();
    (0..n_classes)
        .map(|c| {
            let xty = (0..p)
                .map(|i| {
                    design
                        .iter()
                        .zip(labels)
                        .map(|(d, &l)| if l == c { d[i] } else { 0.0 })
                        .sum()
                })
                .collect();
            gauss_solve(xtx.clone(), xty)
        })
        .collect()
}

pub fn gaussian_fixture(
    rng: &mut ChaCha8Rng,
    n: usize,
    p: usize,
    k: usize,
) -> (Vec<Vec<f64>>, Vec<usize>) {
    let rows = (0..n)
        .map(|_| (0..p).map(|_| StandardNormal.sample(&mut *rng)).collect())
        .collect();
    let labels = (0..n)
        .map(|i| if i < k { i } else { rng.random_range(0..k) })
        .collect();
    (rows, labels)
}

pub fn labelled(rows: &[Vec<f64>], labels: &[usize], k: usize) -> Dataset {
    let obs = rows
        .iter()
        .zip(labels)
        .map(|(r, &l)| Observation::new(l, r.clone()))
        .collect();
    continuous(obs, rows[0].len(), 0, k)
}
