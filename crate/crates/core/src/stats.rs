//! Small descriptive statistics used across the crate.

/// Lower bound applied to every stored or returned standard deviation.
pub const SIGMA_FLOOR: f64 = 1e-6;

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n - 1 denominator). NaN for fewer than two values.
pub fn sample_std(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (n - 1) as f64).sqrt()
}

pub fn floor_sigma(s: f64) -> f64 {
    if s.is_nan() {
        SIGMA_FLOOR
    } else {
        s.max(SIGMA_FLOOR)
    }
}

/// Per-column (mean, sample stddev) over a set of rows.
pub fn column_moments<'a, I>(rows: I, width: usize) -> Vec<(f64, f64)>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); width];
    for row in rows {
        for (c, v) in cols.iter_mut().zip(row) {
            c.push(*v);
        }
    }
    cols.iter().map(|c| (mean(c), sample_std(c))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_std_small() {
        // {2,4,6}: squared deviations 4+0+4 over n-1=2 -> variance 4
        assert_eq!(sample_std(&[2.0, 4.0, 6.0]), 2.0);
        assert!((sample_std(&[1.0, 3.0]) - 2f64.sqrt()).abs() < 1e-15);
        assert!(sample_std(&[1.0]).is_nan());
    }

    #[test]
    fn floor() {
        assert_eq!(floor_sigma(0.0), SIGMA_FLOOR);
        assert_eq!(floor_sigma(f64::NAN), SIGMA_FLOOR);
        assert_eq!(floor_sigma(3.0), 3.0);
    }
}
