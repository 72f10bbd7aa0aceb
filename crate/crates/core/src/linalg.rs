//! Dense least squares for the regression-based models.

use nalgebra::DMatrix;

/// Solution of `min ||A X - B||` for a column block of targets.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    /// `cols(A) x cols(B)`.
    pub coefficients: DMatrix<f64>,
    pub rank: usize,
    /// True when `A` lacked full column rank and the minimum-norm solution was used.
    pub rank_deficient: bool,
    /// Euclidean norm of the residual of each target column.
    pub residual_norms: Vec<f64>,
}

fn rank_tolerance(rows: usize, cols: usize, largest: f64) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON * largest
}

/// Column-pivoted QR when `design` has full column rank, SVD minimum-norm
/// solution otherwise.
pub fn solve_least_squares(design: &DMatrix<f64>, targets: &DMatrix<f64>) -> LeastSquares {
    assert_eq!(design.nrows(), targets.nrows(), "row count mismatch");
    let (m, p) = design.shape();

    let mut solution = None;
    let mut rank = 0;
    if m >= p && p > 0 {
        let qr = design.clone().col_piv_qr();
        let r = qr.r();
        let largest = r[(0, 0)].abs();
        let tol = rank_tolerance(m, p, largest);
        rank = (0..p).take_while(|&i| r[(i, i)].abs() > tol).count();
        if rank == p {
            let qtb = qr.q().transpose() * targets;
            if let Some(mut x) = r.solve_upper_triangular(&qtb) {
                qr.p().inv_permute_rows(&mut x);
                solution = Some(x);
            }
        }
    }

    let (coefficients, rank_deficient) = match solution {
        Some(x) => (x, false),
        None => {
            let svd = design.clone().svd(true, true);
            let largest = svd.singular_values.max();
            let tol = rank_tolerance(m, p, largest);
            rank = svd.rank(tol);
            let x = svd
                .solve(targets, tol)
                .unwrap_or_else(|_| DMatrix::zeros(p, targets.ncols()));
            (x, true)
        }
    };

    let residual = design * &coefficients - targets;
    let residual_norms = residual.column_iter().map(|c| c.norm()).collect();
    LeastSquares {
        coefficients,
        rank,
        rank_deficient,
        residual_norms,
    }
}

/// Prepends a column of ones to the row-major `rows`.
pub fn design_with_intercept(rows: &[Vec<f64>], width: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), width + 1, |i, j| {
        if j == 0 {
            1.0
        } else {
            rows[i][j - 1]
        }
    })
}
