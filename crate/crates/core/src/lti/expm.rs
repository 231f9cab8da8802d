//! Matrix exponential by scaling and squaring of a truncated Taylor series.

use nalgebra::DMatrix;

/// Taylor terms are summed until the next term's 1-norm falls below this
/// fraction of the partial sum's 1-norm.
pub const TRUNCATION_TOL: f64 = 1e-15;

const MAX_TERMS: usize = 40;

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn expm(m: &DMatrix<f64>) -> DMatrix<f64> {
    assert!(m.is_square(), "expm of a non-square matrix");
    let n = m.nrows();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let norm = norm1(m);
    // scale so that ||M / 2^k||_1 <= 1/2
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = m / 2f64.powi(squarings);

    let mut sum = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    for k in 1..=MAX_TERMS {
        term = &term * &scaled / k as f64;
        sum += &term;
        if norm1(&term) <= TRUNCATION_TOL * norm1(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}
