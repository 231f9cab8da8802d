//! Polynomial roots from the eigenvalues of a balanced companion matrix.
//!
//! Eigenvalues are refined by Newton steps on the original coefficients, kept
//! only while they shrink `|p(z)|`. Target: relative residual
//! `|p(z)| / sum_k |c_k| |z|^k <= 1e-10` for well-separated roots.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::poly::Polynomial;
use crate::error::{Error, Result};

pub const ROOT_RESIDUAL_TARGET: f64 = 1e-10;

const NEWTON_STEPS: usize = 8;

pub fn roots(p: &Polynomial) -> Result<Vec<Complex64>> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let c = p.coeffs();
    let zeros_at_origin = c.iter().take_while(|&&x| x == 0.0).count();
    let reduced = &c[zeros_at_origin..];
    let mut out = vec![Complex64::new(0.0, 0.0); zeros_at_origin];
    let n = reduced.len() - 1;
    match n {
        0 => {}
        1 => out.push(Complex64::new(-reduced[0] / reduced[1], 0.0)),
        _ => {
            let lead = reduced[n];
            let mut m = DMatrix::<f64>::zeros(n, n);
            for i in 1..n {
                m[(i, i - 1)] = 1.0;
            }
            for i in 0..n {
                m[(i, n - 1)] = -reduced[i] / lead;
            }
            balance(&mut m);
            let eig = m.complex_eigenvalues();
            if eig.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::RootFinding("non-finite eigenvalue".into()));
            }
            out.extend(eig.iter().map(|z| polish(p, Complex64::new(z.re, z.im))));
        }
    }
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(out)
}

/// Relative residual of `z` as a root of `p`.
pub fn relative_residual(p: &Polynomial, z: Complex64) -> f64 {
    let scale: f64 = p
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| c.abs() * z.norm().powi(k as i32))
        .sum();
    if scale == 0.0 {
        0.0
    } else {
        p.eval(z).norm() / scale
    }
}

fn polish(p: &Polynomial, mut z: Complex64) -> Complex64 {
    let dp = p.derivative();
    let mut res = p.eval(z).norm();
    for _ in 0..NEWTON_STEPS {
        if res == 0.0 {
            break;
        }
        let d = dp.eval(z);
        if d.norm() == 0.0 {
            break;
        }
        let cand = z - p.eval(z) / d;
        let cand_res = p.eval(cand).norm();
        if !(cand_res < res) {
            break;
        }
        z = cand;
        res = cand_res;
    }
    z
}

/// Diagonal similarity scaling by powers of two so that row and column norms
/// are comparable (Parlett-Reinsch). Eigenvalues are unchanged.
fn balance(m: &mut DMatrix<f64>) {
    const RADIX: f64 = 2.0;
    let n = m.nrows();
    for _ in 0..100 {
        let mut converged = true;
        for i in 0..n {
            let (col, row) = off_diagonal_norms(m, i);
            if col == 0.0 || row == 0.0 {
                continue;
            }
            let mut f = 1.0;
            let mut c = col;
            while c < row / RADIX {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            while c > row * RADIX {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if f != 1.0 && col * f + row / f < 0.95 * (col + row) {
                converged = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
        if converged {
            break;
        }
    }
}

fn off_diagonal_norms(m: &DMatrix<f64>, i: usize) -> (f64, f64) {
    let mut c = 0.0;
    let mut r = 0.0;
    for j in 0..m.nrows() {
        if j != i {
            c += m[(j, i)].abs();
            r += m[(i, j)].abs();
        }
    }
    (c, r)
}
