//! Sylvester resultants via LU factorization with partial pivoting.
//!
//! Resultants here are taken at the *formal* degrees of the inputs, which is
//! the right convention for binary forms: a vanishing leading coefficient
//! legitimately pushes the resultant toward zero (common root at infinity).

use super::complex::BigComplex;
use super::poly::Poly;
use rug::Float;

/// Sylvester matrix determinant of (p, q) computed at `prec` bits.
/// Coefficients are rounded to `prec` before factorization, so a caller can
/// re-run the same determinant at higher precision to validate it.
pub fn sylvester_det_at(p: &Poly, q: &Poly, prec: u32) -> BigComplex {
    let m = p.formal_degree();
    let n = q.formal_degree();
    let size = m + n;
    if size == 0 {
        return BigComplex::one(prec);
    }
    let reround = |c: &BigComplex| {
        BigComplex::new(Float::with_val(prec, &c.re), Float::with_val(prec, &c.im))
    };
    let mut a = vec![vec![BigComplex::zero(prec); size]; size];
    // n rows of p coefficients, descending powers, shifted right by the row.
    for row in 0..n {
        for k in 0..=m {
            a[row][row + k] = reround(&p.coeffs[m - k]);
        }
    }
    for row in 0..m {
        for k in 0..=n {
            a[n + row][row + k] = reround(&q.coeffs[n - k]);
        }
    }
    lu_det(a, prec)
}

/// Resultant of (p, q) at their native precision.
pub fn sylvester_resultant(p: &Poly, q: &Poly) -> BigComplex {
    sylvester_det_at(p, q, p.prec().min(q.prec()))
}

fn lu_det(mut a: Vec<Vec<BigComplex>>, prec: u32) -> BigComplex {
    let size = a.len();
    let mut det = BigComplex::one(prec);
    for col in 0..size {
        let mut pivot = col;
        let mut best = a[col][col].abs();
        for row in col + 1..size {
            let mag = a[row][col].abs();
            if mag > best {
                best = mag;
                pivot = row;
            }
        }
        if a[pivot][col].is_zero() {
            return BigComplex::zero(prec);
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -&det;
        }
        det = &det * &a[col][col];
        let inv = a[col][col].inv();
        for row in col + 1..size {
            if a[row][col].is_zero() {
                continue;
            }
            let factor = &a[row][col] * &inv;
            for k in col + 1..size {
                let t = &factor * &a[col][k];
                a[row][k] = &a[row][k] - &t;
            }
            a[row][col] = BigComplex::zero(prec);
        }
    }
    det
}
