//! Numeric kernel: arbitrary-precision complex scalars, dense polynomial and
//! binary-form algebra, simultaneous root finding, and Sylvester resultants.

mod complex;
mod poly;
mod resultant;
mod roots;

pub use complex::BigComplex;
pub use poly::{HomogPair, Poly};
pub use resultant::{sylvester_det_at, sylvester_resultant};
pub use roots::{all_roots, all_roots_seeded};

use rug::Float;
use thiserror::Error;

/// Default working precision in bits.
pub const DEFAULT_PREC: u32 = 256;

/// Root-solver iteration cap, per unit of degree.
pub const ITER_CAP_PER_DEG: usize = 200;

#[derive(Debug, Error)]
pub enum NumError {
    #[error("polynomial has no nonzero coefficient of positive degree")]
    ZeroPolynomial,
    #[error("root iteration hit the cap (best log2 residual {log2_residual})")]
    NonConvergence {
        best: Vec<BigComplex>,
        log2_residual: f64,
    },
}

/// Real scalar at precision `prec` from an f64.
pub fn real(prec: u32, v: f64) -> Float {
    Float::with_val(prec, v)
}

/// Exact conversion of a rational to a float at `prec` bits.
pub fn rat_to_float(prec: u32, r: &rug::Rational) -> Float {
    Float::with_val(prec, r)
}
