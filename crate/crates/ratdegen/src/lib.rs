//! Analysis of degenerating families of complex rational maps.
//!
//! A family `f_n = [P_n : Q_n]` of degree-`d` rational maps on the Riemann
//! sphere, with coefficients given by growth expressions `A e^{alpha n} n^beta`,
//! degenerates when its normalized resultant tends to zero. This crate
//! computes, at desk scale:
//!
//! * periodic points, multipliers, and the growth rates
//!   `lambda_n = (1/l) log+ |(f_n^l)'(p_n)|` along numerically continued
//!   tracks of periodic points (modules [`ratmap`], [`scales`]);
//! * the normalized resultant `|Res(f_n)|`, the degeneration scale
//!   `epsilon(f_n) = 1/(1 - log|Res(f_n)|)`, and its fitted growth class
//!   (module [`ratmap`]);
//! * the non-Archimedean limit map: exact coefficient valuations, residues,
//!   the reduction map and its degree, Newton polygons, and the tropical
//!   piecewise-linear skeleton map on the 0-infinity segment, classified as
//!   good reduction / Bernoulli / expanding (module [`nalimit`]);
//! * scale classification of multiplier growth, the `<= 2d-2` bound on
//!   non-trivial scale classes, and the expanding/Bernoulli dichotomy report
//!   (module [`scales`]).
//!
//! All exact data (valuations, PL maps, Bernoulli segments) is computed in
//! rational arithmetic; all numeric data uses arbitrary-precision floats
//! (default 256 bits) so that coefficients of size `e^{+-4000}` are handled
//! with full relative accuracy.

pub mod cli;
pub mod family;
pub mod nalimit;
pub mod num;
pub mod ratmap;
pub mod scales;

pub use num::{BigComplex, HomogPair, Poly, DEFAULT_PREC};

/// Exact rational scalar used for valuations, exponents, and PL data.
pub type Rat = rug::Rational;
