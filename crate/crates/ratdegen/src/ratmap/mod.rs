//! Rational maps on the complex projective line: normalization, resultants
//! and ε, iteration, periodic points and multipliers, Lyapunov estimation,
//! and Möbius conjugation.

mod ascent;
mod lyapunov;
mod periodic;

pub use ascent::conjugacy_ascent;
pub use lyapunov::lyapunov_estimate;
pub(crate) use periodic::fixed_point_form;
pub use periodic::{
    lambda, multiplier, normalize_fixed_points, periodic_points, FixedPointConfig, PeriodicPoint,
};

use crate::num::{sylvester_det_at, BigComplex, HomogPair, NumError, Poly};
use rug::Float;
use thiserror::Error;

/// Iterate-degree cap: d^l may not exceed this.
pub const DEGREE_CAP: u64 = 1024;

/// Precision ceiling for the adaptive resultant refinement.
const RES_PREC_CAP: u32 = 1 << 16;

#[derive(Debug, Error)]
pub enum RatMapError {
    #[error("map is degenerate: |Res| below the common-root threshold")]
    DegenerateMap,
    #[error("iterate degree {requested} exceeds cap {cap}")]
    DegreeCapExceeded { requested: u64, cap: u64 },
    #[error("point is not periodic within tolerance (chordal distance {dist:.3e})")]
    NotPeriodic { dist: f64 },
    #[error("backward orbit failed to solve a preimage step")]
    PreimageFailure(#[source] NumError),
    #[error(transparent)]
    Num(#[from] NumError),
}

/// A point of the projective line, coordinates normalized so the larger
/// modulus is 1.
#[derive(Clone, Debug)]
pub struct ProjPoint {
    pub z0: BigComplex,
    pub z1: BigComplex,
}

impl ProjPoint {
    pub fn new(z0: BigComplex, z1: BigComplex) -> Self {
        assert!(
            !(z0.is_zero() && z1.is_zero()),
            "projective point needs a nonzero coordinate"
        );
        let m0 = z0.abs();
        let m1 = z1.abs();
        let m = if m0 >= m1 { m0 } else { m1 };
        let inv = Float::with_val(m.prec(), 1) / m;
        ProjPoint { z0: z0.scale(&inv), z1: z1.scale(&inv) }
    }

    pub fn from_affine(z: BigComplex) -> Self {
        let prec = z.prec();
        ProjPoint::new(z, BigComplex::one(prec))
    }

    pub fn infinity(prec: u32) -> Self {
        ProjPoint { z0: BigComplex::one(prec), z1: BigComplex::zero(prec) }
    }

    pub fn zero(prec: u32) -> Self {
        ProjPoint { z0: BigComplex::zero(prec), z1: BigComplex::one(prec) }
    }

    pub fn prec(&self) -> u32 {
        self.z0.prec().min(self.z1.prec())
    }

    pub fn is_infinity(&self) -> bool {
        self.z1.is_zero()
    }

    /// Affine coordinate z0/z1, or None at infinity.
    pub fn affine(&self) -> Option<BigComplex> {
        if self.is_infinity() {
            None
        } else {
            Some(&self.z0 / &self.z1)
        }
    }

    /// Chordal distance |z0 w1 − z1 w0| / (‖z‖·‖w‖), between 0 and 1.
    pub fn chordal_dist(&self, other: &ProjPoint) -> Float {
        let cross = &(&self.z0 * &other.z1) - &(&self.z1 * &other.z0);
        let prec = self.prec().min(other.prec());
        let nz = (self.z0.abs_sqr() + self.z1.abs_sqr()).sqrt();
        let nw = (other.z0.abs_sqr() + other.z1.abs_sqr()).sqrt();
        Float::with_val(prec, cross.abs() / (nz * nw))
    }

    /// Log-projective coordinates (ln|z0/z1| clamped to ±1e9, arg(z0/z1))
    /// as f64; a cheap embedding for matching heuristics.
    pub fn log_coords(&self) -> (f64, f64) {
        const CLAMP: f64 = 1e9;
        if self.z0.is_zero() {
            return (-CLAMP, 0.0);
        }
        if self.z1.is_zero() {
            return (CLAMP, 0.0);
        }
        let u = (self.z0.ln_abs() - self.z1.ln_abs()).to_f64();
        let ratio = &self.z0 / &self.z1;
        (u.clamp(-CLAMP, CLAMP), ratio.arg_f64())
    }
}

/// Möbius transformation with numeric entries.
#[derive(Clone, Debug)]
pub struct Mobius {
    pub a: BigComplex,
    pub b: BigComplex,
    pub c: BigComplex,
    pub d: BigComplex,
}

impl Mobius {
    pub fn identity(prec: u32) -> Self {
        Mobius {
            a: BigComplex::one(prec),
            b: BigComplex::zero(prec),
            c: BigComplex::zero(prec),
            d: BigComplex::one(prec),
        }
    }

    pub fn det(&self) -> BigComplex {
        &(&self.a * &self.d) - &(&self.b * &self.c)
    }

    pub fn is_invertible(&self) -> bool {
        !self.det().is_zero()
    }

    /// Projective inverse (adjugate).
    pub fn inverse(&self) -> Mobius {
        Mobius { a: self.d.clone(), b: -&self.b, c: -&self.c, d: self.a.clone() }
    }

    pub fn apply(&self, p: &ProjPoint) -> ProjPoint {
        let z0 = &(&self.a * &p.z0) + &(&self.b * &p.z1);
        let z1 = &(&self.c * &p.z0) + &(&self.d * &p.z1);
        ProjPoint::new(z0, z1)
    }

    /// As a degree-1 homogeneous pair (for composition into forms).
    fn as_pair(&self) -> HomogPair {
        HomogPair::new(
            Poly::new(vec![self.b.clone(), self.a.clone()]),
            Poly::new(vec![self.d.clone(), self.c.clone()]),
        )
    }
}

/// f = [P : Q], both forms of the same degree d ≥ 1.
#[derive(Clone, Debug)]
pub struct RationalMap {
    pair: HomogPair,
    normalized: bool,
}

impl RationalMap {
    pub fn new(pair: HomogPair) -> Self {
        assert!(pair.degree() >= 1, "rational map needs degree >= 1");
        RationalMap { pair, normalized: false }
    }

    pub fn degree(&self) -> usize {
        self.pair.degree()
    }

    pub fn prec(&self) -> u32 {
        self.pair.prec()
    }

    pub fn pair(&self) -> &HomogPair {
        &self.pair
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn apply(&self, p: &ProjPoint) -> ProjPoint {
        let (pv, qv) = self.pair.eval(&p.z0, &p.z1);
        ProjPoint::new(pv, qv)
    }

    /// Divide both forms by the coefficient of largest modulus, making that
    /// coefficient exactly 1. Dynamics are unchanged.
    pub fn normalize(&self) -> RationalMap {
        if self.normalized {
            return self.clone();
        }
        let mut best: Option<&BigComplex> = None;
        let mut best_abs = Float::new(self.prec());
        for c in self.pair.p.coeffs.iter().chain(self.pair.q.coeffs.iter()) {
            let a = c.abs();
            if a > best_abs {
                best_abs = a;
                best = Some(c);
            }
        }
        let pivot = best.expect("normalize needs a nonzero coefficient").clone();
        let div = |poly: &Poly| Poly::new(poly.coeffs.iter().map(|c| c / &pivot).collect());
        RationalMap {
            pair: HomogPair::new(div(&self.pair.p), div(&self.pair.q)),
            normalized: true,
        }
    }

    /// f^l by repeated composition, normalized at every step.
    pub fn iterate(&self, l: u32) -> Result<RationalMap, RatMapError> {
        assert!(l >= 1, "iterate needs l >= 1");
        let d = self.degree() as u64;
        let requested = d.checked_pow(l).unwrap_or(u64::MAX);
        if requested > DEGREE_CAP {
            return Err(RatMapError::DegreeCapExceeded { requested, cap: DEGREE_CAP });
        }
        let base = self.normalize();
        let mut acc = base.clone();
        for _ in 1..l {
            acc = RationalMap::new(base.pair.compose(&acc.pair)).normalize();
        }
        Ok(acc)
    }

    /// M^{-1} ∘ f ∘ M, normalized.
    pub fn conjugate(&self, m: &Mobius) -> RationalMap {
        assert!(m.is_invertible(), "conjugation needs an invertible matrix");
        let inner = self.pair.compose(&m.as_pair());
        let d = inner.degree();
        let mut gp = Vec::with_capacity(d + 1);
        let mut gq = Vec::with_capacity(d + 1);
        for k in 0..=d {
            let pk = &inner.p.coeffs[k];
            let qk = &inner.q.coeffs[k];
            gp.push(&(&m.d * pk) - &(&m.b * qk));
            gq.push(&(&m.a * qk) - &(&m.c * pk));
        }
        RationalMap::new(HomogPair::new(Poly::new(gp), Poly::new(gq))).normalize()
    }
}

/// |Res(P,Q)| of the normalized representative of f, refined adaptively:
/// the determinant is recomputed at increasing precision until two runs
/// 128 bits apart agree to 2^{-64} relative error.
pub fn res_abs(f: &RationalMap) -> Result<Float, RatMapError> {
    let g = f.normalize();
    let mut prec = g.prec().max(256);
    loop {
        let d1 = sylvester_det_at(&g.pair.p, &g.pair.q, prec);
        let d2 = sylvester_det_at(&g.pair.p, &g.pair.q, prec + 128);
        let a1 = d1.abs();
        let a2 = d2.abs();
        let diff = (&d1 - &d2).abs();
        let scale = if a1 > a2 { a1 } else { a2.clone() };
        // Two runs 128 bits apart agreeing to 2^{-64} means the value is
        // genuine, however small: cancellation noise re-randomizes with the
        // precision and cannot agree. An exactly zero determinant proves
        // nothing yet: elimination rounds to zero whenever the true value
        // sits below the working resolution, so keep doubling.
        if !scale.is_zero() {
            let mut tol = scale;
            tol >>= 64;
            if diff <= tol {
                return Ok(d2.abs());
            }
        }
        if prec >= RES_PREC_CAP {
            // Never stabilized: the exact value is zero (or beyond reach).
            // Coefficients have max modulus 1, so compare against the noise
            // floor of the final run.
            let mut threshold = Float::with_val(prec, 1);
            threshold >>= prec / 2;
            let mag = d2.abs();
            if mag <= threshold {
                return Err(RatMapError::DegenerateMap);
            }
            return Ok(mag);
        }
        prec *= 2;
    }
}

/// ε(f) = (1 − log|Res(f)|)^{-1}, clamped into (0, 1).
pub fn epsilon(f: &RationalMap) -> Result<f64, RatMapError> {
    let r = res_abs(f)?;
    let ln_r = r.ln().to_f64();
    let eps = 1.0 / (1.0 - ln_r.min(0.0));
    Ok(eps.min(1.0 - 2f64.powi(-40)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> BigComplex {
        BigComplex::from_f64(256, re, im)
    }

    /// z^2 + t as a homogeneous pair.
    fn quad_plus(t: f64) -> RationalMap {
        RationalMap::new(HomogPair::new(
            Poly::new(vec![c(t, 0.0), c(0.0, 0.0), c(1.0, 0.0)]),
            Poly::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]),
        ))
    }

    #[test]
    fn normalize_scales_and_is_idempotent() {
        let f = RationalMap::new(HomogPair::new(
            Poly::new(vec![c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)]),
            Poly::new(vec![c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]),
        ));
        let g = f.normalize();
        assert_eq!(g.pair().p.coeffs[2].to_f64s(), (1.0, 0.0));
        assert_eq!(g.pair().q.coeffs[0].to_f64s(), (1.0, 0.0));
        let h = g.normalize();
        assert_eq!(h.pair().p.coeffs[2], g.pair().p.coeffs[2]);
    }

    #[test]
    fn res_abs_known_values() {
        // z^2 -> |Res| = 1.
        let r = res_abs(&quad_plus(0.0)).unwrap();
        assert!((r.to_f64() - 1.0).abs() < 1e-60);
        // z^2 + 10 normalized by 10: |Res| = 10^{-4} (Res(z^2+c, 1) scales
        // as (1/10)^{2d} times the unnormalized Res = 1).
        let r = res_abs(&quad_plus(10.0)).unwrap();
        assert!((r.to_f64() - 1e-4).abs() < 1e-16);
    }

    #[test]
    fn res_abs_survives_extreme_magnitudes() {
        // z^2 + e^1000: normalized |Res| = e^{-4000}, far below 2^{-256}
        // noise; the adaptive refinement must still resolve it.
        let prec = 256;
        let t = Float::with_val(prec, 1000).exp();
        let f = RationalMap::new(HomogPair::new(
            Poly::new(vec![
                BigComplex::new(t, Float::new(prec)),
                BigComplex::zero(prec),
                BigComplex::one(prec),
            ]),
            Poly::new(vec![
                BigComplex::one(prec),
                BigComplex::zero(prec),
                BigComplex::zero(prec),
            ]),
        ));
        let r = res_abs(&f).unwrap();
        let expect = Float::with_val(prec, -4000).exp();
        let rel = ((r.clone() - &expect) / expect).abs().to_f64();
        assert!(rel < 1e-15, "relative error {rel}");
    }

    #[test]
    fn degenerate_map_detected() {
        // P = z0 z1, Q = z1^2 share the root [0:1].
        let f = RationalMap::new(HomogPair::new(
            Poly::new(vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]),
            Poly::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]),
        ));
        assert!(matches!(res_abs(&f), Err(RatMapError::DegenerateMap)));
    }

    #[test]
    fn epsilon_values() {
        // z^2 + t has normalized |Res| = t^{-4}; t = e^{9/4} gives
        // |Res| = e^{-9} and hence ε = 1/10.
        let prec = 256;
        let f = RationalMap::new(HomogPair::new(
            Poly::new(vec![
                BigComplex::new(Float::with_val(prec, Float::with_val(prec, 2.25).exp()), Float::new(prec)),
                BigComplex::zero(prec),
                BigComplex::one(prec),
            ]),
            Poly::new(vec![
                BigComplex::one(prec),
                BigComplex::zero(prec),
                BigComplex::zero(prec),
            ]),
        ));
        let eps = epsilon(&f).unwrap();
        assert!((eps - 0.1).abs() < 1e-12);
        // |Res| = 1 -> clamped just below 1.
        let eps = epsilon(&quad_plus(0.0)).unwrap();
        assert!(eps < 1.0 && eps > 0.999999);
    }

    #[test]
    fn iterate_degrees_and_cap() {
        let f = quad_plus(0.0);
        let f3 = f.iterate(3).unwrap();
        assert_eq!(f3.degree(), 8);
        let f1 = f.iterate(1).unwrap();
        assert_eq!(f1.degree(), 2);
        assert!(matches!(
            f.iterate(11),
            Err(RatMapError::DegreeCapExceeded { requested: 2048, cap: 1024 })
        ));
    }

    #[test]
    fn iterate_matches_symbolic_square() {
        // (z^2 + c)^{∘2} = z^4 + 2cz^2 + c^2 + c for c = 1 + i.
        let cc = c(1.0, 1.0);
        let f = RationalMap::new(HomogPair::new(
            Poly::new(vec![cc.clone(), c(0.0, 0.0), c(1.0, 0.0)]),
            Poly::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]),
        ));
        let f2 = f.iterate(2).unwrap();
        let z = c(0.7, -0.4);
        let one = c(1.0, 0.0);
        let (p, q) = f2.pair().eval(&z, &one);
        let got = &p / &q;
        let inner = &(&z * &z) + &cc;
        let expect = &(&inner * &inner) + &cc;
        assert!((&got - &expect).abs().to_f64() < 1e-50);
    }

    #[test]
    fn res_abs_not_conjugacy_invariant() {
        let f = quad_plus(10.0);
        let m = Mobius {
            a: c(2.0, 0.0),
            b: c(0.0, 0.0),
            c: c(0.0, 0.0),
            d: c(1.0, 0.0),
        };
        let g = f.conjugate(&m);
        let rf = res_abs(&f).unwrap().to_f64();
        let rg = res_abs(&g).unwrap().to_f64();
        assert!((rf - rg).abs() > 1e-6, "expected different resultants, got {rf} vs {rg}");
    }

    #[test]
    fn conjugate_by_inversion_fixes_square_map() {
        let f = quad_plus(0.0);
        let m = Mobius {
            a: c(0.0, 0.0),
            b: c(1.0, 0.0),
            c: c(1.0, 0.0),
            d: c(0.0, 0.0),
        };
        let g = f.conjugate(&m);
        // Still z^2: check at a point.
        let z = ProjPoint::from_affine(c(1.7, 0.3));
        let img_f = f.apply(&z);
        let img_g = g.apply(&z);
        assert!(img_f.chordal_dist(&img_g).to_f64() < 1e-60);
    }

    #[test]
    fn identity_conjugation_is_identity() {
        let f = quad_plus(3.0).normalize();
        let g = f.conjugate(&Mobius::identity(256));
        for k in 0..=2 {
            assert!((&g.pair().p.coeffs[k] - &f.pair().p.coeffs[k]).abs().to_f64() < 1e-70);
            assert!((&g.pair().q.coeffs[k] - &f.pair().q.coeffs[k]).abs().to_f64() < 1e-70);
        }
    }

    #[test]
    fn chordal_metric_basics() {
        let zero = ProjPoint::zero(256);
        let inf = ProjPoint::infinity(256);
        let one = ProjPoint::from_affine(c(1.0, 0.0));
        assert!((zero.chordal_dist(&inf).to_f64() - 1.0).abs() < 1e-30);
        assert!(zero.chordal_dist(&zero).to_f64() == 0.0);
        let d01 = zero.chordal_dist(&one).to_f64();
        assert!((d01 - 1.0 / 2f64.sqrt()).abs() < 1e-15);
    }
}
