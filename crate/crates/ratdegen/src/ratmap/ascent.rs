//! Heuristic coordinate ascent maximizing |Res(M^{-1} f M)| over Möbius
//! changes of coordinates: a lower bound for the conjugacy-class resultant.

use super::{res_abs, Mobius, RatMapError, RationalMap};
use crate::num::BigComplex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Float;

/// Compose m with an elementary near-identity move drawn from rng: a real
/// diagonal scaling, a translation, or an inversion with a small offset.
fn propose(m: &Mobius, rng: &mut ChaCha8Rng, step: f64, prec: u32) -> Mobius {
    let unit = |rng: &mut ChaCha8Rng| 2.0 * rng.gen::<f64>() - 1.0;
    let e = match rng.gen_range(0..3u8) {
        0 => {
            // diag(e^t, 1)
            let t = step * unit(rng);
            Mobius {
                a: BigComplex::from_real(Float::with_val(prec, t).exp()),
                b: BigComplex::zero(prec),
                c: BigComplex::zero(prec),
                d: BigComplex::one(prec),
            }
        }
        1 => {
            // z + δ
            let re = step * unit(rng);
            let im = step * unit(rng);
            Mobius {
                a: BigComplex::one(prec),
                b: BigComplex::from_f64(prec, re, im),
                c: BigComplex::zero(prec),
                d: BigComplex::one(prec),
            }
        }
        _ => {
            // 1/(z + δ)
            let re = step * unit(rng);
            let im = step * unit(rng);
            Mobius {
                a: BigComplex::zero(prec),
                b: BigComplex::one(prec),
                c: BigComplex::one(prec),
                d: BigComplex::from_f64(prec, re, im),
            }
        }
    };
    // m ∘ e as matrices.
    Mobius {
        a: &(&m.a * &e.a) + &(&m.b * &e.c),
        b: &(&m.a * &e.b) + &(&m.b * &e.d),
        c: &(&m.c * &e.a) + &(&m.d * &e.c),
        d: &(&m.c * &e.b) + &(&m.d * &e.d),
    }
}

/// Hill-climb |Res| over conjugation. Each unit of budget evaluates one
/// candidate; only improvements are kept, so the result is never below
/// res_abs(f). Returns the best coordinate change and the |Res| it achieves.
pub fn conjugacy_ascent(
    f: &RationalMap,
    budget: u32,
    seed: u64,
) -> Result<(Mobius, Float), RatMapError> {
    let base = f.normalize();
    let prec = base.prec();
    let mut best_m = Mobius::identity(prec);
    let mut best_r = res_abs(&base)?;
    let mut step = 1.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..budget {
        let cand = propose(&best_m, &mut rng, step, prec);
        if !cand.is_invertible() {
            continue;
        }
        let g = base.conjugate(&cand);
        match res_abs(&g) {
            Ok(r) if r > best_r => {
                best_r = r;
                best_m = cand;
                step = (step * 1.25).min(4.0);
            }
            // Rejection (including degenerate-looking candidates): narrow in.
            _ => step = (step * 0.985).max(1e-3),
        }
    }
    Ok((best_m, best_r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{HomogPair, Poly};

    fn c(re: f64, im: f64) -> BigComplex {
        BigComplex::from_f64(256, re, im)
    }

    fn quad_scaled(scale: f64) -> RationalMap {
        // (z/s)^2·s ... directly: z ↦ z^2·scale.
        RationalMap::new(HomogPair::new(
            Poly::new(vec![c(0.0, 0.0), c(0.0, 0.0), c(scale, 0.0)]),
            Poly::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]),
        ))
    }

    #[test]
    fn zero_budget_returns_identity_and_res() {
        let f = quad_scaled(1.0);
        let (m, r) = conjugacy_ascent(&f, 0, 9).unwrap();
        assert!(m.b.is_zero() && m.c.is_zero());
        assert!((&m.a - &m.d).abs().to_f64() < 1e-70);
        let expect = res_abs(&f).unwrap();
        assert!((r - expect).abs().to_f64() < 1e-70);
    }

    #[test]
    fn recovers_planted_diagonal_optimum() {
        // z ↦ z²/100 is diag(10,1)-conjugate to z², which has |Res| = 1,
        // the optimum for this class.
        let f = quad_scaled(0.01);
        let start = res_abs(&f).unwrap().to_f64();
        assert!(start < 1e-3);
        let (_, r) = conjugacy_ascent(&f, 400, 11).unwrap();
        let r = r.to_f64();
        assert!(r > 0.99, "ascent reached only {r}");
        assert!(r <= 1.0 + 1e-12);
    }

    #[test]
    fn square_map_diagonal_sweep_never_beats_one() {
        // For z² every diagonal conjugation has |Res| ≤ 1.
        let f = quad_scaled(1.0);
        for t in [-3.0f64, -1.0, -0.1, 0.1, 1.0, 3.0] {
            let m = Mobius {
                a: BigComplex::from_real(Float::with_val(256, t).exp()),
                b: c(0.0, 0.0),
                c: c(0.0, 0.0),
                d: c(1.0, 0.0),
            };
            let r = res_abs(&f.conjugate(&m)).unwrap().to_f64();
            assert!(r <= 1.0 + 1e-30, "diag({t}) gave |Res| = {r}");
        }
        let (_, r) = conjugacy_ascent(&f, 150, 5).unwrap();
        assert!((r.to_f64() - 1.0).abs() < 1e-12);
    }
}
