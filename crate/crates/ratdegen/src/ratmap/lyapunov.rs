//! Monte-Carlo Lyapunov exponent: sample the equilibrium measure by random
//! backward orbits and average the spherical derivative's log there.

use super::periodic::local_derivative;
use super::{ProjPoint, RatMapError, RationalMap};
use crate::num::{all_roots, BigComplex, NumError, Poly};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One backward step from y: solve y1·P − y0·Q = 0 and pick one of the d
/// preimages uniformly (multiplicities and the branches at ∞ included).
fn backward_step(
    f: &RationalMap,
    y: &ProjPoint,
    rng: &mut ChaCha8Rng,
) -> Result<ProjPoint, RatMapError> {
    let pair = f.pair();
    let d = f.degree();
    let prec = f.prec().min(y.prec());
    let coeffs: Vec<BigComplex> = (0..=d)
        .map(|i| &(&y.z1 * &pair.p.coeffs[i]) - &(&y.z0 * &pair.q.coeffs[i]))
        .collect();
    let poly = Poly::new(coeffs);
    if poly.is_zero() {
        // Only happens when P and Q are proportional, i.e. f degenerate.
        return Err(RatMapError::PreimageFailure(NumError::ZeroPolynomial));
    }
    let roots = all_roots(&poly).map_err(RatMapError::PreimageFailure)?;
    let k = rng.gen_range(0..d);
    if k < roots.len() {
        Ok(ProjPoint::from_affine(roots[k].clone()))
    } else {
        Ok(ProjPoint::infinity(prec))
    }
}

/// Estimate (χ, standard error) by averaging log|df| over the endpoints of
/// `samples` independent backward orbits of length `depth`. Deterministic
/// for a fixed seed.
pub fn lyapunov_estimate(
    f: &RationalMap,
    depth: u32,
    samples: u32,
    seed: u64,
) -> Result<(f64, f64), RatMapError> {
    assert!(depth >= 8, "depth must be at least 8");
    assert!(samples >= 64, "need at least 64 samples");
    let g = f.normalize();
    let prec = g.prec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vals = Vec::with_capacity(samples as usize);
    for _ in 0..samples {
        // Uniform start on the unit disk of a random chart.
        let theta = rng.gen::<f64>() * std::f64::consts::TAU;
        let r = rng.gen::<f64>().sqrt();
        let w = BigComplex::from_f64(prec, r * theta.cos(), r * theta.sin());
        let mut x = if rng.gen::<bool>() {
            ProjPoint::new(w, BigComplex::one(prec))
        } else {
            ProjPoint::new(BigComplex::one(prec), w)
        };
        for _ in 0..depth {
            x = backward_step(&g, &x, &mut rng)?;
        }
        // In the modulus-≤1 charts |g'| is the spherical derivative |df|.
        let (deriv, _) = local_derivative(&g, &x);
        let v = deriv.ln_abs().to_f64();
        if v.is_finite() {
            vals.push(v);
        }
    }
    let n = vals.len().max(1) as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = if vals.len() > 1 {
        vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok((mean, (var / n).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::HomogPair;

    fn c(re: f64, im: f64) -> BigComplex {
        BigComplex::from_f64(128, re, im)
    }

    fn poly_map(p: &[f64]) -> RationalMap {
        let d = p.len() - 1;
        let mut q = vec![c(0.0, 0.0); d + 1];
        q[0] = c(1.0, 0.0);
        RationalMap::new(HomogPair::new(
            Poly::new(p.iter().map(|&re| c(re, 0.0)).collect()),
            Poly::new(q),
        ))
    }

    #[test]
    fn power_map_gives_log_d() {
        // z^3: the equilibrium measure lives on the unit circle where
        // |df| = 3.
        let f = poly_map(&[0.0, 0.0, 0.0, 1.0]);
        let (chi, se) = lyapunov_estimate(&f, 12, 80, 1).unwrap();
        assert!((chi - 3f64.ln()).abs() < 0.01, "chi {chi} se {se}");
    }

    #[test]
    fn chebyshev_gives_log_two() {
        // z^2 - 2 on [-2, 2]: χ = log 2.
        let f = poly_map(&[-2.0, 0.0, 1.0]);
        let (chi, se) = lyapunov_estimate(&f, 16, 600, 2).unwrap();
        assert!(
            (chi - 2f64.ln()).abs() < (3.0 * se).max(0.1),
            "chi {chi} se {se}"
        );
    }

    #[test]
    fn nonnegative_for_generic_maps() {
        let f = RationalMap::new(HomogPair::new(
            Poly::new(vec![c(0.3, 0.2), c(-0.4, 0.0), c(1.0, 0.0)]),
            Poly::new(vec![c(1.0, 0.0), c(0.2, -0.1), c(0.3, 0.0)]),
        ));
        let (chi, se) = lyapunov_estimate(&f, 12, 128, 3).unwrap();
        assert!(chi > -3.0 * se - 0.05, "chi {chi} se {se}");
    }

    #[test]
    fn deterministic_given_seed() {
        let f = poly_map(&[-1.0, 0.0, 1.0]);
        let a = lyapunov_estimate(&f, 10, 64, 42).unwrap();
        let b = lyapunov_estimate(&f, 10, 64, 42).unwrap();
        assert_eq!(a, b);
    }
}
