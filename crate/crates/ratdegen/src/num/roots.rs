//! Simultaneous root finding: Ehrlich-Aberth iteration started from a
//! Newton-polygon placement of initial guesses.
//!
//! The placement reads root moduli off the upper convex hull of the points
//! (i, log |c_i|), so widely split magnitudes (e.g. e^1000 next to e^-1000)
//! start on the right circles immediately instead of drifting there.

use super::complex::BigComplex;
use super::poly::Poly;
use super::{NumError, ITER_CAP_PER_DEG};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rug::Float;

const DEFAULT_SEED: u64 = 0x0ddb_a11c_0c0a_c01a;

/// All complex roots of `p` (its actual degree many), deterministically.
pub fn all_roots(p: &Poly) -> Result<Vec<BigComplex>, NumError> {
    all_roots_seeded(p, DEFAULT_SEED)
}

/// As `all_roots`, with an explicit seed for the placement jitter.
pub fn all_roots_seeded(p: &Poly, seed: u64) -> Result<Vec<BigComplex>, NumError> {
    let prec = p.prec();
    let deg = match p.actual_degree() {
        None => return Err(NumError::ZeroPolynomial),
        Some(0) => return Ok(Vec::new()),
        Some(d) => d,
    };
    let mut coeffs: Vec<BigComplex> = p.coeffs[..=deg].to_vec();
    // Exact zero roots split off so the core solver sees c_0 != 0.
    let low = coeffs.iter().position(|c| !c.is_zero()).unwrap();
    let mut roots: Vec<BigComplex> = vec![BigComplex::zero(prec); low];
    coeffs.drain(..low);
    if coeffs.len() == 1 {
        return Ok(roots);
    }
    let reduced = Poly::new(coeffs);
    let found = aberth(&reduced, seed)?;
    roots.extend(found);
    Ok(roots)
}

fn aberth(p: &Poly, seed: u64) -> Result<Vec<BigComplex>, NumError> {
    let prec = p.prec();
    let m = p.formal_degree();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z = initial_guesses(p, &mut rng);
    debug_assert_eq!(z.len(), m);

    let dp = p.derivative();
    let maxc = p.max_coeff_abs();
    let shift = prec.saturating_sub(20);
    let one = BigComplex::one(prec);
    let mut converged = vec![false; m];
    let cap = ITER_CAP_PER_DEG * m;

    // Backward-error scale sum_i |c_i| |z|^i: |p(z)| below 2^-shift of it
    // means z is an exact root of a relatively-perturbed polynomial. A
    // cruder bound like maxc * |z|^m is far too loose when the leading
    // coefficient is many orders below maxc.
    let abs_coeffs: Vec<Float> = p.coeffs[..=m].iter().map(|c| c.abs()).collect();
    let residual_scale = |zi: &BigComplex| -> Float {
        let az = zi.abs();
        let mut s = Float::new(prec);
        for c in abs_coeffs.iter().rev() {
            s = s * &az + c;
        }
        s
    };

    for _ in 0..cap {
        for i in 0..m {
            if converged[i] {
                continue;
            }
            let pv = p.eval(&z[i]);
            let mut thr = residual_scale(&z[i]);
            thr >>= shift;
            if pv.abs() <= thr {
                converged[i] = true;
                continue;
            }
            let dv = dp.eval(&z[i]);
            if dv.is_zero() {
                nudge(&mut z[i], prec, &mut rng);
                continue;
            }
            let n = &pv / &dv;
            let mut s = BigComplex::zero(prec);
            let mut collided = false;
            for j in 0..m {
                if j == i {
                    continue;
                }
                let diff = &z[i] - &z[j];
                if diff.is_zero() {
                    collided = true;
                    break;
                }
                s = &s + &diff.inv();
            }
            if collided {
                nudge(&mut z[i], prec, &mut rng);
                continue;
            }
            let denom = &one - &(&n * &s);
            let w = if denom.is_zero() { n } else { &n / &denom };
            z[i] = &z[i] - &w;
            if !z[i].is_finite() {
                // Blown-up step: restart this root from a fresh random spot.
                let r = maxc.clone();
                z[i] = random_on_circle(&r, prec, &mut rng);
            }
        }
        if converged.iter().all(|&c| c) {
            return Ok(z);
        }
    }

    let mut worst = f64::NEG_INFINITY;
    for zi in &z {
        let pv = p.eval(zi);
        let ratio = Float::with_val(prec, pv.abs() / residual_scale(zi));
        let l2 = if ratio.is_zero() {
            f64::NEG_INFINITY
        } else {
            ratio.ln().to_f64() / std::f64::consts::LN_2
        };
        if l2 > worst {
            worst = l2;
        }
    }
    Err(NumError::NonConvergence {
        best: z,
        log2_residual: worst,
    })
}

/// Newton-polygon placement: for each upper-hull edge of slope s spanning k
/// coefficient indices, k guesses go on the circle of radius e^{-s}.
fn initial_guesses(p: &Poly, rng: &mut ChaCha8Rng) -> Vec<BigComplex> {
    let prec = p.prec();
    let pts: Vec<(usize, f64)> = p
        .coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| (i, c.ln_abs().to_f64()))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &pt in &pts {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (b.0 as f64 - a.0 as f64) * (pt.1 - a.1)
                - (pt.0 as f64 - a.0 as f64) * (b.1 - a.1);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let mut guesses = Vec::with_capacity(p.formal_degree());
    for e in 1..hull.len() {
        let (i1, y1) = hull[e - 1];
        let (i2, y2) = hull[e];
        let count = i2 - i1;
        let slope = (y2 - y1) / count as f64;
        let radius = Float::with_val(prec, -slope).exp();
        let phase: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
        for k in 0..count {
            let jitter: f64 = 1.0 + 0.1 * (rng.gen::<f64>() - 0.5);
            let theta = phase + std::f64::consts::TAU * k as f64 / count as f64
                + 0.2 * (rng.gen::<f64>() - 0.5) / count as f64;
            let r = Float::with_val(prec, &radius * jitter);
            guesses.push(BigComplex::new(
                Float::with_val(prec, &r * theta.cos()),
                Float::with_val(prec, &r * theta.sin()),
            ));
        }
    }
    guesses
}

fn nudge(z: &mut BigComplex, prec: u32, rng: &mut ChaCha8Rng) {
    let az = z.abs();
    let base = if az > 1 { az } else { Float::with_val(prec, 1) };
    let mut eps = base;
    eps >>= prec / 4;
    let d = BigComplex::from_f64(prec, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
    *z = &*z + &d.scale(&eps);
}

fn random_on_circle(radius: &Float, prec: u32, rng: &mut ChaCha8Rng) -> BigComplex {
    let theta: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
    BigComplex::new(
        Float::with_val(prec, radius * theta.cos()),
        Float::with_val(prec, radius * theta.sin()),
    )
}
