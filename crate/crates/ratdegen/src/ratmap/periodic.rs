//! Periodic points of f^l, their multipliers, and the fixed-point
//! normal-form conjugation.

use super::{Mobius, ProjPoint, RatMapError, RationalMap};
use crate::num::{all_roots, BigComplex, HomogPair, Poly};
use rug::Float;

/// A periodic point with the multiplicity of its root cluster.
#[derive(Clone, Debug)]
pub struct PeriodicPoint {
    pub point: ProjPoint,
    pub multiplicity: usize,
}

/// Configuration of the fixed points found by `normalize_fixed_points`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixedPointConfig {
    /// Three distinct fixed points were sent to 0, 1, ∞.
    Distinct,
    /// A multiple fixed point went to 0 and another one to ∞.
    DoubleSimple,
    /// All fixed points coincide; f is returned unchanged with the identity.
    SingleMultiple,
}

/// Coefficients of the fixed-point form φ = z1·P − z0·Q (degree d + 1).
pub(crate) fn fixed_point_form(pair: &HomogPair) -> Poly {
    let d = pair.degree();
    let prec = pair.prec();
    let zero = BigComplex::zero(prec);
    let coeffs = (0..=d + 1)
        .map(|k| {
            let a = if k <= d { &pair.p.coeffs[k] } else { &zero };
            let b = if k >= 1 { &pair.q.coeffs[k - 1] } else { &zero };
            a - b
        })
        .collect();
    Poly::new(coeffs)
}

/// Relative distance between affine roots: |z−w| / max(1, |z|, |w|).
/// This is the metric in which the root solver's accuracy is uniform, so it
/// is the right one for deciding that two roots are the same cluster.
fn relative_dist(z: &BigComplex, w: &BigComplex) -> Float {
    let d = z.dist(w);
    let mut scale = z.abs().max(&w.abs());
    if scale < 1 {
        scale = Float::with_val(scale.prec(), 1);
    }
    d / scale
}

/// The d^l + 1 periodic points of period dividing l, with multiplicity.
/// Root clusters within relative distance 2^{-p/6} are merged; the point at
/// infinity enters through the vanished top coefficients of φ.
pub fn periodic_points(f: &RationalMap, l: u32) -> Result<Vec<PeriodicPoint>, RatMapError> {
    let g = f.iterate(l)?;
    let prec = g.prec();
    let phi = fixed_point_form(g.pair());
    let formal = phi.formal_degree();
    let actual = match phi.actual_degree() {
        Some(a) => a,
        // φ ≡ 0 means f^l is the identity; there is no finite point set.
        None => return Err(RatMapError::Num(crate::num::NumError::ZeroPolynomial)),
    };
    let roots = all_roots(&phi)?;
    let mut tol = Float::with_val(prec, 1);
    tol >>= prec / 6;

    let mut clusters: Vec<Vec<BigComplex>> = Vec::new();
    'outer: for r in roots {
        for cl in clusters.iter_mut() {
            if relative_dist(&r, &cl[0]) <= tol {
                cl.push(r);
                continue 'outer;
            }
        }
        clusters.push(vec![r]);
    }

    let mut out: Vec<PeriodicPoint> = clusters
        .into_iter()
        .map(|cl| {
            let k = cl.len();
            let mut mean = BigComplex::zero(prec);
            for z in &cl {
                mean = &mean + z;
            }
            let mean = mean.scale(&(Float::with_val(prec, 1) / Float::with_val(prec, k as u32)));
            PeriodicPoint { point: ProjPoint::from_affine(mean), multiplicity: k }
        })
        .collect();
    let inf_mult = formal - actual;
    if inf_mult > 0 {
        out.push(PeriodicPoint { point: ProjPoint::infinity(prec), multiplicity: inf_mult });
    }
    debug_assert_eq!(out.iter().map(|p| p.multiplicity).sum::<usize>(), formal);
    Ok(out)
}

fn chart_is_z(x: &ProjPoint) -> bool {
    x.z0.abs() <= x.z1.abs()
}

/// Derivative at x of the local representation of f between the given
/// charts (Z: coordinate z0/z1; W: coordinate z1/z0).
pub(crate) fn local_derivative_in(
    f: &RationalMap,
    x: &ProjPoint,
    src_z: bool,
    tgt_z: bool,
) -> BigComplex {
    let pair = f.pair();
    let w = if src_z { &x.z0 / &x.z1 } else { &x.z1 / &x.z0 };
    let a = if src_z { pair.p.clone() } else { pair.p.reversed() };
    let b = if src_z { pair.q.clone() } else { pair.q.reversed() };
    let (u, v) = if tgt_z { (a, b) } else { (b, a) };
    let uv = u.eval(&w);
    let vv = v.eval(&w);
    let du = u.derivative().eval(&w);
    let dv = v.derivative().eval(&w);
    let num = &(&du * &vv) - &(&uv * &dv);
    &num / &(&vv * &vv)
}

/// Derivative of f at x in the modulus-≤1 charts of x and f(x); with that
/// chart choice |g'| is exactly the spherical derivative |df|(x).
pub(crate) fn local_derivative(f: &RationalMap, x: &ProjPoint) -> (BigComplex, ProjPoint) {
    let y = f.apply(x);
    let g = local_derivative_in(f, x, chart_is_z(x), chart_is_z(&y));
    (g, y)
}

/// Multiplier of the period-l orbit through p: the chain-rule product of
/// local derivatives around the cycle, with matching charts at every hop.
pub fn multiplier(f: &RationalMap, p: &ProjPoint, l: u32) -> Result<BigComplex, RatMapError> {
    assert!(l >= 1, "period must be at least 1");
    let prec = f.prec().min(p.prec());
    let mut orbit = vec![p.clone()];
    for _ in 0..l {
        let next = f.apply(orbit.last().unwrap());
        orbit.push(next);
    }
    let dist_f = orbit[l as usize].chordal_dist(&orbit[0]);
    let mut tol = Float::with_val(prec, 1);
    tol >>= prec / 3;
    if dist_f > tol {
        return Err(RatMapError::NotPeriodic { dist: dist_f.to_f64() });
    }
    // Chart per orbit slot, reusing slot 0's chart to close the cycle so the
    // chain-rule product telescopes exactly.
    let charts: Vec<bool> = (0..l as usize).map(|i| chart_is_z(&orbit[i])).collect();
    let mut m = BigComplex::one(prec);
    for i in 0..l as usize {
        let tgt = charts[(i + 1) % l as usize];
        let g = local_derivative_in(f, &orbit[i], charts[i], tgt);
        m = &m * &g;
    }
    Ok(m)
}

/// λ = (1/l)·log⁺|multiplier|.
pub fn lambda(f: &RationalMap, p: &ProjPoint, l: u32) -> Result<f64, RatMapError> {
    let m = multiplier(f, p, l)?;
    let ln = m.ln_abs().to_f64();
    Ok(ln.max(0.0) / l as f64)
}

/// Möbius map sending three distinct projective points to 0, 1, ∞.
fn mobius_to_standard(p: &ProjPoint, q: &ProjPoint, r: &ProjPoint) -> Mobius {
    let cross = |x: &ProjPoint, y: &ProjPoint| &(&x.z0 * &y.z1) - &(&x.z1 * &y.z0);
    let qr = cross(q, r);
    let qp = cross(q, p);
    Mobius {
        a: &p.z1 * &qr,
        b: -&(&p.z0 * &qr),
        c: &r.z1 * &qp,
        d: -&(&r.z0 * &qp),
    }
}

/// Möbius map sending a to 0 and b to ∞ (scale left at 1).
fn mobius_two_point(a: &ProjPoint, b: &ProjPoint) -> Mobius {
    Mobius {
        a: a.z1.clone(),
        b: -&a.z0,
        c: b.z1.clone(),
        d: -&b.z0,
    }
}

/// Conjugate f so its fixed points sit at the standard locations: three
/// distinct ones at 0, 1, ∞; a multiple one at 0 with another at ∞.
///
/// Returns (g, m, config) with g = conjugate(f, m), so m carries the
/// standard locations back to the original fixed points (m(0) is a marked
/// fixed point of f, and so on).
pub fn normalize_fixed_points(
    f: &RationalMap,
) -> Result<(RationalMap, Mobius, FixedPointConfig), RatMapError> {
    let pts = periodic_points(f, 1)?;
    let n = pts.len();
    if n >= 3 {
        // Pick the triple with the best worst pairwise separation.
        let mut best: Option<(usize, usize, usize)> = None;
        let mut best_sep = -1.0f64;
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let sep = pts[i]
                        .point
                        .chordal_dist(&pts[j].point)
                        .to_f64()
                        .min(pts[i].point.chordal_dist(&pts[k].point).to_f64())
                        .min(pts[j].point.chordal_dist(&pts[k].point).to_f64());
                    if sep > best_sep {
                        best_sep = sep;
                        best = Some((i, j, k));
                    }
                }
            }
        }
        let (i, j, k) = best.unwrap();
        let m = mobius_to_standard(&pts[i].point, &pts[j].point, &pts[k].point).inverse();
        let g = f.conjugate(&m);
        return Ok((g, m, FixedPointConfig::Distinct));
    }
    if n == 2 {
        // One of the two clusters is multiple; it goes to 0.
        let (zero_i, inf_i) = if pts[0].multiplicity >= pts[1].multiplicity {
            (0, 1)
        } else {
            (1, 0)
        };
        let m = mobius_two_point(&pts[zero_i].point, &pts[inf_i].point).inverse();
        let g = f.conjugate(&m);
        return Ok((g, m, FixedPointConfig::DoubleSimple));
    }
    // All fixed points coincide: no useful marked triple exists, so report
    // the configuration and leave the map alone.
    Ok((f.normalize(), Mobius::identity(f.prec()), FixedPointConfig::SingleMultiple))
}
