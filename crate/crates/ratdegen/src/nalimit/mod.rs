//! The non-Archimedean limit of a degenerating family at a fitted scale:
//! valued coefficients, reduction maps, Newton polygons, the tropical
//! skeleton on the 0-∞ segment, and the limit-map classification.

mod classify;
mod skeleton;

pub use classify::{
    classify_na, good_reduction_search, na_lyapunov, Classification, NumericContext,
};
pub use skeleton::{
    find_invariant_segment, pl_fixed_points, skeleton_map, type1_projection_prediction,
    BernoulliData, BernoulliPiece, PLFixedPoint, PLMap, PiecePosition, Type1Prediction,
};

use crate::family::{FamilyError, FamilyMap, GrowthExpr, ScaleClass, ScaleKind, Valuation};
use crate::ratmap::RatMapError;
use crate::Rat;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NaError {
    #[error("a coefficient grows unboundedly at the given scale")]
    ScaleMismatch,
    #[error("family degenerates identically at this scale")]
    Degenerate,
    #[error("newton polygon needs at least two nonzero coefficients")]
    DegenerateInput,
    #[error("point is not PL-periodic with the requested period")]
    NotFixed,
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Map(#[from] RatMapError),
}

/// One coefficient of the limit map: its (normalized) valuation and the
/// leading sub-expression whose class is the residue.
#[derive(Clone, Debug)]
pub struct ValuedCoeff {
    pub valuation: Valuation,
    pub residue: GrowthExpr,
}

/// The limit map f_ω at a scale: per-coefficient valuations (normalized so
/// the minimum is 0) and residues, plus the valuation of the normalized
/// resultant and its unit-size flag.
#[derive(Clone, Debug)]
pub struct ValuedRationalMap {
    family: FamilyMap,
    scale: ScaleClass,
    pub p: Vec<ValuedCoeff>,
    pub q: Vec<ValuedCoeff>,
    pub res_valuation: Valuation,
    pub res_unit: bool,
}

impl ValuedRationalMap {
    pub fn degree(&self) -> usize {
        self.family.degree()
    }

    pub fn family(&self) -> &FamilyMap {
        &self.family
    }

    pub fn scale(&self) -> &ScaleClass {
        &self.scale
    }
}

/// The terms of an expression that dominate at the scale: highest α, and at
/// logarithmic/trivial scales also highest β among those. For an expression
/// of valuation 0 this is exactly its residue part.
fn leading_part(expr: &GrowthExpr, kind: &ScaleKind) -> GrowthExpr {
    let Some(max_alpha) = expr.terms().iter().map(|t| t.alpha.clone()).max() else {
        return GrowthExpr::zero();
    };
    let top: Vec<_> = expr
        .terms()
        .iter()
        .filter(|t| t.alpha == max_alpha)
        .cloned()
        .collect();
    match kind {
        ScaleKind::InvN => GrowthExpr::new(top),
        _ => {
            let max_beta = top.iter().map(|t| t.beta.clone()).max().unwrap();
            GrowthExpr::new(top.into_iter().filter(|t| t.beta == max_beta).collect())
        }
    }
}

fn coeff_valuation(expr: &GrowthExpr, unit: &ScaleClass) -> Result<Valuation, NaError> {
    if expr.is_zero() {
        return Ok(Valuation::PlusInf);
    }
    match expr.valuation(unit)? {
        Valuation::MinusInf => Err(NaError::ScaleMismatch),
        v => Ok(v),
    }
}

/// Determinant of a square matrix of growth expressions, exactly, by the
/// column-subset recurrence (ring operations only).
fn det_expr(mat: &[Vec<GrowthExpr>]) -> GrowthExpr {
    let m = mat.len();
    assert!(m <= 20, "symbolic determinant limited to 20x20");
    if m == 0 {
        return GrowthExpr::from_int(1);
    }
    let mut dp: Vec<Option<GrowthExpr>> = vec![None; 1 << m];
    dp[0] = Some(GrowthExpr::from_int(1));
    for mask in 0..(1usize << m) {
        let Some(acc) = dp[mask].take() else { continue };
        let row = mask.count_ones() as usize;
        if row == m {
            dp[mask] = Some(acc);
            continue;
        }
        for j in 0..m {
            if mask & (1 << j) != 0 || mat[row][j].is_zero() {
                continue;
            }
            // Inversion parity: columns already used with index above j.
            let above = (mask >> (j + 1)).count_ones();
            let mut term = acc.mul(&mat[row][j]);
            if above % 2 == 1 {
                term = term.neg();
            }
            let slot = mask | (1 << j);
            dp[slot] = Some(match dp[slot].take() {
                Some(prev) => prev.add(&term),
                None => term,
            });
        }
    }
    dp[(1 << m) - 1].take().unwrap_or_else(GrowthExpr::zero)
}

/// Sylvester matrix of p (formal degree m) and q (formal degree n) over the
/// expression ring: n shifted rows of p's descending coefficients, then m
/// rows of q's.
fn sylvester_expr(p: &[GrowthExpr], q: &[GrowthExpr], m: usize, n: usize) -> Vec<Vec<GrowthExpr>> {
    let size = m + n;
    let mut mat = vec![vec![GrowthExpr::zero(); size]; size];
    for r in 0..n {
        for (k, c) in p.iter().rev().enumerate() {
            mat[r][r + k] = c.clone();
        }
    }
    for r in 0..m {
        for (k, c) in q.iter().rev().enumerate() {
            mat[n + r][r + k] = c.clone();
        }
    }
    mat
}

/// Rank over the fraction field by fraction-free elimination (cross
/// multiplication; exact in the expression ring).
fn rank_expr(mut mat: Vec<Vec<GrowthExpr>>) -> usize {
    let rows = mat.len();
    if rows == 0 {
        return 0;
    }
    let cols = mat[0].len();
    let mut rank = 0;
    let mut row = 0;
    for col in 0..cols {
        let Some(piv) = (row..rows).find(|&r| !mat[r][col].is_zero()) else {
            continue;
        };
        mat.swap(row, piv);
        for r in row + 1..rows {
            if mat[r][col].is_zero() {
                continue;
            }
            let a = mat[row][col].clone();
            let b = mat[r][col].clone();
            for c2 in col..cols {
                mat[r][c2] = mat[r][c2].mul(&a).sub(&mat[row][c2].mul(&b));
            }
        }
        row += 1;
        rank += 1;
        if row == rows {
            break;
        }
    }
    rank
}

/// Build the limit map of a family at a scale: exact valuations and residues
/// per coefficient, normalized so the minimal valuation is 0, plus the
/// tropical valuation of the normalized resultant and the unit-size check
/// κ·v(Res) = 1 (within 1/4) that ties the scale to the degeneration rate.
pub fn na_limit_map(family: &FamilyMap, scale: &ScaleClass) -> Result<ValuedRationalMap, NaError> {
    // All exact data lives at the normalized representative (κ = 1); the
    // caller's κ only enters the resultant unit check.
    let unit = ScaleClass::with_kappa(scale.kind.clone(), Rat::from(1));
    let d = family.degree();

    let side = |coeffs: &[GrowthExpr]| -> Result<Vec<(Valuation, GrowthExpr)>, NaError> {
        coeffs
            .iter()
            .map(|c| Ok((coeff_valuation(c, &unit)?, leading_part(c, &unit.kind))))
            .collect()
    };
    let vp = side(family.numerator())?;
    let vq = side(family.denominator())?;
    for vals in [&vp, &vq] {
        if !vals.iter().any(|(v, _)| v.finite().is_some()) {
            return Err(NaError::Degenerate);
        }
    }
    let v_min = vp
        .iter()
        .chain(vq.iter())
        .filter_map(|(v, _)| v.finite())
        .min()
        .unwrap()
        .clone();

    let shift = |vals: Vec<(Valuation, GrowthExpr)>| -> Vec<ValuedCoeff> {
        vals.into_iter()
            .map(|(v, residue)| ValuedCoeff {
                valuation: match v {
                    Valuation::Finite(r) => Valuation::Finite(r - &v_min),
                    other => other,
                },
                residue,
            })
            .collect()
    };

    // Tropical resultant: exact symbolic Sylvester determinant, then the
    // valuation, shifted to the normalized representative (Res is
    // homogeneous of degree 2d in the coefficients).
    let res_expr = det_expr(&sylvester_expr(family.numerator(), family.denominator(), d, d));
    if res_expr.is_zero() {
        return Err(NaError::Degenerate);
    }
    let res_valuation = match res_expr.valuation(&unit)? {
        Valuation::Finite(v) => Valuation::Finite(v - Rat::from(2 * d as i64) * &v_min),
        Valuation::MinusInf => Valuation::MinusInf,
        Valuation::PlusInf => Valuation::PlusInf,
    };
    let res_unit = match (&scale.kind, &res_valuation) {
        // Nothing degenerates at the trivial scale; the unit level is v = 0.
        (ScaleKind::Trivial, v) => v.is_zero(),
        (_, Valuation::Finite(v)) => {
            let gap = Rat::from(&scale.kappa * v) - Rat::from(1);
            gap.abs() <= Rat::from((1, 4))
        }
        _ => false,
    };

    Ok(ValuedRationalMap {
        family: family.clone(),
        scale: scale.clone(),
        p: shift(vp),
        q: shift(vq),
        res_valuation,
        res_unit,
    })
}

/// The residue map [P̃ : Q̃] and its degree after removing the common
/// factor of the residues (exact rank of their Sylvester matrix).
#[derive(Clone, Debug)]
pub struct ReducedMap {
    pub p: Vec<GrowthExpr>,
    pub q: Vec<GrowthExpr>,
    pub degree: usize,
}

fn actual_deg(coeffs: &[GrowthExpr]) -> Option<usize> {
    coeffs.iter().rposition(|c| !c.is_zero())
}

/// Reduce: keep exactly the valuation-0 residues, then compute the degree
/// of the induced map on the residue line.
pub fn reduction_map(vf: &ValuedRationalMap) -> ReducedMap {
    let take = |cs: &[ValuedCoeff]| -> Vec<GrowthExpr> {
        cs.iter()
            .map(|c| {
                if c.valuation.is_zero() {
                    c.residue.clone()
                } else {
                    GrowthExpr::zero()
                }
            })
            .collect()
    };
    let rp = take(&vf.p);
    let rq = take(&vf.q);
    let degree = match (actual_deg(&rp), actual_deg(&rq)) {
        // One side reduces to zero: the residue map is constant.
        (None, _) | (_, None) => 0,
        (Some(a), Some(b)) => {
            let gcd_deg = if a == 0 || b == 0 {
                0
            } else {
                a + b - rank_expr(sylvester_expr(&rp[..=a], &rq[..=b], a, b))
            };
            a.max(b) - gcd_deg
        }
    };
    ReducedMap { p: rp, q: rq, degree }
}

/// Root valuations of a polynomial over the valued field from the lower
/// convex hull of (i, v(c_i)): each hull edge of slope σ and horizontal
/// span k contributes k roots of valuation −σ. Returned in hull order
/// (descending valuation).
pub fn newton_polygon_root_valuations(
    vals: &[Valuation],
) -> Result<Vec<(Rat, usize)>, NaError> {
    let pts: Vec<(usize, Rat)> = vals
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.finite().map(|r| (i, r.clone())))
        .collect();
    if pts.len() < 2 {
        return Err(NaError::DegenerateInput);
    }
    // Lower hull, left to right (Andrew's monotone chain).
    let mut hull: Vec<(usize, Rat)> = Vec::new();
    for p in &pts {
        while hull.len() >= 2 {
            let o = &hull[hull.len() - 2];
            let a = &hull[hull.len() - 1];
            let cross = Rat::from((a.0 - o.0) as i64) * Rat::from(&p.1 - &o.1)
                - Rat::from(&a.1 - &o.1) * Rat::from((p.0 - o.0) as i64);
            if cross.cmp0() != std::cmp::Ordering::Greater {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p.clone());
    }
    let mut out = Vec::new();
    for w in hull.windows(2) {
        let span = w[1].0 - w[0].0;
        let slope = Rat::from(&w[1].1 - &w[0].1) / Rat::from(span as i64);
        out.push((-slope, span));
    }
    Ok(out)
}

/// Hyperbolic distance between the points ζ(0, e^{s1}) and ζ(0, e^{s2}) of
/// the coordinate segment: |s1 − s2|, exactly.
pub fn hyperbolic_distance(s1: &Rat, s2: &Rat) -> Rat {
    Rat::from(s1 - s2).abs()
}

#[cfg(test)]
pub(crate) mod test_families {
    use crate::family::{parse_growth_expr, FamilyMap, GrowthExpr};

    pub fn expr(s: &str) -> GrowthExpr {
        parse_growth_expr(s).unwrap()
    }

    pub fn family(degree: usize, p: &[&str], q: &[&str]) -> FamilyMap {
        FamilyMap::new(
            degree,
            p.iter().map(|s| expr(s)).collect(),
            q.iter().map(|s| expr(s)).collect(),
        )
        .unwrap()
    }

    /// z² + n over 1.
    pub fn eg51() -> FamilyMap {
        family(2, &["n", "0", "1"], &["1", "0", "0"])
    }

    /// (z² + n) / (1 + e^{-n} z⁴).
    pub fn eg52() -> FamilyMap {
        family(
            4,
            &["n", "0", "1", "0", "0"],
            &["1", "0", "0", "0", "exp(-n)"],
        )
    }

    /// z(1−z) / (n − n z + e^{-n} z²).
    pub fn eg53() -> FamilyMap {
        family(2, &["0", "1", "-1"], &["n", "-n", "exp(-n)"])
    }

    /// e^{-n} z³ + z² + n z over 1.
    pub fn intro_cubic() -> FamilyMap {
        family(3, &["0", "n", "1", "exp(-n)"], &["1", "0", "0", "0"])
    }

    /// Constant family z².
    pub fn constant_z2() -> FamilyMap {
        family(2, &["0", "0", "1"], &["1", "0", "0"])
    }
}

#[cfg(test)]
mod tests {
    use super::test_families::*;
    use super::*;
    use crate::ratmap::{res_abs, RationalMap};

    fn fin(v: i64) -> Valuation {
        Valuation::Finite(Rat::from(v))
    }

    #[test]
    fn eg52_valuations_and_residues() {
        let vf = na_limit_map(&eg52(), &ScaleClass::with_kappa(ScaleKind::InvN, Rat::from((1, 2))))
            .unwrap();
        let pv: Vec<_> = vf.p.iter().map(|c| c.valuation.clone()).collect();
        let qv: Vec<_> = vf.q.iter().map(|c| c.valuation.clone()).collect();
        assert_eq!(pv, vec![fin(0), Valuation::PlusInf, fin(0), Valuation::PlusInf, Valuation::PlusInf]);
        assert_eq!(qv, vec![fin(0), Valuation::PlusInf, Valuation::PlusInf, Valuation::PlusInf, fin(1)]);
        assert_eq!(vf.p[0].residue, expr("n"));
        assert_eq!(vf.p[2].residue, expr("1"));
        assert_eq!(vf.q[4].residue, expr("exp(-n)"));
        // Res = e^{-2n}(1 + e^{-n} n²)²: valuation 2; κ = 1/2 makes it a unit.
        assert_eq!(vf.res_valuation, fin(2));
        assert!(vf.res_unit);
    }

    #[test]
    fn eg51_valuations_under_log_scale() {
        let vf = na_limit_map(
            &eg51(),
            &ScaleClass::with_kappa(ScaleKind::InvLogN, Rat::from((1, 4))),
        )
        .unwrap();
        // Pre-normalization v(n) = -1 and v(1) = 0; normalization shifts the
        // constant to 0 and the z² coefficient to 1.
        assert_eq!(vf.p[0].valuation, fin(0));
        assert_eq!(vf.p[2].valuation, fin(1));
        assert_eq!(vf.q[0].valuation, fin(1));
        // |Res| of the normalized representative is n^{-4}: valuation 4.
        assert_eq!(vf.res_valuation, fin(4));
        assert!(vf.res_unit);
    }

    #[test]
    fn eg53_and_intro_resultant_valuations() {
        let vf = na_limit_map(&eg53(), &ScaleClass::inv_n()).unwrap();
        assert_eq!(vf.res_valuation, fin(1));
        assert!(vf.res_unit);
        let vf = na_limit_map(
            &intro_cubic(),
            &ScaleClass::with_kappa(ScaleKind::InvN, Rat::from((1, 3))),
        )
        .unwrap();
        assert_eq!(vf.res_valuation, fin(3));
        assert!(vf.res_unit);
    }

    #[test]
    fn constant_family_is_all_units() {
        let vf = na_limit_map(&constant_z2(), &ScaleClass::trivial()).unwrap();
        assert!(vf.p.iter().chain(vf.q.iter()).all(|c| {
            c.valuation.is_zero() || c.valuation == Valuation::PlusInf
        }));
        assert_eq!(vf.p[2].residue, expr("1"));
        assert!(vf.res_unit);
        assert_eq!(reduction_map(&vf).degree, 2);
    }

    #[test]
    fn growing_coefficient_rejected_at_trivial_scale() {
        assert!(matches!(
            na_limit_map(&eg51(), &ScaleClass::trivial()),
            Err(NaError::ScaleMismatch)
        ));
    }

    #[test]
    fn degenerate_family_rejected() {
        // P = z0 z1 + z0², Q = z0 z1 + z0²: identical, Res ≡ 0.
        let f = family(2, &["0", "1", "1"], &["0", "1", "1"]);
        assert!(matches!(
            na_limit_map(&f, &ScaleClass::inv_n()),
            Err(NaError::Degenerate)
        ));
    }

    #[test]
    fn eg52_reduction_degree_two() {
        let vf = na_limit_map(&eg52(), &ScaleClass::inv_n()).unwrap();
        let red = reduction_map(&vf);
        assert_eq!(red.degree, 2);
        assert_eq!(red.p[0], expr("n"));
        assert_eq!(red.p[2], expr("1"));
        assert!(red.q[4].is_zero());
    }

    #[test]
    fn reduction_detects_residue_common_factor() {
        // (z² + z) / (z + e^{-n}): residues share the factor z.
        let f = family(2, &["0", "1", "1"], &["exp(-n)", "1", "0"]);
        let vf = na_limit_map(&f, &ScaleClass::inv_n()).unwrap();
        let red = reduction_map(&vf);
        assert_eq!(red.degree, 1);
        // Coprime residues keep full degree.
        let vf = na_limit_map(&eg51(), &ScaleClass::inv_n()).unwrap();
        assert_eq!(reduction_map(&vf).degree, 2);
    }

    #[test]
    fn newton_polygon_examples() {
        // z² + c, v(c) = 1: double root of valuation 1/2.
        let got = newton_polygon_root_valuations(&[fin(1), Valuation::PlusInf, fin(0)]).unwrap();
        assert_eq!(got, vec![(Rat::from((1, 2)), 2)]);
        // z² + z c₁ + c₃ with v(c₁) = 1, v(c₃) = 3: valuations {2, 1}.
        let got = newton_polygon_root_valuations(&[fin(3), fin(1), fin(0)]).unwrap();
        assert_eq!(got, vec![(Rat::from(2), 1), (Rat::from(1), 1)]);
        // Collinear interior point merges into one edge.
        let got = newton_polygon_root_valuations(&[fin(2), fin(1), fin(0)]).unwrap();
        assert_eq!(got, vec![(Rat::from(1), 2)]);
        assert!(matches!(
            newton_polygon_root_valuations(&[Valuation::PlusInf, fin(0)]),
            Err(NaError::DegenerateInput)
        ));
    }

    #[test]
    fn fixed_point_valuations_match_fractional_slopes() {
        // Fixed-point form of eg52's limit: z1·P − z0·Q at the valued level
        // has coefficient valuations [0, 0, 0, ∞, ∞, 1] (φ_k = P_k − Q_{k−1}).
        let vf = na_limit_map(&eg52(), &ScaleClass::inv_n()).unwrap();
        let mut phi = Vec::new();
        for k in 0..=5usize {
            let a = if k <= 4 { vf.p[k].valuation.clone() } else { Valuation::PlusInf };
            let b = if k >= 1 { vf.q[k - 1].valuation.clone() } else { Valuation::PlusInf };
            // Generic position: the minimum of the two valuations wins.
            phi.push(a.min(b));
        }
        let roots = newton_polygon_root_valuations(&phi).unwrap();
        // Two fixed points cluster at the Gauss point and three escape to ∞
        // with valuation -1/3.
        assert_eq!(roots, vec![(Rat::from(0), 2), (Rat::from((-1, 3)), 3)]);
    }

    #[test]
    fn symbolic_resultant_matches_numeric_rate() {
        // eg53 at n = 200: |Res| of the normalized representative decays
        // like e^{-v̂ n} with v̂ = 1 (up to subexponential factors).
        let f = eg53();
        let fn200 = RationalMap::new(f.eval_at(200, 256));
        let r = res_abs(&fn200).unwrap();
        let rate = -(r.ln().to_f64()) / 200.0;
        assert!((rate - 1.0).abs() < 0.1, "rate {rate}");
    }

    #[test]
    fn hyperbolic_distance_basics() {
        let a = Rat::from(0);
        let b = Rat::from((1, 2));
        let c = Rat::from((7, 3));
        assert_eq!(hyperbolic_distance(&a, &a), Rat::from(0));
        assert_eq!(hyperbolic_distance(&a, &b), Rat::from((1, 2)));
        assert_eq!(hyperbolic_distance(&a, &b), hyperbolic_distance(&b, &a));
        let lhs = hyperbolic_distance(&a, &c);
        let rhs = hyperbolic_distance(&a, &b) + hyperbolic_distance(&b, &c);
        assert!(lhs <= rhs);
    }

    #[test]
    fn determinant_dp_agrees_with_cofactor_expansion() {
        // 3x3 with expression entries, checked against the hand expansion.
        let e = |s: &str| expr(s);
        let mat = vec![
            vec![e("n"), e("1"), e("0")],
            vec![e("1"), e("n"), e("exp(-n)")],
            vec![e("0"), e("1"), e("n")],
        ];
        let det = det_expr(&mat);
        // n·(n² − e^{-n}) − 1·(n − 0) = n³ − n·e^{-n} − n.
        let want = e("n^3").sub(&e("n*exp(-n)")).sub(&e("n"));
        assert_eq!(det, want);
    }
}
