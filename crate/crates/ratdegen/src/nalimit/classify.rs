//! Classification of the limit map: good reduction after an exact change of
//! coordinates, Bernoulli segment dynamics, or numerically certified
//! expansion of the rescaled Lyapunov exponent.

use super::skeleton::{find_invariant_segment, skeleton_map, BernoulliData, PLMap};
use super::{na_limit_map, reduction_map, NaError, ValuedRationalMap};
use crate::family::{FamilyMap, GaussRat, GrowthExpr, MobiusExact, ScaleClass, ScaleKind};
use crate::ratmap::{lyapunov_estimate, RationalMap};
use crate::Rat;

#[derive(Clone, Debug, PartialEq)]
pub enum Classification {
    /// Degree-d reduction after recentering at ζ(shift, e^{center}).
    GoodReduction { center: Rat, shift: Option<GaussRat> },
    Bernoulli(BernoulliData),
    Expanding { chi: f64, stderr: f64 },
    Unknown,
}

/// Parameters for the numeric (Lyapunov) stage of classification.
#[derive(Clone, Debug)]
pub struct NumericContext {
    pub n_grid: Vec<u64>,
    pub depth: u32,
    pub samples: u32,
    pub seed: u64,
    pub prec: u32,
}

impl Default for NumericContext {
    fn default() -> Self {
        NumericContext {
            n_grid: vec![50, 100, 200, 400],
            depth: 14,
            samples: 128,
            seed: 7,
            prec: 192,
        }
    }
}

/// Window [−V, V] containing every coefficient valuation with margin.
fn val_window(vf: &ValuedRationalMap) -> (Rat, Rat) {
    let mut big = Rat::new();
    for c in vf.p.iter().chain(vf.q.iter()) {
        if let Some(v) = c.valuation.finite() {
            let a = v.clone().abs();
            if a > big {
                big = a;
            }
        }
    }
    let hi = big + Rat::from(2);
    (-hi.clone(), hi)
}

/// A coefficient unit u with v(u) = −s at the κ = 1 representative, when
/// the scale admits one.
fn scaling_monomial(kind: &ScaleKind, s: &Rat) -> Option<GrowthExpr> {
    match kind {
        ScaleKind::InvN => Some(GrowthExpr::monomial(GaussRat::one(), s.clone(), Rat::new())),
        ScaleKind::InvLogN => Some(GrowthExpr::monomial(GaussRat::one(), Rat::new(), s.clone())),
        ScaleKind::Trivial if *s == 0 => Some(GrowthExpr::from_int(1)),
        _ => None,
    }
}

/// Conjugate by diag(u, 1) with v(u) = −s: recenters the limit at ζ(0, e^s).
/// Projectively p_i ↦ p_i u^i and q_j ↦ q_j u^{j+1}, exactly.
fn diag_recenter(family: &FamilyMap, kind: &ScaleKind, s: &Rat) -> Option<FamilyMap> {
    let u = scaling_monomial(kind, s)?;
    let d = family.degree();
    let mut pows = vec![GrowthExpr::from_int(1)];
    for _ in 0..=d {
        pows.push(pows.last().unwrap().mul(&u));
    }
    let p = family
        .numerator()
        .iter()
        .enumerate()
        .map(|(i, c)| c.mul(&pows[i]))
        .collect();
    let q = family
        .denominator()
        .iter()
        .enumerate()
        .map(|(j, c)| c.mul(&pows[j + 1]))
        .collect();
    Some(FamilyMap::new(d, p, q).expect("recentering preserves the degree"))
}

/// Candidate centers: PL nodes, the Gauss point, and piecewise fixed points.
fn recenter_candidates(pl: &PLMap) -> Vec<Rat> {
    let mut out = pl.breakpoints.clone();
    out.push(Rat::new());
    for k in 0..pl.slopes.len() {
        let sigma = pl.slopes[k];
        if sigma == 1 {
            continue;
        }
        let xk = &pl.breakpoints[k];
        let fix =
            Rat::from(&pl.values[k] - &(Rat::from(sigma) * xk)) / Rat::from(1 - sigma);
        if fix >= *xk && fix <= pl.breakpoints[k + 1] {
            out.push(fix);
        }
    }
    out.retain(|x| x >= pl.lo() && x <= pl.hi());
    out.sort();
    out.dedup();
    out
}

fn diag_search(family: &FamilyMap, scale: &ScaleClass) -> Result<Option<Rat>, NaError> {
    let Ok(vf) = na_limit_map(family, scale) else {
        return Ok(None);
    };
    let d = vf.degree();
    let (lo, hi) = val_window(&vf);
    let pl = skeleton_map(&vf, &lo, &hi)?;
    for s in recenter_candidates(&pl) {
        let Some(g) = diag_recenter(family, &scale.kind, &s) else {
            continue;
        };
        let Ok(vg) = na_limit_map(&g, scale) else {
            continue;
        };
        if reduction_map(&vg).degree == d {
            return Ok(Some(s));
        }
    }
    Ok(None)
}

fn gaussian_probes() -> Vec<GaussRat> {
    let g = |re: i64, im: i64| GaussRat::new(Rat::from(re), Rat::from(im));
    vec![
        g(1, 0),
        g(-1, 0),
        g(0, 1),
        g(0, -1),
        g(2, 0),
        g(-2, 0),
        g(0, 2),
        g(0, -2),
        g(1, 1),
        g(1, -1),
        g(-1, 1),
        g(-1, -1),
    ]
}

/// Search for a coordinate change after which the reduction has full degree:
/// exact diagonal recentering at skeleton candidates, then Gaussian
/// translation probes at fixed points of the residue map.
pub fn good_reduction_search(
    vf: &ValuedRationalMap,
) -> Result<Option<(Rat, Option<GaussRat>)>, NaError> {
    if let Some(s) = diag_search(vf.family(), vf.scale())? {
        return Ok(Some((s, None)));
    }
    let red = reduction_map(vf);
    let d = vf.degree();
    for shift in gaussian_probes() {
        // Probe only residue fixed points: φ̃(c) = P̃(c) − c·Q̃(c) = 0.
        let mut pc = GrowthExpr::zero();
        let mut qc = GrowthExpr::zero();
        let mut ck = GaussRat::one();
        for k in 0..=d {
            pc = pc.add(&red.p[k].scale_const(&ck));
            qc = qc.add(&red.q[k].scale_const(&ck));
            ck = ck.mul(&shift);
        }
        if !pc.sub(&qc.scale_const(&shift)).is_zero() {
            continue;
        }
        let m = MobiusExact {
            a: GaussRat::one(),
            b: shift.clone(),
            c: GaussRat::zero(),
            d: GaussRat::one(),
        };
        let Ok(g) = vf.family().conjugate(&m) else {
            continue;
        };
        if let Some(s) = diag_search(&g, vf.scale())? {
            return Ok(Some((s, Some(shift))));
        }
    }
    Ok(None)
}

/// Rescaled Lyapunov exponent ε̂_n χ(f_n) extrapolated to n → ∞ by a
/// weighted fit against 1/ln n, with a standard error inflated by the fit
/// quality. ε̂_n is 1/n except at logarithmic scales, where it is 1/ln n.
pub fn na_lyapunov(
    family: &FamilyMap,
    scale: &ScaleClass,
    ctx: &NumericContext,
) -> Result<(f64, f64), NaError> {
    assert!(ctx.n_grid.len() >= 4, "need at least four grid points");
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ws = Vec::new();
    for &n in &ctx.n_grid {
        assert!(n >= 3, "grid indices must be at least 3");
        let f = RationalMap::new(family.eval_at(n, ctx.prec));
        let seed = ctx.seed ^ n.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let (chi, se) = lyapunov_estimate(&f, ctx.depth, ctx.samples, seed)?;
        let unit = match scale.kind {
            ScaleKind::InvLogN => 1.0 / (n as f64).ln(),
            _ => 1.0 / n as f64,
        };
        xs.push(1.0 / (n as f64).ln());
        ys.push(chi * unit);
        ws.push(1.0 / (se * unit).max(1e-9).powi(2));
    }
    let (mut s0, mut s1, mut s2, mut t0, mut t1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..xs.len() {
        s0 += ws[i];
        s1 += ws[i] * xs[i];
        s2 += ws[i] * xs[i] * xs[i];
        t0 += ws[i] * ys[i];
        t1 += ws[i] * xs[i] * ys[i];
    }
    let det = s0 * s2 - s1 * s1;
    let limit = (s2 * t0 - s1 * t1) / det;
    let slope = (s0 * t1 - s1 * t0) / det;
    let dof = (xs.len() - 2) as f64;
    let chi2: f64 = (0..xs.len())
        .map(|i| ws[i] * (ys[i] - limit - slope * xs[i]).powi(2))
        .sum();
    let inflation = (chi2 / dof).max(1.0).sqrt();
    Ok((limit, (s2 / det).sqrt() * inflation))
}

/// The trichotomy for the limit map: good reduction in some coordinate,
/// Bernoulli segment dynamics, or (numerically) positive rescaled expansion.
pub fn classify_na(
    vf: &ValuedRationalMap,
    numeric: Option<&NumericContext>,
) -> Result<Classification, NaError> {
    if let Some((center, shift)) = good_reduction_search(vf)? {
        return Ok(Classification::GoodReduction { center, shift });
    }
    let (lo, hi) = val_window(vf);
    let pl = skeleton_map(vf, &lo, &hi)?;
    if let Some(data) = find_invariant_segment(&pl, vf.degree()) {
        return Ok(Classification::Bernoulli(data));
    }
    if let Some(ctx) = numeric {
        let (chi, stderr) = na_lyapunov(vf.family(), vf.scale(), ctx)?;
        if chi > 3.0 * stderr && chi > 0.05 {
            return Ok(Classification::Expanding { chi, stderr });
        }
    }
    Ok(Classification::Unknown)
}

#[cfg(test)]
mod tests {
    use super::super::test_families::*;
    use super::*;

    #[test]
    fn constant_family_has_good_reduction() {
        let vf = na_limit_map(&constant_z2(), &ScaleClass::trivial()).unwrap();
        match classify_na(&vf, None).unwrap() {
            Classification::GoodReduction { center, shift } => {
                assert_eq!(center, Rat::new());
                assert_eq!(shift, None);
            }
            other => panic!("expected good reduction, got {other:?}"),
        }
    }

    #[test]
    fn shrinking_quadratic_recenters_diagonally() {
        // f_n(z) = e^{-n} z²: conjugating by diag(e^n, 1) restores z².
        let f = family(2, &["0", "0", "exp(-n)"], &["1", "0", "0"]);
        let vf = na_limit_map(&f, &ScaleClass::with_kappa(ScaleKind::InvN, Rat::from((1, 2))))
            .unwrap();
        assert!(vf.res_unit);
        match classify_na(&vf, None).unwrap() {
            Classification::GoodReduction { center, shift } => {
                assert_eq!(center, Rat::from(1));
                assert_eq!(shift, None);
            }
            other => panic!("expected good reduction, got {other:?}"),
        }
    }

    #[test]
    fn hidden_center_found_by_translation_probe() {
        // f_n(z) = 1 + e^{n}(z − 1)²: good reduction appears only after the
        // shift z ↦ z + 1 followed by diagonal recentering.
        let f = family(
            2,
            &["1 + exp(n)", "-2*exp(n)", "exp(n)"],
            &["1", "0", "0"],
        );
        let scale = ScaleClass::with_kappa(ScaleKind::InvN, Rat::from((1, 2)));
        let vf = na_limit_map(&f, &scale).unwrap();
        match classify_na(&vf, None).unwrap() {
            Classification::GoodReduction { center, shift } => {
                assert_eq!(center, Rat::from(-1));
                assert_eq!(shift, Some(GaussRat::one()));
            }
            other => panic!("expected good reduction, got {other:?}"),
        }
    }

    #[test]
    fn eg52_is_bernoulli() {
        let vf = na_limit_map(&eg52(), &ScaleClass::with_kappa(ScaleKind::InvN, Rat::from((1, 2))))
            .unwrap();
        match classify_na(&vf, None).unwrap() {
            Classification::Bernoulli(data) => {
                assert_eq!(data.segment, (Rat::new(), Rat::from((1, 2))));
                assert_eq!(data.pieces.len(), 2);
            }
            other => panic!("expected Bernoulli, got {other:?}"),
        }
    }

    #[test]
    fn eg53_is_structurally_unresolved() {
        let vf = na_limit_map(&eg53(), &ScaleClass::inv_n()).unwrap();
        assert!(good_reduction_search(&vf).unwrap().is_none());
        assert!(matches!(
            classify_na(&vf, None).unwrap(),
            Classification::Unknown
        ));
    }

    #[test]
    fn eg51_expands_at_rate_one_half() {
        let scale = ScaleClass::with_kappa(ScaleKind::InvLogN, Rat::from((1, 4)));
        let vf = na_limit_map(&eg51(), &scale).unwrap();
        let ctx = NumericContext::default();
        match classify_na(&vf, Some(&ctx)).unwrap() {
            Classification::Expanding { chi, stderr } => {
                assert!((chi - 0.5).abs() < 0.06, "chi {chi} stderr {stderr}");
            }
            other => panic!("expected expanding, got {other:?}"),
        }
    }

    #[test]
    fn na_lyapunov_vanishes_for_constant_families() {
        let ctx = NumericContext {
            n_grid: vec![100, 200, 400, 800],
            depth: 12,
            samples: 96,
            seed: 11,
            prec: 160,
        };
        let (limit, _) = na_lyapunov(&constant_z2(), &ScaleClass::inv_n(), &ctx).unwrap();
        assert!(limit.abs() < 0.02, "limit {limit}");
    }
}
