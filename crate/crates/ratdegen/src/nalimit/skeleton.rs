//! The induced map on the 0-∞ segment: S(s) = log|f| on the point ζ(0, e^s),
//! computed exactly as a difference of upper envelopes of the coefficient
//! lines i·s − v(c_i), and the Bernoulli structure it may carry.

use super::{NaError, ValuedCoeff, ValuedRationalMap};
use crate::Rat;

/// A continuous piecewise-linear map with integer slopes on a closed window.
/// `breakpoints` holds every node including both window endpoints;
/// `values[k]` is the value at `breakpoints[k]`; `slopes[k]` belongs to the
/// piece between nodes k and k+1.
#[derive(Clone, Debug, PartialEq)]
pub struct PLMap {
    pub breakpoints: Vec<Rat>,
    pub values: Vec<Rat>,
    pub slopes: Vec<i64>,
}

impl PLMap {
    pub fn lo(&self) -> &Rat {
        &self.breakpoints[0]
    }

    pub fn hi(&self) -> &Rat {
        self.breakpoints.last().unwrap()
    }

    pub fn eval(&self, s: &Rat) -> Rat {
        assert!(s >= self.lo() && s <= self.hi(), "point outside the window");
        let k = match self.breakpoints.binary_search(s) {
            Ok(i) => i,
            Err(i) => i - 1,
        }
        .min(self.slopes.len() - 1);
        self.values[k].clone()
            + Rat::from(self.slopes[k]) * Rat::from(s - &self.breakpoints[k])
    }
}

fn lines_of(coeffs: &[ValuedCoeff]) -> Vec<(i64, Rat)> {
    coeffs
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.valuation.finite().map(|v| (i as i64, v.clone())))
        .collect()
}

/// Value and achieving line of max_i (i·s − v_i); the achiever is unique
/// away from envelope corners.
fn envelope_at(lines: &[(i64, Rat)], s: &Rat) -> (Rat, usize, bool) {
    let mut best = 0usize;
    let mut best_val: Option<Rat> = None;
    let mut unique = true;
    for (k, (e, v)) in lines.iter().enumerate() {
        let val = Rat::from(Rat::from(*e) * s) - v;
        match &best_val {
            Some(cur) if val < *cur => {}
            Some(cur) if val == *cur => unique = false,
            _ => {
                best = k;
                best_val = Some(val);
                unique = true;
            }
        }
    }
    (best_val.unwrap(), best, unique)
}

/// The segment map S on [lo, hi], exactly. Corners can only occur where two
/// lines of the same envelope cross, so those crossings are the only node
/// candidates; pieces whose slopes agree are merged.
pub fn skeleton_map(vf: &ValuedRationalMap, lo: &Rat, hi: &Rat) -> Result<PLMap, NaError> {
    assert!(lo < hi, "empty window");
    let lp = lines_of(&vf.p);
    let lq = lines_of(&vf.q);
    if lp.is_empty() || lq.is_empty() {
        return Err(NaError::Degenerate);
    }
    let mut xs = vec![lo.clone(), hi.clone()];
    for fam in [&lp, &lq] {
        for i in 0..fam.len() {
            for j in i + 1..fam.len() {
                let x = Rat::from(&fam[i].1 - &fam[j].1) / Rat::from(fam[i].0 - fam[j].0);
                if x > *lo && x < *hi {
                    xs.push(x);
                }
            }
        }
    }
    xs.sort();
    xs.dedup();

    let mut breakpoints = vec![xs[0].clone()];
    let mut slopes: Vec<i64> = Vec::new();
    for (k, w) in xs.windows(2).enumerate() {
        let mid = Rat::from(&w[0] + &w[1]) / Rat::from(2);
        let (_, ip, up) = envelope_at(&lp, &mid);
        let (_, iq, uq) = envelope_at(&lq, &mid);
        debug_assert!(up && uq, "achiever must be unique between corners");
        let slope = lp[ip].0 - lq[iq].0;
        if slopes.last() == Some(&slope) {
            *breakpoints.last_mut().unwrap() = xs[k + 1].clone();
        } else {
            slopes.push(slope);
            breakpoints.push(xs[k + 1].clone());
        }
    }
    let values = breakpoints
        .iter()
        .map(|x| {
            let (vp, _, _) = envelope_at(&lp, x);
            let (vq, _, _) = envelope_at(&lq, x);
            vp - vq
        })
        .collect();
    Ok(PLMap { breakpoints, values, slopes })
}

/// One expanding branch of the segment map over an invariant segment.
#[derive(Clone, Debug, PartialEq)]
pub struct BernoulliPiece {
    pub lo: Rat,
    pub hi: Rat,
    pub slope: i64,
    pub fixed_point: Rat,
    pub local_degree: u64,
}

/// An invariant segment I with S^{-1}(I) = I_1 ∪ … ∪ I_m, each branch
/// affine onto I with |slope| ≥ 2 and alternating orientation.
#[derive(Clone, Debug, PartialEq)]
pub struct BernoulliData {
    pub segment: (Rat, Rat),
    pub pieces: Vec<BernoulliPiece>,
}

fn try_segment(pl: &PLMap, a: &Rat, b: &Rat, degree: usize) -> Option<BernoulliData> {
    if a < pl.lo() || b > pl.hi() || a >= b {
        return None;
    }
    let mut branches: Vec<BernoulliPiece> = Vec::new();
    let mut touches: Vec<Rat> = Vec::new();
    for k in 0..pl.slopes.len() {
        let sigma = pl.slopes[k];
        // A slope-0 piece reduces to the constant monomial map, so the image
        // leaves the segment there: no genuine segment preimages.
        if sigma == 0 {
            continue;
        }
        let xk = &pl.breakpoints[k];
        let xk1 = &pl.breakpoints[k + 1];
        let vk = &pl.values[k];
        let at = |s: &Rat| -> Rat { vk.clone() + Rat::from(sigma) * Rat::from(s - xk) };
        let pre = |y: &Rat| -> Rat { xk.clone() + Rat::from(y - vk) / Rat::from(sigma) };
        let (mut u, mut v) = if sigma > 0 {
            (pre(a), pre(b))
        } else {
            (pre(b), pre(a))
        };
        if u < *xk {
            u = xk.clone();
        }
        if v > *xk1 {
            v = xk1.clone();
        }
        if u > v {
            continue;
        }
        if u == v {
            touches.push(u);
            continue;
        }
        // A genuine preimage interval outside I breaks invariance.
        if u < *a || v > *b {
            return None;
        }
        let (su, sv) = (at(&u), at(&v));
        let onto = if sigma > 0 {
            su == *a && sv == *b
        } else {
            su == *b && sv == *a
        };
        if !onto || sigma.unsigned_abs() < 2 {
            return None;
        }
        // Affine expanding branch onto I: it holds exactly one fixed point.
        let fix = Rat::from(&su - &(Rat::from(sigma) * &u)) / Rat::from(1 - sigma);
        debug_assert!(fix >= u && fix <= v);
        branches.push(BernoulliPiece {
            lo: u,
            hi: v,
            slope: sigma,
            fixed_point: fix,
            local_degree: sigma.unsigned_abs(),
        });
    }
    if branches.len() < 2 {
        return None;
    }
    for t in &touches {
        if !branches.iter().any(|p| p.lo == *t || p.hi == *t) {
            return None;
        }
    }
    let total: u64 = branches.iter().map(|p| p.local_degree).sum();
    if total != degree as u64 {
        return None;
    }
    for w in branches.windows(2) {
        if w[0].hi > w[1].lo || w[0].slope.signum() == w[1].slope.signum() {
            return None;
        }
    }
    Some(BernoulliData {
        segment: (a.clone(), b.clone()),
        pieces: branches,
    })
}

/// Search for an invariant segment [a, b] whose preimage decomposes into
/// m ≥ 2 expanding affine branches with Σ local degrees = d. Candidate
/// endpoints are PL nodes, piecewise fixed points, and node images.
pub fn find_invariant_segment(pl: &PLMap, degree: usize) -> Option<BernoulliData> {
    let mut cands: Vec<Rat> = pl.breakpoints.clone();
    for k in 0..pl.slopes.len() {
        let sigma = pl.slopes[k];
        if sigma == 1 {
            continue;
        }
        let xk = &pl.breakpoints[k];
        let fix = Rat::from(&pl.values[k] - &(Rat::from(sigma) * xk)) / Rat::from(1 - sigma);
        if fix >= *xk && fix <= pl.breakpoints[k + 1] {
            cands.push(fix);
        }
    }
    for v in &pl.values {
        if v >= pl.lo() && v <= pl.hi() {
            cands.push(v.clone());
        }
    }
    cands.sort();
    cands.dedup();
    for i in 0..cands.len() {
        for j in i + 1..cands.len() {
            if let Some(data) = try_segment(pl, &cands[i], &cands[j], degree) {
                return Some(data);
            }
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PiecePosition {
    Endpoint,
    Interior,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PLFixedPoint {
    pub x: Rat,
    pub local_degree: u64,
    pub position: PiecePosition,
}

/// The fixed points of S inside the invariant segment, one per branch.
pub fn pl_fixed_points(data: &BernoulliData) -> Vec<PLFixedPoint> {
    data.pieces
        .iter()
        .map(|p| {
            let position = if p.fixed_point == data.segment.0 || p.fixed_point == data.segment.1 {
                PiecePosition::Endpoint
            } else {
                PiecePosition::Interior
            };
            PLFixedPoint {
                x: p.fixed_point.clone(),
                local_degree: p.local_degree,
                position,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Type1Prediction {
    pub count: u64,
    pub note: String,
}

/// Predicted number of classical period-l points projecting to the PL
/// periodic point x. Interior: the reduction of f^l at the corresponding
/// point is z ↦ c z^{±δ} with δ the local degree of S^l along the orbit;
/// its fixed points away from the two segment directions number δ − 1
/// (orientation preserved) or δ + 1 (reversed). Endpoint: every direction
/// at x except the segment is available, giving d_branch^l.
pub fn type1_projection_prediction(
    data: &BernoulliData,
    x: &Rat,
    l: u32,
) -> Result<Type1Prediction, NaError> {
    assert!((1..=20).contains(&l), "period out of range");
    let (a, b) = &data.segment;
    if x < a || x > b {
        return Err(NaError::NotFixed);
    }
    if x == a || x == b {
        let piece = data
            .pieces
            .iter()
            .find(|p| (x == a && p.lo == *a) || (x == b && p.hi == *b))
            .ok_or(NaError::NotFixed)?;
        if piece.fixed_point != *x {
            return Err(NaError::NotFixed);
        }
        let count = piece.local_degree.checked_pow(l).expect("degree overflow");
        return Ok(Type1Prediction {
            count,
            note: format!(
                "endpoint fixed point: {count} = {}^{} points, one per off-segment direction",
                piece.local_degree, l
            ),
        });
    }
    let mut cur = x.clone();
    let mut delta: u64 = 1;
    let mut orient = 1i64;
    for _ in 0..l {
        let hosts: Vec<&BernoulliPiece> = data
            .pieces
            .iter()
            .filter(|p| p.lo <= cur && cur <= p.hi)
            .collect();
        // Outside every branch the orbit escapes; on a shared boundary the
        // itinerary is ambiguous. Either way x is not PL-periodic.
        if hosts.len() != 1 {
            return Err(NaError::NotFixed);
        }
        let piece = hosts[0];
        cur = Rat::from(&cur - &piece.fixed_point) * Rat::from(piece.slope) + &piece.fixed_point;
        delta = delta.checked_mul(piece.local_degree).expect("degree overflow");
        if piece.slope < 0 {
            orient = -orient;
        }
    }
    if cur != *x {
        return Err(NaError::NotFixed);
    }
    let count = if orient > 0 { delta - 1 } else { delta + 1 };
    Ok(Type1Prediction {
        count,
        note: format!(
            "interior fixed point: reduction of the iterate is c·z^{}{delta}, {count} fixed points off the segment",
            if orient > 0 { "+" } else { "-" }
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::super::test_families::*;
    use super::super::na_limit_map;
    use super::*;
    use crate::family::ScaleClass;

    fn rat(p: i64, q: i64) -> Rat {
        Rat::from((p, q))
    }

    fn rats(v: &[(i64, i64)]) -> Vec<Rat> {
        v.iter().map(|&(p, q)| rat(p, q)).collect()
    }

    #[test]
    fn eg52_skeleton_is_the_paper_tent() {
        let vf = na_limit_map(&eg52(), &ScaleClass::inv_n()).unwrap();
        let pl = skeleton_map(&vf, &rat(0, 1), &rat(1, 2)).unwrap();
        assert_eq!(pl.breakpoints, rats(&[(0, 1), (1, 4), (1, 2)]));
        assert_eq!(pl.values, rats(&[(0, 1), (1, 2), (0, 1)]));
        assert_eq!(pl.slopes, vec![2, -2]);
        assert_eq!(pl.eval(&rat(1, 8)), rat(1, 4));
        assert_eq!(pl.eval(&rat(3, 8)), rat(1, 4));
    }

    #[test]
    fn monomial_skeleton_is_multiplication_by_degree() {
        let f = family(3, &["0", "0", "0", "1"], &["1", "0", "0", "0"]);
        let vf = na_limit_map(&f, &ScaleClass::trivial()).unwrap();
        let pl = skeleton_map(&vf, &rat(-1, 1), &rat(1, 1)).unwrap();
        assert_eq!(pl.breakpoints, rats(&[(-1, 1), (1, 1)]));
        assert_eq!(pl.values, rats(&[(-3, 1), (3, 1)]));
        assert_eq!(pl.slopes, vec![3]);
    }

    #[test]
    fn eg51_skeleton_splits_at_one_half() {
        let vf = na_limit_map(
            &eg51(),
            &ScaleClass::with_kappa(crate::family::ScaleKind::InvLogN, Rat::from((1, 4))),
        )
        .unwrap();
        let pl = skeleton_map(&vf, &rat(0, 1), &rat(2, 1)).unwrap();
        assert_eq!(pl.breakpoints, rats(&[(0, 1), (1, 2), (2, 1)]));
        assert_eq!(pl.values, rats(&[(1, 1), (1, 1), (4, 1)]));
        assert_eq!(pl.slopes, vec![0, 2]);
    }

    #[test]
    fn eg53_skeleton_is_the_identity_then_flat() {
        let vf = na_limit_map(&eg53(), &ScaleClass::inv_n()).unwrap();
        let pl = skeleton_map(&vf, &rat(-1, 1), &rat(2, 1)).unwrap();
        assert_eq!(pl.breakpoints, rats(&[(-1, 1), (1, 1), (2, 1)]));
        assert_eq!(pl.values, rats(&[(-1, 1), (1, 1), (1, 1)]));
        assert_eq!(pl.slopes, vec![1, 0]);
    }

    #[test]
    fn eg52_invariant_segment_and_counts() {
        let vf = na_limit_map(&eg52(), &ScaleClass::inv_n()).unwrap();
        let pl = skeleton_map(&vf, &rat(-2, 1), &rat(2, 1)).unwrap();
        let data = find_invariant_segment(&pl, 4).unwrap();
        assert_eq!(data.segment, (rat(0, 1), rat(1, 2)));
        assert_eq!(data.pieces.len(), 2);
        assert_eq!(data.pieces[0].slope, 2);
        assert_eq!(data.pieces[0].lo, rat(0, 1));
        assert_eq!(data.pieces[0].hi, rat(1, 4));
        assert_eq!(data.pieces[1].slope, -2);
        assert_eq!(data.pieces[1].hi, rat(1, 2));

        let fixed = pl_fixed_points(&data);
        assert_eq!(fixed.len(), 2);
        assert_eq!(fixed[0].x, rat(0, 1));
        assert_eq!(fixed[0].position, PiecePosition::Endpoint);
        assert_eq!(fixed[1].x, rat(1, 3));
        assert_eq!(fixed[1].position, PiecePosition::Interior);
        assert_eq!(fixed[1].local_degree, 2);
    }

    #[test]
    fn monomial_has_no_invariant_segment() {
        let f = family(3, &["0", "0", "0", "1"], &["1", "0", "0", "0"]);
        let vf = na_limit_map(&f, &ScaleClass::trivial()).unwrap();
        let pl = skeleton_map(&vf, &rat(-1, 1), &rat(1, 1)).unwrap();
        assert!(find_invariant_segment(&pl, 3).is_none());
    }

    #[test]
    fn identity_segment_is_not_bernoulli() {
        let vf = na_limit_map(&eg53(), &ScaleClass::inv_n()).unwrap();
        let pl = skeleton_map(&vf, &rat(-1, 1), &rat(2, 1)).unwrap();
        assert!(find_invariant_segment(&pl, 2).is_none());
    }

    #[test]
    fn symmetric_tent_with_three_branches() {
        let pl = PLMap {
            breakpoints: rats(&[(0, 1), (1, 3), (2, 3), (1, 1)]),
            values: rats(&[(0, 1), (1, 1), (0, 1), (1, 1)]),
            slopes: vec![3, -3, 3],
        };
        let data = find_invariant_segment(&pl, 9).unwrap();
        assert_eq!(data.segment, (rat(0, 1), rat(1, 1)));
        assert_eq!(data.pieces.len(), 3);
        let fixed = pl_fixed_points(&data);
        assert_eq!(fixed[0].x, rat(0, 1));
        assert_eq!(fixed[0].position, PiecePosition::Endpoint);
        assert_eq!(fixed[1].x, rat(1, 2));
        assert_eq!(fixed[1].position, PiecePosition::Interior);
        assert_eq!(fixed[2].x, rat(1, 1));
        assert_eq!(fixed[2].position, PiecePosition::Endpoint);
        // Interior point, reversing branch: δ + 1 lifts.
        let pred = type1_projection_prediction(&data, &rat(1, 2), 1).unwrap();
        assert_eq!(pred.count, 4);
    }

    #[test]
    fn interior_orientation_preserving_prediction() {
        // Branches (−4, +2, −4) over [0, 1]; the middle branch fixes 1/2
        // with slope +2.
        let pl = PLMap {
            breakpoints: rats(&[(0, 1), (1, 4), (3, 4), (1, 1)]),
            values: rats(&[(1, 1), (0, 1), (1, 1), (0, 1)]),
            slopes: vec![-4, 2, -4],
        };
        let data = find_invariant_segment(&pl, 10).unwrap();
        assert_eq!(data.segment, (rat(0, 1), rat(1, 1)));
        assert_eq!(data.pieces.len(), 3);
        let fixed = pl_fixed_points(&data);
        assert!(fixed.iter().all(|f| f.position == PiecePosition::Interior));
        assert_eq!(fixed[1].x, rat(1, 2));

        let pred = type1_projection_prediction(&data, &rat(1, 2), 1).unwrap();
        assert_eq!(pred.count, 1);
        // l = 2 along the reversing first branch: δ = 16, orientation +.
        let pred = type1_projection_prediction(&data, &rat(1, 5), 2).unwrap();
        assert_eq!(pred.count, 15);
        let pred = type1_projection_prediction(&data, &rat(1, 5), 1).unwrap();
        assert_eq!(pred.count, 5);
    }

    #[test]
    fn eg52_type1_predictions() {
        let vf = na_limit_map(&eg52(), &ScaleClass::inv_n()).unwrap();
        let pl = skeleton_map(&vf, &rat(-2, 1), &rat(2, 1)).unwrap();
        let data = find_invariant_segment(&pl, 4).unwrap();
        // Endpoint 0 hosts 2^l classical periodic points.
        for l in 1..=2u32 {
            let pred = type1_projection_prediction(&data, &rat(0, 1), l).unwrap();
            assert_eq!(pred.count, 2u64.pow(l));
        }
        // Interior 1/3: l = 1 reverses (δ = 2 → 3 points), l = 2 preserves
        // (δ = 4 → 3 points).
        let pred = type1_projection_prediction(&data, &rat(1, 3), 1).unwrap();
        assert_eq!(pred.count, 3);
        let pred = type1_projection_prediction(&data, &rat(1, 3), 2).unwrap();
        assert_eq!(pred.count, 3);
    }

    #[test]
    fn non_periodic_points_are_rejected() {
        let pl = PLMap {
            breakpoints: rats(&[(0, 1), (1, 4), (3, 4), (1, 1)]),
            values: rats(&[(1, 1), (0, 1), (1, 1), (0, 1)]),
            slopes: vec![-4, 2, -4],
        };
        let data = find_invariant_segment(&pl, 10).unwrap();
        // Branch boundary: ambiguous itinerary.
        assert!(matches!(
            type1_projection_prediction(&data, &rat(1, 4), 1),
            Err(NaError::NotFixed)
        ));
        // Not fixed.
        assert!(matches!(
            type1_projection_prediction(&data, &rat(3, 10), 1),
            Err(NaError::NotFixed)
        ));
        // Outside the segment.
        assert!(matches!(
            type1_projection_prediction(&data, &rat(3, 2), 1),
            Err(NaError::NotFixed)
        ));
    }
}
