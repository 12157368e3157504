//! Coefficient sequences c_n = Σ A·e^{αn}·n^β with exact Gaussian-rational
//! A and rational α, β: evaluation at finite n, and exact extraction of
//! valuations and residues with respect to a scale class.

mod gauss;
mod parse;

pub use gauss::GaussRat;
pub use parse::{parse_growth_expr, ParseError};

use crate::num::{BigComplex, HomogPair, Poly};
use crate::Rat;
use rug::ops::Pow;
use rug::Float;
use std::cmp::Ordering;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error("zero growth expression has no valuation")]
    ZeroExpr,
    #[error("expression is not a unit at this scale (valuation != 0)")]
    NonUnit,
    #[error("scale kind does not define exact valuations")]
    UnsupportedScale,
    #[error("coefficient list length must be degree + 1 (got {got} for degree {degree})")]
    DegreeMismatch { degree: usize, got: usize },
    #[error("conjugation matrix is singular")]
    SingularMobius,
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// One term A·e^{αn}·n^β.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrowthMonomial {
    pub a: GaussRat,
    pub alpha: Rat,
    pub beta: Rat,
}

impl GrowthMonomial {
    pub fn new(a: GaussRat, alpha: Rat, beta: Rat) -> Self {
        GrowthMonomial { a, alpha, beta }
    }
}

/// Canonical finite sum of growth monomials: terms sorted by (α, β)
/// descending, like terms merged, zero terms removed.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct GrowthExpr {
    terms: Vec<GrowthMonomial>,
}

/// Exact valuation with the two flags needed at logarithmic scales.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Valuation {
    /// Unbounded growth relative to the scale.
    MinusInf,
    Finite(Rat),
    /// Decays faster than any unit at the scale.
    PlusInf,
}

impl Valuation {
    pub fn finite(&self) -> Option<&Rat> {
        match self {
            Valuation::Finite(r) => Some(r),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Valuation::Finite(r) if r.cmp0() == Ordering::Equal)
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        use Valuation::*;
        match (self, other) {
            (MinusInf, MinusInf) | (PlusInf, PlusInf) => Ordering::Equal,
            (MinusInf, _) | (_, PlusInf) => Ordering::Less,
            (_, MinusInf) | (PlusInf, _) => Ordering::Greater,
            (Finite(a), Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::MinusInf => write!(f, "-inf"),
            Valuation::PlusInf => write!(f, "+inf"),
            Valuation::Finite(r) => write!(f, "{r}"),
        }
    }
}

/// Named scale kinds, totally ordered by how fast multipliers may grow.
#[derive(Clone, Debug, PartialEq)]
pub enum ScaleKind {
    Trivial,
    InvLogN,
    InvN,
    Other { a: f64, b: f64 },
}

/// A scale kind together with the exact normalization constant κ relating
/// the fitted scale to the named representative (κ = 1 means ε̂_n is
/// literally 1/n or 1/log n).
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleClass {
    pub kind: ScaleKind,
    pub kappa: Rat,
}

impl ScaleClass {
    pub fn trivial() -> Self {
        ScaleClass { kind: ScaleKind::Trivial, kappa: Rat::from(1) }
    }

    pub fn inv_n() -> Self {
        ScaleClass { kind: ScaleKind::InvN, kappa: Rat::from(1) }
    }

    pub fn inv_log_n() -> Self {
        ScaleClass { kind: ScaleKind::InvLogN, kappa: Rat::from(1) }
    }

    pub fn with_kappa(kind: ScaleKind, kappa: Rat) -> Self {
        ScaleClass { kind, kappa }
    }
}

impl GrowthExpr {
    pub fn new(terms: Vec<GrowthMonomial>) -> Self {
        let mut e = GrowthExpr { terms };
        e.canonicalize();
        e
    }

    pub fn zero() -> Self {
        GrowthExpr { terms: Vec::new() }
    }

    pub fn constant(a: GaussRat) -> Self {
        GrowthExpr::new(vec![GrowthMonomial::new(a, Rat::new(), Rat::new())])
    }

    pub fn from_int(v: i64) -> Self {
        GrowthExpr::constant(GaussRat::from_int(v))
    }

    pub fn monomial(a: GaussRat, alpha: Rat, beta: Rat) -> Self {
        GrowthExpr::new(vec![GrowthMonomial::new(a, alpha, beta)])
    }

    pub fn terms(&self) -> &[GrowthMonomial] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Term of maximal (α, β); None for zero.
    pub fn dominant(&self) -> Option<&GrowthMonomial> {
        self.terms.first()
    }

    fn canonicalize(&mut self) {
        self.terms
            .sort_by(|s, t| (&t.alpha, &t.beta).cmp(&(&s.alpha, &s.beta)));
        let mut merged: Vec<GrowthMonomial> = Vec::with_capacity(self.terms.len());
        for t in self.terms.drain(..) {
            if let Some(last) = merged.last_mut() {
                if last.alpha == t.alpha && last.beta == t.beta {
                    last.a = last.a.add(&t.a);
                    continue;
                }
            }
            merged.push(t);
        }
        merged.retain(|t| !t.a.is_zero());
        self.terms = merged;
    }

    pub fn add(&self, rhs: &GrowthExpr) -> GrowthExpr {
        let mut terms = self.terms.clone();
        terms.extend(rhs.terms.iter().cloned());
        GrowthExpr::new(terms)
    }

    pub fn sub(&self, rhs: &GrowthExpr) -> GrowthExpr {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> GrowthExpr {
        GrowthExpr {
            terms: self
                .terms
                .iter()
                .map(|t| GrowthMonomial::new(t.a.neg(), t.alpha.clone(), t.beta.clone()))
                .collect(),
        }
    }

    pub fn mul(&self, rhs: &GrowthExpr) -> GrowthExpr {
        let mut terms = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for s in &self.terms {
            for t in &rhs.terms {
                terms.push(GrowthMonomial::new(
                    s.a.mul(&t.a),
                    Rat::from(&s.alpha + &t.alpha),
                    Rat::from(&s.beta + &t.beta),
                ));
            }
        }
        GrowthExpr::new(terms)
    }

    pub fn scale_const(&self, c: &GaussRat) -> GrowthExpr {
        if c.is_zero() {
            return GrowthExpr::zero();
        }
        GrowthExpr {
            terms: self
                .terms
                .iter()
                .map(|t| GrowthMonomial::new(t.a.mul(c), t.alpha.clone(), t.beta.clone()))
                .collect(),
        }
    }

    /// Exact-formula evaluation Σ A·e^{αn}·n^β at working precision.
    pub fn eval_at(&self, n: u64, prec: u32) -> BigComplex {
        assert!(n >= 1, "growth expressions are sequences over n >= 1");
        let mut acc = BigComplex::zero(prec);
        for t in &self.terms {
            let mut mag = Float::with_val(prec, 1);
            if t.alpha.cmp0() != Ordering::Equal {
                let an = Rat::from(&t.alpha * &Rat::from(n));
                mag *= Float::with_val(prec, &an).exp();
            }
            if t.beta.cmp0() != Ordering::Equal {
                let nf = Float::with_val(prec, n);
                mag *= nf.pow(Float::with_val(prec, &t.beta));
            }
            acc = &acc + &t.a.to_complex(prec).scale(&mag);
        }
        acc
    }

    /// v(c) = −lim ε̂_n log|c_n| at the scale's normalized representative,
    /// times the exact κ carried by the tag.
    pub fn valuation(&self, scale: &ScaleClass) -> Result<Valuation, FamilyError> {
        if self.terms.is_empty() {
            return Err(FamilyError::ZeroExpr);
        }
        let max_alpha = self.terms.iter().map(|t| &t.alpha).max().unwrap();
        match scale.kind {
            ScaleKind::InvN => {
                let v = -Rat::from(&scale.kappa * max_alpha);
                Ok(Valuation::Finite(v))
            }
            ScaleKind::InvLogN => match max_alpha.cmp0() {
                Ordering::Greater => Ok(Valuation::MinusInf),
                Ordering::Less => Ok(Valuation::PlusInf),
                Ordering::Equal => {
                    let max_beta = self
                        .terms
                        .iter()
                        .filter(|t| t.alpha.cmp0() == Ordering::Equal)
                        .map(|t| &t.beta)
                        .max()
                        .unwrap();
                    Ok(Valuation::Finite(-Rat::from(&scale.kappa * max_beta)))
                }
            },
            ScaleKind::Trivial => {
                let d = self.dominant().unwrap();
                let key = (d.alpha.cmp0(), d.beta.cmp0());
                match key {
                    (Ordering::Greater, _) | (Ordering::Equal, Ordering::Greater) => {
                        Ok(Valuation::MinusInf)
                    }
                    (Ordering::Equal, Ordering::Equal) => Ok(Valuation::Finite(Rat::new())),
                    _ => Ok(Valuation::PlusInf),
                }
            }
            ScaleKind::Other { .. } => Err(FamilyError::UnsupportedScale),
        }
    }

    /// The slow sub-expression whose class is the residue; requires
    /// valuation exactly 0.
    pub fn residue_part(&self, scale: &ScaleClass) -> Result<GrowthExpr, FamilyError> {
        if !self.valuation(scale)?.is_zero() {
            return Err(FamilyError::NonUnit);
        }
        let keep = |t: &GrowthMonomial| match scale.kind {
            ScaleKind::InvN => t.alpha.cmp0() == Ordering::Equal,
            ScaleKind::InvLogN | ScaleKind::Trivial => {
                t.alpha.cmp0() == Ordering::Equal && t.beta.cmp0() == Ordering::Equal
            }
            ScaleKind::Other { .. } => unreachable!("valuation rejected this kind"),
        };
        Ok(GrowthExpr {
            terms: self.terms.iter().filter(|t| keep(t)).cloned().collect(),
        })
    }
}

pub(crate) fn fmt_gauss(g: &GaussRat) -> String {
    let one = Rat::from(1);
    if g.is_real() {
        return g.re.to_string();
    }
    if g.re.cmp0() == Ordering::Equal {
        return if g.im == one {
            "i".to_string()
        } else if g.im == -one.clone() {
            "-i".to_string()
        } else {
            format!("{}i", g.im)
        };
    }
    let (sign, abs_im) = if g.im.cmp0() == Ordering::Less {
        ('-', -g.im.clone())
    } else {
        ('+', g.im.clone())
    };
    let im_str = if abs_im == one { String::new() } else { abs_im.to_string() };
    format!("({}{}{}i)", g.re, sign, im_str)
}

impl fmt::Display for GrowthExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, t) in self.terms.iter().enumerate() {
            // Pull the sign out of real or purely imaginary coefficients.
            let extract_sign = t.a.is_real() || t.a.re.cmp0() == Ordering::Equal;
            let negative = extract_sign
                && (if t.a.is_real() { &t.a.re } else { &t.a.im }).cmp0() == Ordering::Less;
            let mag = if negative { t.a.neg() } else { t.a.clone() };
            if idx == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut parts: Vec<String> = Vec::new();
            let coeff = fmt_gauss(&mag);
            let has_factors =
                t.alpha.cmp0() != Ordering::Equal || t.beta.cmp0() != Ordering::Equal;
            if coeff != "1" || !has_factors {
                parts.push(coeff);
            }
            if t.alpha.cmp0() != Ordering::Equal {
                parts.push(format!("exp({}*n)", t.alpha));
            }
            match t.beta.cmp0() {
                Ordering::Equal => {}
                _ if t.beta == Rat::from(1) => parts.push("n".to_string()),
                _ => parts.push(format!("n^{}", t.beta)),
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

/// Exact Möbius matrix for symbolic conjugation of a family.
#[derive(Clone, Debug)]
pub struct MobiusExact {
    pub a: GaussRat,
    pub b: GaussRat,
    pub c: GaussRat,
    pub d: GaussRat,
}

impl MobiusExact {
    pub fn det(&self) -> GaussRat {
        self.a.mul(&self.d).sub(&self.b.mul(&self.c))
    }
}

/// A degenerating family f_n = [P_n : Q_n] with growth-expression
/// coefficients, index i = coefficient of z0^i z1^(d-i).
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyMap {
    degree: usize,
    p: Vec<GrowthExpr>,
    q: Vec<GrowthExpr>,
}

impl FamilyMap {
    pub fn new(
        degree: usize,
        p: Vec<GrowthExpr>,
        q: Vec<GrowthExpr>,
    ) -> Result<FamilyMap, FamilyError> {
        for coeffs in [&p, &q] {
            if coeffs.len() != degree + 1 {
                return Err(FamilyError::DegreeMismatch {
                    degree,
                    got: coeffs.len(),
                });
            }
        }
        Ok(FamilyMap { degree, p, q })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn numerator(&self) -> &[GrowthExpr] {
        &self.p
    }

    pub fn denominator(&self) -> &[GrowthExpr] {
        &self.q
    }

    /// The homogeneous pair at a concrete index n (un-normalized).
    pub fn eval_at(&self, n: u64, prec: u32) -> HomogPair {
        let ev = |coeffs: &[GrowthExpr]| {
            Poly::new(coeffs.iter().map(|c| c.eval_at(n, prec)).collect())
        };
        HomogPair::new(ev(&self.p), ev(&self.q))
    }

    /// Symbolic conjugate M^{-1} ∘ f ∘ M for a constant Möbius map M.
    pub fn conjugate(&self, m: &MobiusExact) -> Result<FamilyMap, FamilyError> {
        if m.det().is_zero() {
            return Err(FamilyError::SingularMobius);
        }
        let d = self.degree;
        // Binomial coefficient tables for (x z0 + y z1)^k, k = 0..=d.
        let lin_pow = |x: &GaussRat, y: &GaussRat, k: usize| -> Vec<GaussRat> {
            let mut out = vec![GaussRat::one()];
            for _ in 0..k {
                let mut next = vec![GaussRat::zero(); out.len() + 1];
                for (j, c) in out.iter().enumerate() {
                    next[j] = next[j].add(&c.mul(y));
                    next[j + 1] = next[j + 1].add(&c.mul(x));
                }
                out = next;
            }
            out
        };
        let subst = |coeffs: &[GrowthExpr]| -> Vec<GrowthExpr> {
            let mut acc = vec![GrowthExpr::zero(); d + 1];
            for (i, c) in coeffs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let top = lin_pow(&m.a, &m.b, i);
                let bot = lin_pow(&m.c, &m.d, d - i);
                for (j1, t) in top.iter().enumerate() {
                    for (j2, u) in bot.iter().enumerate() {
                        let k = j1 + j2;
                        let prod = t.mul(u);
                        acc[k] = acc[k].add(&c.scale_const(&prod));
                    }
                }
            }
            acc
        };
        let pm = subst(&self.p);
        let qm = subst(&self.q);
        // Post-compose with M^{-1} (projectively: adjugate).
        let mut gp = Vec::with_capacity(d + 1);
        let mut gq = Vec::with_capacity(d + 1);
        for k in 0..=d {
            gp.push(pm[k].scale_const(&m.d).sub(&qm[k].scale_const(&m.b)));
            gq.push(qm[k].scale_const(&m.a).sub(&pm[k].scale_const(&m.c)));
        }
        FamilyMap::new(d, gp, gq)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rat(p: i64, q: i64) -> Rat {
        Rat::from((p, q))
    }

    fn expr(text: &str) -> GrowthExpr {
        parse_growth_expr(text).unwrap()
    }

    #[test]
    fn canonical_merging() {
        let e = expr("n + n");
        assert_eq!(e.terms().len(), 1);
        assert_eq!(e.terms()[0].a, GaussRat::from_int(2));
        assert_eq!(e.terms()[0].beta, rat(1, 1));
        assert!(expr("n - n").is_zero());
    }

    #[test]
    fn eval_matches_formula() {
        let e = expr("exp(1*n)*n^-2 + 3");
        let v = e.eval_at(10, 256);
        let expect = Float::with_val(256, 10).exp() / 100 + 3;
        let diff = Float::with_val(256, &v.re - &expect).abs();
        assert!(diff.to_f64() < 1e-60);
        assert!(v.im.is_zero());

        assert_eq!(expr("n").eval_at(7, 128).to_f64s().0, 7.0);
        let em3 = expr("exp(-1*n)").eval_at(3, 128);
        assert!((em3.to_f64s().0 - (-3.0f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn valuation_named_cases() {
        let inv_n = ScaleClass::inv_n();
        let inv_log = ScaleClass::inv_log_n();
        assert_eq!(
            expr("exp(-1*n)").valuation(&inv_n).unwrap(),
            Valuation::Finite(rat(1, 1))
        );
        assert_eq!(
            expr("n").valuation(&inv_n).unwrap(),
            Valuation::Finite(Rat::new())
        );
        assert_eq!(
            expr("5").valuation(&inv_n).unwrap(),
            Valuation::Finite(Rat::new())
        );
        assert_eq!(
            expr("5").valuation(&inv_log).unwrap(),
            Valuation::Finite(Rat::new())
        );
        // Log scale: e^{±n} overwhelms it, n contributes -1.
        assert_eq!(expr("exp(1*n)").valuation(&inv_log).unwrap(), Valuation::MinusInf);
        assert_eq!(expr("exp(-1*n)").valuation(&inv_log).unwrap(), Valuation::PlusInf);
        assert_eq!(
            expr("n").valuation(&inv_log).unwrap(),
            Valuation::Finite(rat(-1, 1))
        );
        assert!(matches!(
            GrowthExpr::zero().valuation(&inv_n),
            Err(FamilyError::ZeroExpr)
        ));
    }

    #[test]
    fn residue_parts() {
        let inv_n = ScaleClass::inv_n();
        assert_eq!(expr("n + exp(-1*n)").residue_part(&inv_n).unwrap(), expr("n"));
        assert_eq!(expr("3").residue_part(&inv_n).unwrap(), expr("3"));
        assert_eq!(expr("n - 1").residue_part(&inv_n).unwrap(), expr("n - 1"));
        assert!(matches!(
            expr("exp(-1*n)").residue_part(&inv_n),
            Err(FamilyError::NonUnit)
        ));
    }

    fn random_expr(rng: &mut ChaCha8Rng, positive_real: bool) -> GrowthExpr {
        let alphas = [rat(-2, 1), rat(-1, 1), rat(-1, 2), rat(0, 1), rat(1, 2), rat(1, 1)];
        let betas = [rat(-2, 1), rat(-1, 1), rat(0, 1), rat(1, 1), rat(2, 1)];
        let k = rng.gen_range(1..=3);
        let terms = (0..k)
            .map(|_| {
                let num = rng.gen_range(1..=8);
                let a = if positive_real {
                    GaussRat::from_int(num)
                } else {
                    GaussRat::new(
                        rat(rng.gen_range(-8..=8), rng.gen_range(1..=4)),
                        rat(rng.gen_range(-8..=8), rng.gen_range(1..=4)),
                    )
                };
                GrowthMonomial::new(
                    a,
                    alphas[rng.gen_range(0..alphas.len())].clone(),
                    betas[rng.gen_range(0..betas.len())].clone(),
                )
            })
            .collect();
        GrowthExpr::new(terms)
    }

    #[test]
    fn valuation_is_multiplicative_and_ultrametric() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let inv_n = ScaleClass::inv_n();
        for _ in 0..200 {
            let x = random_expr(&mut rng, false);
            let y = random_expr(&mut rng, false);
            if x.is_zero() || y.is_zero() {
                continue;
            }
            let vx = x.valuation(&inv_n).unwrap();
            let vy = y.valuation(&inv_n).unwrap();
            let prod = x.mul(&y);
            if !prod.is_zero() {
                let expect = Rat::from(vx.finite().unwrap() + vy.finite().unwrap());
                assert_eq!(prod.valuation(&inv_n).unwrap(), Valuation::Finite(expect));
            }
            let sum = x.add(&y);
            if !sum.is_zero() {
                let vs = sum.valuation(&inv_n).unwrap();
                assert!(vs >= vx.clone().min(vy.clone()));
            }
        }
    }

    #[test]
    fn numeric_consistency_of_valuation() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let inv_n = ScaleClass::inv_n();
        for _ in 0..40 {
            let x = random_expr(&mut rng, true);
            let v = x.valuation(&inv_n).unwrap();
            let v = v.finite().unwrap().to_f64();
            for n in [50u64, 100, 200] {
                let val = x.eval_at(n, 256);
                let measured = -(val.ln_abs().to_f64()) / n as f64;
                let bound = 10.0 * (n as f64).ln() / n as f64;
                assert!(
                    (measured - v).abs() <= bound,
                    "n={n}: measured {measured}, exact {v}, bound {bound}"
                );
            }
        }
    }

    #[test]
    fn positive_valuation_means_decay() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let inv_n = ScaleClass::inv_n();
        let mut seen = 0;
        for _ in 0..200 {
            let x = random_expr(&mut rng, true);
            let v = x.valuation(&inv_n).unwrap();
            if v.finite().map(|r| r.cmp0() == Ordering::Greater) != Some(true) {
                continue;
            }
            seen += 1;
            let a100 = x.eval_at(100, 256).abs().to_f64();
            let a200 = x.eval_at(200, 256).abs().to_f64();
            assert!(a100 < 1e-6 && a200 < 1e-6);
            assert!(a200 < a100);
        }
        assert!(seen > 10, "generator produced too few positive-valuation cases");
    }

    #[test]
    fn printer_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..200 {
            let x = random_expr(&mut rng, false);
            let text = x.to_string();
            let back = parse_growth_expr(&text).unwrap_or_else(|e| {
                panic!("failed to reparse {text:?}: {e}");
            });
            assert_eq!(back, x, "round trip of {text:?}");
        }
        assert_eq!(GrowthExpr::zero().to_string(), "0");
        assert!(parse_growth_expr("0").unwrap().is_zero());
    }

    #[test]
    fn conjugation_matches_numeric_conjugation() {
        // f = z^2 + n as a family; conjugate by M(z) = z + 1 and check at
        // a concrete n and point that g(z) = M^{-1}(f(M(z))).
        let fam = FamilyMap::new(
            2,
            vec![expr("n"), expr("0"), expr("1")],
            vec![expr("1"), expr("0"), expr("0")],
        )
        .unwrap();
        let m = MobiusExact {
            a: GaussRat::one(),
            b: GaussRat::one(),
            c: GaussRat::zero(),
            d: GaussRat::one(),
        };
        let g = fam.conjugate(&m).unwrap();
        let n = 17;
        let f_pair = fam.eval_at(n, 256);
        let g_pair = g.eval_at(n, 256);
        let z = BigComplex::from_f64(256, 0.3, -1.2);
        let one = BigComplex::one(256);
        // M(z) = z + 1, M^{-1}(w) = w - 1.
        let mz = &z + &one;
        let (fp, fq) = f_pair.eval(&mz, &one);
        let expect = &(&fp / &fq) - &one;
        let (gp, gq) = g_pair.eval(&z, &one);
        let got = &gp / &gq;
        assert!((&got - &expect).abs().to_f64() < 1e-50);
    }

    #[test]
    fn singular_mobius_rejected() {
        let fam = FamilyMap::new(
            1,
            vec![expr("1"), expr("1")],
            vec![expr("1"), expr("0")],
        )
        .unwrap();
        let m = MobiusExact {
            a: GaussRat::one(),
            b: GaussRat::one(),
            c: GaussRat::one(),
            d: GaussRat::one(),
        };
        assert!(matches!(fam.conjugate(&m), Err(FamilyError::SingularMobius)));
    }
}
