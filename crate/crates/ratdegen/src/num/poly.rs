//! Dense univariate polynomials and degree-d binary forms over BigComplex.
//!
//! A `Poly` stores coefficients ascending by power; the formal degree is
//! `coeffs.len() - 1` and may exceed the actual degree when leading
//! coefficients vanish. Homogeneous pairs keep both forms at the same formal
//! degree, which is what resultants and composition act on.

use super::complex::BigComplex;
use rug::Float;

#[derive(Clone, Debug)]
pub struct Poly {
    /// coeffs[i] multiplies z^i.
    pub coeffs: Vec<BigComplex>,
}

impl Poly {
    pub fn new(coeffs: Vec<BigComplex>) -> Self {
        assert!(!coeffs.is_empty(), "polynomial needs at least one coefficient");
        Poly { coeffs }
    }

    pub fn zero(prec: u32, formal_degree: usize) -> Self {
        Poly::new(vec![BigComplex::zero(prec); formal_degree + 1])
    }

    pub fn formal_degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Largest i with coeffs[i] exactly nonzero, or None for the zero polynomial.
    pub fn actual_degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.actual_degree().is_none()
    }

    pub fn prec(&self) -> u32 {
        self.coeffs.iter().map(|c| c.prec()).min().unwrap()
    }

    /// Horner evaluation.
    pub fn eval(&self, z: &BigComplex) -> BigComplex {
        let mut acc = self.coeffs.last().unwrap().clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc = &(&acc * z) + c;
        }
        acc
    }

    /// Homogeneous evaluation of the degree-`formal_degree` binary form:
    /// sum coeffs[i] z0^i z1^(d-i).
    pub fn eval_homog(&self, z0: &BigComplex, z1: &BigComplex) -> BigComplex {
        let d = self.formal_degree();
        let p = self.prec().min(z0.prec()).min(z1.prec());
        // Powers table; d is small (composition raises it, but stays modest).
        let mut pow0 = Vec::with_capacity(d + 1);
        let mut pow1 = Vec::with_capacity(d + 1);
        pow0.push(BigComplex::one(p));
        pow1.push(BigComplex::one(p));
        for k in 1..=d {
            pow0.push(&pow0[k - 1] * z0);
            pow1.push(&pow1[k - 1] * z1);
        }
        let mut acc = BigComplex::zero(p);
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            acc = &acc + &(&(c * &pow0[i]) * &pow1[d - i]);
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        let prec = self.prec();
        if self.coeffs.len() == 1 {
            return Poly::zero(prec, 0);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c.scale(&Float::with_val(prec, i as u32)))
            .collect();
        Poly::new(coeffs)
    }

    pub fn add(&self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let p = self.prec().min(rhs.prec());
        let zero = BigComplex::zero(p);
        let coeffs = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).unwrap_or(&zero);
                let b = rhs.coeffs.get(i).unwrap_or(&zero);
                a + b
            })
            .collect();
        Poly::new(coeffs)
    }

    pub fn sub(&self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let p = self.prec().min(rhs.prec());
        let zero = BigComplex::zero(p);
        let coeffs = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).unwrap_or(&zero);
                let b = rhs.coeffs.get(i).unwrap_or(&zero);
                a - b
            })
            .collect();
        Poly::new(coeffs)
    }

    pub fn mul(&self, rhs: &Poly) -> Poly {
        let p = self.prec().min(rhs.prec());
        let mut out = vec![BigComplex::zero(p); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Poly::new(out)
    }

    pub fn scale_complex(&self, t: &BigComplex) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * t).collect())
    }

    pub fn scale_real(&self, t: &Float) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c.scale(t)).collect())
    }

    pub fn neg(&self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }

    /// Largest coefficient modulus.
    pub fn max_coeff_abs(&self) -> Float {
        let p = self.prec();
        let mut m = Float::new(p);
        for c in self.coeffs.iter() {
            let a = c.abs();
            if a > m {
                m = a;
            }
        }
        m
    }

    /// Coefficients reversed: z^d p(1/z) for the formal degree d.
    pub fn reversed(&self) -> Poly {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        Poly::new(coeffs)
    }

    /// Pad with exact zeros up to the given formal degree.
    pub fn padded(&self, formal_degree: usize) -> Poly {
        assert!(formal_degree >= self.formal_degree());
        let p = self.prec();
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(formal_degree + 1, BigComplex::zero(p));
        Poly::new(coeffs)
    }
}

/// Homogeneous pair [P : Q], both at the same formal degree.
#[derive(Clone, Debug)]
pub struct HomogPair {
    pub p: Poly,
    pub q: Poly,
}

impl HomogPair {
    pub fn new(p: Poly, q: Poly) -> Self {
        assert_eq!(
            p.formal_degree(),
            q.formal_degree(),
            "homogeneous pair needs matching formal degrees"
        );
        HomogPair { p, q }
    }

    pub fn degree(&self) -> usize {
        self.p.formal_degree()
    }

    pub fn prec(&self) -> u32 {
        self.p.prec().min(self.q.prec())
    }

    pub fn eval(&self, z0: &BigComplex, z1: &BigComplex) -> (BigComplex, BigComplex) {
        (self.p.eval_homog(z0, z1), self.q.eval_homog(z0, z1))
    }

    /// Composition self(other): substitute [P_o : Q_o] into each binary form.
    /// The result has formal degree deg(self) * deg(other).
    pub fn compose(&self, other: &HomogPair) -> HomogPair {
        let d = self.degree();
        let prec = self.prec().min(other.prec());
        // Power tables for other.p and other.q as polynomials in the
        // original variables (represented densely over the monomial index).
        let one = Poly::new(vec![BigComplex::one(prec)]);
        let mut pow_p: Vec<Poly> = vec![one.clone()];
        let mut pow_q: Vec<Poly> = vec![one];
        for k in 1..=d {
            pow_p.push(pow_p[k - 1].mul(&other.p));
            pow_q.push(pow_q[k - 1].mul(&other.q));
        }
        let target = d * other.degree();
        let subst = |form: &Poly| -> Poly {
            let mut acc = Poly::zero(prec, target);
            for (i, c) in form.coeffs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let term = pow_p[i].mul(&pow_q[d - i]).scale_complex(c);
                acc = acc.add(&term);
            }
            acc.padded(target)
        };
        HomogPair::new(subst(&self.p), subst(&self.q))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> BigComplex {
        BigComplex::from_f64(128, re, im)
    }

    fn poly(re: &[f64]) -> Poly {
        Poly::new(re.iter().map(|&v| c(v, 0.0)).collect())
    }

    #[test]
    fn eval_and_derivative() {
        // p(z) = 1 + 2z + 3z^2
        let p = poly(&[1.0, 2.0, 3.0]);
        let v = p.eval(&c(2.0, 0.0));
        assert_eq!(v.to_f64s().0, 17.0);
        let dp = p.derivative();
        assert_eq!(dp.eval(&c(2.0, 0.0)).to_f64s().0, 14.0);
    }

    #[test]
    fn formal_vs_actual_degree() {
        let p = Poly::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(p.formal_degree(), 2);
        assert_eq!(p.actual_degree(), Some(0));
        assert_eq!(Poly::zero(64, 3).actual_degree(), None);
    }

    #[test]
    fn homog_eval_matches_affine() {
        // z^2 + 5 as binary form z0^2 + 5 z1^2.
        let p = poly(&[5.0, 0.0, 1.0]);
        let z = c(3.0, 1.0);
        let affine = p.eval(&z);
        let hom = p.eval_homog(&z, &c(1.0, 0.0));
        assert!((&affine - &hom).abs().to_f64() < 1e-30);
    }

    #[test]
    fn mul_keeps_formal_degrees() {
        let a = Poly::new(vec![c(1.0, 0.0), c(0.0, 0.0)]); // formal deg 1, actual 0
        let b = poly(&[1.0, 1.0]);
        let ab = a.mul(&b);
        assert_eq!(ab.formal_degree(), 2);
        assert_eq!(ab.actual_degree(), Some(1));
    }

    #[test]
    fn compose_quadratic_in_itself() {
        // f = z^2 + 1 as pair [z0^2 + z1^2 : z1^2]; f(f(z)) = (z^2+1)^2 + 1.
        let f = HomogPair::new(poly(&[1.0, 0.0, 1.0]), poly(&[1.0, 0.0, 0.0]));
        let ff = f.compose(&f);
        assert_eq!(ff.degree(), 4);
        let z = c(1.5, -0.25);
        let (n2, d2) = ff.eval(&z, &c(1.0, 0.0));
        let inner = &(&z * &z) + &c(1.0, 0.0);
        let outer = &(&inner * &inner) + &c(1.0, 0.0);
        let val = &n2 / &d2;
        assert!((&val - &outer).abs().to_f64() < 1e-28);
    }
}
