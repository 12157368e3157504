//! Exact Gaussian-rational scalars for growth-expression coefficients.
//!
//! Keeping coefficients in Q(i) makes canonical cancellation exact: equal
//! terms subtract to literal zero, which is what the ultrametric identities
//! rely on.

use crate::num::BigComplex;
use crate::Rat;
use rug::Float;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaussRat {
    pub re: Rat,
    pub im: Rat,
}

impl GaussRat {
    pub fn new(re: Rat, im: Rat) -> Self {
        GaussRat { re, im }
    }

    pub fn zero() -> Self {
        GaussRat::new(Rat::new(), Rat::new())
    }

    pub fn one() -> Self {
        GaussRat::new(Rat::from(1), Rat::new())
    }

    pub fn from_int(v: i64) -> Self {
        GaussRat::new(Rat::from(v), Rat::new())
    }

    pub fn from_rat(re: Rat) -> Self {
        GaussRat::new(re, Rat::new())
    }

    pub fn is_zero(&self) -> bool {
        self.re.cmp0() == std::cmp::Ordering::Equal && self.im.cmp0() == std::cmp::Ordering::Equal
    }

    pub fn is_real(&self) -> bool {
        self.im.cmp0() == std::cmp::Ordering::Equal
    }

    pub fn conj(&self) -> Self {
        GaussRat::new(self.re.clone(), -self.im.clone())
    }

    /// re^2 + im^2, the square modulus.
    pub fn norm(&self) -> Rat {
        Rat::from(&self.re * &self.re) + Rat::from(&self.im * &self.im)
    }

    pub fn add(&self, rhs: &GaussRat) -> Self {
        GaussRat::new(
            Rat::from(&self.re + &rhs.re),
            Rat::from(&self.im + &rhs.im),
        )
    }

    pub fn sub(&self, rhs: &GaussRat) -> Self {
        GaussRat::new(
            Rat::from(&self.re - &rhs.re),
            Rat::from(&self.im - &rhs.im),
        )
    }

    pub fn neg(&self) -> Self {
        GaussRat::new(-self.re.clone(), -self.im.clone())
    }

    pub fn mul(&self, rhs: &GaussRat) -> Self {
        let re = Rat::from(&self.re * &rhs.re) - Rat::from(&self.im * &rhs.im);
        let im = Rat::from(&self.re * &rhs.im) + Rat::from(&self.im * &rhs.re);
        GaussRat::new(re, im)
    }

    /// Exact division; panics on zero divisor (callers check first).
    pub fn div(&self, rhs: &GaussRat) -> Self {
        assert!(!rhs.is_zero(), "division by zero Gaussian rational");
        let n = rhs.norm();
        let p = self.mul(&rhs.conj());
        GaussRat::new(p.re / n.clone(), p.im / n)
    }

    pub fn to_complex(&self, prec: u32) -> BigComplex {
        BigComplex::new(
            Float::with_val(prec, &self.re),
            Float::with_val(prec, &self.im),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(re: (i64, i64), im: (i64, i64)) -> GaussRat {
        GaussRat::new(Rat::from(re), Rat::from(im))
    }

    #[test]
    fn field_identities() {
        let a = g((2, 3), (-1, 2));
        let b = g((5, 1), (1, 7));
        let prod = a.mul(&b);
        let back = prod.div(&b);
        assert_eq!(back, a);
        assert_eq!(a.sub(&a), GaussRat::zero());
        assert_eq!(a.mul(&a.conj()).im, Rat::new());
    }

    #[test]
    fn exact_decimal_style_cancellation() {
        // 1/10 - 1/10 is exactly zero; the float analogue would not be.
        let tenth = g((1, 10), (0, 1));
        assert!(tenth.sub(&tenth).is_zero());
    }
}
