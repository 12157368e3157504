//! Arbitrary-precision complex scalar as a pair of MPFR floats.
//!
//! Precision is carried per value and propagates as the minimum of the
//! operand precisions, so a computation can never silently claim more
//! accuracy than its inputs had.

use rug::float::Special;
use rug::ops::CompleteRound;
use rug::Float;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Debug)]
pub struct BigComplex {
    pub re: Float,
    pub im: Float,
}

impl BigComplex {
    pub fn new(re: Float, im: Float) -> Self {
        BigComplex { re, im }
    }

    pub fn zero(prec: u32) -> Self {
        BigComplex::new(Float::new(prec), Float::new(prec))
    }

    pub fn one(prec: u32) -> Self {
        BigComplex::new(Float::with_val(prec, 1), Float::new(prec))
    }

    pub fn i(prec: u32) -> Self {
        BigComplex::new(Float::new(prec), Float::with_val(prec, 1))
    }

    pub fn from_f64(prec: u32, re: f64, im: f64) -> Self {
        BigComplex::new(Float::with_val(prec, re), Float::with_val(prec, im))
    }

    pub fn from_real(re: Float) -> Self {
        let prec = re.prec();
        BigComplex::new(re, Float::new(prec))
    }

    /// Working precision: the minimum of the component precisions.
    pub fn prec(&self) -> u32 {
        self.re.prec().min(self.im.prec())
    }

    /// Exact zero test (both components are the floating-point zero).
    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn conj(&self) -> Self {
        BigComplex::new(self.re.clone(), (-&self.im).complete(self.im.prec()))
    }

    /// |z|^2 = re^2 + im^2.
    pub fn abs_sqr(&self) -> Float {
        let p = self.prec();
        let mut t = Float::with_val(p, &self.re * &self.re);
        t += Float::with_val(p, &self.im * &self.im);
        t
    }

    /// |z|, without intermediate overflow concerns (MPFR exponent range is
    /// astronomically larger than anything this crate produces).
    pub fn abs(&self) -> Float {
        self.abs_sqr().sqrt()
    }

    /// log |z|; -infinity for zero.
    pub fn ln_abs(&self) -> Float {
        if self.is_zero() {
            return Float::with_val(self.prec(), Special::NegInfinity);
        }
        let mut t = self.abs_sqr().ln();
        t /= 2;
        t
    }

    /// Principal argument as f64 (enough accuracy for matching heuristics).
    pub fn arg_f64(&self) -> f64 {
        let p = self.prec().min(64);
        Float::with_val(p, self.im.atan2_ref(&self.re)).to_f64()
    }

    pub fn scale(&self, t: &Float) -> Self {
        let p = self.prec().min(t.prec());
        BigComplex::new(
            Float::with_val(p, &self.re * t),
            Float::with_val(p, &self.im * t),
        )
    }

    pub fn inv(&self) -> Self {
        let p = self.prec();
        let d = self.abs_sqr();
        BigComplex::new(
            Float::with_val(p, &self.re / &d),
            -Float::with_val(p, &self.im / &d),
        )
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Self {
        let p = self.prec();
        if self.is_zero() {
            return BigComplex::zero(p);
        }
        let r = self.abs();
        if self.re >= 0 {
            // t = sqrt((r + re)/2), u = im / (2t)
            let t = Float::with_val(p, Float::with_val(p, &r + &self.re) / 2).sqrt();
            let u = Float::with_val(p, &self.im / &t) / 2;
            BigComplex::new(t, u)
        } else {
            let u = Float::with_val(p, Float::with_val(p, &r - &self.re) / 2).sqrt();
            let u = if self.im.is_sign_negative() { -u } else { u };
            let t = Float::with_val(p, &self.im / &u) / 2;
            BigComplex::new(t, u)
        }
    }

    pub fn to_f64s(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    /// |self - other|.
    pub fn dist(&self, other: &BigComplex) -> Float {
        (self - other).abs()
    }
}

impl PartialEq for BigComplex {
    fn eq(&self, other: &Self) -> bool {
        self.re == other.re && self.im == other.im
    }
}

impl Add for &BigComplex {
    type Output = BigComplex;
    fn add(self, rhs: &BigComplex) -> BigComplex {
        let p = self.prec().min(rhs.prec());
        BigComplex::new(
            Float::with_val(p, &self.re + &rhs.re),
            Float::with_val(p, &self.im + &rhs.im),
        )
    }
}

impl Sub for &BigComplex {
    type Output = BigComplex;
    fn sub(self, rhs: &BigComplex) -> BigComplex {
        let p = self.prec().min(rhs.prec());
        BigComplex::new(
            Float::with_val(p, &self.re - &rhs.re),
            Float::with_val(p, &self.im - &rhs.im),
        )
    }
}

impl Mul for &BigComplex {
    type Output = BigComplex;
    fn mul(self, rhs: &BigComplex) -> BigComplex {
        let p = self.prec().min(rhs.prec());
        let mut re = Float::with_val(p, &self.re * &rhs.re);
        re -= Float::with_val(p, &self.im * &rhs.im);
        let mut im = Float::with_val(p, &self.re * &rhs.im);
        im += Float::with_val(p, &self.im * &rhs.re);
        BigComplex::new(re, im)
    }
}

impl Div for &BigComplex {
    type Output = BigComplex;
    fn div(self, rhs: &BigComplex) -> BigComplex {
        let p = self.prec().min(rhs.prec());
        let d = rhs.abs_sqr();
        let mut re = Float::with_val(p, &self.re * &rhs.re);
        re += Float::with_val(p, &self.im * &rhs.im);
        re /= &d;
        let mut im = Float::with_val(p, &self.im * &rhs.re);
        im -= Float::with_val(p, &self.re * &rhs.im);
        im /= &d;
        BigComplex::new(re, im)
    }
}

impl Neg for &BigComplex {
    type Output = BigComplex;
    fn neg(self) -> BigComplex {
        let p = self.prec();
        BigComplex::new(
            (-&self.re).complete(p.max(self.re.prec())),
            (-&self.im).complete(p.max(self.im.prec())),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> BigComplex {
        BigComplex::from_f64(128, re, im)
    }

    #[test]
    fn field_ops() {
        let a = c(3.0, 4.0);
        let b = c(1.0, -2.0);
        let s = &a + &b;
        assert_eq!(s.to_f64s(), (4.0, 2.0));
        let p = &a * &b;
        assert_eq!(p.to_f64s(), (11.0, -2.0));
        let q = &p / &b;
        assert!((&q - &a).abs().to_f64() < 1e-30);
        assert!((a.abs().to_f64() - 5.0).abs() < 1e-14);
    }

    #[test]
    fn precision_is_min_of_operands() {
        let a = BigComplex::from_f64(200, 1.0, 0.0);
        let b = BigComplex::from_f64(100, 1.0, 0.0);
        assert_eq!((&a * &b).prec(), 100);
    }

    #[test]
    fn sqrt_squares_back() {
        for (re, im) in [(2.0, 0.0), (-4.0, 0.0), (3.0, -7.0), (0.0, 1.0)] {
            let z = c(re, im);
            let r = z.sqrt();
            let back = &r * &r;
            assert!((&back - &z).abs().to_f64() < 1e-30, "sqrt({re},{im})");
        }
    }

    #[test]
    fn huge_magnitudes_survive() {
        // e^4000 as a coefficient magnitude: far outside f64 but routine here.
        let big = Float::with_val(128, 4000).exp();
        let z = BigComplex::new(big.clone(), Float::new(128));
        let w = &z * &z;
        let expect = Float::with_val(128, 8000).exp();
        let rel = ((w.re.clone() - &expect) / expect).abs();
        assert!(rel.to_f64() < 1e-30);
    }
}
