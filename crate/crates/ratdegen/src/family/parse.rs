//! Recursive-descent parser for the growth-expression grammar
//! `term (± term)*`, term = product of factors drawn from
//! COMPLEX, `exp(RAT*n)`, `n`, `n^RAT`.

use super::gauss::GaussRat;
use super::{GrowthExpr, GrowthMonomial};
use crate::Rat;
use rug::ops::Pow;
use rug::Integer;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("parse error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

pub fn parse_growth_expr(text: &str) -> Result<GrowthExpr, ParseError> {
    let mut p = Parser { s: text.as_bytes(), pos: 0 };
    p.parse_expr()
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl fmt::Debug for Parser<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Parser at {}", self.pos)
    }
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: &str) -> Result<T, ParseError> {
        Err(ParseError { pos: self.pos, msg: msg.to_string() })
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t')) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(&format!("expected '{}'", c as char))
        }
    }

    fn parse_expr(&mut self) -> Result<GrowthExpr, ParseError> {
        let mut terms: Vec<GrowthMonomial> = Vec::new();
        self.skip_ws();
        let mut sign = if self.eat(b'-') {
            -1
        } else {
            self.eat(b'+');
            1
        };
        loop {
            self.skip_ws();
            let mut term = self.parse_term()?;
            if sign < 0 {
                term.a = term.a.neg();
            }
            if !term.a.is_zero() {
                terms.push(term);
            }
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    sign = 1;
                }
                Some(b'-') => {
                    self.pos += 1;
                    sign = -1;
                }
                None => break,
                Some(c) => return self.err(&format!("unexpected '{}'", c as char)),
            }
        }
        Ok(GrowthExpr::new(terms))
    }

    fn parse_term(&mut self) -> Result<GrowthMonomial, ParseError> {
        let mut a = GaussRat::one();
        let mut alpha = Rat::new();
        let mut beta = Rat::new();
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'e') => {
                    let (al,) = (self.parse_exp_factor()?,);
                    alpha += al;
                }
                Some(b'n') => {
                    self.pos += 1;
                    if self.eat(b'^') {
                        beta += self.parse_rat()?;
                    } else {
                        beta += Rat::from(1);
                    }
                }
                Some(b'i') => {
                    self.pos += 1;
                    a = a.mul(&GaussRat::new(Rat::new(), Rat::from(1)));
                }
                Some(b'(') => {
                    let c = self.parse_paren_complex()?;
                    a = a.mul(&c);
                }
                Some(c) if c.is_ascii_digit() || c == b'.' || c == b'-' || c == b'+' => {
                    let r = self.parse_rat()?;
                    // A rational immediately followed by 'i' is imaginary.
                    if self.eat(b'i') {
                        a = a.mul(&GaussRat::new(Rat::new(), r));
                    } else {
                        a = a.mul(&GaussRat::from_rat(r));
                    }
                }
                _ => return self.err("expected a factor"),
            }
            self.skip_ws();
            if !self.eat(b'*') {
                break;
            }
        }
        Ok(GrowthMonomial::new(a, alpha, beta))
    }

    /// `exp(RAT*n)`, also tolerating `exp(n)`, `exp(-n)`, `exp(2n)`.
    fn parse_exp_factor(&mut self) -> Result<Rat, ParseError> {
        let kw = self.s.get(self.pos..self.pos + 3);
        if kw != Some(b"exp") {
            return self.err("expected 'exp'");
        }
        self.pos += 3;
        self.skip_ws();
        self.expect(b'(')?;
        self.skip_ws();
        let neg = self.eat(b'-');
        if !neg {
            self.eat(b'+');
        }
        self.skip_ws();
        let mut r = if matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == b'.') {
            let r = self.parse_unsigned_rat()?;
            self.skip_ws();
            self.eat(b'*');
            r
        } else {
            Rat::from(1)
        };
        if neg {
            r = -r;
        }
        self.skip_ws();
        if self.bump() != Some(b'n') {
            return self.err("expected 'n' inside exp(...)");
        }
        self.skip_ws();
        self.expect(b')')?;
        Ok(r)
    }

    /// `(RAT)`, `(RAT ± [RAT] i)`, `(RAT i)`.
    fn parse_paren_complex(&mut self) -> Result<GaussRat, ParseError> {
        self.expect(b'(')?;
        self.skip_ws();
        let first = self.parse_rat()?;
        self.skip_ws();
        if self.eat(b'i') {
            self.skip_ws();
            self.expect(b')')?;
            return Ok(GaussRat::new(Rat::new(), first));
        }
        let sign = match self.peek() {
            Some(b'+') => 1,
            Some(b'-') => -1,
            Some(b')') => {
                self.pos += 1;
                return Ok(GaussRat::from_rat(first));
            }
            _ => return self.err("expected '+', '-', 'i', or ')'"),
        };
        self.pos += 1;
        self.skip_ws();
        let mut im = if self.peek() == Some(b'i') {
            Rat::from(1)
        } else {
            self.parse_unsigned_rat()?
        };
        if sign < 0 {
            im = -im;
        }
        self.skip_ws();
        if self.bump() != Some(b'i') {
            return self.err("expected 'i'");
        }
        self.skip_ws();
        self.expect(b')')?;
        Ok(GaussRat::new(first, im))
    }

    fn parse_rat(&mut self) -> Result<Rat, ParseError> {
        self.skip_ws();
        let neg = self.eat(b'-');
        if !neg {
            self.eat(b'+');
        }
        let r = self.parse_unsigned_rat()?;
        Ok(if neg { -r } else { r })
    }

    /// DIGITS, DIGITS.DIGITS (exact decimal), or DIGITS/DIGITS.
    fn parse_unsigned_rat(&mut self) -> Result<Rat, ParseError> {
        let digits = |p: &mut Self| -> Result<Integer, ParseError> {
            let start = p.pos;
            while matches!(p.peek(), Some(c) if c.is_ascii_digit()) {
                p.pos += 1;
            }
            if p.pos == start {
                return p.err("expected digits");
            }
            let text = std::str::from_utf8(&p.s[start..p.pos]).unwrap();
            Ok(text.parse::<Integer>().unwrap())
        };
        let int_part = digits(self)?;
        match self.peek() {
            Some(b'.') => {
                self.pos += 1;
                let start = self.pos;
                let frac = digits(self)?;
                let places = (self.pos - start) as u32;
                let denom = Integer::from(10).pow(places);
                Ok(Rat::from((int_part * denom.clone() + frac, denom)))
            }
            Some(b'/') => {
                self.pos += 1;
                let denom = digits(self)?;
                if denom == 0 {
                    return self.err("zero denominator");
                }
                Ok(Rat::from((int_part, denom)))
            }
            _ => Ok(Rat::from(int_part)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(p: i64, q: i64) -> Rat {
        Rat::from((p, q))
    }

    #[test]
    fn single_monomial_forms() {
        let e = parse_growth_expr("1*exp(-1*n)").unwrap();
        assert_eq!(e.terms().len(), 1);
        let t = &e.terms()[0];
        assert_eq!(t.a, GaussRat::one());
        assert_eq!(t.alpha, rat(-1, 1));
        assert_eq!(t.beta, rat(0, 1));

        let e = parse_growth_expr("exp(1*n)*n^-2 + 3").unwrap();
        assert_eq!(e.terms().len(), 2);
        assert_eq!(e.terms()[0].alpha, rat(1, 1));
        assert_eq!(e.terms()[0].beta, rat(-2, 1));
        assert_eq!(e.terms()[1].a, GaussRat::from_int(3));
    }

    #[test]
    fn numbers_are_exact() {
        let e = parse_growth_expr("2.5*n^1/2").unwrap();
        assert_eq!(e.terms()[0].a.re, rat(5, 2));
        assert_eq!(e.terms()[0].beta, rat(1, 2));
        let e = parse_growth_expr("-3/4").unwrap();
        assert_eq!(e.terms()[0].a.re, rat(-3, 4));
    }

    #[test]
    fn complex_literals() {
        let e = parse_growth_expr("(1+2i)*n").unwrap();
        assert_eq!(e.terms()[0].a, GaussRat::new(rat(1, 1), rat(2, 1)));
        let e = parse_growth_expr("(1-i)").unwrap();
        assert_eq!(e.terms()[0].a, GaussRat::new(rat(1, 1), rat(-1, 1)));
        let e = parse_growth_expr("2i - i").unwrap();
        assert_eq!(e.terms()[0].a, GaussRat::new(rat(0, 1), rat(1, 1)));
        let e = parse_growth_expr("i*i").unwrap();
        assert_eq!(e.terms()[0].a, GaussRat::from_int(-1));
    }

    #[test]
    fn tolerated_exp_spellings() {
        for (text, alpha) in [
            ("exp(n)", rat(1, 1)),
            ("exp(-n)", rat(-1, 1)),
            ("exp(2n)", rat(2, 1)),
            ("exp(1/2*n)", rat(1, 2)),
        ] {
            let e = parse_growth_expr(text).unwrap();
            assert_eq!(e.terms()[0].alpha, alpha, "{text}");
        }
    }

    #[test]
    fn error_positions() {
        let err = parse_growth_expr("n + @").unwrap_err();
        assert_eq!(err.pos, 4);
        let err = parse_growth_expr("1/0").unwrap_err();
        assert!(err.msg.contains("denominator"));
        assert!(parse_growth_expr("exp(q)").is_err());
        assert!(parse_growth_expr("n +").is_err());
        assert!(parse_growth_expr("").is_err());
    }
}
