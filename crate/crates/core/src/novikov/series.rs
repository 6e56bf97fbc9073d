//! Truncated Novikov series `Σ a_k T^{e_k}` with real exponents.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::NovikovError;

/// Exponents closer than this are the same exponent.
pub const EXPONENT_TOL: f64 = 1e-7;

/// The coefficient field.
pub trait Coeff: Clone + fmt::Debug + PartialEq + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
    /// Equality up to `tol` (exact for exact fields).
    fn approx_eq(&self, other: &Self, tol: f64) -> bool;
    fn repr(&self) -> CoeffRepr;
}

/// Serializable form of a coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoeffRepr {
    /// `[re, im]`
    Complex([f64; 2]),
    /// `"p/q"` or `"p"`
    Rational(String),
}

impl Coeff for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn approx_eq(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }
    fn repr(&self) -> CoeffRepr {
        CoeffRepr::Rational(self.to_string())
    }
}

impl Coeff for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        self.norm() < 1e-12
    }
    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self - other).norm() <= tol * (1.0 + self.norm().max(other.norm()))
    }
    fn repr(&self) -> CoeffRepr {
        CoeffRepr::Complex([self.re, self.im])
    }
}

/// Parses `"p/q"` or `"p"` into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    match s.split_once('/') {
        Some((p, q)) => {
            let q: BigInt = q.trim().parse().ok()?;
            if Zero::is_zero(&q) {
                return None;
            }
            Some(BigRational::new(p.trim().parse().ok()?, q))
        }
        None => Some(BigRational::from_integer(s.trim().parse().ok()?)),
    }
}

/// Nearest double of an exact rational.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// A series truncated above: terms with exponent `>= cutoff` are dropped.
/// `cutoff` may be infinite.
#[derive(Debug, Clone)]
pub struct NovikovElement<K: Coeff> {
    terms: Vec<(f64, K)>,
    cutoff: f64,
}

impl<K: Coeff> PartialEq for NovikovElement<K> {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other, 0.0)
    }
}

impl<K: Coeff> NovikovElement<K> {
    pub fn new(terms: Vec<(f64, K)>, cutoff: f64) -> Self {
        let mut x = Self { terms, cutoff };
        x.normalize();
        x
    }

    pub fn zero(cutoff: f64) -> Self {
        Self {
            terms: Vec::new(),
            cutoff,
        }
    }

    pub fn one(cutoff: f64) -> Self {
        Self::monomial(0.0, K::one(), cutoff)
    }

    pub fn monomial(exponent: f64, coeff: K, cutoff: f64) -> Self {
        Self::new(vec![(exponent, coeff)], cutoff)
    }

    pub fn terms(&self) -> &[(f64, K)] {
        &self.terms
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0 == 0.0 && self.terms[0].1 == K::one()
    }

    /// Lowest exponent with a nonzero coefficient.
    pub fn valuation(&self) -> Option<f64> {
        self.terms.first().map(|t| t.0)
    }

    fn normalize(&mut self) {
        let cutoff = self.cutoff;
        let mut terms = std::mem::take(&mut self.terms);
        terms.retain(|(e, c)| e.is_finite() && !c.is_zero());
        terms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, K)> = Vec::with_capacity(terms.len());
        for (e, c) in terms {
            match out.last_mut() {
                Some((le, lc)) if (e - *le).abs() <= EXPONENT_TOL => *lc = lc.add(&c),
                _ => out.push((e, c)),
            }
        }
        out.retain(|(e, c)| !c.is_zero() && *e < cutoff - EXPONENT_TOL);
        for t in out.iter_mut() {
            if t.0.abs() <= EXPONENT_TOL {
                t.0 = 0.0;
            }
        }
        self.terms = out;
    }

    fn check(&self, other: &Self) -> Result<(), NovikovError> {
        let same = self.cutoff == other.cutoff || (self.cutoff - other.cutoff).abs() <= EXPONENT_TOL;
        if same {
            Ok(())
        } else {
            Err(NovikovError::TruncationMismatch {
                left: self.cutoff,
                right: other.cutoff,
            })
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, NovikovError> {
        self.check(other)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self::new(terms, self.cutoff))
    }

    pub fn neg(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(e, c)| (*e, c.neg())).collect(),
            cutoff: self.cutoff,
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, NovikovError> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self, NovikovError> {
        self.check(other)?;
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e = e1 + e2;
                if e < self.cutoff - EXPONENT_TOL {
                    terms.push((e, c1.mul(c2)));
                }
            }
        }
        Ok(Self::new(terms, self.cutoff))
    }

    pub fn scale(&self, k: &K) -> Self {
        Self::new(self.terms.iter().map(|(e, c)| (*e, c.mul(k))).collect(), self.cutoff)
    }

    /// Multiplies by `T^shift`.
    pub fn shift(&self, shift: f64) -> Self {
        Self::new(
            self.terms.iter().map(|(e, c)| (e + shift, c.clone())).collect(),
            self.cutoff,
        )
    }

    /// Lowers the cutoff to `c`.
    pub fn truncate(&self, c: f64) -> Result<Self, NovikovError> {
        if c > self.cutoff + EXPONENT_TOL {
            return Err(NovikovError::TruncationMismatch {
                left: self.cutoff,
                right: c,
            });
        }
        Ok(Self::new(self.terms.clone(), c))
    }

    /// Equality of truncated series, exponents compared up to
    /// [`EXPONENT_TOL`] and coefficients up to `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.terms.len() == other.terms.len()
            && self
                .terms
                .iter()
                .zip(&other.terms)
                .all(|((e1, c1), (e2, c2))| (e1 - e2).abs() <= EXPONENT_TOL && c1.approx_eq(c2, tol))
    }
}

impl<K: Coeff> fmt::Display for NovikovElement<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| match c.repr() {
                CoeffRepr::Rational(s) => format!("({s})T^{e}"),
                CoeffRepr::Complex([re, im]) => format!("({re}{im:+}i)T^{e}"),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type Q = BigRational;

    fn q(n: i64) -> Q {
        Q::from_i64(n)
    }

    fn el(terms: &[(f64, i64)], c: f64) -> NovikovElement<Q> {
        NovikovElement::new(terms.iter().map(|&(e, k)| (e, q(k))).collect(), c)
    }

    #[test]
    fn difference_of_squares() {
        let a = el(&[(0.0, 1), (1.0, 1)], 3.0);
        let b = el(&[(0.0, 1), (1.0, -1)], 3.0);
        assert_eq!(a.mul(&b).unwrap(), el(&[(0.0, 1), (2.0, -1)], 3.0));
    }

    #[test]
    fn square_truncates() {
        let a = el(&[(0.0, 1), (1.0, 1)], 1.5);
        assert_eq!(a.mul(&a).unwrap(), el(&[(0.0, 1), (1.0, 2)], 1.5));
    }

    #[test]
    fn product_above_cutoff_vanishes() {
        let a = el(&[(1.2, 1)], 2.0);
        let b = el(&[(0.9, 1)], 2.0);
        assert!(a.mul(&b).unwrap().is_zero());
    }

    #[test]
    fn mismatched_cutoffs() {
        let a = el(&[(0.0, 1)], 2.0);
        let b = el(&[(0.0, 1)], 3.0);
        assert!(matches!(a.add(&b), Err(NovikovError::TruncationMismatch { .. })));
    }

    #[test]
    fn negative_exponents_are_kept() {
        let a = el(&[(-1.5, 2), (0.5, 1)], 1.0);
        assert_eq!(a.valuation(), Some(-1.5));
        assert_eq!(a.terms().len(), 2);
    }

    #[test]
    fn nearby_exponents_merge() {
        let a = NovikovElement::new(vec![(1.0, q(1)), (1.0 + 1e-12, q(2))], 5.0);
        assert_eq!(a.terms().len(), 1);
        assert_eq!(a.terms()[0].1, q(3));
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("-3/4"), Some(Q::new(BigInt::from(-3), BigInt::from(4))));
        assert_eq!(parse_rational("5"), Some(q(5)));
        assert_eq!(parse_rational("1/0"), None);
    }
}
