//! Prime field arithmetic.
//!
//! Coding coefficients and simulated packet payloads are elements of GF(q)
//! for a prime `q`. Elements are stored as `u32` residues and products are
//! computed in `u64`, so any prime below 2^32 is supported.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};

/// A prime field GF(q).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct FieldSpec {
    q: u32,
}

impl FieldSpec {
    /// Builds GF(q), rejecting non-prime moduli.
    pub fn new(q: u32) -> Result<Self> {
        if !is_prime(q as u64) {
            return Err(usage(format!("field modulus {q} is not prime")));
        }
        Ok(Self { q })
    }

    /// The smallest prime field with at least `m` elements.
    pub fn at_least(m: usize) -> Self {
        let q = smallest_prime_geq(m as u64);
        Self {
            q: u32::try_from(q).expect("field size exceeds u32"),
        }
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.q
    }

    /// Number of elements as a `usize`.
    #[inline]
    pub fn order(&self) -> usize {
        self.q as usize
    }

    pub fn elem(&self, value: u64) -> FieldElem {
        FieldElem {
            value: self.reduce(value),
            q: self.q,
        }
    }

    pub fn zero(&self) -> FieldElem {
        self.elem(0)
    }

    pub fn one(&self) -> FieldElem {
        self.elem(1)
    }

    #[inline]
    pub(crate) fn reduce(&self, v: u64) -> u32 {
        (v % self.q as u64) as u32
    }

    #[inline]
    pub(crate) fn add(&self, a: u32, b: u32) -> u32 {
        ((a as u64 + b as u64) % self.q as u64) as u32
    }

    #[inline]
    pub(crate) fn sub(&self, a: u32, b: u32) -> u32 {
        ((a as u64 + self.q as u64 - b as u64) % self.q as u64) as u32
    }

    #[inline]
    pub(crate) fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.q as u64) as u32
    }

    /// Inverse of a raw residue via Fermat's little theorem.
    pub(crate) fn inv(&self, a: u32) -> Result<u32> {
        if a.is_multiple_of(self.q) {
            return Err(Error::DivisionByZero { q: self.q });
        }
        Ok(self.pow(a, self.q as u64 - 2))
    }

    pub(crate) fn pow(&self, a: u32, mut e: u64) -> u32 {
        let m = self.q as u64;
        let mut base = a as u64 % m;
        let mut acc = 1 % m;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % m;
            }
            base = base * base % m;
            e >>= 1;
        }
        acc as u32
    }
}

impl TryFrom<u32> for FieldSpec {
    type Error = Error;

    fn try_from(q: u32) -> Result<Self> {
        Self::new(q)
    }
}

impl From<FieldSpec> for u32 {
    fn from(f: FieldSpec) -> u32 {
        f.q
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.q)
    }
}

/// Arithmetic operation selector for [`FieldElem::arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
}

/// An element of GF(q), carrying its modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElem {
    value: u32,
    q: u32,
}

impl FieldElem {
    #[inline]
    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn field(&self) -> FieldSpec {
        FieldSpec { q: self.q }
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn arith(self, other: FieldElem, op: Op) -> Result<FieldElem> {
        if self.q != other.q {
            return Err(usage(format!(
                "mixed fields GF({}) and GF({})",
                self.q, other.q
            )));
        }
        let f = self.field();
        let value = match op {
            Op::Add => f.add(self.value, other.value),
            Op::Sub => f.sub(self.value, other.value),
            Op::Mul => f.mul(self.value, other.value),
        };
        Ok(FieldElem { value, q: self.q })
    }

    pub fn checked_add(self, other: FieldElem) -> Result<FieldElem> {
        self.arith(other, Op::Add)
    }

    pub fn checked_sub(self, other: FieldElem) -> Result<FieldElem> {
        self.arith(other, Op::Sub)
    }

    pub fn checked_mul(self, other: FieldElem) -> Result<FieldElem> {
        self.arith(other, Op::Mul)
    }

    pub fn inverse(self) -> Result<FieldElem> {
        let value = self.field().inv(self.value)?;
        Ok(FieldElem { value, q: self.q })
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

fn is_prime(m: u64) -> bool {
    if m < 2 {
        return false;
    }
    if m < 4 {
        return true;
    }
    if m.is_multiple_of(2) {
        return false;
    }
    let mut d = 3;
    while d * d <= m {
        if m.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Least prime `q >= max(m, 2)`.
pub fn smallest_prime_geq(m: u64) -> u64 {
    let mut q = m.max(2);
    while !is_prime(q) {
        q += 1;
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn smallest_primes() {
        assert_eq!(smallest_prime_geq(1), 2);
        assert_eq!(smallest_prime_geq(2), 2);
        assert_eq!(smallest_prime_geq(3), 3);
        assert_eq!(smallest_prime_geq(4), 5);
        assert_eq!(smallest_prime_geq(8), 11);
        assert_eq!(FieldSpec::at_least(6).q(), 7);
    }

    #[test]
    fn rejects_composite_modulus() {
        assert!(FieldSpec::new(4).is_err());
        assert!(FieldSpec::new(1).is_err());
        assert!(FieldSpec::new(0).is_err());
        assert!(FieldSpec::new(257).is_ok());
    }

    #[test]
    fn small_arithmetic() {
        let f5 = FieldSpec::new(5).unwrap();
        let f2 = FieldSpec::new(2).unwrap();
        assert_eq!(f5.elem(3).checked_add(f5.elem(4)).unwrap().value(), 2);
        assert_eq!(f2.elem(1).checked_add(f2.elem(1)).unwrap().value(), 0);
        assert_eq!(f5.elem(3).checked_mul(f5.elem(4)).unwrap().value(), 2);
        assert_eq!(f5.elem(1).checked_sub(f5.elem(3)).unwrap().value(), 3);
    }

    #[test]
    fn inverses() {
        let f5 = FieldSpec::new(5).unwrap();
        let f2 = FieldSpec::new(2).unwrap();
        assert_eq!(f5.elem(2).inverse().unwrap().value(), 3);
        assert_eq!(f2.elem(1).inverse().unwrap().value(), 1);
        assert_eq!(
            f5.zero().inverse(),
            Err(Error::DivisionByZero { q: 5 })
        );
    }

    #[test]
    fn mixed_fields_rejected() {
        let a = FieldSpec::new(5).unwrap().elem(1);
        let b = FieldSpec::new(7).unwrap().elem(1);
        assert!(matches!(a.checked_add(b), Err(Error::Usage(_))));
    }

    #[test]
    fn every_nonzero_element_has_inverse() {
        for q in 2..=257u32 {
            let Ok(f) = FieldSpec::new(q) else { continue };
            for a in 1..q {
                let x = f.elem(a as u64);
                let prod = x.checked_mul(x.inverse().unwrap()).unwrap();
                assert_eq!(prod.value(), 1, "q={q} a={a}");
            }
        }
    }

    #[test]
    fn large_prime_does_not_overflow() {
        let f = FieldSpec::new(4_294_967_291).unwrap();
        let a = f.elem(4_294_967_290);
        assert_eq!(a.checked_mul(a).unwrap().value(), 1);
    }

    proptest! {
        #[test]
        fn field_axioms(q in prop::sample::select(vec![2u32, 3, 5, 7, 11, 13, 257, 65521]),
                        a in any::<u32>(), b in any::<u32>(), c in any::<u32>()) {
            let f = FieldSpec::new(q).unwrap();
            let (a, b, c) = (f.elem(a as u64), f.elem(b as u64), f.elem(c as u64));
            prop_assert_eq!(a.checked_add(b)?, b.checked_add(a)?);
            prop_assert_eq!(a.checked_mul(b)?, b.checked_mul(a)?);
            prop_assert_eq!(a.checked_add(b)?.checked_add(c)?, a.checked_add(b.checked_add(c)?)?);
            prop_assert_eq!(a.checked_mul(b)?.checked_mul(c)?, a.checked_mul(b.checked_mul(c)?)?);
            prop_assert_eq!(
                a.checked_mul(b.checked_add(c)?)?,
                a.checked_mul(b)?.checked_add(a.checked_mul(c)?)?
            );
            prop_assert_eq!(a.checked_sub(b)?.checked_add(b)?, a);
        }
    }
}
