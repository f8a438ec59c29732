//! Coefficient rings: `F_p`, `Z/p^N` with base-`p` carries, and length-two
//! Witt vectors over `F_p`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Pow, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoeffError {
    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u64, u64),
    #[error("precision mismatch: {0} vs {1}")]
    PrecisionMismatch(u32, u32),
    #[error("{0} is not prime")]
    NotPrime(u64),
}

pub fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

/// Element of `F_p`, value kept in `[0, p)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PrimeFieldElem {
    pub p: u64,
    pub value: u64,
}

impl PrimeFieldElem {
    pub fn new(p: u64, value: i64) -> Self {
        PrimeFieldElem { p, value: value.rem_euclid(p as i64) as u64 }
    }

    fn check(&self, o: &Self) -> Result<(), CoeffError> {
        if self.p != o.p {
            return Err(CoeffError::PrimeMismatch(self.p, o.p));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self, CoeffError> {
        self.check(o)?;
        Ok(PrimeFieldElem { p: self.p, value: (self.value + o.value) % self.p })
    }

    pub fn neg(&self) -> Self {
        PrimeFieldElem { p: self.p, value: (self.p - self.value) % self.p }
    }

    pub fn mul(&self, o: &Self) -> Result<Self, CoeffError> {
        self.check(o)?;
        Ok(PrimeFieldElem { p: self.p, value: (self.value * o.value) % self.p })
    }

    pub fn pow(&self, e: u64) -> Self {
        let v = BigInt::from(self.value).modpow(&BigInt::from(e), &BigInt::from(self.p));
        PrimeFieldElem { p: self.p, value: v.to_u64().expect("reduced") }
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn inv(&self) -> Option<Self> {
        (self.value != 0).then(|| self.pow(self.p - 2))
    }
}

/// Element of `Z/p^N`, value kept in `[0, p^N)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TruncatedWittCoeff {
    pub p: u64,
    pub precision: u32,
    #[serde(with = "bigint_str")]
    pub value: BigInt,
}

impl TruncatedWittCoeff {
    pub fn new(p: u64, precision: u32, value: impl Into<BigInt>) -> Self {
        let m = modulus(p, precision);
        TruncatedWittCoeff { p, precision, value: value.into().mod_floor(&m) }
    }

    fn check(&self, o: &Self) -> Result<(), CoeffError> {
        if self.p != o.p {
            return Err(CoeffError::PrimeMismatch(self.p, o.p));
        }
        if self.precision != o.precision {
            return Err(CoeffError::PrecisionMismatch(self.precision, o.precision));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self, CoeffError> {
        self.check(o)?;
        Ok(Self::new(self.p, self.precision, &self.value + &o.value))
    }

    pub fn mul(&self, o: &Self) -> Result<Self, CoeffError> {
        self.check(o)?;
        Ok(Self::new(self.p, self.precision, &self.value * &o.value))
    }

    pub fn neg(&self) -> Self {
        Self::new(self.p, self.precision, -self.value.clone())
    }

    pub fn is_unit(&self) -> bool {
        !self.value.is_multiple_of(&BigInt::from(self.p))
    }

    pub fn digits(&self) -> Vec<u64> {
        carry_normalize(&self.value, self.p, self.precision)
    }
}

pub fn modulus(p: u64, n: u32) -> BigInt {
    Pow::pow(BigInt::from(p), n)
}

/// First `n` base-`p` digits of `c mod p^n`, least significant first.
pub fn carry_normalize(c: &BigInt, p: u64, n: u32) -> Vec<u64> {
    let pb = BigInt::from(p);
    let mut x = c.mod_floor(&modulus(p, n));
    let mut out = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let (q, r) = x.div_mod_floor(&pb);
        out.push(r.to_u64().expect("digit"));
        x = q;
    }
    out
}

/// Witt vector `(a, b)` of length two over `F_p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Witt2Elem {
    pub p: u64,
    pub a: u64,
    pub b: u64,
}

impl fmt::Display for Witt2Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

impl Witt2Elem {
    pub fn new(p: u64, a: i64, b: i64) -> Self {
        let pi = p as i64;
        Witt2Elem { p, a: a.rem_euclid(pi) as u64, b: b.rem_euclid(pi) as u64 }
    }

    pub fn zero(p: u64) -> Self {
        Witt2Elem { p, a: 0, b: 0 }
    }

    pub fn one(p: u64) -> Self {
        Witt2Elem { p, a: 1, b: 0 }
    }

    /// Verschiebung `V(x) = (0, x)`.
    pub fn verschiebung(p: u64, x: u64) -> Self {
        Witt2Elem { p, a: 0, b: x % p }
    }

    /// All `p^2` elements.
    pub fn all(p: u64) -> Vec<Self> {
        (0..p).flat_map(|a| (0..p).map(move |b| Witt2Elem { p, a, b })).collect()
    }
}

fn reduce(x: &BigInt, p: u64) -> u64 {
    x.mod_floor(&BigInt::from(p)).to_u64().expect("reduced")
}

/// `(a, b) + (c, d) = (a + c, b + d + (a^p + c^p - (a + c)^p) / p)`.
///
/// The division by `p` is exact over the integers and happens before reduction.
pub fn w2_add(x: &Witt2Elem, y: &Witt2Elem) -> Result<Witt2Elem, CoeffError> {
    if x.p != y.p {
        return Err(CoeffError::PrimeMismatch(x.p, y.p));
    }
    let p = x.p;
    let e = p as u32;
    let a = BigInt::from(x.a);
    let c = BigInt::from(y.a);
    let s: BigInt = Pow::pow(&a, e) + Pow::pow(&c, e) - Pow::pow(&(&a + &c), e);
    let (carry, rem) = s.div_rem(&BigInt::from(p));
    debug_assert!(rem.is_zero());
    let b = BigInt::from(x.b) + BigInt::from(y.b) + carry;
    Ok(Witt2Elem { p, a: reduce(&(a + c), p), b: reduce(&b, p) })
}

/// `(a, b) * (c, d) = (a c, a^p d + c^p b)`.
pub fn w2_mul(x: &Witt2Elem, y: &Witt2Elem) -> Result<Witt2Elem, CoeffError> {
    if x.p != y.p {
        return Err(CoeffError::PrimeMismatch(x.p, y.p));
    }
    let p = x.p;
    let e = p as u32;
    let a = BigInt::from(x.a);
    let c = BigInt::from(y.a);
    let b = Pow::pow(&a, e) * BigInt::from(y.b) + Pow::pow(&c, e) * BigInt::from(x.b);
    Ok(Witt2Elem { p, a: reduce(&(a * c), p), b: reduce(&b, p) })
}

pub fn w2_neg(x: &Witt2Elem) -> Witt2Elem {
    // the unique y with x + y = 0; found by solving the two components
    let p = x.p;
    let a = (p - x.a) % p;
    (0..p)
        .map(|b| Witt2Elem { p, a, b })
        .find(|y| w2_add(x, y).map(|s| s == Witt2Elem::zero(p)).unwrap_or(false))
        .expect("additive inverse exists")
}

/// Ghost component `w_0 = a`.
pub fn w2_ghost0(x: &Witt2Elem) -> PrimeFieldElem {
    PrimeFieldElem { p: x.p, value: x.a }
}

/// `(a, b) -> a^p + p b (mod p^2)`, the ring isomorphism `W_2(F_p) -> Z/p^2`
/// sending `a` to its Teichmuller lift.
pub fn w2_to_zp2(x: &Witt2Elem) -> TruncatedWittCoeff {
    let p = BigInt::from(x.p);
    let v = Pow::pow(BigInt::from(x.a), x.p as u32) + &p * BigInt::from(x.b);
    TruncatedWittCoeff::new(x.p, 2, v)
}

pub(crate) mod bigint_str {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn witt_examples() {
        let one = Witt2Elem::one(2);
        assert_eq!(w2_add(&one, &one).unwrap(), Witt2Elem::new(2, 0, 1));
        let x = Witt2Elem::new(2, 1, 1);
        assert_eq!(w2_mul(&x, &x).unwrap(), Witt2Elem::new(2, 1, 0));
        // (1 + 8 - 27) / 3 = -6 = 0 mod 3
        assert_eq!(w2_add(&Witt2Elem::new(3, 1, 0), &Witt2Elem::new(3, 2, 0)).unwrap(), Witt2Elem::zero(3));
        assert_eq!(w2_ghost0(&Witt2Elem::new(5, 3, 4)).value, 3);
        assert_eq!(
            w2_add(&Witt2Elem::one(2), &Witt2Elem::one(3)),
            Err(CoeffError::PrimeMismatch(2, 3))
        );
    }

    #[test]
    fn carries() {
        assert_eq!(carry_normalize(&BigInt::from(5), 2, 3), vec![1, 0, 1]);
        assert_eq!(carry_normalize(&BigInt::from(8), 2, 3), vec![0, 0, 0]);
        assert_eq!(carry_normalize(&BigInt::from(-1), 3, 2), vec![2, 2]);
    }

    #[test]
    fn negation() {
        for p in [2, 3, 5] {
            for x in Witt2Elem::all(p) {
                assert_eq!(w2_add(&x, &w2_neg(&x)).unwrap(), Witt2Elem::zero(p));
            }
        }
    }
}
