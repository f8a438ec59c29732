//! Truncated power series over monoid algebras, optionally with the relation
//! `p = f` of a mixed-characteristic presentation.
//!
//! A ring is `C[[M]] / (p - f)` truncated at total degree `D`, where `M` is
//! `Q ⊕ N^r` at a common level `L` (exponent coordinates carry the implicit
//! denominator `p^L`) and `C` is the Witt vectors of `F_p`. Without a relation
//! the coefficients are `F_p`. Monomial relations (`killed` exponents) are
//! allowed on top, which gives the non-domain rings used to exercise torsion.
//!
//! Elements of a mixed ring are kept with base-`p` digit coefficients: every
//! carry `p` is replaced by `f`. Carries move strictly upward in degree, so
//! the canonical form up to `D` is exact.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::monoid::{enumerate_by_coordinate_sum, AffineMonoid, MonoidDescriptor, MonoidError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("series belong to different rings")]
    RingMismatch,
    #[error("reduction of f mod p is not a monomial; declare a monomial order to reduce")]
    NonMonomialReduction,
    #[error("invalid ring: {0}")]
    InvalidRing(String),
    #[error("exponent {0:?} is not in the ring's monoid")]
    NotInMonoid(Vec<i64>),
    #[error(transparent)]
    Monoid(#[from] MonoidError),
}

/// Degree cutoff `a/b`, serialized as the string `"a/b"`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cutoff(pub BigRational);

impl Cutoff {
    pub fn new(num: i64, den: i64) -> Self {
        Cutoff(BigRational::new(num.into(), den.into()))
    }

    pub fn integer(n: i64) -> Self {
        Self::new(n, 1)
    }
}

impl fmt::Display for Cutoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl FromStr for Cutoff {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        let n: BigInt = n.parse().map_err(|_| format!("bad cutoff numerator in {s:?}"))?;
        let d: BigInt = d.parse().map_err(|_| format!("bad cutoff denominator in {s:?}"))?;
        if !d.is_positive() || n.is_negative() {
            return Err(format!("cutoff must be a nonnegative fraction, got {s:?}"));
        }
        Ok(Cutoff(BigRational::new(n, d)))
    }
}

impl Serialize for Cutoff {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Cutoff {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One term `coeff * e^(exponent / p^level)` of the relation `f`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationTerm {
    pub exponent: Vec<i64>,
    pub level: u32,
    pub coeff: i64,
}

/// Declarative description of a truncated series ring.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesRingDesc {
    pub monoid: MonoidDescriptor,
    pub free_rank: usize,
    pub free_level: u32,
    pub p: u64,
    pub precision: u32,
    pub cutoff: Cutoff,
    /// `f` in `p = f`; absent for equal characteristic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relation_f: Option<Vec<RelationTerm>>,
    /// Exponents (at the ring level) generating a monomial ideal that is set to zero.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub killed: Vec<Vec<i64>>,
}

impl SeriesRingDesc {
    pub fn is_mixed(&self) -> bool {
        self.relation_f.is_some()
    }
}

/// A built ring: the combined monoid, its truncated monomial set and the relation.
pub struct SeriesRing {
    desc: SeriesRingDesc,
    level: u32,
    combined: AffineMonoid,
    /// Relation `f` in ring-level coordinates.
    relation: Option<Vec<(Vec<i64>, BigInt)>>,
    killed: Vec<Vec<i64>>,
    /// Monoid elements of degree at most `D`, sorted by (degree, coordinates).
    monomials: Vec<Vec<i64>>,
    index: HashMap<Vec<i64>, usize>,
    /// `floor(D * p^L)`: bound on coordinate sums.
    sum_bound: i64,
}

impl fmt::Debug for SeriesRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SeriesRing")
            .field("level", &self.level)
            .field("p", &self.desc.p)
            .field("cutoff", &self.desc.cutoff.to_string())
            .field("mixed", &self.desc.is_mixed())
            .field("killed", &self.killed)
            .finish()
    }
}

fn pow_i64(p: u64, e: u32) -> Result<i64, SeriesError> {
    (p as i64).checked_pow(e).ok_or_else(|| SeriesError::InvalidRing("level too large".into()))
}

impl SeriesRing {
    pub fn build(desc: SeriesRingDesc) -> Result<Arc<SeriesRing>, SeriesError> {
        let q = AffineMonoid::try_from(desc.monoid.clone())?;
        if q.scale_base() != desc.p {
            return Err(SeriesError::InvalidRing(format!(
                "monoid scale base {} differs from p = {}",
                q.scale_base(),
                desc.p
            )));
        }
        if !crate::coeffring::is_prime(desc.p) {
            return Err(SeriesError::InvalidRing(format!("{} is not prime", desc.p)));
        }
        let d = q.ambient_rank();
        let r = desc.free_rank;
        let level = q.level().max(desc.free_level);
        let sq = pow_i64(desc.p, level - q.level())?;
        let sf = pow_i64(desc.p, level - desc.free_level)?;
        let mut gens: Vec<Vec<i64>> = q
            .generators()
            .iter()
            .map(|g| g.iter().map(|x| x * sq).chain(std::iter::repeat_n(0, r)).collect())
            .collect();
        for i in 0..r {
            gens.push((0..d + r).map(|j| if j == d + i { sf } else { 0 }).collect());
        }
        let combined = AffineMonoid::with_level(d + r, desc.p, level, gens)?;
        for g in combined.nonzero_generators() {
            if g.iter().sum::<i64>() <= 0 {
                return Err(SeriesError::InvalidRing(format!(
                    "generator {g:?} has nonpositive degree"
                )));
            }
        }
        let scale = BigRational::from_integer(BigInt::from(pow_i64(desc.p, level)?));
        let sum_bound = (&desc.cutoff.0 * scale)
            .floor()
            .to_integer()
            .to_i64()
            .ok_or_else(|| SeriesError::InvalidRing("cutoff too large".into()))?;
        let monomials = enumerate_by_coordinate_sum(&combined, sum_bound);
        let index: HashMap<Vec<i64>, usize> =
            monomials.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        let in_m = |v: &[i64]| -> bool {
            if v.iter().sum::<i64>() > sum_bound {
                combined.contains(v)
            } else {
                index.contains_key(v)
            }
        };
        let relation = match &desc.relation_f {
            None => None,
            Some(terms) => {
                let mut rel = Vec::new();
                for t in terms {
                    if t.exponent.len() != d + r {
                        return Err(SeriesError::InvalidRing(format!(
                            "relation exponent {:?} has length {}, expected {}",
                            t.exponent,
                            t.exponent.len(),
                            d + r
                        )));
                    }
                    if t.level > level {
                        return Err(SeriesError::InvalidRing("relation term above ring level".into()));
                    }
                    let s = pow_i64(desc.p, level - t.level)?;
                    let e: Vec<i64> = t.exponent.iter().map(|x| x * s).collect();
                    if e.iter().sum::<i64>() <= 0 {
                        return Err(SeriesError::InvalidRing(
                            "relation terms must have positive degree".into(),
                        ));
                    }
                    if !in_m(&e) {
                        return Err(SeriesError::NotInMonoid(e));
                    }
                    if t.coeff != 0 {
                        rel.push((e, BigInt::from(t.coeff)));
                    }
                }
                if rel.is_empty() {
                    return Err(SeriesError::InvalidRing("relation f is zero".into()));
                }
                Some(rel)
            }
        };
        for k in &desc.killed {
            if k.len() != d + r {
                return Err(SeriesError::InvalidRing(format!("killed exponent {k:?} has wrong length")));
            }
            if !in_m(k) {
                return Err(SeriesError::NotInMonoid(k.clone()));
            }
        }
        Ok(Arc::new(SeriesRing {
            killed: desc.killed.clone(),
            desc,
            level,
            combined,
            relation,
            monomials,
            index,
            sum_bound,
        }))
    }

    pub fn desc(&self) -> &SeriesRingDesc {
        &self.desc
    }

    pub fn p(&self) -> u64 {
        self.desc.p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn cutoff(&self) -> &Cutoff {
        &self.desc.cutoff
    }

    pub fn is_mixed(&self) -> bool {
        self.relation.is_some()
    }

    pub fn monoid(&self) -> &AffineMonoid {
        &self.combined
    }

    pub fn ambient_rank(&self) -> usize {
        self.combined.ambient_rank()
    }

    pub fn killed(&self) -> &[Vec<i64>] {
        &self.killed
    }

    /// Relation `f` in ring-level coordinates.
    pub fn relation(&self) -> Option<&[(Vec<i64>, BigInt)]> {
        self.relation.as_deref()
    }

    /// Bound on coordinate sums of exponents kept.
    pub fn sum_bound(&self) -> i64 {
        self.sum_bound
    }

    /// Rational degree of an exponent at this ring's level.
    pub fn degree(&self, e: &[i64]) -> BigRational {
        let s: i64 = e.iter().sum();
        BigRational::new(BigInt::from(s), BigInt::from(self.desc.p).pow(self.level))
    }

    pub fn within_cutoff(&self, e: &[i64]) -> bool {
        e.iter().sum::<i64>() <= self.sum_bound
    }

    /// Monoid membership for exponents within the cutoff.
    pub fn in_monoid(&self, e: &[i64]) -> bool {
        if self.within_cutoff(e) {
            self.index.contains_key(e)
        } else {
            self.combined.contains(e)
        }
    }

    /// `e - base` lies in the monoid.
    pub fn dominates(&self, e: &[i64], base: &[i64]) -> bool {
        let d: Vec<i64> = e.iter().zip(base).map(|(a, b)| a - b).collect();
        self.in_monoid(&d)
    }

    pub fn is_killed(&self, e: &[i64]) -> bool {
        self.killed.iter().any(|k| self.dominates(e, k))
    }

    /// Monomial `e^e` vanishes (beyond the cutoff or in the killed ideal).
    pub fn is_zero_monomial(&self, e: &[i64]) -> bool {
        !self.within_cutoff(e) || self.is_killed(e)
    }

    /// Monoid elements of degree at most `D`, sorted by (degree, coordinates).
    pub fn monomials(&self) -> &[Vec<i64>] {
        &self.monomials
    }

    /// Monomials that are nonzero in the ring: a basis over the digit set.
    pub fn basis(&self) -> Vec<Vec<i64>> {
        self.monomials.iter().filter(|m| !self.is_killed(m)).cloned().collect()
    }

    /// Smallest number of digits `N'` with every `p^N'` beyond the cutoff.
    pub fn effective_precision(&self) -> u32 {
        match &self.relation {
            None => 1,
            Some(rel) => {
                let min = rel.iter().map(|(e, _)| e.iter().sum::<i64>()).min().unwrap_or(1).max(1);
                let n = (self.sum_bound / min + 1) as u32;
                n.max(self.desc.precision)
            }
        }
    }

    /// Same monoid and cutoff, coefficients `F_p`, extra killed exponents.
    pub fn char_p_quotient(&self, extra_killed: &[Vec<i64>]) -> Result<Arc<SeriesRing>, SeriesError> {
        let mut desc = self.desc.clone();
        desc.relation_f = None;
        for k in extra_killed {
            if !desc.killed.contains(k) {
                desc.killed.push(k.clone());
            }
        }
        SeriesRing::build(desc)
    }

    /// `f mod p` as a monomial exponent, if it is one.
    pub fn reduced_relation_monomial(&self) -> Option<Vec<i64>> {
        let rel = self.relation.as_ref()?;
        let p = BigInt::from(self.desc.p);
        let nz: Vec<&(Vec<i64>, BigInt)> = rel.iter().filter(|(_, c)| !c.is_multiple_of(&p)).collect();
        (nz.len() == 1).then(|| nz[0].0.clone())
    }
}

/// Element of a `SeriesRing` in canonical form.
#[derive(Clone)]
pub struct Series {
    ring: Arc<SeriesRing>,
    terms: BTreeMap<Vec<i64>, BigInt>,
}

impl fmt::Debug for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Series{{")?;
        for (i, (e, c)) in self.sorted_terms().iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}*e^{e:?}")?;
        }
        write!(f, "}}")
    }
}

impl PartialEq for Series {
    fn eq(&self, other: &Self) -> bool {
        same_ring(&self.ring, &other.ring) && self.terms == other.terms
    }
}

impl Eq for Series {}

pub fn same_ring(a: &Arc<SeriesRing>, b: &Arc<SeriesRing>) -> bool {
    Arc::ptr_eq(a, b) || a.desc == b.desc
}

fn degree_key(e: &[i64]) -> (i64, Vec<i64>) {
    (e.iter().sum(), e.to_vec())
}

impl Series {
    pub fn zero(ring: &Arc<SeriesRing>) -> Series {
        Series { ring: ring.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(ring: &Arc<SeriesRing>, c: impl Into<BigInt>) -> Series {
        let zero = vec![0; ring.ambient_rank()];
        Self::from_terms(ring, [(zero, c.into())])
    }

    pub fn one(ring: &Arc<SeriesRing>) -> Series {
        Self::constant(ring, 1)
    }

    pub fn monomial(ring: &Arc<SeriesRing>, e: Vec<i64>, c: impl Into<BigInt>) -> Result<Series, SeriesError> {
        if !ring.in_monoid(&e) {
            return Err(SeriesError::NotInMonoid(e));
        }
        Ok(Self::from_terms(ring, [(e, c.into())]))
    }

    /// Builds and normalizes; exponents are assumed to be in the monoid.
    pub fn from_terms(ring: &Arc<SeriesRing>, terms: impl IntoIterator<Item = (Vec<i64>, BigInt)>) -> Series {
        let mut raw: HashMap<Vec<i64>, BigInt> = HashMap::new();
        for (e, c) in terms {
            *raw.entry(e).or_insert_with(BigInt::zero) += c;
        }
        Series { ring: ring.clone(), terms: normalize(ring, raw) }
    }

    pub fn ring(&self) -> &Arc<SeriesRing> {
        &self.ring
    }

    pub fn terms(&self) -> &BTreeMap<Vec<i64>, BigInt> {
        &self.terms
    }

    /// Terms sorted by (degree, exponent).
    pub fn sorted_terms(&self) -> Vec<(Vec<i64>, BigInt)> {
        let mut v: Vec<(Vec<i64>, BigInt)> = self.terms.iter().map(|(e, c)| (e.clone(), c.clone())).collect();
        v.sort_by_key(|a| degree_key(&a.0));
        v
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// A unit iff the constant coefficient is nonzero mod `p`.
    pub fn is_unit(&self) -> bool {
        let zero = vec![0; self.ring.ambient_rank()];
        self.terms.get(&zero).is_some_and(|c| !c.is_multiple_of(&BigInt::from(self.ring.p())))
    }

    /// Single term with coefficient one, if the series is such a monomial.
    pub fn as_monomial(&self) -> Option<(&Vec<i64>, &BigInt)> {
        (self.terms.len() == 1).then(|| self.terms.iter().next().expect("one term"))
    }

    pub fn neg(&self) -> Series {
        Self::from_terms(&self.ring, self.terms.iter().map(|(e, c)| (e.clone(), -c)))
    }

    pub fn scale(&self, k: impl Into<BigInt>) -> Series {
        let k = k.into();
        Self::from_terms(&self.ring, self.terms.iter().map(|(e, c)| (e.clone(), c * &k)))
    }

    pub fn pow(&self, n: u32) -> Series {
        let mut acc = Series::one(&self.ring);
        for _ in 0..n {
            acc = s_mul(&acc, self).expect("same ring");
        }
        acc
    }
}

fn normalize(ring: &SeriesRing, raw: HashMap<Vec<i64>, BigInt>) -> BTreeMap<Vec<i64>, BigInt> {
    let p = BigInt::from(ring.p());
    let mut out = BTreeMap::new();
    match &ring.relation {
        None => {
            for (e, c) in raw {
                let d = c.mod_floor(&p);
                if !d.is_zero() && !ring.is_zero_monomial(&e) {
                    out.insert(e, d);
                }
            }
        }
        Some(rel) => {
            let mut work: BTreeMap<(i64, Vec<i64>), BigInt> = BTreeMap::new();
            for (e, c) in raw {
                if !c.is_zero() {
                    *work.entry(degree_key(&e)).or_insert_with(BigInt::zero) += c;
                }
            }
            while let Some(((_, e), c)) = work.pop_first() {
                if ring.is_zero_monomial(&e) {
                    continue;
                }
                let (q, d) = c.div_mod_floor(&p);
                if !d.is_zero() {
                    out.insert(e.clone(), d);
                }
                if q.is_zero() {
                    continue;
                }
                for (fe, fc) in rel {
                    let ne: Vec<i64> = e.iter().zip(fe).map(|(a, b)| a + b).collect();
                    if !ring.within_cutoff(&ne) {
                        continue;
                    }
                    *work.entry(degree_key(&ne)).or_insert_with(BigInt::zero) += &q * fc;
                }
            }
        }
    }
    out
}

fn check(a: &Series, b: &Series) -> Result<(), SeriesError> {
    if same_ring(&a.ring, &b.ring) {
        Ok(())
    } else {
        Err(SeriesError::RingMismatch)
    }
}

pub fn s_add(a: &Series, b: &Series) -> Result<Series, SeriesError> {
    check(a, b)?;
    let it = a.terms.iter().chain(b.terms.iter()).map(|(e, c)| (e.clone(), c.clone()));
    Ok(Series::from_terms(&a.ring, it))
}

pub fn s_sub(a: &Series, b: &Series) -> Result<Series, SeriesError> {
    s_add(a, &b.neg())
}

pub fn s_mul(a: &Series, b: &Series) -> Result<Series, SeriesError> {
    check(a, b)?;
    let ring = &a.ring;
    let mut raw: HashMap<Vec<i64>, BigInt> = HashMap::new();
    for (ea, ca) in &a.terms {
        let sa: i64 = ea.iter().sum();
        for (eb, cb) in &b.terms {
            if sa + eb.iter().sum::<i64>() > ring.sum_bound {
                continue;
            }
            let e: Vec<i64> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            *raw.entry(e).or_insert_with(BigInt::zero) += ca * cb;
        }
    }
    Ok(Series { ring: ring.clone(), terms: normalize(ring, raw) })
}

/// Image in `R / pR = F_p[[M]] / (f mod p)` when `f mod p` is a monomial.
///
/// The target ring is the characteristic-`p` quotient with the exponent of
/// `f mod p` added to the killed ideal.
pub fn reduce_mod_i0(x: &Series) -> Result<Series, SeriesError> {
    let ring = &x.ring;
    let target = match ring.relation() {
        None => ring.char_p_quotient(&[])?,
        Some(_) => {
            let m = ring.reduced_relation_monomial().ok_or(SeriesError::NonMonomialReduction)?;
            ring.char_p_quotient(&[m])?
        }
    };
    Ok(Series::from_terms(&target, x.terms.iter().map(|(e, c)| (e.clone(), c.clone()))))
}

/// Experimental: reduction modulo a non-monomial `f mod p` by leading-term
/// division, leading term = lowest degree, ties broken by the largest exponent.
/// The remainder is a normal form for this order only; uniqueness is not claimed.
pub fn reduce_mod_i0_leading_term(x: &Series) -> Result<Series, SeriesError> {
    let ring = &x.ring;
    let Some(rel) = ring.relation() else {
        return reduce_mod_i0(x);
    };
    let p = BigInt::from(ring.p());
    let fbar: Vec<(Vec<i64>, BigInt)> = rel
        .iter()
        .map(|(e, c)| (e.clone(), c.mod_floor(&p)))
        .filter(|(_, c)| !c.is_zero())
        .collect();
    let target = ring.char_p_quotient(&[])?;
    let lead = fbar
        .iter()
        .min_by(|a, b| {
            let (sa, sb) = (a.0.iter().sum::<i64>(), b.0.iter().sum::<i64>());
            sa.cmp(&sb).then(b.0.cmp(&a.0))
        })
        .cloned()
        .ok_or(SeriesError::NonMonomialReduction)?;
    let lc_inv = crate::coeffring::PrimeFieldElem::new(ring.p(), lead.1.to_i64().expect("digit"))
        .inv()
        .expect("nonzero leading coefficient");
    let mut cur = Series::from_terms(&target, x.terms.iter().map(|(e, c)| (e.clone(), c.clone())));
    loop {
        let hit = cur
            .sorted_terms()
            .into_iter()
            .find(|(e, _)| target.dominates(e, &lead.0));
        let Some((e, c)) = hit else { return Ok(cur) };
        let shift: Vec<i64> = e.iter().zip(&lead.0).map(|(a, b)| a - b).collect();
        let k = c * BigInt::from(lc_inv.value);
        let sub = Series::from_terms(
            &target,
            fbar.iter().map(|(fe, fc)| (fe.iter().zip(&shift).map(|(a, b)| a + b).collect(), fc * &k)),
        );
        cur = s_sub(&cur, &sub)?;
    }
}

/// `e^g -> e^(p g)` on a characteristic-`p` ring (the absolute Frobenius).
pub fn frobenius_mod_i0(x: &Series) -> Result<Series, SeriesError> {
    if x.ring.is_mixed() {
        return Err(SeriesError::InvalidRing("Frobenius is applied to characteristic-p rings".into()));
    }
    let p = x.ring.p() as i64;
    Ok(Series::from_terms(
        &x.ring,
        x.terms
            .iter()
            .filter(|(e, _)| x.ring.within_cutoff(&e.iter().map(|v| v * p).collect::<Vec<_>>()))
            .map(|(e, c)| (e.iter().map(|v| v * p).collect(), c.clone())),
    ))
}

/// Annihilator and torsion of an element `g`, restricted to monomials and to
/// products that stay inside the cutoff.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsionReport {
    /// Monomials `m` with `m g = 0`.
    pub annihilator: Vec<Vec<i64>>,
    /// Monomials `m` with `m g^n = 0` for some `n >= 1`.
    pub torsion: Vec<Vec<i64>>,
    /// Largest minimal `n` over the torsion monomials.
    pub bounded_exponent: Option<u32>,
    pub cutoff: Cutoff,
}

impl TorsionReport {
    pub fn is_empty(&self) -> bool {
        self.torsion.is_empty()
    }
}

pub fn torsion_annihilator(ring: &Arc<SeriesRing>, g: &Series) -> Result<TorsionReport, SeriesError> {
    if !same_ring(ring, &g.ring) {
        return Err(SeriesError::RingMismatch);
    }
    let gmax = g.terms.keys().map(|e| e.iter().sum::<i64>()).max().unwrap_or(0);
    let mut annihilator = Vec::new();
    let mut torsion = Vec::new();
    let mut bound = None;
    for m in ring.basis() {
        let ms: i64 = m.iter().sum();
        if g.is_zero() {
            annihilator.push(m.clone());
            torsion.push(m);
            bound = Some(1);
            continue;
        }
        let mut cur = Series::monomial(ring, m.clone(), 1)?;
        let mut n = 1u32;
        while ms + i64::from(n) * gmax <= ring.sum_bound && gmax > 0 {
            cur = s_mul(&cur, g)?;
            if cur.is_zero() {
                if n == 1 {
                    annihilator.push(m.clone());
                }
                torsion.push(m.clone());
                bound = Some(bound.map_or(n, |b: u32| b.max(n)));
                break;
            }
            n += 1;
        }
    }
    Ok(TorsionReport { annihilator, torsion, bounded_exponent: bound, cutoff: ring.cutoff().clone() })
}

/// Rational `a/b` from a coordinate vector at a level (helper for reports).
pub fn rational_exponent(e: &[i64], p: u64, level: u32) -> Vec<String> {
    let den = BigInt::from(p).pow(level);
    e.iter()
        .map(|&x| {
            let r = BigRational::new(BigInt::from(x), den.clone());
            if r.is_integer() {
                r.to_integer().to_string()
            } else {
                format!("{}/{}", r.numer(), r.denom())
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monoid::quadric;
    use num_traits::One;

    fn free_desc(p: u64, r: usize, level: u32, cutoff: i64, f: Option<Vec<RelationTerm>>) -> SeriesRingDesc {
        SeriesRingDesc {
            monoid: AffineMonoid::new(0, p, vec![]).unwrap().descriptor(),
            free_rank: r,
            free_level: level,
            p,
            precision: 2,
            cutoff: Cutoff::integer(cutoff),
            relation_f: f,
            killed: vec![],
        }
    }

    fn x1(r: usize) -> Vec<RelationTerm> {
        let mut e = vec![0; r];
        e[0] = 1;
        vec![RelationTerm { exponent: e, level: 0, coeff: 1 }]
    }

    #[test]
    fn carry_becomes_f() {
        // in Z_2[[x]] / (2 - x): 1 + 1 = x
        let ring = SeriesRing::build(free_desc(2, 1, 0, 2, Some(x1(1)))).unwrap();
        let one = Series::one(&ring);
        let s = s_add(&one, &one).unwrap();
        assert_eq!(s, Series::monomial(&ring, vec![1], 1).unwrap());
    }

    #[test]
    fn minus_one_is_geometric() {
        // -1 = (p-1)(1 + x + x^2 + ...) when p = x
        let ring = SeriesRing::build(free_desc(3, 1, 0, 3, Some(x1(1)))).unwrap();
        let m = Series::constant(&ring, -1);
        let expect = Series::from_terms(&ring, (0..=3).map(|k| (vec![k], BigInt::from(2))));
        assert_eq!(m, expect);
        assert!(s_add(&m, &Series::one(&ring)).unwrap().is_zero());
    }

    #[test]
    fn ring_mismatch() {
        let a = SeriesRing::build(free_desc(2, 1, 0, 2, None)).unwrap();
        let b = SeriesRing::build(free_desc(2, 1, 0, 3, None)).unwrap();
        assert_eq!(
            s_add(&Series::one(&a), &Series::one(&b)),
            Err(SeriesError::RingMismatch)
        );
    }

    #[test]
    fn reduce_unramified() {
        let ring = SeriesRing::build(free_desc(2, 2, 0, 3, Some(x1(2)))).unwrap();
        let x = Series::from_terms(&ring, [(vec![1, 0], BigInt::one()), (vec![0, 1], BigInt::one())]);
        let r = reduce_mod_i0(&x).unwrap();
        assert_eq!(r.terms().len(), 1);
        assert!(r.terms().contains_key(&vec![0, 1]));
    }

    #[test]
    fn non_monomial_reduction_error() {
        let f = vec![
            RelationTerm { exponent: vec![1, 0], level: 0, coeff: 1 },
            RelationTerm { exponent: vec![0, 1], level: 0, coeff: 1 },
        ];
        let ring = SeriesRing::build(free_desc(2, 2, 0, 3, Some(f))).unwrap();
        assert_eq!(reduce_mod_i0(&Series::one(&ring)), Err(SeriesError::NonMonomialReduction));
        // leading-term reduction kills x + y
        let s = Series::from_terms(&ring, [(vec![1, 0], BigInt::one()), (vec![0, 1], BigInt::one())]);
        assert!(reduce_mod_i0_leading_term(&s).unwrap().is_zero());
    }

    #[test]
    fn frobenius_is_pth_power() {
        let desc = free_desc(3, 2, 1, 2, None);
        let ring = SeriesRing::build(desc).unwrap();
        let x = Series::from_terms(
            &ring,
            [(vec![1, 0], BigInt::from(2)), (vec![0, 2], BigInt::one()), (vec![0, 0], BigInt::one())],
        );
        assert_eq!(frobenius_mod_i0(&x).unwrap(), x.pow(3));
    }

    #[test]
    fn quadric_annihilator() {
        let q = quadric(2);
        let desc = SeriesRingDesc {
            monoid: q.descriptor(),
            free_rank: 0,
            free_level: 0,
            p: 2,
            precision: 2,
            cutoff: Cutoff::integer(4),
            relation_f: None,
            killed: vec![vec![0, 1, 1, 0]],
        };
        let ring = SeriesRing::build(desc).unwrap();
        let x = Series::monomial(&ring, vec![1, 1, 0, 0], 1).unwrap();
        let rep = torsion_annihilator(&ring, &x).unwrap();
        // x y = z w = 0: every surviving monomial with a positive third coordinate
        for m in ring.basis() {
            if m.iter().sum::<i64>() + 2 > 4 {
                continue;
            }
            assert_eq!(rep.annihilator.contains(&m), m[2] >= 1, "{m:?}");
        }
        assert!(rep.annihilator.contains(&vec![0, 0, 1, 1]));
    }

    #[test]
    fn units() {
        let ring = SeriesRing::build(free_desc(2, 1, 0, 3, Some(x1(1)))).unwrap();
        assert!(!Series::constant(&ring, 2).is_unit());
        assert!(Series::constant(&ring, 3).is_unit());
    }

    #[test]
    fn cutoff_parse() {
        assert_eq!("4".parse::<Cutoff>().unwrap(), Cutoff::integer(4));
        assert_eq!("6/2".parse::<Cutoff>().unwrap().to_string(), "3/1");
        assert!("x".parse::<Cutoff>().is_err());
    }
}
