//! Finitely generated affine monoids with symbolic `c`-divided levels.
//!
//! A monoid at level `l` with scale base `c` consists of the rational vectors
//! `g / c^l` where `g` runs over the integer span (with nonnegative
//! coefficients) of the stored generators. Coordinates are kept as integers
//! and the denominator `c^l` is only tracked symbolically.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cone::{extreme_rays, independent_rows, parallelepiped_points};
use crate::intlat::{
    abelian_quotient, abelian_quotient_map, to_big, FinAbelianGroup, IntMatrix, Lattice, LatticeError,
    QuotientMap,
};

/// Word-length bound used for membership in monoids that cannot be graded.
pub const DEFAULT_DEGREE_BOUND: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MonoidError {
    #[error("generator {index} has length {got}, expected {expected}")]
    BadGeneratorLength { index: usize, expected: usize, got: usize },
    #[error("scale base must be at least 2, got {0}")]
    BadScaleBase(u64),
    #[error("monoids live in different ambient spaces")]
    AmbientMismatch,
    #[error("first monoid is not a submonoid of the second (generator {index})")]
    NotSubmonoid { index: usize },
    #[error("monoid is not saturated")]
    NotSaturated,
    #[error("monoid is not sharp")]
    NotSharp,
    #[error("inclusion is not exact")]
    NotExact,
    #[error("coordinate overflow")]
    Overflow,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Element `coords / c^level`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonoidElem {
    pub coords: Vec<i64>,
    pub level: u32,
    pub scale_base: u64,
}

impl MonoidElem {
    pub fn new(coords: Vec<i64>, level: u32, scale_base: u64) -> Self {
        MonoidElem { coords, level, scale_base }
    }

    /// Same rational vector written at a higher level.
    pub fn at_level(&self, level: u32) -> Option<MonoidElem> {
        if level < self.level {
            return None;
        }
        let f = (self.scale_base as i64).checked_pow(level - self.level)?;
        let coords = self.coords.iter().map(|x| x.checked_mul(f)).collect::<Option<Vec<_>>>()?;
        Some(MonoidElem { coords, level, scale_base: self.scale_base })
    }
}

impl PartialEq for MonoidElem {
    fn eq(&self, other: &Self) -> bool {
        if self.scale_base != other.scale_base || self.coords.len() != other.coords.len() {
            return false;
        }
        let l = self.level.max(other.level);
        match (self.at_level(l), other.at_level(l)) {
            (Some(a), Some(b)) => a.coords == b.coords,
            _ => false,
        }
    }
}

impl Eq for MonoidElem {}

impl fmt::Display for MonoidElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}/{}^{}", self.coords, self.scale_base, self.level)
    }
}

#[derive(Clone, Debug)]
struct Geometry {
    lattice: Lattice,
    /// Generator coordinates in the lattice basis.
    gen_coords: Vec<Vec<BigInt>>,
    /// Primitive inward facet normals in lattice coordinates.
    facets: Vec<Vec<BigInt>>,
    sharp: bool,
}

/// JSON shape of a monoid.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct MonoidDescriptor {
    pub ambient_rank: usize,
    pub scale_base: u64,
    pub level: u32,
    pub generators: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "MonoidDescriptor", into = "MonoidDescriptor")]
pub struct AffineMonoid {
    ambient_rank: usize,
    scale_base: u64,
    level: u32,
    generators: Vec<Vec<i64>>,
    #[serde(skip)]
    geom: OnceLock<Geometry>,
    #[serde(skip)]
    saturated: OnceLock<bool>,
}

impl PartialEq for AffineMonoid {
    fn eq(&self, other: &Self) -> bool {
        self.ambient_rank == other.ambient_rank
            && self.scale_base == other.scale_base
            && self.level == other.level
            && self.generators == other.generators
    }
}

impl TryFrom<MonoidDescriptor> for AffineMonoid {
    type Error = MonoidError;
    fn try_from(d: MonoidDescriptor) -> Result<Self, MonoidError> {
        AffineMonoid::with_level(d.ambient_rank, d.scale_base, d.level, d.generators)
    }
}

impl From<AffineMonoid> for MonoidDescriptor {
    fn from(m: AffineMonoid) -> Self {
        m.descriptor()
    }
}

impl AffineMonoid {
    pub fn new(ambient_rank: usize, scale_base: u64, generators: Vec<Vec<i64>>) -> Result<Self, MonoidError> {
        Self::with_level(ambient_rank, scale_base, 0, generators)
    }

    pub fn with_level(
        ambient_rank: usize,
        scale_base: u64,
        level: u32,
        generators: Vec<Vec<i64>>,
    ) -> Result<Self, MonoidError> {
        if scale_base < 2 {
            return Err(MonoidError::BadScaleBase(scale_base));
        }
        for (index, g) in generators.iter().enumerate() {
            if g.len() != ambient_rank {
                return Err(MonoidError::BadGeneratorLength { index, expected: ambient_rank, got: g.len() });
            }
        }
        Ok(AffineMonoid {
            ambient_rank,
            scale_base,
            level,
            generators,
            geom: OnceLock::new(),
            saturated: OnceLock::new(),
        })
    }

    /// `N^d` at level 0.
    pub fn free(d: usize, scale_base: u64) -> Self {
        let gens = (0..d)
            .map(|i| (0..d).map(|j| i64::from(i == j)).collect())
            .collect();
        Self::new(d, scale_base, gens).expect("valid free monoid")
    }

    pub fn descriptor(&self) -> MonoidDescriptor {
        MonoidDescriptor {
            ambient_rank: self.ambient_rank,
            scale_base: self.scale_base,
            level: self.level,
            generators: self.generators.clone(),
        }
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    pub fn scale_base(&self) -> u64 {
        self.scale_base
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn generators(&self) -> &[Vec<i64>] {
        &self.generators
    }

    pub fn nonzero_generators(&self) -> Vec<Vec<i64>> {
        self.generators.iter().filter(|g| g.iter().any(|&x| x != 0)).cloned().collect()
    }

    pub fn elem(&self, coords: Vec<i64>) -> MonoidElem {
        MonoidElem::new(coords, self.level, self.scale_base)
    }

    /// Same generating set written at a higher level (the same rational monoid).
    pub fn at_level(&self, level: u32) -> Result<AffineMonoid, MonoidError> {
        if level < self.level {
            return Err(MonoidError::Overflow);
        }
        let f = (self.scale_base as i64).checked_pow(level - self.level).ok_or(MonoidError::Overflow)?;
        let gens = self
            .generators
            .iter()
            .map(|g| g.iter().map(|x| x.checked_mul(f)).collect::<Option<Vec<_>>>())
            .collect::<Option<Vec<_>>>()
            .ok_or(MonoidError::Overflow)?;
        Self::with_level(self.ambient_rank, self.scale_base, level, gens)
    }

    fn geometry(&self) -> &Geometry {
        self.geom.get_or_init(|| {
            let gens: Vec<Vec<BigInt>> = self.generators.iter().map(|g| to_big(g)).collect();
            let lattice = Lattice::from_vectors(self.ambient_rank, &gens);
            let gen_coords: Vec<Vec<BigInt>> =
                gens.iter().map(|g| lattice.coords(g).expect("generator in own lattice")).collect();
            let r = lattice.rank();
            let nonzero: Vec<Vec<BigInt>> =
                gen_coords.iter().filter(|g| g.iter().any(|x| !x.is_zero())).cloned().collect();
            let facets = extreme_rays(&nonzero, r).unwrap_or_default();
            let sharp = sharpness(&nonzero, r);
            Geometry { lattice, gen_coords, facets, sharp }
        })
    }

    /// The group `Q^gp` in level coordinates.
    pub fn lattice(&self) -> &Lattice {
        &self.geometry().lattice
    }

    /// Rank of `Q^gp`.
    pub fn dimension(&self) -> usize {
        self.lattice().rank()
    }

    /// Primitive inward facet normals in lattice coordinates.
    pub fn facets(&self) -> &[Vec<BigInt>] {
        &self.geometry().facets
    }

    pub fn is_sharp(&self) -> bool {
        self.geometry().sharp
    }

    /// Membership in `cone(Q) ∩ Q^gp`, i.e. in the saturation.
    pub fn in_saturation(&self, v: &[i64]) -> bool {
        self.in_saturation_big(&to_big(v))
    }

    fn in_saturation_big(&self, v: &[BigInt]) -> bool {
        let g = self.geometry();
        if g.lattice.rank() == 0 {
            return v.iter().all(Zero::is_zero);
        }
        if !g.sharp {
            // a non-pointed full cone: compute with the full lattice span
            return g.lattice.contains(v) && self.cone_contains_nonpointed(v);
        }
        match g.lattice.coords(v) {
            Some(c) => g.facets.iter().all(|n| !dot(n, &c).is_negative()),
            None => false,
        }
    }

    fn cone_contains_nonpointed(&self, v: &[BigInt]) -> bool {
        // bounded search only; non-sharp monoids are rare in this library
        self.contains_bounded(v, DEFAULT_DEGREE_BOUND)
    }

    /// Grading `v -> sum of facet pairings`, positive on nonzero elements of a sharp monoid.
    fn grade(&self, c: &[BigInt]) -> BigInt {
        self.facets().iter().map(|n| dot(n, c)).sum()
    }

    /// Exact membership `v in Q`.
    pub fn contains(&self, v: &[i64]) -> bool {
        self.contains_big(&to_big(v))
    }

    pub fn contains_big(&self, v: &[BigInt]) -> bool {
        if v.len() != self.ambient_rank {
            return false;
        }
        if v.iter().all(Zero::is_zero) {
            return true;
        }
        if !self.is_sharp() {
            return self.contains_bounded(v, DEFAULT_DEGREE_BOUND);
        }
        if !self.in_saturation_big(v) {
            return false;
        }
        if self.saturated.get() == Some(&true) {
            return true;
        }
        let g = self.geometry();
        let c = g.lattice.coords(v).expect("checked by saturation test");
        let gens: Vec<&Vec<BigInt>> = g.gen_coords.iter().filter(|x| x.iter().any(|y| !y.is_zero())).collect();
        let mut memo: HashMap<Vec<BigInt>, bool> = HashMap::new();
        self.generated(&c, &gens, &mut memo)
    }

    fn generated(&self, c: &[BigInt], gens: &[&Vec<BigInt>], memo: &mut HashMap<Vec<BigInt>, bool>) -> bool {
        if c.iter().all(Zero::is_zero) {
            return true;
        }
        if let Some(&b) = memo.get(c) {
            return b;
        }
        let facets = self.facets();
        let mut found = false;
        for g in gens {
            let rest: Vec<BigInt> = c.iter().zip(g.iter()).map(|(a, b)| a - b).collect();
            if facets.iter().any(|n| dot(n, &rest).is_negative()) {
                continue;
            }
            if self.grade(&rest) >= self.grade(c) {
                continue;
            }
            if self.generated(&rest, gens, memo) {
                found = true;
                break;
            }
        }
        memo.insert(c.to_vec(), found);
        found
    }

    /// Membership among sums of at most `bound` generators.
    pub fn contains_bounded(&self, v: &[BigInt], bound: usize) -> bool {
        self.enumerate_words(bound).contains(v)
    }

    /// All sums of at most `bound` generators.
    pub fn enumerate_words(&self, bound: usize) -> BTreeSet<Vec<BigInt>> {
        let gens: Vec<Vec<BigInt>> = self.nonzero_generators().iter().map(|g| to_big(g)).collect();
        let mut all: BTreeSet<Vec<BigInt>> = BTreeSet::new();
        let mut frontier = vec![vec![BigInt::zero(); self.ambient_rank]];
        all.insert(frontier[0].clone());
        for _ in 0..bound {
            let mut next = Vec::new();
            for f in &frontier {
                for g in &gens {
                    let s: Vec<BigInt> = f.iter().zip(g).map(|(a, b)| a + b).collect();
                    if all.insert(s.clone()) {
                        next.push(s);
                    }
                }
            }
            frontier = next;
        }
        all
    }

    /// Generators of the saturation `cone(Q) ∩ Q^gp` (its Hilbert basis).
    fn saturation_hilbert_basis(&self) -> Result<Vec<Vec<i64>>, MonoidError> {
        if !self.is_sharp() {
            return Err(MonoidError::NotSharp);
        }
        let g = self.geometry();
        let r = g.lattice.rank();
        let nonzero: Vec<Vec<BigInt>> =
            g.gen_coords.iter().filter(|x| x.iter().any(|y| !y.is_zero())).cloned().collect();
        let mut cands: BTreeSet<Vec<BigInt>> = nonzero.iter().cloned().collect();
        for subset in independent_subsets(&nonzero, r) {
            let cols: Vec<Vec<BigInt>> = subset.iter().map(|&i| nonzero[i].clone()).collect();
            for p in parallelepiped_points(&cols) {
                if p.iter().any(|x| !x.is_zero()) {
                    cands.insert(p);
                }
            }
        }
        let cands: Vec<Vec<BigInt>> = cands.into_iter().collect();
        let in_cone = |c: &[BigInt]| g.facets.iter().all(|n| !dot(n, c).is_negative());
        let mut basis = Vec::new();
        for x in &cands {
            let reducible = cands.iter().any(|s| {
                s != x && {
                    let d: Vec<BigInt> = x.iter().zip(s).map(|(a, b)| a - b).collect();
                    d.iter().any(|y| !y.is_zero()) && in_cone(&d)
                }
            });
            if !reducible {
                let amb = g.lattice.from_coords(x);
                basis.push(amb.iter().map(|y| y.to_i64().ok_or(MonoidError::Overflow)).collect::<Result<Vec<_>, _>>()?);
            }
        }
        basis.sort();
        Ok(basis)
    }

    pub fn is_saturated(&self) -> Result<bool, MonoidError> {
        if let Some(&s) = self.saturated.get() {
            return Ok(s);
        }
        let hb = self.saturation_hilbert_basis()?;
        let s = hb.iter().all(|h| self.contains(h));
        let _ = self.saturated.set(s);
        Ok(s)
    }

    /// The saturation `cone(Q) ∩ Q^gp`, generated by its Hilbert basis.
    pub fn saturate(&self) -> Result<AffineMonoid, MonoidError> {
        let hb = self.saturation_hilbert_basis()?;
        let m = AffineMonoid::with_level(self.ambient_rank, self.scale_base, self.level, hb)?;
        let _ = m.saturated.set(true);
        Ok(m)
    }
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A monoid given by nonzero generators (lattice coordinates) is sharp iff no
/// nontrivial nonnegative combination of them vanishes.
fn sharpness(gens: &[Vec<BigInt>], r: usize) -> bool {
    if gens.is_empty() {
        return true;
    }
    let m = IntMatrix::from_rows(gens); // n x r, rows are generators
    let h = crate::intlat::row_hnf(&m);
    let n = gens.len();
    let k = n - h.rank;
    let _ = r;
    if k == 0 {
        return true;
    }
    // kernel vectors lambda with lambda^T m = 0 are the last k rows of u
    let kernel: Vec<Vec<BigInt>> = (h.rank..n).map(|i| h.u.row(i).to_vec()).collect();
    // constraints: for each generator index i, sum_j mu_j kernel[j][i] >= 0
    let cons: Vec<Vec<BigInt>> = (0..n).map(|i| kernel.iter().map(|kr| kr[i].clone()).collect()).collect();
    match extreme_rays(&cons, k) {
        Some(rays) => rays.is_empty(),
        None => false,
    }
}

fn independent_subsets(vs: &[Vec<BigInt>], r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(vs: &[Vec<BigInt>], r: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            let rows: Vec<Vec<BigInt>> = cur.iter().map(|&i| vs[i].clone()).collect();
            if independent_rows(&rows, r).len() == r {
                out.push(cur.clone());
            }
            return;
        }
        for i in start..vs.len() {
            cur.push(i);
            rec(vs, r, i + 1, cur, out);
            cur.pop();
        }
    }
    if r == 0 {
        return vec![vec![]];
    }
    rec(vs, r, 0, &mut cur, &mut out);
    out
}

fn check_compatible(a: &AffineMonoid, b: &AffineMonoid) -> Result<(), MonoidError> {
    if a.ambient_rank != b.ambient_rank || a.scale_base != b.scale_base {
        return Err(MonoidError::AmbientMismatch);
    }
    Ok(())
}

fn common_level(a: &AffineMonoid, b: &AffineMonoid) -> Result<(AffineMonoid, AffineMonoid), MonoidError> {
    check_compatible(a, b)?;
    let l = a.level.max(b.level);
    Ok((a.at_level(l)?, b.at_level(l)?))
}

/// `Q^(i) = c^{-i} Q`: same generators, level raised by `i`.
pub fn p_divide(q: &AffineMonoid, i: u32) -> AffineMonoid {
    let m = AffineMonoid::with_level(q.ambient_rank, q.scale_base, q.level + i, q.generators.clone())
        .expect("same shape");
    if let Some(&s) = q.saturated.get() {
        let _ = m.saturated.set(s);
    }
    m
}

/// `Q^(i+1)^gp / Q^(i)^gp`, isomorphic to `(c^{-1} Q^gp) / Q^gp`.
pub fn layer_quotient(q: &AffineMonoid, i: u32) -> FinAbelianGroup {
    let upper = p_divide(q, i + 1);
    let lower = p_divide(q, i).at_level(q.level + i + 1).expect("rescaling by c");
    let g = IntMatrix::from_columns(q.ambient_rank, &upper.generators);
    let s = IntMatrix::from_columns(q.ambient_rank, &lower.generators);
    abelian_quotient(&g, &s).expect("c Q^gp lies in Q^gp")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactnessReport {
    pub exact: bool,
    /// True when decided by the cone-and-lattice criterion rather than by bounded search.
    pub certified: bool,
    pub witness: Option<MonoidElem>,
}

/// Checks `Q'^gp ∩ Q = Q'` for a submonoid `Q' ⊆ Q`.
pub fn is_exact_submonoid(
    qp: &AffineMonoid,
    q: &AffineMonoid,
    degree_bound: usize,
) -> Result<ExactnessReport, MonoidError> {
    let (qp, q) = common_level(qp, q)?;
    for (index, g) in qp.generators.iter().enumerate() {
        if !q.contains(g) {
            return Err(MonoidError::NotSubmonoid { index });
        }
    }
    let same_rank = qp.dimension() == q.dimension();
    if same_rank && qp.is_sharp() && qp.is_saturated().unwrap_or(false) {
        let gq = IntMatrix::from_columns(q.ambient_rank, &q.generators);
        let gqp = IntMatrix::from_columns(q.ambient_rank, &qp.generators);
        let idx = abelian_quotient(&gq, &gqp).map_err(MonoidError::Lattice)?;
        let n = idx.order().expect("equal ranks give a finite index");
        for g in &q.generators {
            let scaled: Vec<BigInt> = g.iter().map(|&x| BigInt::from(x) * &n).collect();
            if !qp.in_saturation_big(&scaled) {
                return Ok(ExactnessReport { exact: false, certified: true, witness: Some(q.elem(g.clone())) });
            }
        }
        return Ok(ExactnessReport { exact: true, certified: true, witness: None });
    }
    for v in q.enumerate_words(degree_bound) {
        if qp.lattice().contains(&v) && !qp.contains_big(&v) {
            let coords = v.iter().map(|x| x.to_i64().ok_or(MonoidError::Overflow)).collect::<Result<Vec<_>, _>>()?;
            return Ok(ExactnessReport { exact: false, certified: false, witness: Some(q.elem(coords)) });
        }
    }
    Ok(ExactnessReport { exact: true, certified: false, witness: None })
}

/// Embedding `q -> (<n_F, q>)_F` of a fine, sharp, saturated monoid into `N^F`.
#[derive(Clone, Debug)]
pub struct ExactEmbedding {
    pub lattice: Lattice,
    /// Rows are primitive facet normals in lattice coordinates.
    pub normals: IntMatrix,
}

impl ExactEmbedding {
    pub fn num_facets(&self) -> usize {
        self.normals.nrows()
    }

    pub fn apply(&self, v: &[i64]) -> Option<Vec<BigInt>> {
        let c = self.lattice.coords(&to_big(v))?;
        Some(self.normals.mul_vec(&c))
    }
}

pub fn exact_embed_nd(q: &AffineMonoid) -> Result<ExactEmbedding, MonoidError> {
    if !q.is_sharp() {
        return Err(MonoidError::NotSharp);
    }
    if !q.is_saturated()? {
        return Err(MonoidError::NotSaturated);
    }
    let g = q.geometry();
    let r = g.lattice.rank();
    let normals = if g.facets.is_empty() {
        IntMatrix::zeros(0, r)
    } else {
        IntMatrix::from_rows(&g.facets)
    };
    Ok(ExactEmbedding { lattice: g.lattice.clone(), normals })
}

/// `Z[Q] = sum over classes of Z[Q'] e^g` for an exact inclusion `Q' ⊆ Q`,
/// with the retraction onto the zero class.
#[derive(Clone, Debug)]
pub struct GradedDecomposition {
    pub sub: AffineMonoid,
    pub sup: AffineMonoid,
    map: QuotientMap,
}

impl GradedDecomposition {
    pub fn group(&self) -> &FinAbelianGroup {
        self.map.group()
    }

    /// Class of an element of `Q` (given at the common level).
    pub fn class_of(&self, v: &[i64]) -> Option<Vec<BigInt>> {
        self.map.class_of(&to_big(v))
    }

    /// Retraction `Z[Q] -> Z[Q']` on monomials: identity on the zero class, zero elsewhere.
    pub fn retract(&self, v: &[i64]) -> Option<Vec<i64>> {
        match self.map.is_zero_class(&to_big(v)) {
            Some(true) => Some(v.to_vec()),
            _ => None,
        }
    }
}

pub fn graded_decomposition(qp: &AffineMonoid, q: &AffineMonoid) -> Result<GradedDecomposition, MonoidError> {
    let rep = is_exact_submonoid(qp, q, DEFAULT_DEGREE_BOUND)?;
    if !rep.exact {
        return Err(MonoidError::NotExact);
    }
    let (qp, q) = common_level(qp, q)?;
    let g = IntMatrix::from_columns(q.ambient_rank, &q.generators);
    let s = IntMatrix::from_columns(q.ambient_rank, &qp.generators);
    let map = abelian_quotient_map(&g, &s)?;
    Ok(GradedDecomposition { sub: qp, sup: q, map })
}

/// Rank of `Q^gp`.
pub fn dimension(q: &AffineMonoid) -> usize {
    q.dimension()
}

/// Elements of a sharp monoid whose coordinate sum is at most `bound`.
///
/// Requires every nonzero generator to have positive coordinate sum.
pub fn enumerate_by_coordinate_sum(q: &AffineMonoid, bound: i64) -> Vec<Vec<i64>> {
    let gens = q.nonzero_generators();
    assert!(
        gens.iter().all(|g| g.iter().sum::<i64>() > 0),
        "coordinate-sum grading must be positive on generators"
    );
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let zero = vec![0i64; q.ambient_rank];
    seen.insert(zero.clone());
    let mut frontier = vec![zero];
    while let Some(v) = frontier.pop() {
        let s: i64 = v.iter().sum();
        for g in &gens {
            let gs: i64 = g.iter().sum();
            if s + gs > bound {
                continue;
            }
            let w: Vec<i64> = v.iter().zip(g).map(|(a, b)| a + b).collect();
            if seen.insert(w.clone()) {
                frontier.push(w);
            }
        }
    }
    let mut out: Vec<Vec<i64>> = seen.into_iter().collect();
    out.sort_by(|a, b| (a.iter().sum::<i64>(), a).cmp(&(b.iter().sum::<i64>(), b)));
    out
}

/// The quadric cone monoid generated by `(1,1,0,0), (0,0,1,1), (1,0,0,1), (0,1,1,0)`.
pub fn quadric(scale_base: u64) -> AffineMonoid {
    AffineMonoid::new(
        4,
        scale_base,
        vec![vec![1, 1, 0, 0], vec![0, 0, 1, 1], vec![1, 0, 0, 1], vec![0, 1, 1, 0]],
    )
    .expect("valid quadric")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mono(d: usize, gens: &[&[i64]]) -> AffineMonoid {
        AffineMonoid::new(d, 2, gens.iter().map(|g| g.to_vec()).collect()).unwrap()
    }

    #[test]
    fn sharpness_examples() {
        assert!(AffineMonoid::free(2, 2).is_sharp());
        assert!(!mono(2, &[&[1, 0], &[-1, 0]]).is_sharp());
        assert!(quadric(2).is_sharp());
    }

    #[test]
    fn saturation_examples() {
        let q = mono(1, &[&[2], &[3]]);
        assert!(!q.is_saturated().unwrap());
        assert_eq!(q.saturate().unwrap().generators(), &[vec![1]]);
        let a1 = mono(2, &[&[2, 0], &[1, 1], &[0, 2]]);
        assert!(a1.is_saturated().unwrap());
        assert!(mono(2, &[&[2, 0], &[0, 2]]).is_saturated().unwrap());
        assert!(quadric(2).is_saturated().unwrap());
    }

    #[test]
    fn membership_non_saturated() {
        let q = mono(1, &[&[2], &[3]]);
        assert!(!q.contains(&[1]));
        assert!(q.contains(&[5]));
        assert!(q.contains(&[7]));
        assert!(q.in_saturation(&[1]));
    }

    #[test]
    fn layer_quotients() {
        let g = layer_quotient(&AffineMonoid::free(3, 3), 0);
        assert_eq!(g.invariant_factors, to_big(&[3, 3, 3]));
        assert_eq!(layer_quotient(&quadric(2), 0).order(), Some(BigInt::from(8)));
        assert_eq!(layer_quotient(&quadric(3), 5).order(), Some(BigInt::from(27)));
    }

    #[test]
    fn exactness() {
        let n = AffineMonoid::free(1, 2);
        let two_n = mono(1, &[&[2]]);
        assert!(is_exact_submonoid(&two_n, &n, 8).unwrap().exact);
        let q23 = mono(1, &[&[2], &[3]]);
        let r = is_exact_submonoid(&q23, &n, 8).unwrap();
        assert!(!r.exact);
        assert_eq!(r.witness.unwrap().coords, vec![1]);
        let q = quadric(2);
        assert!(is_exact_submonoid(&q, &p_divide(&q, 1), 8).unwrap().exact);
        assert!(matches!(is_exact_submonoid(&n, &two_n, 8), Err(MonoidError::NotSubmonoid { .. })));
    }

    #[test]
    fn embeddings() {
        assert_eq!(exact_embed_nd(&AffineMonoid::free(2, 2)).unwrap().num_facets(), 2);
        assert_eq!(exact_embed_nd(&mono(2, &[&[2, 0], &[1, 1], &[0, 2]])).unwrap().num_facets(), 2);
        assert_eq!(exact_embed_nd(&quadric(2)).unwrap().num_facets(), 4);
        assert_eq!(exact_embed_nd(&mono(1, &[&[2], &[3]])).unwrap_err(), MonoidError::NotSaturated);
        assert_eq!(exact_embed_nd(&mono(2, &[&[1, 0], &[-1, 0]])).unwrap_err(), MonoidError::NotSharp);
    }

    #[test]
    fn decompositions() {
        let n = AffineMonoid::free(1, 2);
        assert!(graded_decomposition(&n, &n).unwrap().group().is_trivial());
        let d = graded_decomposition(&mono(1, &[&[2]]), &n).unwrap();
        assert_eq!(d.group().invariant_factors, to_big(&[2]));
        assert_eq!(d.retract(&[3]), None);
        assert_eq!(d.retract(&[4]), Some(vec![4]));
        let q = quadric(2);
        let d = graded_decomposition(&q, &p_divide(&q, 1)).unwrap();
        assert_eq!(d.group().order(), Some(BigInt::from(8)));
        assert!(matches!(
            graded_decomposition(&mono(1, &[&[2], &[3]]), &n),
            Err(MonoidError::NotExact)
        ));
    }

    #[test]
    fn dimensions() {
        assert_eq!(dimension(&AffineMonoid::free(4, 2)), 4);
        assert_eq!(dimension(&quadric(2)), 3);
        assert_eq!(dimension(&AffineMonoid::new(2, 2, vec![]).unwrap()), 0);
    }

    #[test]
    fn json_round_trip() {
        let q = quadric(3);
        let s = serde_json::to_string(&q).unwrap();
        let back: AffineMonoid = serde_json::from_str(&s).unwrap();
        assert_eq!(back, q);
        assert!(serde_json::from_str::<AffineMonoid>(
            r#"{"ambient_rank":2,"scale_base":2,"level":0,"generators":[[1]]}"#
        )
        .is_err());
    }
}
