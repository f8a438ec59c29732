//! Exact integer lattice algebra: Smith and Hermite normal forms, lattice
//! membership and finitely generated abelian quotients.
//!
//! All arithmetic is on `BigInt`. Generators of a lattice are the columns of
//! an `IntMatrix`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("sub-lattice generator {index} is not in the ambient lattice")]
    SubLatticeNotContained { index: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Dense row-major matrix of big integers.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.to_string()).collect())
            .collect();
        write!(f, "IntMatrix{:?}", rows)
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from rows. An empty slice gives a 0x0 matrix.
    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row.iter().cloned().map(Into::into));
        }
        IntMatrix { rows: r, cols: c, data }
    }

    /// Builds a `dim x n` matrix whose columns are the given vectors.
    pub fn from_columns<T: Into<BigInt> + Clone>(dim: usize, cols: &[Vec<T>]) -> Self {
        let mut m = Self::zeros(dim, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), dim, "column length mismatch");
            for (i, x) in c.iter().enumerate() {
                m.set(i, j, x.clone().into());
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] -= q * row[src]
    fn row_sub(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let t = self.get(src, j) * q;
            self.data[dst * self.cols + j] -= t;
        }
    }

    /// col[dst] -= q * col[src]
    fn col_sub(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let t = self.get(i, src) * q;
            self.data[i * self.cols + dst] -= t;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -self.get(i, j).clone();
            self.set(i, j, v);
        }
    }

    /// Determinant by fraction-free Bareiss elimination.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a.get(k, k).is_zero() {
                match (k + 1..n).find(|&i| !a.get(i, k).is_zero()) {
                    Some(i) => {
                        a.swap_rows(i, k);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (a.get(i, j) * a.get(k, k) - a.get(i, k) * a.get(k, j)) / &prev;
                    a.set(i, j, v);
                }
            }
            prev = a.get(k, k).clone();
        }
        sign * a.get(n - 1, n - 1).clone()
    }

    pub fn is_unimodular(&self) -> bool {
        self.rows == self.cols && self.det().abs().is_one()
    }

    /// Rank over the rationals.
    pub fn rank(&self) -> usize {
        row_hnf(self).rank
    }
}

/// Result of a Smith normal form computation: `u * m * v == d`.
#[derive(Clone, Debug)]
pub struct Snf {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl Snf {
    /// Nonzero diagonal entries in order; they form a divisibility chain.
    pub fn diagonal(&self) -> Vec<BigInt> {
        let k = self.d.nrows().min(self.d.ncols());
        (0..k)
            .map(|i| self.d.get(i, i).clone())
            .filter(|x| !x.is_zero())
            .collect()
    }
}

/// Smith normal form by smallest-pivot row and column operations.
pub fn snf(m: &IntMatrix) -> Snf {
    let (r, c) = (m.nrows(), m.ncols());
    let mut d = m.clone();
    let mut u = IntMatrix::identity(r);
    let mut v = IntMatrix::identity(c);
    for t in 0..r.min(c) {
        loop {
            // smallest nonzero entry of the trailing block
            let mut best: Option<(usize, usize)> = None;
            for i in t..r {
                for j in t..c {
                    let x = d.get(i, j);
                    if x.is_zero() {
                        continue;
                    }
                    if best.is_none_or(|(bi, bj)| x.abs() < d.get(bi, bj).abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return Snf { u, d, v };
            };
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            d.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let mut clean = true;
            for i in t + 1..r {
                let q = d.get(i, t) / d.get(t, t);
                d.row_sub(i, t, &q);
                u.row_sub(i, t, &q);
                if !d.get(i, t).is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..c {
                let q = d.get(t, j) / d.get(t, t);
                d.col_sub(j, t, &q);
                v.col_sub(j, t, &q);
                if !d.get(t, j).is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            let piv = d.get(t, t).clone();
            let bad = (t + 1..r)
                .flat_map(|i| (t + 1..c).map(move |j| (i, j)))
                .find(|&(i, j)| !d.get(i, j).is_multiple_of(&piv));
            match bad {
                Some((i, _)) => {
                    // fold the offending row into the pivot row and retry
                    let minus_one = -BigInt::one();
                    d.row_sub(t, i, &minus_one);
                    u.row_sub(t, i, &minus_one);
                }
                None => break,
            }
        }
        if d.get(t, t).is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
    }
    Snf { u, d, v }
}

/// Row-style Hermite normal form `u * a == h` with `u` unimodular.
#[derive(Clone, Debug)]
pub struct Hnf {
    pub h: IntMatrix,
    pub u: IntMatrix,
    pub rank: usize,
    /// Pivot column of each of the first `rank` rows.
    pub pivots: Vec<usize>,
}

pub fn row_hnf(a: &IntMatrix) -> Hnf {
    let (r, c) = (a.nrows(), a.ncols());
    let mut h = a.clone();
    let mut u = IntMatrix::identity(r);
    let mut pivots = Vec::new();
    let mut pr = 0;
    for j in 0..c {
        if pr == r {
            break;
        }
        loop {
            let best = (pr..r)
                .filter(|&i| !h.get(i, j).is_zero())
                .min_by(|&x, &y| h.get(x, j).abs().cmp(&h.get(y, j).abs()));
            let Some(bi) = best else { break };
            h.swap_rows(pr, bi);
            u.swap_rows(pr, bi);
            let mut done = true;
            for i in pr + 1..r {
                if h.get(i, j).is_zero() {
                    continue;
                }
                let q = h.get(i, j).div_floor(h.get(pr, j));
                h.row_sub(i, pr, &q);
                u.row_sub(i, pr, &q);
                if !h.get(i, j).is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if pr < r && !h.get(pr, j).is_zero() {
            if h.get(pr, j).is_negative() {
                h.negate_row(pr);
                u.negate_row(pr);
            }
            let piv = h.get(pr, j).clone();
            for i in 0..pr {
                let q = h.get(i, j).div_floor(&piv);
                h.row_sub(i, pr, &q);
                u.row_sub(i, pr, &q);
            }
            pivots.push(j);
            pr += 1;
        }
    }
    Hnf { h, u, rank: pr, pivots }
}

/// A lattice in `Z^dim` given by an echelon basis, with the transform back to
/// the original generators.
#[derive(Clone, Debug)]
pub struct Lattice {
    dim: usize,
    hnf: Hnf,
}

impl Lattice {
    /// Lattice spanned by the columns of `gens`.
    pub fn from_generators(gens: &IntMatrix) -> Self {
        Lattice { dim: gens.nrows(), hnf: row_hnf(&gens.transpose()) }
    }

    pub fn from_vectors(dim: usize, vecs: &[Vec<BigInt>]) -> Self {
        Self::from_generators(&IntMatrix::from_columns(dim, vecs))
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.hnf.rank
    }

    /// Echelon basis vectors.
    pub fn basis(&self) -> Vec<Vec<BigInt>> {
        (0..self.hnf.rank).map(|i| self.hnf.h.row(i).to_vec()).collect()
    }

    /// Coordinates of `v` in the echelon basis, or `None` if `v` is not in the lattice.
    pub fn coords(&self, v: &[BigInt]) -> Option<Vec<BigInt>> {
        if v.len() != self.dim {
            return None;
        }
        let mut rest = v.to_vec();
        let mut c = Vec::with_capacity(self.hnf.rank);
        for (k, &pc) in self.hnf.pivots.iter().enumerate() {
            let piv = self.hnf.h.get(k, pc);
            let (q, r) = rest[pc].div_rem(piv);
            if !r.is_zero() {
                return None;
            }
            if !q.is_zero() {
                for (j, x) in rest.iter_mut().enumerate() {
                    *x -= &q * self.hnf.h.get(k, j);
                }
            }
            c.push(q);
        }
        rest.iter().all(Zero::is_zero).then_some(c)
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        self.coords(v).is_some()
    }

    /// Coefficients on the original generators expressing `v`.
    pub fn generator_coeffs(&self, v: &[BigInt]) -> Option<Vec<BigInt>> {
        let c = self.coords(v)?;
        let n = self.hnf.u.ncols();
        let mut x = vec![BigInt::zero(); n];
        for (k, ck) in c.iter().enumerate() {
            for (j, xj) in x.iter_mut().enumerate() {
                *xj += ck * self.hnf.u.get(k, j);
            }
        }
        Some(x)
    }

    /// Vector with the given echelon-basis coordinates.
    pub fn from_coords(&self, c: &[BigInt]) -> Vec<BigInt> {
        let mut v = vec![BigInt::zero(); self.dim];
        for (k, ck) in c.iter().enumerate() {
            for (j, vj) in v.iter_mut().enumerate() {
                *vj += ck * self.hnf.h.get(k, j);
            }
        }
        v
    }
}

/// `Some(coeffs)` with `gens * coeffs == v` when `v` lies in the lattice
/// spanned by the columns of `gens`.
pub fn in_lattice(gens: &IntMatrix, v: &[BigInt]) -> Option<Vec<BigInt>> {
    Lattice::from_generators(gens).generator_coeffs(v)
}

/// Finitely generated abelian group `Z^free_rank + sum Z/d_i` with `d_1 | d_2 | ...`
/// and every `d_i >= 2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinAbelianGroup {
    pub free_rank: usize,
    #[serde(with = "bigint_vec_str")]
    pub invariant_factors: Vec<BigInt>,
}

impl FinAbelianGroup {
    pub fn trivial() -> Self {
        FinAbelianGroup { free_rank: 0, invariant_factors: vec![] }
    }

    /// Normalizes arbitrary cyclic orders (zeros count as free summands,
    /// units are dropped) into invariant factor form.
    pub fn from_cyclic_orders(free_rank: usize, orders: &[BigInt]) -> Self {
        let mut free = free_rank;
        let mut diag = Vec::new();
        for o in orders {
            if o.is_zero() {
                free += 1;
            } else if !o.abs().is_one() {
                diag.push(o.abs());
            }
        }
        let k = diag.len();
        let mut m = IntMatrix::zeros(k, k);
        for (i, x) in diag.into_iter().enumerate() {
            m.set(i, i, x);
        }
        let factors = snf(&m).diagonal().into_iter().filter(|x| !x.is_one()).collect();
        FinAbelianGroup { free_rank: free, invariant_factors: factors }
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank == 0
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.invariant_factors.is_empty()
    }

    /// Order of the torsion subgroup.
    pub fn torsion_order(&self) -> BigInt {
        self.invariant_factors.iter().product()
    }

    /// Group order, `None` when infinite.
    pub fn order(&self) -> Option<BigInt> {
        self.is_finite().then(|| self.torsion_order())
    }

    pub fn torsion(&self) -> FinAbelianGroup {
        FinAbelianGroup { free_rank: 0, invariant_factors: self.invariant_factors.clone() }
    }
}

impl fmt::Display for FinAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".into()),
            r => parts.push(format!("Z^{r}")),
        }
        for d in &self.invariant_factors {
            parts.push(format!("Z/{d}"));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Quotient map `L -> L/S` in Smith coordinates.
#[derive(Clone, Debug)]
pub struct QuotientMap {
    lattice: Lattice,
    /// Smith left transform applied to lattice coordinates.
    u: IntMatrix,
    /// Per Smith coordinate: 0 for a free summand, d for Z/d. Coordinates with d = 1 are dropped.
    moduli: Vec<BigInt>,
    group: FinAbelianGroup,
}

impl QuotientMap {
    pub fn group(&self) -> &FinAbelianGroup {
        &self.group
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    /// Class of `v` as a vector of residues (free coordinates first in the
    /// order they occur), or `None` when `v` is outside the ambient lattice.
    pub fn class_of(&self, v: &[BigInt]) -> Option<Vec<BigInt>> {
        let y = self.lattice.coords(v)?;
        let z = self.u.mul_vec(&y);
        Some(
            z.into_iter()
                .zip(&self.moduli)
                .filter(|(_, m)| !m.is_one())
                .map(|(x, m)| if m.is_zero() { x } else { x.mod_floor(m) })
                .collect(),
        )
    }

    pub fn is_zero_class(&self, v: &[BigInt]) -> Option<bool> {
        self.class_of(v).map(|c| c.iter().all(Zero::is_zero))
    }
}

/// Quotient of the lattice spanned by `gens` by the one spanned by `sub_gens`,
/// both given as column vectors in the same ambient space.
pub fn abelian_quotient_map(
    gens: &IntMatrix,
    sub_gens: &IntMatrix,
) -> Result<QuotientMap, LatticeError> {
    if gens.nrows() != sub_gens.nrows() {
        return Err(LatticeError::DimensionMismatch { expected: gens.nrows(), got: sub_gens.nrows() });
    }
    let lattice = Lattice::from_generators(gens);
    let r = lattice.rank();
    let mut s = IntMatrix::zeros(r, sub_gens.ncols());
    for j in 0..sub_gens.ncols() {
        let c = lattice
            .coords(&sub_gens.column(j))
            .ok_or(LatticeError::SubLatticeNotContained { index: j })?;
        for (i, x) in c.into_iter().enumerate() {
            s.set(i, j, x);
        }
    }
    let sn = snf(&s);
    let mut moduli = Vec::with_capacity(r);
    for i in 0..r {
        let d = if i < sn.d.ncols() { sn.d.get(i, i).clone() } else { BigInt::zero() };
        moduli.push(d);
    }
    let free = moduli.iter().filter(|m| m.is_zero()).count();
    let factors: Vec<BigInt> = moduli.iter().filter(|m| !m.is_zero() && !m.is_one()).cloned().collect();
    Ok(QuotientMap {
        lattice,
        u: sn.u,
        moduli,
        group: FinAbelianGroup { free_rank: free, invariant_factors: factors },
    })
}

pub fn abelian_quotient(gens: &IntMatrix, sub_gens: &IntMatrix) -> Result<FinAbelianGroup, LatticeError> {
    abelian_quotient_map(gens, sub_gens).map(|q| q.group)
}

/// Cokernel of `m: Z^cols -> Z^rows`.
pub fn cokernel(m: &IntMatrix) -> FinAbelianGroup {
    let diag = snf(m).diagonal();
    let free = m.nrows() - diag.len();
    FinAbelianGroup {
        free_rank: free,
        invariant_factors: diag.into_iter().filter(|x| !x.is_one()).collect(),
    }
}

/// Primitive integer vector on the ray through `v`.
pub fn primitive(v: &[BigInt]) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() || g.is_one() {
        return v.to_vec();
    }
    v.iter().map(|x| x / &g).collect()
}

pub fn to_big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

pub(crate) mod bigint_vec_str {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        let raw: Vec<serde_json::Value> = Vec::deserialize(d)?;
        raw.into_iter()
            .map(|x| {
                let s = match x {
                    serde_json::Value::String(s) => s,
                    serde_json::Value::Number(n) => n.to_string(),
                    other => return Err(serde::de::Error::custom(format!("not an integer: {other}"))),
                };
                s.parse::<BigInt>().map_err(serde::de::Error::custom)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<i64>]) -> IntMatrix {
        IntMatrix::from_rows(rows)
    }

    fn b(v: &[i64]) -> Vec<BigInt> {
        to_big(v)
    }

    #[test]
    fn snf_small() {
        // determinantal divisors: gcd of entries 2, |det| 12, so diag(2, 6)
        let a = m(&[vec![2, 4], vec![0, 6]]);
        let s = snf(&a);
        assert_eq!(s.diagonal(), b(&[2, 6]));
        assert_eq!(s.u.mul(&a).mul(&s.v), s.d);
        assert!(s.u.is_unimodular() && s.v.is_unimodular());
    }

    #[test]
    fn snf_empty() {
        let a = IntMatrix::zeros(0, 0);
        let s = snf(&a);
        assert!(s.diagonal().is_empty());
        assert_eq!(s.d.nrows(), 0);
    }

    #[test]
    fn quotient_z2_mod_2() {
        let g = IntMatrix::identity(2);
        let s = m(&[vec![2, 0], vec![0, 2]]);
        let q = abelian_quotient(&g, &s).unwrap();
        assert_eq!(q, FinAbelianGroup { free_rank: 0, invariant_factors: b(&[2, 2]) });
    }

    #[test]
    fn quotient_not_contained() {
        let g = IntMatrix::from_columns(2, &[vec![2i64, 0], vec![0, 2]]);
        let s = IntMatrix::from_columns(2, &[vec![1i64, 0]]);
        assert_eq!(abelian_quotient(&g, &s), Err(LatticeError::SubLatticeNotContained { index: 0 }));
    }

    #[test]
    fn membership() {
        let g = IntMatrix::from_columns(2, &[vec![1i64, 1], vec![1, 0]]);
        assert_eq!(in_lattice(&g, &b(&[0, 1])), Some(b(&[1, -1])));
        let g2 = IntMatrix::from_columns(2, &[vec![2i64, 0]]);
        assert_eq!(in_lattice(&g2, &b(&[1, 0])), None);
    }

    #[test]
    fn from_cyclic_orders_normalizes() {
        let g = FinAbelianGroup::from_cyclic_orders(0, &b(&[4, 6, 1, 0]));
        assert_eq!(g.free_rank, 1);
        assert_eq!(g.invariant_factors, b(&[2, 12]));
        assert_eq!(g.to_string(), "Z + Z/2 + Z/12");
    }

    #[test]
    fn det_and_rank() {
        let a = m(&[vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 10]]);
        assert_eq!(a.det(), BigInt::from(-3));
        assert_eq!(m(&[vec![1, 2], vec![2, 4]]).rank(), 1);
    }
}
