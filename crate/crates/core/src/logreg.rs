//! Log-regular presentations `C(k)[[Q ⊕ N^r]]/(p - f)` over `k = F_p`, the
//! towers of `p`-power roots they generate, the predicted tilt
//! `k[[Q^(i) ⊕ (N^r)^(i)]]`, and the differential criteria for regularity of
//! Kummer-type extensions.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::monoid::{layer_quotient, quadric, AffineMonoid, MonoidDescriptor, MonoidError};
use crate::series::{rational_exponent, Cutoff, RelationTerm, SeriesRing, SeriesRingDesc};
use crate::tower::{
    inverse_perfection_is_perfect, tilt_monomial, tilt_transition, IdealTerm, Tower, TowerDesc, TowerError,
    Witness,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LogRegError {
    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),
    #[error("unsupported base: {0}")]
    UnsupportedBase(String),
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error(transparent)]
    Monoid(#[from] MonoidError),
    #[error(transparent)]
    Tower(#[from] TowerError),
}

/// `C(F_p)[[Q ⊕ N^r]]/(p - f)`; exponents of `f` are in `Q ⊕ N^r` coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogRegPresentation {
    pub monoid: MonoidDescriptor,
    pub free_rank: usize,
    pub p: u64,
    pub f: Vec<RelationTerm>,
    /// Names for the monoid generators followed by the free variables.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<String>,
}

impl LogRegPresentation {
    pub fn validate(&self) -> Result<AffineMonoid, LogRegError> {
        let q = AffineMonoid::try_from(self.monoid.clone())?;
        if q.scale_base() != self.p {
            return Err(LogRegError::InvalidPresentation("monoid scale base differs from p".into()));
        }
        if q.level() != 0 {
            return Err(LogRegError::InvalidPresentation("monoid must be given at level 0".into()));
        }
        if !crate::coeffring::is_prime(self.p) {
            return Err(LogRegError::InvalidPresentation(format!("{} is not prime", self.p)));
        }
        if !q.is_sharp() {
            return Err(LogRegError::InvalidPresentation("monoid is not sharp".into()));
        }
        if !q.is_saturated()? {
            return Err(LogRegError::InvalidPresentation("monoid is not saturated".into()));
        }
        let n = q.ambient_rank() + self.free_rank;
        if self.f.iter().all(|t| t.coeff == 0) {
            return Err(LogRegError::InvalidPresentation("f is zero".into()));
        }
        for t in &self.f {
            if t.exponent.len() != n || t.level != 0 {
                return Err(LogRegError::InvalidPresentation(format!("bad term {:?} in f", t.exponent)));
            }
            if t.coeff != 0 && t.exponent.iter().all(|&x| x == 0) {
                return Err(LogRegError::InvalidPresentation("f has a constant term".into()));
            }
        }
        Ok(q)
    }

    fn ring_desc(&self, level: u32, cutoff: &Cutoff, precision: u32, mixed: bool) -> SeriesRingDesc {
        SeriesRingDesc {
            monoid: MonoidDescriptor { level, ..self.monoid.clone() },
            free_rank: self.free_rank,
            free_level: level,
            p: self.p,
            precision,
            cutoff: cutoff.clone(),
            relation_f: mixed.then(|| self.f.clone()),
            killed: vec![],
        }
    }
}

/// `Q = 0`, `r = d`, `f = x_1`: the unramified regular local ring `W(F_p)[[x_2, ..., x_d]]`.
pub fn unramified_rlr(p: u64, d: usize) -> LogRegPresentation {
    let mut e = vec![0; d];
    if d > 0 {
        e[0] = 1;
    }
    LogRegPresentation {
        monoid: MonoidDescriptor { ambient_rank: 0, scale_base: p, level: 0, generators: vec![] },
        free_rank: d,
        p,
        f: vec![RelationTerm { exponent: e, level: 0, coeff: 1 }],
        labels: (1..=d).map(|i| format!("x{i}")).collect(),
    }
}

/// The quadric cone `xy = zw` with `f = w`.
pub fn quadric_preset(p: u64) -> LogRegPresentation {
    LogRegPresentation {
        monoid: quadric(p).descriptor(),
        free_rank: 0,
        p,
        f: vec![RelationTerm { exponent: vec![0, 1, 1, 0], level: 0, coeff: 1 }],
        labels: ["x", "y", "z", "w"].iter().map(|s| s.to_string()).collect(),
    }
}

pub fn preset(name: &str, p: u64, d: usize) -> Result<LogRegPresentation, LogRegError> {
    match name {
        "unramified_rlr" => Ok(unramified_rlr(p, d)),
        "quadric" => Ok(quadric_preset(p)),
        _ => Err(LogRegError::UnknownPreset(name.into())),
    }
}

/// Levels `C(k)[[Q^(i) ⊕ (N^r)^(i)]]/(p - f)` with inclusions and `I_0 = (p)`.
pub fn build_tower(
    pres: &LogRegPresentation,
    depth: usize,
    cutoff: &Cutoff,
    precision: u32,
) -> Result<TowerDesc, LogRegError> {
    pres.validate()?;
    let levels = (0..=depth as u32).map(|i| pres.ring_desc(i, cutoff, precision, true)).collect();
    let n = pres.monoid.ambient_rank + pres.free_rank;
    Ok(TowerDesc::standard(levels, vec![IdealTerm { exponent: vec![0; n], coeff: pres.p as i64 }]))
}

/// Levels `k[[Q^(i) ⊕ (N^r)^(i)]]` with inclusions and `I_0 = (f mod p)`.
pub fn predict_tilt(pres: &LogRegPresentation, depth: usize, cutoff: &Cutoff) -> Result<TowerDesc, LogRegError> {
    pres.validate()?;
    let p = BigInt::from(pres.p);
    let reduced: Vec<&RelationTerm> =
        pres.f.iter().filter(|t| !BigInt::from(t.coeff).is_multiple_of(&p)).collect();
    let ideal = match reduced.as_slice() {
        [t] => vec![IdealTerm { exponent: t.exponent.clone(), coeff: 1 }],
        _ => {
            return Err(LogRegError::InvalidPresentation(
                "f mod p must be a monomial times a unit to predict the tilt".into(),
            ))
        }
    };
    let levels = (0..=depth as u32).map(|i| pres.ring_desc(i, cutoff, 1, false)).collect();
    Ok(TowerDesc::standard(levels, ideal))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TiltLevelReport {
    pub level: usize,
    /// Nonzero tilt monomials at this home level.
    pub computed_monomials: usize,
    pub predicted_monomials: usize,
    pub basis_match: bool,
    /// Computed `t^flat_j` agrees with the predicted inclusion on every monomial.
    pub transition_match: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perfect: Option<bool>,
    /// `[Frac k[[M_{j+1}]] : Frac k[[M_j]]]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generic_rank: Option<u64>,
    /// Minimal number of module generators of `k[[M_{j+1}]]` over `k[[M_j]]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub module_generators: Option<usize>,
    pub source_dimension: usize,
    pub tilt_dimension: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl TiltLevelReport {
    pub fn pass(&self) -> bool {
        self.basis_match
            && self.transition_match
            && self.perfect.unwrap_or(true)
            && self.source_dimension == self.tilt_dimension
            && match (self.generic_rank, self.module_generators) {
                (Some(g), Some(m)) => m as u64 >= g,
                _ => true,
            }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TiltReport {
    pub depth: usize,
    pub cutoff: Cutoff,
    pub precision: u32,
    /// Exponent of `f^flat_0` in the computed tilt and of `f mod p` in the prediction.
    pub pillar_computed: Vec<String>,
    pub pillar_predicted: Vec<String>,
    pub levels: Vec<TiltLevelReport>,
    pub matches: bool,
}

fn lattice_index_of_scaled(lower: &SeriesRing, upper: &SeriesRing, p: i64) -> Option<u64> {
    // lower generators are expressed at the upper level by multiplying by p
    let n = lower.ambient_rank();
    let up = crate::intlat::IntMatrix::from_columns(n, upper.monoid().generators());
    let lo: Vec<Vec<i64>> = lower.monoid().generators().iter().map(|g| g.iter().map(|x| x * p).collect()).collect();
    let lo = crate::intlat::IntMatrix::from_columns(n, &lo);
    crate::intlat::abelian_quotient(&up, &lo).ok()?.order()?.to_u64()
}

/// Compares the tilt of `build_tower(pres)` with `predict_tilt(pres)` on monomials.
pub fn verify_tilt(
    pres: &LogRegPresentation,
    depth: usize,
    cutoff: &Cutoff,
    precision: u32,
) -> Result<TiltReport, LogRegError> {
    let q = pres.validate()?;
    let tower = Tower::build(build_tower(pres, depth, cutoff, precision)?)?;
    let pred = Tower::build(predict_tilt(pres, depth, cutoff)?)?;
    let p = pres.p;
    let psi = tower.psi(0).cloned().unwrap_or_default();
    let pred_psi = pred.psi(0).cloned().unwrap_or_default();
    let levels: Vec<TiltLevelReport> = (0..=depth)
        .into_par_iter()
        .map(|j| -> Result<TiltLevelReport, LogRegError> {
            let s = pred.ring(j);
            let lvl = s.level();
            let mut witness = None;
            // the depth-(m-j) truncation kills (f^flat_j)^{p^(m-j)}-multiples, i.e. p^(m-j) psi_j
            let scale = (p as i64).pow((depth - j) as u32);
            let trunc: Vec<i64> = pred.psi(j).expect("monomial").iter().map(|x| x * scale).collect();
            let predicted: BTreeSet<Vec<i64>> =
                s.monomials().iter().filter(|e| !s.dominates(e, &trunc)).cloned().collect();
            let mut computed = BTreeSet::new();
            for e in tower.ring(j).monomials() {
                if !tilt_monomial(&tower, j, e)?.is_zero() {
                    computed.insert(e.clone());
                }
            }
            let basis_match = computed == predicted;
            if !basis_match {
                let e = computed.symmetric_difference(&predicted).next().expect("differ");
                witness = Some(Witness {
                    level: j,
                    exponent: rational_exponent(e, p, lvl),
                    note: "tilt monomial present on one side only".into(),
                });
            }
            let mut transition_match = true;
            if j < depth {
                for e in &computed {
                    let moved = tilt_transition(&tower, &tilt_monomial(&tower, j, e)?)?;
                    let up: Vec<i64> = pred.transition(j, e);
                    let direct = tilt_monomial(&tower, j + 1, &up)?;
                    let d = moved.depth().min(direct.depth());
                    if moved.truncate(d) != direct.truncate(d) {
                        transition_match = false;
                        witness.get_or_insert_with(|| Witness {
                            level: j,
                            exponent: rational_exponent(e, p, lvl),
                            note: "tilted transition differs from the inclusion".into(),
                        });
                        break;
                    }
                }
            }
            let perfect = if j + 2 <= depth { Some(inverse_perfection_is_perfect(&tower, j)?.pass()) } else { None };
            let (generic_rank, module_generators) = if j < depth {
                let g = lattice_index_of_scaled(pred.ring(j), pred.ring(j + 1), p as i64);
                (g, module_generator_count(pred.ring(j), pred.ring(j + 1), p as i64))
            } else {
                (None, None)
            };
            Ok(TiltLevelReport {
                level: j,
                computed_monomials: computed.len(),
                predicted_monomials: predicted.len(),
                basis_match,
                transition_match,
                perfect,
                generic_rank,
                module_generators,
                // W[[M]]/(p - f): one more variable, one relation
                source_dimension: tower.ring(j).monoid().dimension(),
                tilt_dimension: pred.ring(j).monoid().dimension(),
                witness,
            })
        })
        .collect::<Result<_, _>>()?;
    let layer = layer_quotient(&q, 0).order().and_then(|o| o.to_u64());
    let expected_rank = layer.map(|l| l * p.pow(pres.free_rank as u32));
    let ranks_ok = levels.iter().filter_map(|l| l.generic_rank).all(|g| Some(g) == expected_rank);
    let matches = levels.iter().all(TiltLevelReport::pass) && psi == pred_psi && ranks_ok;
    Ok(TiltReport {
        depth,
        cutoff: cutoff.clone(),
        precision,
        pillar_computed: rational_exponent(&psi, p, 0),
        pillar_predicted: rational_exponent(&pred_psi, p, 0),
        levels,
        matches,
    })
}

/// Monomials of `M_{j+1}` outside `M_j^+ + M_{j+1}`; `None` if the set reaches the cutoff.
fn module_generator_count(lower: &SeriesRing, upper: &SeriesRing, p: i64) -> Option<usize> {
    let gens: Vec<Vec<i64>> =
        lower.monoid().nonzero_generators().iter().map(|g| g.iter().map(|x| x * p).collect()).collect();
    let max_gen = gens.iter().map(|g| g.iter().sum::<i64>()).max().unwrap_or(0);
    let mut count = 0;
    for e in upper.monomials() {
        let divisible = gens.iter().any(|g| upper.dominates(e, g));
        if !divisible {
            if e.iter().sum::<i64>() + max_gen > upper.sum_bound() {
                return None;
            }
            count += 1;
        }
    }
    Some(count)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KatoReport {
    pub dim_r: usize,
    pub dim_r_mod_i_alpha: usize,
    pub dim_q: usize,
    pub consistent: bool,
}

/// `dim R = dim R/I_alpha + dim Q` from the presentation.
pub fn kato_dim_check(pres: &LogRegPresentation) -> Result<KatoReport, LogRegError> {
    let q = pres.validate()?;
    let dim_q = q.dimension();
    // C(k)[[Q ⊕ N^r]] has dimension rank Q + r + 1; p - f is a nonzerodivisor
    let dim_r = dim_q + pres.free_rank + 1 - 1;
    // R/I_alpha = C(k)[[N^r]]/(p - f') where f' drops the terms in Q^+; its constant term is p
    let dim_r_mod_i_alpha = pres.free_rank + 1 - 1;
    Ok(KatoReport { dim_r, dim_r_mod_i_alpha, dim_q, consistent: dim_r == dim_r_mod_i_alpha + dim_q })
}

/// `C(k)[[x_1..x_d]]` (mixed) or `k[[x_1..x_d]]`; `imperfect_residue` counts a
/// `p`-basis of `k`, which must be empty.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseRing {
    pub p: u64,
    pub d: usize,
    pub mixed: bool,
    #[serde(default)]
    pub imperfect_residue: usize,
}

impl BaseRing {
    pub fn zp(p: u64, d: usize) -> Self {
        BaseRing { p, d, mixed: true, imperfect_residue: 0 }
    }

    pub fn fp(p: u64, d: usize) -> Self {
        BaseRing { p, d, mixed: false, imperfect_residue: 0 }
    }

    fn check(&self) -> Result<(), LogRegError> {
        if self.imperfect_residue > 0 {
            return Err(LogRegError::UnsupportedBase("residue field is not perfect".into()));
        }
        if !crate::coeffring::is_prime(self.p) {
            return Err(LogRegError::UnsupportedBase(format!("{} is not prime", self.p)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OmegaModule {
    pub p: u64,
    pub d: usize,
    pub mixed: bool,
    pub dimension: usize,
    pub basis: Vec<String>,
}

pub fn omega_dim(a: &BaseRing) -> Result<OmegaModule, LogRegError> {
    a.check()?;
    let mut basis: Vec<String> = if a.mixed { vec!["p".into()] } else { vec![] };
    basis.extend((1..=a.d).map(|i| format!("x{i}")));
    Ok(OmegaModule { p: a.p, d: a.d, mixed: a.mixed, dimension: basis.len(), basis })
}

/// Polynomial over `Z` (mixed base) or `F_p`, as exponent vectors in `x_1..x_d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseElem {
    pub terms: Vec<(Vec<u32>, i64)>,
}

impl BaseElem {
    pub fn constant(c: i64) -> Self {
        BaseElem { terms: vec![(vec![], c)] }
    }

    /// `c * x_1^{a_1} ... x_d^{a_d}`.
    pub fn monomial(c: i64, exps: Vec<u32>) -> Self {
        BaseElem { terms: vec![(exps, c)] }
    }
}

fn exps_of(e: &[u32], d: usize) -> Result<Vec<u32>, LogRegError> {
    if e.len() > d {
        return Err(LogRegError::UnsupportedBase(format!("exponent {e:?} has more than {d} variables")));
    }
    let mut v = e.to_vec();
    v.resize(d, 0);
    Ok(v)
}

/// Class `d_A(f)` in `Omega_A`, coordinates in the basis of `omega_dim`.
pub fn d_class(a: &BaseRing, f: &BaseElem) -> Result<Vec<u64>, LogRegError> {
    a.check()?;
    let p = BigInt::from(a.p);
    let off = usize::from(a.mixed);
    let mut v = vec![BigInt::zero(); a.d + off];
    let mut constant = BigInt::zero();
    for (e, c) in &f.terms {
        let e = exps_of(e, a.d)?;
        let deg: u32 = e.iter().sum();
        match deg {
            0 => constant += BigInt::from(*c),
            1 => {
                let k = e.iter().position(|&x| x == 1).expect("degree one");
                v[k + off] += BigInt::from(*c);
            }
            _ => {}
        }
    }
    if a.mixed {
        // p-derivation of the constant: (c - c0^p)/p with c0 = c mod p
        let c0 = constant.mod_floor(&p);
        let lift = num_traits::Pow::pow(&c0, a.p as u32);
        v[0] = (&constant - lift).div_floor(&p);
    }
    Ok(v.iter().map(|x| x.mod_floor(&p).to_u64().expect("reduced")).collect())
}

/// Rank over `F_p` of integer rows.
pub fn rank_mod_p(rows: &[Vec<u64>], p: u64) -> usize {
    let mut m: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|x| x % p).collect()).collect();
    let ncols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(piv) = (rank..m.len()).find(|&r| m[r][col] != 0) else { continue };
        m.swap(rank, piv);
        let inv = crate::coeffring::PrimeFieldElem { p, value: m[rank][col] }.inv().expect("nonzero").value;
        for x in m[rank].iter_mut() {
            *x = *x * inv % p;
        }
        for r in 0..m.len() {
            if r != rank && m[r][col] != 0 {
                let k = m[r][col];
                for c in 0..ncols {
                    m[r][c] = (m[r][c] + p * p - k * m[rank][c] % p) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// The classes `d_A(f_i)` form a basis of `Omega_A`.
pub fn is_maximal_sequence(a: &BaseRing, elems: &[BaseElem]) -> Result<bool, LogRegError> {
    let dim = omega_dim(a)?.dimension;
    let rows = elems.iter().map(|f| d_class(a, f)).collect::<Result<Vec<_>, _>>()?;
    Ok(rows.len() == dim && rank_mod_p(&rows, a.p) == dim)
}

/// Regularity of `A[T_1..T_n]/(T_i^{e_i} - f_i)`: the classes `d_A(f_i)` are
/// linearly independent.
pub fn kummer_regularity(a: &BaseRing, fs: &[BaseElem], es: &[u32]) -> Result<bool, LogRegError> {
    if fs.len() != es.len() {
        return Err(LogRegError::InvalidPresentation("need one exponent per element".into()));
    }
    if es.iter().any(|&e| e < 2) {
        return Err(LogRegError::InvalidPresentation("Kummer exponents must exceed 1".into()));
    }
    for f in fs {
        // the criterion concerns elements of the maximal ideal
        let unit = f
            .terms
            .iter()
            .filter(|(e, _)| e.iter().all(|&x| x == 0))
            .map(|(_, c)| BigInt::from(*c))
            .sum::<BigInt>();
        if !unit.is_multiple_of(&BigInt::from(a.p)) {
            return Err(LogRegError::InvalidPresentation("elements must lie in the maximal ideal".into()));
        }
    }
    let rows = fs.iter().map(|f| d_class(a, f)).collect::<Result<Vec<_>, _>>()?;
    Ok(rank_mod_p(&rows, a.p) == fs.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d4() -> Cutoff {
        Cutoff::integer(4)
    }

    #[test]
    fn presets_build_perfectoid_towers() {
        for pres in [unramified_rlr(2, 2), quadric_preset(2)] {
            let t = Tower::build(build_tower(&pres, 2, &d4(), 2).unwrap()).unwrap();
            let r = t.verify_all();
            assert!(r.all_pass(), "{:#?}", r.results.iter().filter(|x| !x.pass).collect::<Vec<_>>());
        }
    }

    #[test]
    fn tilt_matches_prediction() {
        for pres in [unramified_rlr(2, 2), quadric_preset(2), unramified_rlr(3, 1)] {
            let r = verify_tilt(&pres, 2, &d4(), 2).unwrap();
            assert!(r.matches, "{r:#?}");
        }
    }

    #[test]
    fn kato_dims() {
        let q = kato_dim_check(&quadric_preset(2)).unwrap();
        assert_eq!((q.dim_r, q.dim_r_mod_i_alpha, q.dim_q), (3, 0, 3));
        let n = LogRegPresentation {
            monoid: AffineMonoid::free(1, 2).descriptor(),
            free_rank: 1,
            p: 2,
            f: vec![RelationTerm { exponent: vec![1, 0], level: 0, coeff: 1 }],
            labels: vec![],
        };
        let k = kato_dim_check(&n).unwrap();
        assert_eq!((k.dim_r, k.dim_r_mod_i_alpha, k.dim_q), (2, 1, 1));
    }

    #[test]
    fn omega_and_maximality() {
        assert_eq!(omega_dim(&BaseRing::zp(3, 0)).unwrap().dimension, 1);
        assert_eq!(omega_dim(&BaseRing::zp(3, 1)).unwrap().dimension, 2);
        assert_eq!(omega_dim(&BaseRing::fp(3, 1)).unwrap().dimension, 1);
        let bad = BaseRing { imperfect_residue: 1, ..BaseRing::fp(3, 1) };
        assert!(matches!(omega_dim(&bad), Err(LogRegError::UnsupportedBase(_))));
        let a = BaseRing::zp(3, 1);
        let p = BaseElem::constant(3);
        let x = BaseElem::monomial(1, vec![1]);
        assert!(is_maximal_sequence(&a, &[p.clone(), x.clone()]).unwrap());
        assert!(!is_maximal_sequence(&BaseRing::zp(3, 0), &[BaseElem::constant(9)]).unwrap());
        assert!(!is_maximal_sequence(&a, &[x]).unwrap());
    }
}
