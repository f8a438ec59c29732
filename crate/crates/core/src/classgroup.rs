//! Divisor class groups of normal toric rings `k[Q]`: the cokernel of
//! `Q^gp -> Z^facets`, and its `l`-primary and prime-to-`p` torsion.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::intlat::{cokernel, FinAbelianGroup, IntMatrix};
use crate::monoid::{AffineMonoid, MonoidError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassGroupError {
    #[error("monoid is not saturated")]
    NotSaturated,
    #[error("monoid is not sharp")]
    NotSharp,
    #[error(transparent)]
    Monoid(#[from] MonoidError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassGroupReport {
    pub group: FinAbelianGroup,
    pub display: String,
    pub facet_count: usize,
    pub torsion_order: String,
    /// `l`-primary part of the torsion for each prime `l` dividing its order.
    pub ell_primary: BTreeMap<u64, FinAbelianGroup>,
}

/// Facet normals as rows, in coordinates of the lattice `Q^gp`.
pub fn facet_pairing_matrix(q: &AffineMonoid) -> IntMatrix {
    let facets = q.facets();
    let r = q.dimension();
    let mut m = IntMatrix::zeros(facets.len(), r);
    for (i, n) in facets.iter().enumerate() {
        for (j, x) in n.iter().enumerate() {
            m.set(i, j, x.clone());
        }
    }
    m
}

pub fn class_group(q: &AffineMonoid) -> Result<ClassGroupReport, ClassGroupError> {
    if !q.is_sharp() {
        return Err(ClassGroupError::NotSharp);
    }
    if !q.is_saturated()? {
        return Err(ClassGroupError::NotSaturated);
    }
    let m = facet_pairing_matrix(q);
    let group = cokernel(&m);
    let ell = prime_factors(&group.torsion_order())
        .into_iter()
        .map(|l| (l, ell_primary(&group, l)))
        .collect();
    Ok(ClassGroupReport {
        display: group.to_string(),
        facet_count: m.nrows(),
        torsion_order: group.torsion_order().to_string(),
        ell_primary: ell,
        group,
    })
}

/// Primes dividing `n`, ascending.
pub fn prime_factors(n: &BigInt) -> Vec<u64> {
    let mut n = n.clone();
    let mut out = Vec::new();
    let mut d = 2u64;
    while n > BigInt::one() {
        let bd = BigInt::from(d);
        if &bd * &bd > n {
            out.push(n.to_u64().expect("prime factor fits in u64"));
            break;
        }
        if n.is_multiple_of(&bd) {
            out.push(d);
            while n.is_multiple_of(&bd) {
                n /= &bd;
            }
        }
        d += 1;
    }
    out
}

/// The `l`-primary component of the torsion of `g`.
pub fn ell_primary(g: &FinAbelianGroup, ell: u64) -> FinAbelianGroup {
    let l = BigInt::from(ell);
    let parts: Vec<BigInt> = g
        .invariant_factors
        .iter()
        .map(|d| {
            let mut d = d.clone();
            let mut part = BigInt::one();
            while !d.is_zero() && d.is_multiple_of(&l) {
                d /= &l;
                part *= &l;
            }
            part
        })
        .collect();
    FinAbelianGroup::from_cyclic_orders(0, &parts)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeToPReport {
    pub p: u64,
    pub prime_to_p_torsion: FinAbelianGroup,
    pub order: String,
    pub primes: Vec<u64>,
    pub finite: bool,
}

/// Torsion of `g` with its `p`-part removed.
pub fn prime_to_p_report(g: &FinAbelianGroup, p: u64) -> PrimeToPReport {
    let primes: Vec<u64> = prime_factors(&g.torsion_order()).into_iter().filter(|&l| l != p).collect();
    let parts: Vec<BigInt> = g
        .invariant_factors
        .iter()
        .map(|d| {
            let mut d = d.clone();
            let pb = BigInt::from(p);
            while d.is_multiple_of(&pb) {
                d /= &pb;
            }
            d
        })
        .collect();
    let tor = FinAbelianGroup::from_cyclic_orders(0, &parts);
    PrimeToPReport { p, order: tor.torsion_order().to_string(), finite: tor.is_finite(), prime_to_p_torsion: tor, primes }
}
