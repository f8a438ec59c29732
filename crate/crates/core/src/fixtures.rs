//! Small hand-built towers: a perfect tower with `I_0 = 0`, a tower over a
//! non-domain whose `I_0`-torsion is nontrivial, and seven broken towers,
//! each violating exactly one axiom.

use crate::monoid::MonoidDescriptor;
use crate::series::{Cutoff, RelationTerm, SeriesRingDesc};
use crate::tower::{IdealTerm, TowerDesc};

/// Fixture depth and cutoff.
pub const DEPTH: usize = 2;
pub const CUTOFF: i64 = 4;
pub const PRECISION: u32 = 2;

fn monoid(ambient_rank: usize, p: u64, level: u32, generators: Vec<Vec<i64>>) -> MonoidDescriptor {
    MonoidDescriptor { ambient_rank, scale_base: p, level, generators }
}

/// `k[[x_1^{1/p^l}, ..., x_r^{1/p^l}]]` with `l = free_level`.
fn free_ring(p: u64, r: usize, free_level: u32, killed: Vec<Vec<i64>>) -> SeriesRingDesc {
    SeriesRingDesc {
        monoid: monoid(0, p, 0, vec![]),
        free_rank: r,
        free_level,
        p,
        precision: PRECISION,
        cutoff: Cutoff::integer(CUTOFF),
        relation_f: None,
        killed,
    }
}

fn scalar(n: usize, k: i64) -> Vec<Vec<i64>> {
    (0..n).map(|a| (0..n).map(|b| if a == b { k } else { 0 }).collect()).collect()
}

fn ideal(exponent: Vec<i64>, coeff: i64) -> Vec<IdealTerm> {
    vec![IdealTerm { exponent, coeff }]
}

fn tower(levels: Vec<SeriesRingDesc>, transitions: Vec<Vec<Vec<i64>>>, base_ideal: Vec<IdealTerm>) -> TowerDesc {
    TowerDesc { depth: levels.len() - 1, levels, transitions, base_ideal }
}

/// `F_p[[x^{1/p^i}]]` with `I_0 = 0`.
pub fn perfect_zero_ideal(p: u64) -> TowerDesc {
    let levels = (0..=DEPTH as u32).map(|i| free_ring(p, 1, i, vec![])).collect();
    TowerDesc::standard(levels, vec![])
}

/// `F_p[[x^{1/p^i}]]` with `I_0 = (x)`.
pub fn perfect_principal(p: u64) -> TowerDesc {
    let levels = (0..=DEPTH as u32).map(|i| free_ring(p, 1, i, vec![])).collect();
    TowerDesc::standard(levels, ideal(vec![1], 1))
}

/// `F_p[[x^{1/p^i}, y^{1/p^i}]] / (x^{1/p^i} y^{1/p^i})` with `I_0 = (x)`:
/// its `I_0`-torsion is spanned by the powers of `y`.
pub fn nondomain_torsion(p: u64) -> TowerDesc {
    let levels = (0..=DEPTH as u32).map(|i| free_ring(p, 2, i, vec![vec![1, 1]])).collect();
    TowerDesc::standard(levels, ideal(vec![1, 0], 1))
}

/// Tower violating only the given axiom (`'a'..='g'`).
pub fn sabotaged(axiom: char) -> Option<TowerDesc> {
    let levels = 0..=DEPTH as u32;
    Some(match axiom {
        // p = x_1 does not lie in (x_2)
        'a' => {
            let p = 2;
            let rings = levels
                .map(|i| SeriesRingDesc {
                    relation_f: Some(vec![RelationTerm { exponent: vec![1, 0], level: 0, coeff: 1 }]),
                    ..free_ring(p, 2, i, vec![])
                })
                .collect();
            TowerDesc::standard(rings, ideal(vec![0, 1], 1))
        }
        // W[[t^2, t^3]]/(p - t^2) with I_0 = (p): t^3 is not in (t^2) but t^3 is in (t^2) one level up
        'b' => {
            let p = 2;
            let rings = levels
                .map(|i| SeriesRingDesc {
                    monoid: monoid(1, p, i, vec![vec![2], vec![3]]),
                    free_rank: 0,
                    free_level: 0,
                    p,
                    precision: PRECISION,
                    cutoff: Cutoff::integer(CUTOFF),
                    relation_f: Some(vec![RelationTerm { exponent: vec![2], level: 0, coeff: 1 }]),
                    killed: vec![],
                })
                .collect();
            TowerDesc::standard(rings, ideal(vec![0], p as i64))
        }
        // F_p[[x^{1/p^{2i}}]]: Frobenius cannot reach x^{1/p^{2i+1}}
        'c' => {
            let p = 2;
            let rings = levels.map(|i| free_ring(p, 1, 2 * i, vec![])).collect();
            tower(rings, vec![scalar(1, (p * p) as i64); DEPTH], ideal(vec![1], 1))
        }
        // constant tower F_2[[x]] with I_0 = (x^2): x has no square root
        'd' => {
            let rings = levels.map(|_| free_ring(2, 1, 0, vec![])).collect();
            tower(rings, vec![scalar(1, 1); DEPTH], ideal(vec![2], 1))
        }
        // I_0 = (1)
        'e' => {
            let rings = levels.map(|i| free_ring(2, 1, i, vec![])).collect();
            TowerDesc::standard(rings, ideal(vec![0], 1))
        }
        // constant tower F_3[[x]] with I_0 = (x): no cube root of x
        'f' => {
            let rings = levels.map(|_| free_ring(3, 1, 0, vec![])).collect();
            tower(rings, vec![scalar(1, 1); DEPTH], ideal(vec![1], 1))
        }
        // F_2[[x^{1/2^i}, y^{1/2^i}]]/(x^2 y) with I_0 = (x): x y is torsion but not zero
        'g' => {
            let p = 2u64;
            let rings = levels
                .map(|i| {
                    let s = (p as i64).pow(i);
                    free_ring(p, 2, i, vec![vec![2 * s, s]])
                })
                .collect();
            TowerDesc::standard(rings, ideal(vec![1, 0], 1))
        }
        _ => return None,
    })
}

pub const SABOTAGE_AXIOMS: [char; 7] = ['a', 'b', 'c', 'd', 'e', 'f', 'g'];
