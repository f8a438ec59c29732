use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;
use ptlab_core::monoid::{quadric, AffineMonoid};
use ptlab_core::series::{
    frobenius_mod_i0, reduce_mod_i0, s_add, s_mul, s_sub, torsion_annihilator, Cutoff, RelationTerm, Series,
    SeriesRing, SeriesRingDesc,
};

fn free_desc(p: u64, r: usize, level: u32, cutoff: i64, relation_f: Option<Vec<RelationTerm>>) -> SeriesRingDesc {
    SeriesRingDesc {
        monoid: AffineMonoid::new(0, p, vec![]).unwrap().descriptor(),
        free_rank: r,
        free_level: level,
        p,
        precision: 2,
        cutoff: Cutoff::integer(cutoff),
        relation_f,
        killed: vec![],
    }
}

fn quadric_desc(p: u64, level: u32, mixed: bool) -> SeriesRingDesc {
    let mut m = quadric(p).descriptor();
    m.level = level;
    SeriesRingDesc {
        monoid: m,
        free_rank: 0,
        free_level: 0,
        p,
        precision: 2,
        cutoff: Cutoff::integer(2),
        relation_f: mixed.then(|| vec![RelationTerm { exponent: vec![0, 1, 1, 0], level: 0, coeff: 1 }]),
        killed: vec![],
    }
}

fn x1(r: usize) -> Vec<RelationTerm> {
    let mut e = vec![0; r];
    e[0] = 1;
    vec![RelationTerm { exponent: e, level: 0, coeff: 1 }]
}

/// A series from (basis index, coefficient) picks.
fn build(ring: &Arc<SeriesRing>, picks: &[(usize, i64)]) -> Series {
    let basis = ring.monomials();
    Series::from_terms(ring, picks.iter().map(|&(i, c)| (basis[i % basis.len()].clone(), BigInt::from(c))))
}

fn picks() -> impl Strategy<Value = Vec<(usize, i64)>> {
    prop::collection::vec((0usize..1000, -6i64..=6), 0..6)
}

/// `Z_p[[x]]/(p - x)` is `Z_p` with `x = p`; truncation at degree `D` is reduction mod `p^(D+1)`.
fn eval_at_p(s: &Series, p: u64, d: u32) -> BigInt {
    let m = num_traits::pow(BigInt::from(p), d as usize + 1);
    let v: BigInt = s.terms().iter().map(|(e, c)| c * num_traits::pow(BigInt::from(p), e[0] as usize)).sum();
    v.mod_floor(&m)
}

fn eval_raw(picks: &[(usize, i64)], p: u64, d: u32) -> BigInt {
    let m = num_traits::pow(BigInt::from(p), d as usize + 1);
    let v: BigInt = picks
        .iter()
        .map(|&(i, c)| BigInt::from(c) * num_traits::pow(BigInt::from(p), i % (d as usize + 1)))
        .sum();
    v.mod_floor(&m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn mixed_series_match_padic_integers(p in prop::sample::select(vec![2u64, 3, 5]), d in 1u32..5, a in picks(), b in picks()) {
        let ring = SeriesRing::build(free_desc(p, 1, 0, d as i64, Some(x1(1)))).unwrap();
        let (sa, sb) = (build(&ring, &a), build(&ring, &b));
        let m = num_traits::pow(BigInt::from(p), d as usize + 1);
        prop_assert_eq!(eval_at_p(&sa, p, d), eval_raw(&a, p, d));
        prop_assert!(sa.terms().values().all(|c| c > &BigInt::zero() && c < &BigInt::from(p)));
        let sum = s_add(&sa, &sb).unwrap();
        prop_assert_eq!(eval_at_p(&sum, p, d), (eval_raw(&a, p, d) + eval_raw(&b, p, d)).mod_floor(&m));
        let prod = s_mul(&sa, &sb).unwrap();
        prop_assert_eq!(eval_at_p(&prod, p, d), (eval_raw(&a, p, d) * eval_raw(&b, p, d)).mod_floor(&m));
        // canonical form depends only on the value
        let v = eval_raw(&a, p, d);
        let other = Series::from_terms(&ring, [(vec![0], v)]);
        prop_assert_eq!(other, sa);
    }

    #[test]
    fn quadric_ring_axioms(p in prop::sample::select(vec![2u64, 3]), level in 0u32..2, mixed in any::<bool>(), a in picks(), b in picks(), c in picks()) {
        let ring = SeriesRing::build(quadric_desc(p, level, mixed)).unwrap();
        let (x, y, z) = (build(&ring, &a), build(&ring, &b), build(&ring, &c));
        let add = |u: &Series, v: &Series| s_add(u, v).unwrap();
        let mul = |u: &Series, v: &Series| s_mul(u, v).unwrap();
        prop_assert_eq!(add(&x, &y), add(&y, &x));
        prop_assert_eq!(mul(&x, &y), mul(&y, &x));
        prop_assert_eq!(add(&add(&x, &y), &z), add(&x, &add(&y, &z)));
        prop_assert_eq!(mul(&mul(&x, &y), &z), mul(&x, &mul(&y, &z)));
        prop_assert_eq!(mul(&x, &add(&y, &z)), add(&mul(&x, &y), &mul(&x, &z)));
        prop_assert_eq!(mul(&x, &Series::one(&ring)), x.clone());
        prop_assert!(s_sub(&x, &x).unwrap().is_zero());
        prop_assert!(add(&x, &x.neg()).is_zero());
    }

    #[test]
    fn frobenius_is_the_pth_power(p in prop::sample::select(vec![2u64, 3]), level in 0u32..3, a in picks()) {
        let ring = SeriesRing::build(quadric_desc(p, level, false)).unwrap();
        let x = build(&ring, &a);
        prop_assert_eq!(frobenius_mod_i0(&x).unwrap(), x.pow(p as u32));
    }

    #[test]
    fn reduction_is_a_ring_map(p in prop::sample::select(vec![2u64, 3]), quad in any::<bool>(), a in picks(), b in picks()) {
        let ring = if quad {
            SeriesRing::build(quadric_desc(p, 1, true)).unwrap()
        } else {
            SeriesRing::build(free_desc(p, 2, 1, 2, Some(x1(2)))).unwrap()
        };
        let (x, y) = (build(&ring, &a), build(&ring, &b));
        let r = |s: &Series| reduce_mod_i0(s).unwrap();
        prop_assert_eq!(r(&s_add(&x, &y).unwrap()), s_add(&r(&x), &r(&y)).unwrap());
        prop_assert_eq!(r(&s_mul(&x, &y).unwrap()), s_mul(&r(&x), &r(&y)).unwrap());
        prop_assert_eq!(r(&Series::constant(&ring, p)), Series::zero(r(&x).ring()));
    }

    #[test]
    fn truncated_polynomials_match_naive_product(p in prop::sample::select(vec![2u64, 3]), d in 1i64..5, a in picks(), b in picks()) {
        let desc = SeriesRingDesc { killed: vec![vec![1, 1]], ..free_desc(p, 2, 0, d, None) };
        let ring = SeriesRing::build(desc).unwrap();
        let (x, y) = (build(&ring, &a), build(&ring, &b));
        let naive = |s: &Series| -> HashMap<Vec<i64>, u64> {
            s.terms().iter().map(|(e, c)| (e.clone(), c.to_u64().unwrap())).collect()
        };
        let (nx, ny) = (naive(&x), naive(&y));
        let mut prod: HashMap<Vec<i64>, u64> = HashMap::new();
        for (ea, ca) in &nx {
            for (eb, cb) in &ny {
                let e = vec![ea[0] + eb[0], ea[1] + eb[1]];
                let dead = e[0] + e[1] > d || (e[0] >= 1 && e[1] >= 1);
                if !dead {
                    *prod.entry(e).or_insert(0) += ca * cb;
                }
            }
        }
        prod.retain(|_, c| {
            *c %= p;
            *c != 0
        });
        prop_assert_eq!(naive(&s_mul(&x, &y).unwrap()), prod);
    }
}

/// `m` is `g`-torsion inside the cutoff iff some killed `k` satisfies `k_j <= m_j` wherever
/// `g_j = 0` and the smallest power reaching `k` stays inside the cutoff. A killed `g` is zero.
fn torsion_oracle(m: &[i64], g: &[i64], killed: &[Vec<i64>], sum_bound: i64) -> bool {
    if killed.iter().any(|k| k.iter().zip(g).all(|(a, b)| a <= b)) {
        return true;
    }
    let (ms, gs): (i64, i64) = (m.iter().sum(), g.iter().sum());
    killed.iter().any(|k| {
        let mut n = 1i64;
        for j in 0..m.len() {
            let gap = k[j] - m[j];
            if g[j] == 0 {
                if gap > 0 {
                    return false;
                }
            } else if gap > 0 {
                n = n.max((gap + g[j] - 1) / g[j]);
            }
        }
        ms + n * gs <= sum_bound
    })
}

#[test]
fn monomial_torsion_matches_support_oracle() {
    let killed_sets = [vec![vec![1, 1]], vec![vec![2, 1]], vec![vec![1, 2], vec![3, 0]]];
    let gens = [vec![1, 0], vec![0, 1], vec![1, 1], vec![2, 0]];
    for killed in &killed_sets {
        let desc = SeriesRingDesc { killed: killed.clone(), ..free_desc(2, 2, 0, 5, None) };
        let ring = SeriesRing::build(desc).unwrap();
        for g in &gens {
            let gs = Series::monomial(&ring, g.clone(), 1).unwrap();
            let rep = torsion_annihilator(&ring, &gs).unwrap();
            for m in ring.basis() {
                let expect = torsion_oracle(&m, g, killed, ring.sum_bound());
                assert_eq!(rep.torsion.contains(&m), expect, "m = {m:?}, g = {g:?}, killed = {killed:?}");
                let ann = rep.annihilator.contains(&m);
                let mg: Vec<i64> = m.iter().zip(g).map(|(a, b)| a + b).collect();
                let g_zero = killed.iter().any(|k| k.iter().zip(g).all(|(a, b)| a <= b));
                assert_eq!(ann, g_zero || ring.within_cutoff(&mg) && killed.iter().any(|k| k.iter().zip(&mg).all(|(a, b)| a <= b)));
            }
        }
    }
}

#[test]
fn domains_have_no_torsion() {
    let ring = SeriesRing::build(quadric_desc(2, 1, false)).unwrap();
    let g = Series::monomial(&ring, vec![0, 1, 1, 0], 1).unwrap();
    assert!(torsion_annihilator(&ring, &g).unwrap().is_empty());
}
