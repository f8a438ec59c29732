use std::collections::BTreeSet;

use num_bigint::BigInt;
use proptest::prelude::*;
use ptlab_core::coeffring::{carry_normalize, w2_add, w2_mul, w2_neg, w2_to_zp2, PrimeFieldElem, TruncatedWittCoeff, Witt2Elem};

const PRIMES: [u64; 3] = [2, 3, 5];

/// `(a, b) -> a^p + p b mod p^2`, computed in machine integers.
fn to_int(x: &Witt2Elem) -> u64 {
    let m = x.p * x.p;
    let mut t = 1u64;
    for _ in 0..x.p {
        t = t * x.a % m;
    }
    (t + x.p * x.b) % m
}

#[test]
fn witt2_ring_axioms_exhaustive() {
    for p in PRIMES {
        let all = Witt2Elem::all(p);
        let zero = Witt2Elem::zero(p);
        let one = Witt2Elem::one(p);
        for x in &all {
            assert_eq!(w2_add(x, &zero).unwrap(), *x);
            assert_eq!(w2_mul(x, &one).unwrap(), *x);
            assert_eq!(w2_add(x, &w2_neg(x)).unwrap(), zero);
            for y in &all {
                assert_eq!(w2_add(x, y).unwrap(), w2_add(y, x).unwrap());
                assert_eq!(w2_mul(x, y).unwrap(), w2_mul(y, x).unwrap());
                for z in &all {
                    let xy = w2_add(x, y).unwrap();
                    assert_eq!(w2_add(&xy, z).unwrap(), w2_add(x, &w2_add(y, z).unwrap()).unwrap());
                    let xy = w2_mul(x, y).unwrap();
                    assert_eq!(w2_mul(&xy, z).unwrap(), w2_mul(x, &w2_mul(y, z).unwrap()).unwrap());
                    let lhs = w2_mul(x, &w2_add(y, z).unwrap()).unwrap();
                    let rhs = w2_add(&w2_mul(x, y).unwrap(), &w2_mul(x, z).unwrap()).unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }
}

#[test]
fn witt2_is_isomorphic_to_integers_mod_p_squared() {
    for p in PRIMES {
        let m = p * p;
        let all = Witt2Elem::all(p);
        let image: BTreeSet<u64> = all.iter().map(to_int).collect();
        assert_eq!(image.len() as u64, m, "bijective for p = {p}");
        assert_eq!(to_int(&Witt2Elem::one(p)), 1);
        for x in &all {
            assert_eq!(BigInt::from(to_int(x)), w2_to_zp2(x).value);
            for y in &all {
                assert_eq!(to_int(&w2_add(x, y).unwrap()), (to_int(x) + to_int(y)) % m);
                assert_eq!(to_int(&w2_mul(x, y).unwrap()), to_int(x) * to_int(y) % m);
            }
        }
    }
}

#[test]
fn verschiebung_ideal_squares_to_zero() {
    for p in PRIMES {
        for x in 0..p {
            for y in 0..p {
                let v = w2_mul(&Witt2Elem::verschiebung(p, x), &Witt2Elem::verschiebung(p, y)).unwrap();
                assert_eq!(v, Witt2Elem::zero(p));
            }
        }
    }
}

#[test]
fn mismatched_primes_are_rejected() {
    assert!(w2_add(&Witt2Elem::one(2), &Witt2Elem::one(3)).is_err());
    assert!(PrimeFieldElem::new(2, 1).mul(&PrimeFieldElem::new(3, 1)).is_err());
    let a = TruncatedWittCoeff::new(2, 2, 1);
    assert!(a.add(&TruncatedWittCoeff::new(2, 3, 1)).is_err());
}

fn prime() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![2u64, 3, 5, 7])
}

proptest! {
    #[test]
    fn truncated_coefficients_match_u128(p in prime(), n in 1u32..6, a in any::<i64>(), b in any::<i64>()) {
        let m = (p as i128).pow(n);
        let x = TruncatedWittCoeff::new(p, n, a);
        let y = TruncatedWittCoeff::new(p, n, b);
        let expect = |v: i128| BigInt::from(v.rem_euclid(m));
        prop_assert_eq!(x.add(&y).unwrap().value, expect(a as i128 + b as i128));
        prop_assert_eq!(x.mul(&y).unwrap().value, expect((a as i128 % m) * (b as i128 % m)));
        prop_assert_eq!(x.neg().value, expect(-(a as i128)));
        prop_assert_eq!(x.is_unit(), (a as i128).rem_euclid(p as i128) != 0);
    }

    #[test]
    fn carry_digits_reassemble(p in prime(), n in 1u32..8, c in any::<i64>()) {
        let digits = carry_normalize(&BigInt::from(c), p, n);
        prop_assert_eq!(digits.len(), n as usize);
        prop_assert!(digits.iter().all(|&d| d < p));
        let mut v = 0i128;
        for &d in digits.iter().rev() {
            v = v * p as i128 + d as i128;
        }
        prop_assert_eq!(v, (c as i128).rem_euclid((p as i128).pow(n)));
    }

    #[test]
    fn prime_field_inverse(p in prime(), a in 1i64..1000) {
        let x = PrimeFieldElem::new(p, a);
        match x.inv() {
            Some(y) => prop_assert_eq!(x.mul(&y).unwrap().value, 1),
            None => prop_assert_eq!(a % p as i64, 0),
        }
    }
}
