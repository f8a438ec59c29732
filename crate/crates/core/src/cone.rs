//! Rational polyhedral cones: double description and fundamental parallelepipeds.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::intlat::{primitive, snf, IntMatrix};

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Inverse of a nonsingular square integer matrix over the rationals.
pub fn rational_inverse(m: &IntMatrix) -> Option<Vec<Vec<BigRational>>> {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    let mut a: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            let mut row: Vec<BigRational> =
                m.row(i).iter().map(|x| BigRational::from_integer(x.clone())).collect();
            row.extend((0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let inv = a[col][col].recip();
        for x in a[col].iter_mut() {
            *x *= &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for k in 0..2 * n {
                    let t = &a[col][k] * &f;
                    a[r][k] -= t;
                }
            }
        }
    }
    Some(a.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Indices of a maximal linearly independent subset of `rows`, greedily in order.
pub fn independent_rows(rows: &[Vec<BigInt>], dim: usize) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    let mut current = 0;
    for i in 0..rows.len() {
        let mut trial: Vec<Vec<BigInt>> = chosen.iter().map(|&k| rows[k].clone()).collect();
        trial.push(rows[i].clone());
        let r = if trial.is_empty() { 0 } else { IntMatrix::from_rows(&trial).rank() };
        if r > current {
            chosen.push(i);
            current = r;
            if current == dim {
                break;
            }
        }
    }
    chosen
}

/// Extreme rays of the pointed cone `{x in Q^dim : a_i . x >= 0}`.
///
/// Returns `None` if the constraint rows do not have full rank `dim`
/// (the cone would then contain a line).
pub fn extreme_rays(a: &[Vec<BigInt>], dim: usize) -> Option<Vec<Vec<BigInt>>> {
    if dim == 0 {
        return Some(vec![]);
    }
    let basis = independent_rows(a, dim);
    if basis.len() < dim {
        return None;
    }
    assert!(a.len() <= 128, "double description supports at most 128 constraints");
    let a0 = IntMatrix::from_rows(&basis.iter().map(|&i| a[i].clone()).collect::<Vec<_>>());
    let inv = rational_inverse(&a0)?;
    // columns of the inverse are the rays of the initial simplicial cone
    let mut rays: Vec<Vec<BigInt>> = (0..dim)
        .map(|j| {
            let col: Vec<BigRational> = (0..dim).map(|i| inv[i][j].clone()).collect();
            let den = col.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            let v: Vec<BigInt> = col.iter().map(|x| (x * BigRational::from_integer(den.clone())).to_integer()).collect();
            primitive(&v)
        })
        .collect();
    let mut processed: Vec<usize> = basis.clone();
    let zero_set = |r: &[BigInt], processed: &[usize]| -> u128 {
        let mut z = 0u128;
        for (bit, &ci) in processed.iter().enumerate() {
            if dot(&a[ci], r).is_zero() {
                z |= 1u128 << bit;
            }
        }
        z
    };
    for ci in 0..a.len() {
        if basis.contains(&ci) {
            continue;
        }
        let row = &a[ci];
        let vals: Vec<BigInt> = rays.iter().map(|r| dot(row, r)).collect();
        if vals.iter().all(|v| !v.is_negative()) {
            processed.push(ci);
            continue;
        }
        let zs: Vec<u128> = rays.iter().map(|r| zero_set(r, &processed)).collect();
        let mut next: Vec<Vec<BigInt>> = Vec::new();
        for (k, r) in rays.iter().enumerate() {
            if !vals[k].is_negative() {
                next.push(r.clone());
            }
        }
        for i in 0..rays.len() {
            if !vals[i].is_positive() {
                continue;
            }
            for j in 0..rays.len() {
                if !vals[j].is_negative() {
                    continue;
                }
                let common = zs[i] & zs[j];
                if (common.count_ones() as usize) + 2 < dim {
                    continue;
                }
                let adjacent = (0..rays.len())
                    .all(|k| k == i || k == j || zs[k] & common != common);
                if !adjacent {
                    continue;
                }
                let v: Vec<BigInt> = rays[j]
                    .iter()
                    .zip(&rays[i])
                    .map(|(rj, ri)| &vals[i] * rj - &vals[j] * ri)
                    .collect();
                let v = primitive(&v);
                if !v.iter().all(Zero::is_zero) && !next.contains(&v) {
                    next.push(v);
                }
            }
        }
        rays = next;
        processed.push(ci);
    }
    rays.sort();
    rays.dedup();
    Some(rays)
}

/// Integer points `B * lambda` with `lambda in [0,1)^r`, for a nonsingular `r x r`
/// matrix `B` given by its columns.
pub fn parallelepiped_points(cols: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let r = cols.len();
    if r == 0 {
        return vec![vec![]];
    }
    let bm = IntMatrix::from_columns(r, cols);
    let inv = rational_inverse(&bm).expect("singular parallelepiped basis");
    let s = snf(&bm);
    let diag: Vec<BigInt> = (0..r).map(|i| s.d.get(i, i).clone()).collect();
    let uinv = rational_inverse(&s.u).expect("unimodular transform");
    let mut out = Vec::new();
    let mut y = vec![BigInt::zero(); r];
    loop {
        // x = U^{-1} y
        let x: Vec<BigInt> = (0..r)
            .map(|i| {
                let s: BigRational = (0..r).map(|j| &uinv[i][j] * BigRational::from_integer(y[j].clone())).sum();
                s.to_integer()
            })
            .collect();
        let lambda: Vec<BigRational> = (0..r)
            .map(|i| (0..r).map(|j| &inv[i][j] * BigRational::from_integer(x[j].clone())).sum())
            .collect();
        let frac: Vec<BigRational> = lambda.iter().map(|l| l - l.floor()).collect();
        let point: Vec<BigInt> = (0..r)
            .map(|i| {
                let s: BigRational = (0..r).map(|j| BigRational::from_integer(bm.get(i, j).clone()) * &frac[j]).sum();
                s.to_integer()
            })
            .collect();
        out.push(point);
        // odometer over prod [0, d_i)
        let mut k = 0;
        loop {
            if k == r {
                out.sort();
                out.dedup();
                return out;
            }
            y[k] += 1;
            if y[k] < diag[k] {
                break;
            }
            y[k] = BigInt::zero();
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intlat::to_big;

    #[test]
    fn orthant_rays() {
        let a = vec![to_big(&[1, 0]), to_big(&[0, 1])];
        let r = extreme_rays(&a, 2).unwrap();
        assert_eq!(r, vec![to_big(&[0, 1]), to_big(&[1, 0])]);
    }

    #[test]
    fn square_cone_has_four_rays() {
        // dual of the cone over a square
        let gens = [[1, 0, 1], [0, 1, 1], [-1, 0, 1], [0, -1, 1]];
        let a: Vec<_> = gens.iter().map(|g| to_big(g)).collect();
        assert_eq!(extreme_rays(&a, 3).unwrap().len(), 4);
    }

    #[test]
    fn parallelepiped_a1() {
        let pts = parallelepiped_points(&[to_big(&[2, 0]), to_big(&[0, 2])]);
        assert_eq!(pts.len(), 4);
        assert!(pts.contains(&to_big(&[1, 1])));
    }
}
