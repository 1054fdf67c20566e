//! Exact dense linear algebra over the rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Result, SteinError};
use crate::scalar::Scalar;

/// Determinant by Bareiss fraction-free elimination. Rows are first cleared
/// of denominators so the elimination runs over integers.
pub fn determinant(rows: &[Vec<Scalar>]) -> Result<Scalar> {
    let n = rows.len();
    if let Some(r) = rows.iter().find(|r| r.len() != n) {
        return Err(SteinError::NotSquare {
            rows: n,
            cols: r.len(),
        });
    }
    let mut scale = BigInt::one();
    let mut a: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| {
            let l = r.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
            scale *= &l;
            r.iter().map(|c| c.numer() * (&l / c.denom())).collect()
        })
        .collect();
    Ok(Scalar::new(bareiss(&mut a), scale))
}

fn bareiss(a: &mut [Vec<BigInt>]) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    negate = !negate;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if negate {
        -d
    } else {
        d
    }
}

/// Reduced row echelon form; returns the pivot column of each nonzero row.
pub fn rref(rows: &mut Vec<Vec<Scalar>>, cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for v in rows[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                *v -= &f * p;
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

pub fn rank(rows: &[Vec<Scalar>], cols: usize) -> usize {
    rref(&mut rows.to_vec(), cols).len()
}

/// Right nullspace basis, each vector scaled to coprime integers with its
/// first nonzero entry positive.
pub fn nullspace(rows: &[Vec<Scalar>], cols: usize) -> Vec<Vec<Scalar>> {
    let mut r = rows.to_vec();
    let pivots = rref(&mut r, cols);
    (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![Scalar::zero(); cols];
            v[free] = Scalar::one();
            for (row, &p) in r.iter().zip(&pivots) {
                v[p] = -row[free].clone();
            }
            primitive(v)
        })
        .collect()
}

/// Scales a nonzero vector to coprime integers, first nonzero entry positive.
pub fn primitive(v: Vec<Scalar>) -> Vec<Scalar> {
    let l = v.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
    let ints: Vec<BigInt> = v.iter().map(|c| c.numer() * (&l / c.denom())).collect();
    let g = ints.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if g.is_zero() {
        return v;
    }
    let neg = ints
        .iter()
        .find(|x| !x.is_zero())
        .is_some_and(|x| x.is_negative());
    let g = if neg { -g } else { g };
    ints.into_iter()
        .map(|x| Scalar::from_integer(x / &g))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    fn m(rows: &[&[i64]]) -> Vec<Vec<Scalar>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| int(x)).collect())
            .collect()
    }

    #[test]
    fn small_determinants() {
        assert_eq!(determinant(&m(&[&[2, 0], &[0, 3]])).unwrap(), int(6));
        assert_eq!(determinant(&m(&[&[0, 1], &[1, 0]])).unwrap(), int(-1));
        assert_eq!(determinant(&m(&[&[1, 2], &[2, 4]])).unwrap(), int(0));
        assert_eq!(determinant(&[]).unwrap(), int(1));
        let h = vec![
            vec![int(1), ratio(1, 2), ratio(1, 3)],
            vec![ratio(1, 2), ratio(1, 3), ratio(1, 4)],
            vec![ratio(1, 3), ratio(1, 4), ratio(1, 5)],
        ];
        assert_eq!(determinant(&h).unwrap(), ratio(1, 2160));
        assert!(matches!(
            determinant(&m(&[&[1, 2]])),
            Err(SteinError::NotSquare { .. })
        ));
    }

    #[test]
    fn kernels() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6]]);
        assert_eq!(rank(&a, 3), 1);
        let ns = nullspace(&a, 3);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            for row in &a {
                let dot: Scalar = row.iter().zip(v).map(|(x, y)| x * y).sum();
                assert!(dot.is_zero());
            }
        }
        assert!(nullspace(&m(&[&[1, 0], &[0, 1]]), 2).is_empty());
        assert_eq!(
            primitive(vec![ratio(-1, 2), ratio(3, 4), int(0)]),
            vec![int(2), int(-3), int(0)]
        );
    }
}
