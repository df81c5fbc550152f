//! Exact linear algebra: rational solving, integer determinants and Smith normal form.

use num::{BigInt, BigRational, One, Zero};

pub enum Solution {
    Unique(Vec<BigRational>),
    Many,
    None,
}

/// Solve `rows · x = rhs` for `n` unknowns by Gaussian elimination.
pub fn solve(rows: &[Vec<BigRational>], rhs: &[BigRational], n: usize) -> Solution {
    let mut a: Vec<Vec<BigRational>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut r = r.clone();
            r.push(b.clone());
            r
        })
        .collect();
    let m = a.len();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n {
        let Some(p) = (row..m).find(|&i| !a[i][col].is_zero()) else { continue };
        a.swap(row, p);
        let inv = BigRational::one() / a[row][col].clone();
        for v in a[row].iter_mut() {
            *v *= &inv;
        }
        for i in 0..m {
            if i != row && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for j in col..=n {
                    let t = &a[row][j] * &f;
                    a[i][j] -= t;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    if a[row..].iter().any(|r| !r[n].is_zero()) {
        return Solution::None;
    }
    if pivots.len() < n {
        return Solution::Many;
    }
    Solution::Unique((0..n).map(|i| a[i][n].clone()).collect())
}

/// Determinant of a square integer matrix (fraction-free Bareiss).
pub fn det_i64(m: &[Vec<i64>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else { return BigInt::zero() };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

/// Smith normal form `D = U·A·V` of an `m × n` integer matrix.
/// Returns the diagonal (length `min(m, n)`) and the unimodular column transform `V`.
pub fn smith_normal_form(a: &[Vec<i64>], n: usize) -> (Vec<i128>, Vec<Vec<i128>>) {
    let m = a.len();
    let mut d: Vec<Vec<i128>> = a.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut v: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| (i == j) as i128).collect()).collect();
    let r = m.min(n);
    let col_op = |d: &mut Vec<Vec<i128>>, v: &mut Vec<Vec<i128>>, dst: usize, src: usize, f: i128| {
        // column dst += f * column src
        for row in d.iter_mut() {
            row[dst] += f * row[src];
        }
        for row in v.iter_mut() {
            row[dst] += f * row[src];
        }
    };
    for t in 0..r {
        loop {
            // Smallest nonzero entry in the remaining block.
            let mut best: Option<(usize, usize)> = None;
            for i in t..m {
                for j in t..n {
                    if d[i][j] != 0 && best.is_none_or(|(bi, bj)| d[i][j].abs() < d[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else { return (diag(&d, r), v) };
            d.swap(t, pi);
            for row in d.iter_mut() {
                row.swap(t, pj);
            }
            for row in v.iter_mut() {
                row.swap(t, pj);
            }
            let mut clean = true;
            for i in t + 1..m {
                let q = d[i][t] / d[t][t];
                if q != 0 {
                    let (top, rest) = d.split_at_mut(i);
                    for (x, y) in rest[0].iter_mut().zip(&top[t]) {
                        *x -= q * y;
                    }
                }
                if d[i][t] != 0 {
                    clean = false;
                }
            }
            for j in t + 1..n {
                let q = d[t][j] / d[t][t];
                if q != 0 {
                    col_op(&mut d, &mut v, j, t, -q);
                }
                if d[t][j] != 0 {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // Divisibility: pivot must divide the rest of the block.
            let p = d[t][t];
            let bad = (t + 1..m).find(|&i| (t + 1..n).any(|j| d[i][j] % p != 0));
            match bad {
                Some(i) => {
                    let (top, rest) = d.split_at_mut(i);
                    for (x, y) in top[t].iter_mut().zip(&rest[0]) {
                        *x += y;
                    }
                }
                None => break,
            }
        }
    }
    (diag(&d, r), v)
}

fn diag(d: &[Vec<i128>], r: usize) -> Vec<i128> {
    (0..r).map(|i| d[i][i].abs()).collect()
}

pub fn rank_i64(a: &[Vec<i64>], n: usize) -> usize {
    let rows: Vec<Vec<BigRational>> = a
        .iter()
        .map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect())
        .collect();
    rank(&rows, n)
}

pub fn rank(rows: &[Vec<BigRational>], n: usize) -> usize {
    let mut a = rows.to_vec();
    let m = a.len();
    let mut row = 0;
    for col in 0..n {
        let Some(p) = (row..m).find(|&i| !a[i][col].is_zero()) else { continue };
        a.swap(row, p);
        for i in row + 1..m {
            if !a[i][col].is_zero() {
                let f = &a[i][col] / &a[row][col];
                for j in col..n {
                    let t = &a[row][j] * &f;
                    a[i][j] -= t;
                }
            }
        }
        row += 1;
    }
    row
}

pub fn is_nonsingular(rows: &[Vec<BigRational>]) -> bool {
    let n = rows.len();
    rank(rows, n) == n && rows.iter().all(|r| r.len() == n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::Signed;

    #[test]
    fn determinant() {
        assert_eq!(det_i64(&[vec![3, 0], vec![2, 1]]), BigInt::from(3));
        assert_eq!(det_i64(&[vec![0, 1], vec![1, 0]]), BigInt::from(-1));
        assert_eq!(det_i64(&[vec![2, 1, 0], vec![0, 3, 1], vec![1, 0, 4]]), BigInt::from(25));
    }

    fn matmul(a: &[Vec<i128>], b: &[Vec<i128>]) -> Vec<Vec<i128>> {
        a.iter()
            .map(|r| (0..b[0].len()).map(|j| r.iter().zip(b).map(|(x, br)| x * br[j]).sum()).collect())
            .collect()
    }

    #[test]
    fn smith() {
        let a = vec![vec![3, 0, 0], vec![1, 4, 0], vec![0, 0, 6]];
        let (d, v) = smith_normal_form(&a, 3);
        assert_eq!(d.iter().product::<i128>(), 72);
        for w in d.windows(2) {
            assert_eq!(w[1] % w[0], 0);
        }
        // A·V has columns whose gcd pattern matches D: check |det V| = 1.
        let vi: Vec<Vec<i64>> = v.iter().map(|r| r.iter().map(|&x| x as i64).collect()).collect();
        assert_eq!(det_i64(&vi).abs(), BigInt::one());
        let ai: Vec<Vec<i128>> = a.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
        let av = matmul(&ai, &v);
        // every column k of A·V is divisible by d_k
        for k in 0..3 {
            assert!(av.iter().all(|r| r[k] % d[k] == 0));
        }
    }

    #[test]
    fn solving() {
        let r = |x: i64| BigRational::from_integer(x.into());
        match solve(&[vec![r(2), r(0)], vec![r(0), r(3)]], &[r(1), r(1)], 2) {
            Solution::Unique(q) => assert_eq!(q, vec![BigRational::new(1.into(), 2.into()), BigRational::new(1.into(), 3.into())]),
            _ => panic!(),
        }
        assert!(matches!(solve(&[vec![r(2), r(0)], vec![r(3), r(0)]], &[r(1), r(1)], 2), Solution::None));
        assert!(matches!(solve(&[vec![r(2), r(0)]], &[r(1)], 2), Solution::Many));
    }
}
