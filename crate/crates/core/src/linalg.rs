//! Exact linear solves over the rationals, used to change coordinates
//! between a model basis and a sub-basis of named classes.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Outcome of solving `sum_j x_j * columns[j] = target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Solution {
    /// The columns are independent and the solution is integral.
    Integral(Vec<BigInt>),
    /// Unique solution, not integral.
    Fractional,
    /// Target is outside the span.
    Inconsistent,
    /// Columns are dependent.
    Degenerate,
}

pub(crate) fn solve(columns: &[&[BigInt]], target: &[BigInt]) -> Solution {
    let rows = target.len();
    let cols = columns.len();
    debug_assert!(columns.iter().all(|c| c.len() == rows));

    // augmented matrix, one row per basis coordinate
    let mut a: Vec<Vec<BigRational>> = (0..rows)
        .map(|i| {
            let mut row: Vec<BigRational> = columns
                .iter()
                .map(|c| BigRational::from_integer(c[i].clone()))
                .collect();
            row.push(BigRational::from_integer(target[i].clone()));
            row
        })
        .collect();

    let mut pivot_cols = Vec::with_capacity(cols);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            return Solution::Degenerate;
        };
        a.swap(r, p);
        let inv = BigRational::one() / a[r][c].clone();
        for v in a[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let factor = a[i][c].clone();
                for j in c..=cols {
                    let delta = &factor * &a[r][j];
                    a[i][j] -= delta;
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    if a[r..].iter().any(|row| !row[cols].is_zero()) {
        return Solution::Inconsistent;
    }
    let mut out = Vec::with_capacity(cols);
    for row in a.iter().take(cols) {
        let v = &row[cols];
        if !v.is_integer() {
            return Solution::Fractional;
        }
        out.push(v.to_integer());
    }
    Solution::Integral(out)
}

pub(crate) fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .map(|(x, y)| x * y)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn solves_triangular_frame() {
        // columns (1,0,-1), (0,1,0), (0,0,1)
        let c0 = ints(&[1, 0, -1]);
        let c1 = ints(&[0, 1, 0]);
        let c2 = ints(&[0, 0, 1]);
        let sol = solve(&[&c0, &c1, &c2], &ints(&[2, 3, 0]));
        assert_eq!(sol, Solution::Integral(ints(&[2, 3, 2])));
    }

    #[test]
    fn detects_each_failure_mode() {
        let c0 = ints(&[2, 0]);
        assert_eq!(solve(&[&c0], &ints(&[1, 0])), Solution::Fractional);
        assert_eq!(solve(&[&c0], &ints(&[0, 1])), Solution::Inconsistent);
        let c1 = ints(&[4, 0]);
        assert_eq!(solve(&[&c0, &c1], &ints(&[2, 0])), Solution::Degenerate);
    }

    #[test]
    fn empty_columns() {
        assert_eq!(solve(&[], &ints(&[0, 0])), Solution::Integral(vec![]));
        assert_eq!(solve(&[], &ints(&[0, 1])), Solution::Inconsistent);
    }
}
