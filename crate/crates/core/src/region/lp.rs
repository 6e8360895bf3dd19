//! Exact feasibility of `A x = b, x ≥ 0` by phase-I simplex with Bland's
//! rule over arbitrary-precision rationals.

use num_traits::{One, Signed, Zero};

use crate::alpha::Rational;

/// Returns a feasible `x` if one exists.
pub(crate) fn feasible(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    // tableau columns: n originals, m artificials, rhs
    let width = n + m + 1;
    let mut t: Vec<Vec<Rational>> = Vec::with_capacity(m + 1);
    for i in 0..m {
        let flip = b[i].is_negative();
        let mut row = vec![Rational::zero(); width];
        for j in 0..n {
            row[j] = if flip {
                -a[i][j].clone()
            } else {
                a[i][j].clone()
            };
        }
        row[n + i] = Rational::one();
        row[width - 1] = if flip { -b[i].clone() } else { b[i].clone() };
        t.push(row);
    }
    // objective: minimize the artificial sum, expressed in reduced costs
    let mut obj = vec![Rational::zero(); width];
    for row in &t {
        for j in 0..n {
            obj[j] -= &row[j];
        }
        obj[width - 1] -= &row[width - 1];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    while let Some(enter) = (0..n + m).find(|&j| obj[j].is_negative()) {
        let mut leave: Option<(usize, Rational)> = None;
        for (i, row) in t.iter().enumerate() {
            if row[enter].is_positive() {
                let ratio = &row[width - 1] / &row[enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((r, _)) = leave else {
            // unbounded direction cannot occur for a phase-I objective ≥ 0
            break;
        };
        let pivot = t[r][enter].clone();
        for v in t[r].iter_mut() {
            *v /= &pivot;
        }
        let prow = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != r && !row[enter].is_zero() {
                let f = row[enter].clone();
                for (v, p) in row.iter_mut().zip(&prow) {
                    *v -= &f * p;
                }
            }
        }
        if !obj[enter].is_zero() {
            let f = obj[enter].clone();
            for (v, p) in obj.iter_mut().zip(&prow) {
                *v -= &f * p;
            }
        }
        basis[r] = enter;
    }

    if !obj[width - 1].is_zero() {
        return None;
    }
    let mut x = vec![Rational::zero(); n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            x[bv] = t[i][width - 1].clone();
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alpha::{int, rat};

    #[test]
    fn simple_feasible_system() {
        // x + y = 1, x - y = 1/2
        let a = vec![vec![int(1), int(1)], vec![int(1), int(-1)]];
        let b = vec![int(1), rat(1, 2)];
        let x = feasible(&a, &b).unwrap();
        assert_eq!(x, vec![rat(3, 4), rat(1, 4)]);
    }

    #[test]
    fn infeasible_with_nonnegativity() {
        // x + y = 1, x - y = 2 needs y < 0
        let a = vec![vec![int(1), int(1)], vec![int(1), int(-1)]];
        assert!(feasible(&a, &[int(1), int(2)]).is_none());
    }

    #[test]
    fn negative_rhs_and_degenerate_columns() {
        let a = vec![vec![int(-1), int(0), int(-1)], vec![int(1), int(1), int(1)]];
        let x = feasible(&a, &[int(-1), int(1)]).unwrap();
        assert_eq!(&x[0] + &x[2], int(1));
        assert!(x[1].is_zero());
    }
}
