//! Null-space and span beamformers.
//!
//! All outputs are unit vectors with a fixed phase convention: the first
//! entry with non-negligible magnitude is real and positive.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative singular-value threshold used for the rank decision.
pub const RANK_TOL: f64 = 1e-8;
const ZERO_NORM: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct BeamVector {
    pub v: Vec<Complex64>,
    /// Unit-modulus factor applied by the phase convention.
    pub phase: Complex64,
}

impl BeamVector {
    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.v)
    }

    /// Canonical basis vector `e_antenna` in dimension `n`.
    pub fn canonical(n: usize, antenna: usize) -> Self {
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[antenna] = Complex64::new(1.0, 0.0);
        BeamVector {
            v,
            phase: Complex64::new(1.0, 0.0),
        }
    }
}

/// `row · v` without conjugation, i.e. the scalar channel `h v`.
pub fn apply(row: &[Complex64], v: &[Complex64]) -> Complex64 {
    row.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn phase_normalized(mut v: Vec<Complex64>) -> BeamVector {
    let mut phase = Complex64::new(1.0, 0.0);
    if let Some(first) = v.iter().find(|z| z.norm() > ZERO_NORM) {
        phase = first.conj() / first.norm();
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
    BeamVector { v, phase }
}

fn numerical_rank(a: &DMatrix<Complex64>) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let sv = a.clone().svd(false, false).singular_values;
    let largest = sv.iter().cloned().fold(0.0f64, f64::max);
    if largest == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOL * largest).count()
}

/// Column `col` of the full unitary factor `Q` of the Householder QR of
/// `w` (n×m), without forming `Q`.
fn householder_q_column(mut w: DMatrix<Complex64>, col: usize) -> Vec<Complex64> {
    let n = w.nrows();
    let m = w.ncols();
    // (offset, unit reflector) pairs, Q = H₀ H₁ ⋯
    let mut reflectors: Vec<(usize, Vec<Complex64>)> = Vec::with_capacity(m.min(n));
    for k in 0..m.min(n) {
        let x: Vec<Complex64> = (k..n).map(|i| w[(i, k)]).collect();
        let xnorm = norm(&x);
        if xnorm <= f64::MIN_POSITIVE {
            continue;
        }
        let x0 = x[0];
        let unit = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -unit * xnorm;
        let mut u = x;
        u[0] -= alpha;
        let unorm = norm(&u);
        if unorm <= f64::MIN_POSITIVE {
            continue;
        }
        for z in u.iter_mut() {
            *z /= unorm;
        }
        // W[k.., k..] ← (I − 2uuᴴ) W[k.., k..]
        for j in k..m {
            let dot: Complex64 = (k..n).map(|i| u[i - k].conj() * w[(i, j)]).sum();
            for i in k..n {
                w[(i, j)] -= u[i - k] * dot * 2.0;
            }
        }
        reflectors.push((k, u));
    }
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    v[col] = Complex64::new(1.0, 0.0);
    for (k, u) in reflectors.iter().rev() {
        let dot: Complex64 = (*k..n).map(|i| u[i - k].conj() * v[i]).sum();
        for i in *k..n {
            v[i] -= u[i - k] * dot * 2.0;
        }
    }
    v
}

/// Unit vector orthogonal (in the `h v = 0` sense) to every given row.
///
/// With `m < N` rows this is column `m` of the full unitary factor of the
/// Householder QR of the stacked, conjugate-transposed rows, i.e. the first
/// basis vector of the orthogonal complement. With no rows that is `e₁`.
/// Rank-deficient stacks with `m ≥ N` fall back to the right singular
/// vector of the smallest singular value.
pub fn null_space_unit(rows: &[Vec<Complex64>], n: usize) -> Result<BeamVector> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    for r in rows {
        if r.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: r.len(),
            });
        }
    }
    let m = rows.len();
    let a = DMatrix::from_fn(m, n, |i, j| rows[i][j]);
    if m < n {
        return Ok(phase_normalized(householder_q_column(a.adjoint(), m)));
    }
    let rank = numerical_rank(&a);
    if rank == n {
        return Err(Error::NullSpaceEmpty { rank, dim: n });
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested V^H");
    let (idx, _) =
        svd.singular_values
            .iter()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |best, (i, &s)| if s < best.1 { (i, s) } else { best },
            );
    let v: Vec<Complex64> = (0..n).map(|j| v_t[(idx, j)].conj()).collect();
    Ok(phase_normalized(v))
}

/// `rowᴴ / ‖row‖`, phase-normalized.
pub fn span_unit(row: &[Complex64]) -> Result<BeamVector> {
    let nr = norm(row);
    if nr <= ZERO_NORM {
        return Err(Error::ZeroVector);
    }
    Ok(phase_normalized(
        row.iter().map(|z| z.conj() / nr).collect(),
    ))
}

pub(crate) fn matrix_row(h: &DMatrix<Complex64>, i: usize) -> Vec<Complex64> {
    (0..h.ncols()).map(|j| h[(i, j)]).collect()
}

/// Zero-forcing set: precoder `i` is nulled towards every other row.
pub fn zf_precoder_set(h_est: &DMatrix<Complex64>) -> Result<Vec<BeamVector>> {
    let (k, n) = h_est.shape();
    if k > n {
        return Err(Error::InvalidArgument(format!(
            "zero forcing needs K ≤ N (got K={k}, N={n})"
        )));
    }
    (0..k)
        .map(|i| {
            let rows: Vec<Vec<Complex64>> = (0..k)
                .filter(|&j| j != i)
                .map(|j| matrix_row(h_est, j))
                .collect();
            null_space_unit(&rows, n)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_row(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|_| c(StandardNormal.sample(rng), StandardNormal.sample(rng)))
            .collect()
    }

    fn assert_unit(b: &BeamVector) {
        assert!((b.norm() - 1.0).abs() < 1e-10, "norm {}", b.norm());
    }

    #[test]
    fn canonical_null_vector() {
        let rows = vec![
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        ];
        let b = null_space_unit(&rows, 3).unwrap();
        assert!((b.v[2] - c(1.0, 0.0)).norm() < 1e-12);
        assert!(b.v[0].norm() < 1e-12 && b.v[1].norm() < 1e-12);
    }

    #[test]
    fn empty_constraints_give_first_basis_vector() {
        let b = null_space_unit(&[], 2).unwrap();
        assert_eq!(b.v, vec![c(1.0, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn random_rows_are_nulled() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let rows = vec![random_row(&mut rng, 3), random_row(&mut rng, 3)];
            let b = null_space_unit(&rows, 3).unwrap();
            assert_unit(&b);
            for r in &rows {
                assert!(apply(r, &b.v).norm() <= 1e-9 * norm(r));
            }
            // phase convention
            let first = b.v.iter().find(|z| z.norm() > 1e-12).unwrap();
            assert!(first.im.abs() < 1e-12 && first.re > 0.0);
        }
    }

    #[test]
    fn null_space_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows = vec![random_row(&mut rng, 4)];
        assert_eq!(
            null_space_unit(&rows, 4).unwrap(),
            null_space_unit(&rows, 4).unwrap()
        );
    }

    #[test]
    fn full_rank_rows_have_no_null_space() {
        let id: Vec<Vec<Complex64>> = (0..3)
            .map(|i| {
                (0..3)
                    .map(|j| c(if i == j { 1.0 } else { 0.0 }, 0.0))
                    .collect()
            })
            .collect();
        assert!(matches!(
            null_space_unit(&id, 3),
            Err(Error::NullSpaceEmpty { rank: 3, dim: 3 })
        ));
    }

    #[test]
    fn rank_deficient_square_stack_still_has_null_vector() {
        let r = vec![c(1.0, 1.0), c(2.0, -1.0)];
        let rows = vec![r.clone(), r.iter().map(|z| z * 3.0).collect()];
        let b = null_space_unit(&rows, 2).unwrap();
        assert_unit(&b);
        assert!(apply(&r, &b.v).norm() < 1e-9 * norm(&r));
    }

    #[test]
    fn dimension_mismatch() {
        let rows = vec![vec![c(1.0, 0.0); 2]];
        assert!(matches!(
            null_space_unit(&rows, 3),
            Err(Error::DimensionMismatch {
                expected: 3,
                got: 2
            })
        ));
    }

    #[test]
    fn span_examples() {
        let b = span_unit(&[c(2.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(b.v, vec![c(1.0, 0.0), c(0.0, 0.0)]);
        // (0, 3i)ᴴ/3 = (0, -i); convention rotates it to (0, 1)
        let b = span_unit(&[c(0.0, 0.0), c(0.0, 3.0)]).unwrap();
        assert!((b.v[1] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((b.phase - c(0.0, 1.0)).norm() < 1e-15);
        assert!(matches!(
            span_unit(&[c(0.0, 0.0); 3]),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn span_inner_product_equals_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let r = random_row(&mut rng, 3);
            let b = span_unit(&r).unwrap();
            assert_unit(&b);
            assert!((apply(&r, &b.v).norm() - norm(&r)).abs() < 1e-9);
        }
    }

    #[test]
    fn zf_identity_gives_basis() {
        let h = DMatrix::<Complex64>::identity(3, 3);
        let q = zf_precoder_set(&h).unwrap();
        for (i, b) in q.iter().enumerate() {
            let e = BeamVector::canonical(3, i);
            assert!(
                b.v.iter().zip(&e.v).all(|(x, y)| (x - y).norm() < 1e-12),
                "{b:?}"
            );
        }
    }

    #[test]
    fn zf_two_users_three_antennas() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let r0 = random_row(&mut rng, 3);
        let r1 = random_row(&mut rng, 3);
        let h = DMatrix::from_fn(2, 3, |i, j| if i == 0 { r0[j] } else { r1[j] });
        let q = zf_precoder_set(&h).unwrap();
        assert!(apply(&r1, &q[0].v).norm() < 1e-9);
        assert!(apply(&r0, &q[1].v).norm() < 1e-9);
    }
}
