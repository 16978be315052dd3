//! Dense rank and kernel computations.
//!
//! Exact rank uses fraction-free (Bareiss) elimination on integer rows
//! obtained by clearing denominators; exact kernels use Gauss-Jordan over
//! the rationals. Float rank and kernels come from the SVD with a relative
//! singular-value threshold.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::scalar::{Complex, Rational};

/// Singular values below this fraction of the largest count as zero.
pub const FLOAT_RANK_REL: f64 = 1e-8;

/// Relative band around the rank threshold inside which a decision is flagged.
pub const NEAR_THRESHOLD_BAND: (f64, f64) = (1e-10, 1e-6);

#[derive(Debug, Clone, PartialEq)]
pub struct RankInfo {
    pub rank: usize,
    /// FLOAT only: some singular value sits close to the rank threshold.
    pub near_threshold: bool,
    /// FLOAT only: singular values in decreasing order.
    pub singular_values: Vec<f64>,
}

fn clear_denominators(row: &[Rational]) -> Vec<BigInt> {
    let lcm = row.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    row.iter().map(|q| q.numer() * (&lcm / q.denom())).collect()
}

/// Bareiss elimination. Every intermediate entry is an exact minor, so all
/// divisions are exact.
pub fn rank_exact(rows: &[Vec<Rational>], cols: usize) -> RankInfo {
    let mut m: Vec<Vec<BigInt>> = rows.iter().map(|r| clear_denominators(r)).collect();
    let nrows = m.len();
    let mut rank = 0;
    let mut prev = BigInt::one();
    for col in 0..cols {
        if rank == nrows {
            break;
        }
        let Some(pivot) = (rank..nrows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pivot);
        for r in rank + 1..nrows {
            for c in col + 1..cols {
                let v = &m[rank][col] * &m[r][c] - &m[r][col] * &m[rank][c];
                m[r][c] = v / &prev;
            }
            m[r][col] = BigInt::zero();
        }
        prev = m[rank][col].clone();
        rank += 1;
    }
    RankInfo {
        rank,
        near_threshold: false,
        singular_values: Vec::new(),
    }
}

/// Reduced row echelon form over the rationals; returns pivot columns.
#[allow(clippy::needless_range_loop)]
fn rref(rows: &[Vec<Rational>], cols: usize) -> (Vec<Vec<Rational>>, Vec<usize>) {
    let mut m = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..cols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][col].recip();
        for v in m[r].iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                for c in 0..cols {
                    let delta = &f * &m[r][c];
                    m[i][c] = &m[i][c] - delta;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    (m, pivots)
}

pub fn kernel_exact(rows: &[Vec<Rational>], cols: usize) -> Vec<Vec<Rational>> {
    let (m, pivots) = rref(rows, cols);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); cols];
            v[f] = Rational::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -m[r][f].clone();
            }
            v
        })
        .collect()
}

/// Pads to at least `cols` rows so the SVD exposes a full right basis.
fn to_matrix(rows: &[Vec<Complex>], cols: usize) -> DMatrix<Complex> {
    let nrows = rows.len().max(cols).max(1);
    DMatrix::from_fn(nrows, cols.max(1), |i, j| {
        if i < rows.len() && j < cols {
            rows[i][j]
        } else {
            Complex::zero()
        }
    })
}

pub fn rank_float(rows: &[Vec<Complex>], cols: usize) -> RankInfo {
    if cols == 0 || rows.is_empty() {
        return RankInfo {
            rank: 0,
            near_threshold: false,
            singular_values: Vec::new(),
        };
    }
    let svd = to_matrix(rows, cols).svd(false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv.truncate(cols.min(rows.len()));
    let top = sv.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return RankInfo {
            rank: 0,
            near_threshold: false,
            singular_values: sv,
        };
    }
    let rank = sv.iter().filter(|&&s| s >= FLOAT_RANK_REL * top).count();
    let near_threshold = sv.iter().any(|&s| {
        let rel = s / top;
        rel >= NEAR_THRESHOLD_BAND.0 && rel <= NEAR_THRESHOLD_BAND.1
    });
    RankInfo {
        rank,
        near_threshold,
        singular_values: sv,
    }
}

pub fn kernel_float(rows: &[Vec<Complex>], cols: usize) -> Vec<Vec<Complex>> {
    if cols == 0 {
        return Vec::new();
    }
    let svd = to_matrix(rows, cols).svd(false, true);
    let v_t = svd.v_t.expect("requested V^H");
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    (0..v_t.nrows())
        .filter(|&i| top == 0.0 || svd.singular_values[i] < FLOAT_RANK_REL * top)
        .map(|i| (0..cols).map(|j| v_t[(i, j)].conj()).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Coeff;

    fn q(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter()
            .map(|r| r.iter().map(|&v| Rational::from_int(v)).collect())
            .collect()
    }

    #[test]
    fn exact_rank_examples() {
        assert_eq!(rank_exact(&q(&[&[0, 2], &[2, 0]]), 2).rank, 2);
        assert_eq!(rank_exact(&q(&[&[2, 0], &[0, 0]]), 2).rank, 1);
        assert_eq!(rank_exact(&q(&[&[0, 0, 0], &[0, 0, 0]]), 3).rank, 0);
        assert_eq!(
            rank_exact(&q(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]), 3).rank,
            2
        );
    }

    #[test]
    fn exact_rank_with_fractions() {
        let half = Rational::new(1.into(), 2.into());
        let rows = vec![
            vec![half.clone(), Rational::from_int(1)],
            vec![Rational::from_int(1), Rational::from_int(2)],
        ];
        assert_eq!(rank_exact(&rows, 2).rank, 1);
        let k = kernel_exact(&rows, 2);
        assert_eq!(k, vec![vec![Rational::from_int(-2), Rational::from_int(1)]]);
    }

    #[test]
    fn exact_kernel_annihilates() {
        let rows = q(&[&[1, 2, 3, 4], &[2, 4, 7, 9]]);
        let k = kernel_exact(&rows, 4);
        assert_eq!(k.len(), 2);
        for v in &k {
            for r in &rows {
                let dot = r
                    .iter()
                    .zip(v)
                    .fold(Rational::zero(), |a, (x, y)| a + x * y);
                assert!(dot.is_zero());
            }
        }
    }

    #[test]
    fn float_rank_and_kernel() {
        let c = |v: f64| Complex::new(v, 0.0);
        let rows = vec![vec![c(2.0), c(0.0)], vec![c(0.0), c(0.0)]];
        let info = rank_float(&rows, 2);
        assert_eq!(info.rank, 1);
        assert!(!info.near_threshold);
        let k = kernel_float(&rows, 2);
        assert_eq!(k.len(), 1);
        assert!(k[0][0].norm() < 1e-12 && (k[0][1].norm() - 1.0).abs() < 1e-12);

        let near = vec![vec![c(1.0), c(0.0)], vec![c(0.0), c(1e-9)]];
        let info = rank_float(&near, 2);
        assert_eq!(info.rank, 1);
        assert!(info.near_threshold);
    }

    #[test]
    fn float_rank_of_wide_matrix() {
        let c = |v: f64| Complex::new(v, 0.0);
        let rows = vec![vec![c(1.0), c(1.0), c(0.0)]];
        assert_eq!(rank_float(&rows, 3).rank, 1);
        assert_eq!(kernel_float(&rows, 3).len(), 2);
    }
}
