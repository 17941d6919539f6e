//! Exact dense linear algebra at desk scale.
//!
//! Matrices here are tiny (|A| × |A| where |A| is a basis size in the tens),
//! so everything is computed exactly: determinants over the integers use
//! fraction-free Bareiss elimination, rational elimination handles
//! invertibility and positive-semidefiniteness. No floating point enters any
//! decision in this module.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Dense square matrix of exact rationals, used for symmetry matrices τ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    dim: usize,
    rows: Vec<Vec<BigRational>>,
}

impl RationalMatrix {
    /// Builds a matrix from rows; all rows must have length `rows.len()`.
    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch(format!(
                "expected a square {dim}×{dim} matrix"
            )));
        }
        Ok(RationalMatrix { dim, rows })
    }

    /// The n×n identity.
    pub fn identity(dim: usize) -> Self {
        let mut rows = vec![vec![BigRational::zero(); dim]; dim];
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] = BigRational::one();
        }
        RationalMatrix { dim, rows }
    }

    #[must_use]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[must_use]
    pub fn get(&self, row: usize, col: usize) -> &BigRational {
        &self.rows[row][col]
    }

    /// Exact matrix–vector product with an integer vector.
    pub fn mul_int_vec(&self, v: &[BigInt]) -> Result<Vec<BigRational>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}×{} but vector has length {}",
                self.dim,
                self.dim,
                v.len()
            )));
        }
        Ok(self
            .rows
            .iter()
            .map(|row| {
                let mut acc = BigRational::zero();
                for (a, x) in row.iter().zip(v) {
                    if !x.is_zero() && !a.is_zero() {
                        acc += a * BigRational::from(x.clone());
                    }
                }
                acc
            })
            .collect())
    }

    /// Exact determinant by rational Gaussian elimination.
    pub fn det(&self) -> BigRational {
        let mut m = self.rows.clone();
        let n = self.dim;
        let mut det = BigRational::one();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !m[r][col].is_zero());
            let Some(pivot) = pivot else {
                return BigRational::zero();
            };
            if pivot != col {
                m.swap(pivot, col);
                det = -det;
            }
            det *= m[col][col].clone();
            let inv = m[col][col].clone();
            for r in col + 1..n {
                if m[r][col].is_zero() {
                    continue;
                }
                let factor = &m[r][col] / &inv;
                for c in col..n {
                    let sub = &factor * &m[col][c];
                    m[r][c] -= sub;
                }
            }
        }
        det
    }

    /// True iff the matrix has an exact inverse (nonzero determinant).
    #[must_use]
    pub fn is_invertible(&self) -> bool {
        !self.det().is_zero()
    }
}

/// Exact determinant of an integer matrix via fraction-free Bareiss
/// elimination. Consumes the row data as scratch space.
pub(crate) fn int_det_bareiss(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    debug_assert!(m.iter().all(|r| r.len() == n));
    let mut sign = 1i32;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(swap) = (k + 1..n).find(|&r| !m[r][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                // Bareiss guarantees exact divisibility by the previous pivot.
                m[i][j] = num / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if sign < 0 {
        -det
    } else {
        det
    }
}

/// Exact positive-semidefiniteness test for a symmetric integer matrix, via
/// rational LDLᵀ elimination: every pivot must be nonnegative, and a zero
/// pivot forces its entire remaining row to vanish.
pub(crate) fn int_psd_check(rows: &[Vec<BigInt>]) -> bool {
    let n = rows.len();
    let mut m: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| r.iter().map(|x| BigRational::from(x.clone())).collect())
        .collect();
    for i in 0..n {
        if m[i][i].is_negative() {
            return false;
        }
        if m[i][i].is_zero() {
            if (i + 1..n).any(|j| !m[i][j].is_zero()) {
                return false;
            }
            continue;
        }
        let pivot = m[i][i].clone();
        for r in i + 1..n {
            if m[r][i].is_zero() {
                continue;
            }
            let factor = &m[r][i] / &pivot;
            for c in i..n {
                let sub = &factor * &m[i][c];
                m[r][c] -= sub;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int_rows(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect()
    }

    #[test]
    fn bareiss_matches_known_determinants() {
        assert_eq!(
            int_det_bareiss(int_rows(&[&[4, 2, 2], &[2, 2, 1], &[2, 1, 2]])),
            BigInt::from(4)
        );
        assert_eq!(
            int_det_bareiss(int_rows(&[&[0, 1], &[1, 0]])),
            BigInt::from(-1)
        );
        assert_eq!(
            int_det_bareiss(int_rows(&[&[1, 2], &[2, 4]])),
            BigInt::from(0)
        );
        assert_eq!(int_det_bareiss(Vec::new()), BigInt::from(1));
    }

    #[test]
    fn psd_accepts_gram_and_rejects_indefinite() {
        assert!(int_psd_check(&int_rows(&[&[4, 2, 2], &[2, 2, 1], &[2, 1, 2]])));
        // zero matrix is PSD
        assert!(int_psd_check(&int_rows(&[&[0, 0], &[0, 0]])));
        // zero pivot with nonzero row ⇒ not PSD
        assert!(!int_psd_check(&int_rows(&[&[0, 1], &[1, 0]])));
        // negative direction
        assert!(!int_psd_check(&int_rows(&[&[1, 2], &[2, 1]])));
    }

    #[test]
    fn rational_matrix_roundtrip() {
        let two = BigRational::from(BigInt::from(2));
        let m = RationalMatrix::from_rows(vec![
            vec![BigRational::one(), BigRational::zero()],
            vec![BigRational::one(), two.clone()],
        ])
        .unwrap();
        assert!(m.is_invertible());
        assert_eq!(m.det(), two);
        let v = m
            .mul_int_vec(&[BigInt::from(3), BigInt::from(5)])
            .unwrap();
        assert_eq!(v[0], BigRational::from(BigInt::from(3)));
        assert_eq!(v[1], BigRational::from(BigInt::from(13)));
        assert!(!RationalMatrix::from_rows(vec![
            vec![BigRational::one(), BigRational::one()],
            vec![two.clone(), two],
        ])
        .unwrap()
        .is_invertible());
    }

    #[test]
    fn from_rows_rejects_ragged_input() {
        assert!(RationalMatrix::from_rows(vec![vec![BigRational::one()], vec![]]).is_err());
    }
}
