//! Diagonally pivoted Cholesky factorization for symmetric positive
//! semi-definite matrices, with numerical rank detection.

use super::hiprec::HiPrec;
use super::matrix::DenseMatrix;
use crate::error::{Result, SogError};

/// Result of a pivoted factorization `M = F Fᵀ`.
#[derive(Clone, Debug)]
pub struct Cholesky {
    /// `n x rank` lower-trapezoidal factor of the symmetrically permuted
    /// matrix: `M[perm, perm] = lower lowerᵀ`.
    pub lower: DenseMatrix,
    /// `perm[k]` is the original index of the k-th pivot.
    pub perm: Vec<usize>,
    pub rank: usize,
}

impl Cholesky {
    /// Factor in the original row order, so that `factor() factor()ᵀ = M`.
    pub fn factor(&self) -> DenseMatrix {
        let n = self.lower.rows();
        let mut out = DenseMatrix::zeros(n, self.rank, self.lower.prec());
        for (k, &orig) in self.perm.iter().enumerate() {
            for j in 0..self.rank {
                out[(orig, j)] = self.lower[(k, j)].clone();
            }
        }
        out
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        let f = self.factor();
        f.matmul(&f.transpose())
    }
}

/// Default rank-truncation tolerance relative to the largest pivot.
pub fn default_tolerance(prec: u32) -> HiPrec {
    HiPrec::pow2(-(prec as i32) / 2, prec)
}

/// Pivoted Cholesky with the default truncation `2^{-prec/2}`.
pub fn cholesky(m: &DenseMatrix) -> Result<Cholesky> {
    let tol = default_tolerance(m.prec());
    cholesky_with_tolerance(m, &tol)
}

/// Pivoted Cholesky stopping once the largest remaining pivot falls below
/// `rel_tol` times the first (largest) pivot.
pub fn cholesky_with_tolerance(m: &DenseMatrix, rel_tol: &HiPrec) -> Result<Cholesky> {
    if !m.is_square() {
        return Err(SogError::InvalidParameter(format!(
            "cholesky needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let prec = m.prec();
    let scale = m.max_abs();
    let sym_tol = &scale * &HiPrec::pow2(-(prec as i32) / 2, prec);
    let mut asym = HiPrec::zero(prec);
    for i in 0..n {
        for j in 0..i {
            let d = (&m[(i, j)] - &m[(j, i)]).abs();
            if d > asym {
                asym = d;
            }
        }
    }
    if asym > sym_tol {
        return Err(SogError::NotSymmetric {
            asymmetry: asym.to_f64(),
            tolerance: sym_tol.to_f64(),
        });
    }

    let mut a = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut lower = DenseMatrix::zeros(n, n, prec);
    let mut reference: Option<HiPrec> = None;
    let mut rank = n;

    for k in 0..n {
        let mut p = k;
        for i in k + 1..n {
            if a[(i, i)] > a[(p, p)] {
                p = i;
            }
        }
        let pivot = a[(p, p)].clone();
        let reference = reference.get_or_insert_with(|| pivot.abs()).clone();
        let threshold = &reference * rel_tol;
        if pivot <= threshold {
            for i in k..n {
                if (-&a[(i, i)]) > threshold {
                    return Err(SogError::IndefiniteMatrix {
                        pivot: a[(i, i)].to_f64(),
                        step: k,
                    });
                }
            }
            rank = k;
            break;
        }
        if p != k {
            perm.swap(k, p);
            for j in 0..n {
                a.swap((k, j), (p, j));
            }
            for i in 0..n {
                a.swap((i, k), (i, p));
            }
            for j in 0..k {
                lower.swap((k, j), (p, j));
            }
        }
        let d = a[(k, k)].sqrt();
        lower[(k, k)] = d.clone();
        for i in k + 1..n {
            lower[(i, k)] = &a[(i, k)] / &d;
        }
        for i in k + 1..n {
            let lik = lower[(i, k)].clone();
            for j in k + 1..=i {
                let ljk = &lower[(j, k)];
                a[(i, j)].sub_mul(&lik, ljk);
            }
            for j in k + 1..i {
                a[(j, i)] = a[(i, j)].clone();
            }
        }
    }

    let lower = lower.block(0, 0, n, rank);
    Ok(Cholesky { lower, perm, rank })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_square_root() {
        let m = DenseMatrix::from_f64(1, 1, &[4.0], 64);
        let c = cholesky(&m).unwrap();
        assert_eq!(c.lower[(0, 0)], 2.0);
    }

    #[test]
    fn identity_factor_is_identity() {
        let m = DenseMatrix::identity(2, 64);
        let c = cholesky(&m).unwrap();
        assert_eq!(c.rank, 2);
        assert_eq!(c.factor(), DenseMatrix::identity(2, 64));
    }

    #[test]
    fn cauchy_gramian_reconstructs() {
        let prec = 128;
        let p = DenseMatrix::from_fn(3, 3, |i, j| HiPrec::ratio(1, (i + j + 2) as i64, prec));
        let c = cholesky(&p).unwrap();
        assert_eq!(c.rank, 3);
        let err = c.reconstruct().sub(&p).max_abs();
        assert!(err < 1e-30, "residual {err:?}");
        // lower trapezoidal in pivoted order
        assert!(c.lower[(0, 1)].is_zero() && c.lower[(1, 2)].is_zero());
    }

    #[test]
    fn semidefinite_rank_is_revealed() {
        let prec = 128;
        let v = [1.0, -2.0, 0.5, 3.0];
        let w = [0.0, 1.0, 1.0, -1.0];
        let m = DenseMatrix::from_fn(4, 4, |i, j| {
            HiPrec::from_f64(v[i] * v[j] + w[i] * w[j], prec)
        });
        let c = cholesky(&m).unwrap();
        assert_eq!(c.rank, 2);
        assert!(c.reconstruct().sub(&m).max_abs() < 1e-30);
    }

    #[test]
    fn rejects_indefinite_and_asymmetric() {
        let m = DenseMatrix::from_f64(2, 2, &[1.0, 2.0, 2.0, 1.0], 64);
        assert!(matches!(cholesky(&m), Err(SogError::IndefiniteMatrix { .. })));
        let m = DenseMatrix::from_f64(2, 2, &[1.0, 0.5, 0.0, 1.0], 64);
        assert!(matches!(cholesky(&m), Err(SogError::NotSymmetric { .. })));
    }
}
