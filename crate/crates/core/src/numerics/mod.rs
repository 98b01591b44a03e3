//! Extended-precision scalars and the small dense linear-algebra kernels the
//! reduction pipeline needs: pivoted Cholesky, Jacobi SVD and a nonsymmetric
//! eigensolver, all running on [`HiPrec`] entries.

pub mod cholesky;
pub mod complex;
pub mod eig;
pub mod hiprec;
pub mod matrix;
pub mod svd;

pub use cholesky::{cholesky, cholesky_with_tolerance, Cholesky};
pub use complex::Complex;
pub use eig::{eig, Eigen};
pub use hiprec::HiPrec;
pub use matrix::{ComplexMatrix, DenseMatrix, Matrix};
pub use svd::{svd, Svd};

/// Working precision for a VP construction of half-order `n`.
///
/// The combinatorial factors in the explicit Gaussian weights grow roughly
/// like `2^{8n}` and cancel almost completely, so the mantissa has to grow
/// linearly with `n`; 12 bits per unit of `n` plus 256 bits of headroom.
pub fn default_precision(n: usize) -> u32 {
    let bits = 12 * n as u64 + 256;
    bits.clamp(256, u32::MAX as u64) as u32
}
