//! Gaussian weights of the VP sum.
//!
//! `T_m(2r - 1) = Σ_{j=0}^{m} (-1)^{m-j} K(m, j) r^j` with
//! `K(m, j) = 4^j m/(m+j) C(m+j, 2j)` (and `K(0, 0) = 1`), so collecting
//! powers of `r` in the VP sum gives
//!
//! `w_j = Σ_{m=j}^{2n-1} lambda_m (-1)^{m-j} K(m, j) a_m`,
//!
//! where `lambda_m = 1` for `m <= n` and `(2n - m)/n` above. For `j = 0` this
//! reduces to the alternating sum of all coefficients, for `1 <= j <= n` both
//! the partial sum and the VP tail contribute, and for `j > n` only the tail.

use rug::{Integer, Rational};

use super::FourierCoeffs;
use crate::error::{Result, SogError};
use crate::numerics::HiPrec;

/// `K(m, j)` as an exact integer.
pub fn shifted_chebyshev_factor(m: u32, j: u32) -> Integer {
    assert!(j <= m, "K(m, j) needs j <= m");
    if m == 0 {
        return Integer::from(1);
    }
    let mut v = Integer::from(Integer::binomial_u(m + j, 2 * j));
    v *= m;
    v <<= 2 * j;
    v.div_exact_u_mut(m + j);
    v
}

/// Exact rational multiplier of `a_m` in `w_j`.
fn multiplier(n: u32, m: u32, j: u32) -> Rational {
    let mut k = shifted_chebyshev_factor(m, j);
    if (m - j) % 2 == 1 {
        k = -k;
    }
    if m <= n {
        Rational::from(k)
    } else {
        Rational::from((k * (2 * n - m), Integer::from(n)))
    }
}

pub fn vp_weights(a: &FourierCoeffs, n: usize) -> Result<Vec<HiPrec>> {
    let p = 2 * n;
    if a.len() != p {
        return Err(SogError::LengthMismatch {
            expected: p,
            got: a.len(),
        });
    }
    let prec = a.a.iter().map(HiPrec::prec).max().unwrap_or(53);
    let n = n as u32;
    let weights = (0..p as u32)
        .map(|j| {
            let mut w = HiPrec::zero(prec);
            for m in j..p as u32 {
                if a.a[m as usize].is_zero() {
                    continue;
                }
                let c = HiPrec::from_rational(&multiplier(n, m, j), prec);
                w.add_mul(&c, &a.a[m as usize]);
            }
            w
        })
        .collect();
    Ok(weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_factors() {
        // T_2(2r-1) = 8r^2 - 8r + 1, T_3(2r-1) = 32r^3 - 48r^2 + 18r - 1
        assert_eq!(shifted_chebyshev_factor(2, 0), 1);
        assert_eq!(shifted_chebyshev_factor(2, 1), 8);
        assert_eq!(shifted_chebyshev_factor(2, 2), 8);
        assert_eq!(shifted_chebyshev_factor(3, 1), 18);
        assert_eq!(shifted_chebyshev_factor(3, 2), 48);
        assert_eq!(shifted_chebyshev_factor(3, 3), 32);
    }
}
