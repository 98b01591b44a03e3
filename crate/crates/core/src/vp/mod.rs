//! Sum-of-Gaussians approximants from the de la Vallée-Poussin sum.
//!
//! With `x = sqrt(-2 n_c ln cos(t/2))` a decaying kernel becomes a function
//! `phi(t) = f(x)` on `[0, pi]` with `phi(pi) = 0`. Its VP sum is a cosine
//! polynomial of degree `2n - 1`, which is a polynomial in
//! `r = exp(-x^2 / n_c)` and hence a sum of `2n` Gaussians with exponents
//! `j / n_c`.

mod approximant;
mod quadrature;
mod weights;

use crate::decimal::Decimal;
use crate::error::{Result, SogError};
use crate::numerics::{default_precision, HiPrec};

pub use approximant::{build_sog, evaluate_chebyshev_form, KernelDescriptor, SogApproximant};
pub use quadrature::{fourier_cosine_coeffs, FourierCoeffs};
pub use weights::{shifted_chebyshev_factor, vp_weights};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quadrature {
    /// Double-exponential rule, refined until the coefficients settle.
    Adaptive,
    /// Trapezoidal rule with this many intervals on `[0, pi]`.
    Fixed(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precision {
    Auto,
    Bits(u32),
}

#[derive(Clone, Debug, PartialEq)]
pub struct VpConfig {
    pub n: usize,
    pub n_c: Decimal,
    pub quadrature: Quadrature,
    pub precision: Precision,
}

impl VpConfig {
    pub fn new(n: usize, n_c: Decimal) -> Result<Self> {
        let cfg = VpConfig {
            n,
            n_c,
            quadrature: Quadrature::Adaptive,
            precision: Precision::Auto,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_precision(mut self, precision: Precision) -> Self {
        self.precision = precision;
        self
    }

    pub fn with_quadrature(mut self, quadrature: Quadrature) -> Self {
        self.quadrature = quadrature;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(SogError::InvalidParameter("n must be at least 1".into()));
        }
        if !self.n_c.is_positive() {
            return Err(SogError::InvalidParameter(format!("n_c must be positive, got {}", self.n_c)));
        }
        if let Precision::Bits(b) = self.precision {
            if b < 53 {
                return Err(SogError::InvalidParameter(format!("precision must be at least 53 bits, got {b}")));
            }
        }
        if let Quadrature::Fixed(0) = self.quadrature {
            return Err(SogError::InvalidParameter("quadrature needs at least one interval".into()));
        }
        Ok(())
    }

    pub fn precision_bits(&self) -> u32 {
        match self.precision {
            Precision::Auto => default_precision(self.n),
            Precision::Bits(b) => b,
        }
    }

    /// Number of Gaussians, `2n`.
    pub fn p(&self) -> usize {
        2 * self.n
    }

    /// `sqrt(n_c / (2n - 1))`.
    pub fn s_min(&self, prec: u32) -> HiPrec {
        (self.n_c.to_hiprec(prec) / (2 * self.n as i64 - 1)).sqrt()
    }
}

/// `x = sqrt(-2 n_c ln cos(t/2))`; `+inf` at `t = pi`.
pub fn map_t_to_x(t: &HiPrec, n_c: &Decimal) -> Result<HiPrec> {
    let prec = t.prec();
    let pi = HiPrec::pi(prec);
    if t.is_sign_negative() && !t.is_zero() || *t > pi {
        return Err(SogError::DomainError(format!("t = {} outside [0, pi]", t.to_sci(6))));
    }
    if *t == pi {
        return Ok(HiPrec::infinity(prec));
    }
    let s = &pi - t;
    Ok(x_from_angles(t, &s, n_c))
}

/// `x` from `t` and its complement `s = pi - t`, each accurate on its own
/// half of the interval.
pub(crate) fn x_from_angles(t: &HiPrec, s: &HiPrec, n_c: &Decimal) -> HiPrec {
    let prec = t.prec();
    if s.is_zero() {
        return HiPrec::infinity(prec);
    }
    let nc = n_c.to_hiprec(prec);
    let x2 = if *t <= *s {
        // ln cos^2(t/2) = ln(1 - sin^2(t/2))
        -(nc * (-t.mul_pow2(-1).sin().sqr()).ln_1p())
    } else {
        // cos(t/2) = sin(s/2)
        -(nc.mul_pow2(1) * s.mul_pow2(-1).sin().ln())
    };
    x2.abs().sqrt()
}

/// `t = arccos(2 exp(-x^2/n_c) - 1)`.
pub fn map_x_to_t(x: &HiPrec, n_c: &Decimal) -> Result<HiPrec> {
    let prec = x.prec();
    if x.is_sign_negative() && !x.is_zero() {
        return Err(SogError::DomainError(format!("x = {} is negative", x.to_sci(6))));
    }
    if !x.is_finite() {
        return Ok(HiPrec::pi(prec));
    }
    let y = x.sqr() / &n_c.to_hiprec(prec);
    // cos^2(t/2) = exp(-y), sin^2(t/2) = 1 - exp(-y)
    let sin2 = -(-&y).exp_m1();
    if sin2 <= 0.5 {
        Ok(sin2.sqrt().asin().mul_pow2(1))
    } else {
        Ok((-y.mul_pow2(-1)).exp().acos().mul_pow2(1))
    }
}
