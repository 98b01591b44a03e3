use serde::{Deserialize, Serialize};

use super::{fourier_cosine_coeffs, vp_weights, FourierCoeffs, VpConfig};
use crate::decimal::Decimal;
use crate::error::{Result, SogError};
use crate::kernels::KernelSpec;
use crate::numerics::HiPrec;

/// Kernel name and parameters as stored alongside an approximant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelDescriptor {
    pub name: String,
    pub params: Vec<(String, Decimal)>,
}

impl KernelDescriptor {
    pub fn of(kernel: &KernelSpec) -> Self {
        KernelDescriptor {
            name: kernel.name().to_string(),
            params: kernel.params().to_vec(),
        }
    }

    pub fn to_kernel(&self) -> Result<KernelSpec> {
        KernelSpec::from_name(&self.name, &self.params)
    }
}

/// `f_p(x) = Σ_j w_j exp(-t_j x^2)` with `t_j = j / n_c`, `j = 0..2n-1`.
#[derive(Clone, Debug)]
pub struct SogApproximant {
    pub kernel: KernelDescriptor,
    pub config: VpConfig,
    pub weights: Vec<HiPrec>,
    pub exponents: Vec<HiPrec>,
    pub eps_inf: Option<f64>,
}

impl SogApproximant {
    /// Ladder approximant from its weights; exponents are `j / n_c`.
    pub fn from_weights(kernel: KernelDescriptor, config: VpConfig, weights: Vec<HiPrec>) -> Result<Self> {
        config.validate()?;
        if weights.len() != config.p() {
            return Err(SogError::LengthMismatch {
                expected: config.p(),
                got: weights.len(),
            });
        }
        let prec = config.precision_bits();
        let exponents = ladder(&config.n_c, weights.len(), prec);
        Ok(SogApproximant {
            kernel,
            config,
            weights,
            exponents,
            eps_inf: None,
        })
    }

    pub fn n(&self) -> usize {
        self.config.n
    }

    pub fn n_c(&self) -> &Decimal {
        &self.config.n_c
    }

    pub fn precision_bits(&self) -> u32 {
        self.config.precision_bits()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&HiPrec, &HiPrec)> {
        self.weights.iter().zip(&self.exponents)
    }

    /// `w_0`, the value at infinity.
    pub fn constant_term(&self) -> &HiPrec {
        &self.weights[0]
    }

    pub fn s_min(&self) -> HiPrec {
        self.config.s_min(self.precision_bits())
    }

    pub fn w_max(&self) -> HiPrec {
        let prec = self.precision_bits();
        self.weights
            .iter()
            .map(HiPrec::abs)
            .fold(HiPrec::zero(prec), |m, v| if v > m { v } else { m })
    }

    /// Evaluates by Horner's rule in `r = exp(-x^2 / n_c)` at the stored
    /// precision (or that of `x`, if higher).
    pub fn evaluate(&self, x: &HiPrec) -> HiPrec {
        let prec = self.precision_bits().max(x.prec());
        if self.weights.is_empty() {
            return HiPrec::zero(prec);
        }
        let r = ladder_ratio(x, &self.config.n_c, prec);
        let mut acc = HiPrec::zero(prec);
        for w in self.weights.iter().rev() {
            acc *= &r;
            acc += w;
        }
        acc
    }
}

/// `j / n_c` for `j < len`.
pub(crate) fn ladder(n_c: &Decimal, len: usize, prec: u32) -> Vec<HiPrec> {
    (0..len)
        .map(|j| {
            let q = rug::Rational::from(rug::Rational::from(j) / n_c.rational());
            HiPrec::from_rational(&q, prec)
        })
        .collect()
}

/// `exp(-x^2 / n_c)`.
pub(crate) fn ladder_ratio(x: &HiPrec, n_c: &Decimal, prec: u32) -> HiPrec {
    let inv = rug::Rational::from(n_c.rational().clone().recip());
    (-(x.with_prec(prec).sqr() * &HiPrec::from_rational(&inv, prec))).exp()
}

pub fn build_sog(kernel: &KernelSpec, config: &VpConfig) -> Result<SogApproximant> {
    let coeffs = fourier_cosine_coeffs(kernel, config)?;
    let weights = vp_weights(&coeffs, config.n)?;
    let approx = SogApproximant::from_weights(KernelDescriptor::of(kernel), config.clone(), weights)?;
    // evaluating the sum cancels about log2(w_max) bits
    let prec = approx.precision_bits();
    if let Some(e) = approx.w_max().exponent() {
        if e > prec as i32 - 64 {
            return Err(SogError::PrecisionTooLow {
                weight_exponent: e,
                precision: prec,
            });
        }
    }
    Ok(approx)
}

/// `Σ_{m<=n} a_m T_m(u) + Σ_{l<n} (1 - l/n) a_{n+l} T_{n+l}(u)` with
/// `u = 2 exp(-x^2/n_c) - 1`, by Clenshaw's recurrence.
pub fn evaluate_chebyshev_form(a: &FourierCoeffs, n: usize, n_c: &Decimal, x: &HiPrec) -> Result<HiPrec> {
    if a.len() != 2 * n {
        return Err(SogError::LengthMismatch {
            expected: 2 * n,
            got: a.len(),
        });
    }
    let prec = a.a.iter().map(HiPrec::prec).max().unwrap_or(53).max(x.prec());
    let inv = rug::Rational::from(n_c.rational().clone().recip());
    let y = x.with_prec(prec).sqr() * &HiPrec::from_rational(&inv, prec);
    // 2 e^-y - 1 = 1 + 2 (e^-y - 1)
    let u = (-y).exp_m1().mul_pow2(1) + 1;
    let two_u = u.mul_pow2(1);
    let coeff = |m: usize| -> HiPrec {
        if m <= n {
            a.a[m].clone()
        } else {
            &a.a[m] * &HiPrec::ratio((2 * n - m) as i64, n as i64, prec)
        }
    };
    let mut b1 = HiPrec::zero(prec);
    let mut b2 = HiPrec::zero(prec);
    for m in (1..2 * n).rev() {
        let mut b0 = &two_u * &b1;
        b0 -= &b2;
        b0 += &coeff(m);
        b2 = std::mem::replace(&mut b1, b0);
    }
    let mut out = &u * &b1;
    out -= &b2;
    out += &coeff(0);
    Ok(out)
}
