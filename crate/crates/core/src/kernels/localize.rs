//! Cutting a kernel off smoothly so that it decays.

use super::KernelSpec;
use crate::decimal::Decimal;
use crate::error::{Result, SogError};
use crate::numerics::HiPrec;

/// `base(x) * w(x)` with a C-infinity window that is 1 on `[0, x_c]` and 0
/// from `x_c + delta` on. Accuracy of an approximant beyond `x_c` is not
/// meaningful.
#[derive(Clone, Debug)]
pub struct LocalizedKernel {
    base: KernelSpec,
    x_c: Decimal,
    delta: Decimal,
}

pub fn localize(base: KernelSpec, x_c: Decimal, delta: Decimal) -> Result<LocalizedKernel> {
    if !x_c.is_positive() || !delta.is_positive() {
        return Err(SogError::InvalidParameter(format!(
            "localization needs x_c > 0 and delta > 0, got x_c={x_c}, delta={delta}"
        )));
    }
    Ok(LocalizedKernel { base, x_c, delta })
}

/// Smooth step from 1 at `u <= 0` to 0 at `u >= 1`:
/// `g(1-u) / (g(1-u) + g(u))` with `g(s) = exp(-1/s)`.
pub fn window(u: &HiPrec) -> HiPrec {
    let prec = u.prec();
    if *u <= 0.0 {
        return HiPrec::one(prec);
    }
    if *u >= 1.0 {
        return HiPrec::zero(prec);
    }
    let one = HiPrec::one(prec);
    let v = &one - u;
    // g(v)/(g(v)+g(u)) = 1/(1 + exp(1/v - 1/u))
    let e = (v.recip() - u.recip()).exp();
    (one + e).recip()
}

impl LocalizedKernel {
    pub fn base(&self) -> &KernelSpec {
        &self.base
    }

    pub fn x_c(&self) -> &Decimal {
        &self.x_c
    }

    pub fn delta(&self) -> &Decimal {
        &self.delta
    }

    pub fn into_kernel(self) -> KernelSpec {
        KernelSpec::localized(self)
    }

    pub fn eval(&self, x: &HiPrec) -> Result<HiPrec> {
        let prec = x.prec();
        let xc = self.x_c.to_hiprec(prec);
        if *x <= xc {
            return self.base.eval(x);
        }
        let u = (x - &xc) / &self.delta.to_hiprec(prec);
        if u >= 1.0 {
            return Ok(HiPrec::zero(prec));
        }
        Ok(self.base.eval(x)? * &window(&u))
    }
}
