//! Radial kernels `f(x)`, `x >= 0`.

mod bessel;
mod localize;

use std::fmt;
use std::sync::Arc;

use crate::decimal::Decimal;
use crate::error::{Result, SogError};
use crate::numerics::HiPrec;

pub use bessel::{bessel_k, scaled_bessel_k};
pub use localize::{localize, window, LocalizedKernel};

pub type KernelFn = dyn Fn(&HiPrec) -> Result<HiPrec> + Send + Sync;

#[derive(Clone)]
enum Rule {
    Gaussian { h: Decimal },
    Imq,
    Ewald { alpha: Decimal },
    Matern { nu: Decimal },
    Exponential,
    Localized(Arc<LocalizedKernel>),
    Custom(Custom),
}

#[derive(Clone)]
struct Custom {
    f: Arc<KernelFn>,
    decays: bool,
    f_at_zero: Option<HiPrec>,
    fprime_at_zero: Option<HiPrec>,
}

/// A named radial kernel with its parameters.
#[derive(Clone)]
pub struct KernelSpec {
    name: String,
    params: Vec<(String, Decimal)>,
    rule: Rule,
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KernelSpec({}", self.name)?;
        for (k, v) in &self.params {
            write!(f, ", {k}={v}")?;
        }
        f.write_str(")")
    }
}

fn positive(name: &str, v: &Decimal) -> Result<()> {
    if v.is_positive() {
        Ok(())
    } else {
        Err(SogError::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

/// `exp(-x^2 / h^2)`.
pub fn gaussian_kernel(h: Decimal) -> Result<KernelSpec> {
    positive("h", &h)?;
    Ok(KernelSpec {
        name: "gauss".into(),
        params: vec![("h".into(), h.clone())],
        rule: Rule::Gaussian { h },
    })
}

/// `(1/2 + x^2)^(-1/2)`.
pub fn imq_kernel() -> KernelSpec {
    KernelSpec {
        name: "imq".into(),
        params: Vec::new(),
        rule: Rule::Imq,
    }
}

/// `erf(alpha x) / x`, with value `2 alpha / sqrt(pi)` at the origin.
pub fn ewald_kernel(alpha: Decimal) -> Result<KernelSpec> {
    positive("alpha", &alpha)?;
    Ok(KernelSpec {
        name: "ewald".into(),
        params: vec![("alpha".into(), alpha.clone())],
        rule: Rule::Ewald { alpha },
    })
}

/// Matérn kernel `(sqrt(2nu) x)^nu K_nu(sqrt(2nu) x) / (2^(nu-1) Gamma(nu))`,
/// normalized to 1 at the origin.
pub fn matern_kernel(nu: Decimal) -> Result<KernelSpec> {
    positive("nu", &nu)?;
    Ok(KernelSpec {
        name: "matern".into(),
        params: vec![("nu".into(), nu.clone())],
        rule: Rule::Matern { nu },
    })
}

/// `exp(-x)`.
pub fn exponential_kernel() -> KernelSpec {
    KernelSpec {
        name: "exp".into(),
        params: Vec::new(),
        rule: Rule::Exponential,
    }
}

impl KernelSpec {
    /// A user kernel. When `decays` is claimed it is spot-checked on a few
    /// far-out points and a warning is logged if the samples disagree.
    pub fn custom<F>(name: &str, f: F, decays: bool, f_at_zero: Option<HiPrec>) -> KernelSpec
    where
        F: Fn(&HiPrec) -> Result<HiPrec> + Send + Sync + 'static,
    {
        let spec = KernelSpec {
            name: name.to_string(),
            params: Vec::new(),
            rule: Rule::Custom(Custom {
                f: Arc::new(f),
                decays,
                f_at_zero,
                fprime_at_zero: None,
            }),
        };
        if decays {
            spec.check_decay();
        }
        spec
    }

    /// Attaches `f'(0)` to a custom kernel; no effect on built-ins.
    pub fn with_fprime_at_zero(mut self, d: HiPrec) -> KernelSpec {
        if let Rule::Custom(c) = &mut self.rule {
            c.fprime_at_zero = Some(d);
        }
        self
    }

    fn check_decay(&self) {
        let prec = 64;
        let samples: Vec<f64> = [1.0, 1e1, 1e2, 1e3, 1e4, 1e6]
            .iter()
            .map(|&x| match self.eval(&HiPrec::from_f64(x, prec)) {
                Ok(v) => v.to_f64().abs(),
                Err(_) => f64::NAN,
            })
            .collect();
        let head = samples[0].max(samples[1]);
        let last = samples[samples.len() - 1];
        let monotone_tail = samples[2..].windows(2).all(|w| w[1] <= w[0]);
        if !(last <= 1e-3 * head.max(f64::MIN_POSITIVE)) || !monotone_tail {
            log::warn!(
                "kernel '{}' is declared decaying but samples at x = 1..1e6 are {:?}",
                self.name,
                samples
            );
        }
    }

    /// Builds a kernel from its identifier. `xc` and `delta` among the
    /// parameters request localization of the named kernel.
    pub fn from_name(name: &str, params: &[(String, Decimal)]) -> Result<KernelSpec> {
        let mut xc = None;
        let mut delta = None;
        let mut rest = Vec::new();
        for (k, v) in params {
            match k.as_str() {
                "xc" | "x_c" => xc = Some(v.clone()),
                "delta" => delta = Some(v.clone()),
                _ => rest.push((k.clone(), v.clone())),
            }
        }
        let take = |key: &str| -> Result<Decimal> {
            rest.iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| SogError::InvalidParameter(format!("kernel '{name}' needs parameter {key}")))
        };
        let allowed: &[&str] = match name {
            "gauss" | "gaussian" => &["h"],
            "ewald" => &["alpha"],
            "matern" => &["nu"],
            _ => &[],
        };
        if let Some((k, _)) = rest.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(SogError::InvalidParameter(format!("kernel '{name}' has no parameter {k}")));
        }
        let base = match name {
            "gauss" | "gaussian" => gaussian_kernel(take("h")?)?,
            "imq" => imq_kernel(),
            "ewald" => ewald_kernel(take("alpha")?)?,
            "matern" => matern_kernel(take("nu")?)?,
            "exp" | "exponential" => exponential_kernel(),
            _ => return Err(SogError::InvalidParameter(format!("unknown kernel '{name}'"))),
        };
        match (xc, delta) {
            (None, None) => Ok(base),
            (Some(xc), Some(delta)) => Ok(localize(base, xc, delta)?.into_kernel()),
            _ => Err(SogError::InvalidParameter(
                "localization needs both xc and delta".into(),
            )),
        }
    }

    pub(crate) fn localized(inner: LocalizedKernel) -> KernelSpec {
        let mut params = inner.base().params.clone();
        params.push(("xc".into(), inner.x_c().clone()));
        params.push(("delta".into(), inner.delta().clone()));
        KernelSpec {
            name: inner.base().name.clone(),
            params,
            rule: Rule::Localized(Arc::new(inner)),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[(String, Decimal)] {
        &self.params
    }

    pub fn is_custom(&self) -> bool {
        matches!(self.rule, Rule::Custom(_))
    }

    /// `f(x)` at the precision of `x`.
    pub fn eval(&self, x: &HiPrec) -> Result<HiPrec> {
        if x.is_sign_negative() && !x.is_zero() {
            return Err(SogError::DomainError(format!("kernel evaluated at x = {}", x.to_sci(6))));
        }
        let prec = x.prec();
        if x.is_zero() {
            return self.f_at_zero(prec);
        }
        match &self.rule {
            Rule::Gaussian { h } => {
                let inv_h2 = rug::Rational::from(h.rational().clone().recip().square());
                Ok((-(x.sqr() * &HiPrec::from_rational(&inv_h2, prec))).exp())
            }
            Rule::Imq => Ok((x.sqr() + &HiPrec::ratio(1, 2, prec)).sqrt().recip()),
            Rule::Ewald { alpha } => {
                let a = alpha.to_hiprec(prec);
                let z = &a * x;
                if z < 1e-4 {
                    Ok(erf_over_z_series(&z) * &a)
                } else {
                    Ok(z.erf() / x)
                }
            }
            Rule::Matern { nu } => {
                let wp = prec + 32;
                let nu = nu.to_hiprec(wp);
                let z = (nu.mul_pow2(1)).sqrt() * &x.with_prec(wp);
                let num = scaled_bessel_k(&nu, &z)?;
                let den = HiPrec::from_i64(2, wp).pow(&(&nu - 1)) * &nu.gamma();
                Ok((num / den).with_prec(prec))
            }
            Rule::Exponential => Ok((-x).exp()),
            Rule::Localized(l) => l.eval(x),
            Rule::Custom(c) => Ok((c.f)(x)?.with_prec(prec)),
        }
    }

    /// `f(0)`.
    pub fn f_at_zero(&self, prec: u32) -> Result<HiPrec> {
        match &self.rule {
            Rule::Gaussian { .. } | Rule::Matern { .. } | Rule::Exponential => Ok(HiPrec::one(prec)),
            Rule::Imq => Ok(HiPrec::from_i64(2, prec).sqrt()),
            Rule::Ewald { alpha } => {
                Ok(alpha.to_hiprec(prec).mul_pow2(1) / HiPrec::pi(prec).sqrt())
            }
            Rule::Localized(l) => l.base().f_at_zero(prec),
            Rule::Custom(c) => match &c.f_at_zero {
                Some(v) => Ok(v.with_prec(prec)),
                None => Ok((c.f)(&HiPrec::zero(prec))?.with_prec(prec)),
            },
        }
    }

    /// One-sided derivative `f'(0+)`, where it exists.
    pub fn fprime_at_zero(&self, prec: u32) -> Option<HiPrec> {
        match &self.rule {
            Rule::Gaussian { .. } | Rule::Imq | Rule::Ewald { .. } => Some(HiPrec::zero(prec)),
            Rule::Matern { nu } => {
                let half = rug::Rational::from((1, 2));
                if *nu.rational() > half {
                    Some(HiPrec::zero(prec))
                } else if *nu.rational() == half {
                    Some(HiPrec::from_i64(-1, prec))
                } else {
                    None
                }
            }
            Rule::Exponential => Some(HiPrec::from_i64(-1, prec)),
            Rule::Localized(l) => l.base().fprime_at_zero(prec),
            Rule::Custom(c) => c.fprime_at_zero.as_ref().map(|d| d.with_prec(prec)),
        }
    }

    /// Whether `f(x) -> 0` as `x -> infinity`.
    pub fn decays(&self) -> bool {
        match &self.rule {
            Rule::Custom(c) => c.decays,
            _ => true,
        }
    }

    /// A point beyond which `|f(x)| < 2^-prec` and `|f|` is non-increasing.
    ///
    /// Gaussian: `h sqrt((prec+1) ln 2)`. Exponential: `(prec+1) ln 2`.
    /// IMQ and Ewald (both bounded by `1/x`): `2^(prec+1)`. Matérn: from
    /// `K_nu(z) <= sqrt(pi/(2z)) e^-z (1 + nu^2/z)`. Localized: `x_c + delta`.
    /// `None` for custom kernels.
    pub fn x_decay(&self, prec: u32) -> Option<HiPrec> {
        let bits = (prec + 1) as i64;
        let ln2 = HiPrec::ln2(prec);
        match &self.rule {
            Rule::Gaussian { h } => Some(h.to_hiprec(prec) * (HiPrec::from_i64(bits, prec) * &ln2).sqrt()),
            Rule::Exponential => Some(HiPrec::from_i64(bits, prec) * &ln2),
            Rule::Imq | Rule::Ewald { .. } => Some(HiPrec::pow2(prec as i32 + 1, prec)),
            Rule::Matern { nu } => {
                let nu = nu.to_f64();
                let target = bits as f64 * std::f64::consts::LN_2;
                let norm = (nu - 1.0) * std::f64::consts::LN_2 + ln_gamma(nu);
                let log_bound = |z: f64| {
                    nu * z.ln() + 0.5 * (std::f64::consts::PI / (2.0 * z)).ln() - z
                        + (1.0 + nu * nu / z).ln()
                        - norm
                };
                let mut z = (2.0 * nu * nu).max(nu + 1.0).max(1.0);
                while log_bound(z) > -target {
                    z *= 1.25;
                }
                Some(HiPrec::from_f64(z / (2.0 * nu).sqrt(), prec))
            }
            Rule::Localized(l) => {
                let end = rug::Rational::from(l.x_c().rational() + l.delta().rational());
                Some(HiPrec::from_rational(&end, prec))
            }
            Rule::Custom(_) => None,
        }
    }
}

/// `erf(z)/z = 2/sqrt(pi) Σ (-1)^k z^(2k) / (k! (2k+1))`.
fn erf_over_z_series(z: &HiPrec) -> HiPrec {
    let prec = z.prec();
    let z2 = z.sqr();
    let tiny = HiPrec::pow2(-(prec as i32) - 4, prec);
    let mut power = HiPrec::one(prec);
    let mut sum = HiPrec::zero(prec);
    let mut k: i64 = 0;
    loop {
        let term = &power / (2 * k + 1);
        if term.cmp_abs(&tiny).is_lt() {
            break;
        }
        sum += &term;
        k += 1;
        power *= &z2;
        power /= -k;
    }
    sum.mul_pow2(1) / HiPrec::pi(prec).sqrt()
}

fn ln_gamma(x: f64) -> f64 {
    HiPrec::from_f64(x, 64).gamma().ln().to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> Decimal {
        s.parse().unwrap()
    }

    #[test]
    fn ewald_series_matches_erf() {
        let prec = 256;
        let z = HiPrec::from_f64(3e-5, prec);
        let direct = z.erf() / &z;
        let series = erf_over_z_series(&z);
        assert!(((direct - &series) / &series).abs() < HiPrec::pow2(-240, prec));
    }

    #[test]
    fn from_name_rejects_bad_input() {
        assert!(KernelSpec::from_name("nope", &[]).is_err());
        assert!(KernelSpec::from_name("gauss", &[]).is_err());
        assert!(KernelSpec::from_name("imq", &[("h".into(), d("1"))]).is_err());
        assert!(KernelSpec::from_name("gauss", &[("h".into(), d("-1"))]).is_err());
        assert!(KernelSpec::from_name("imq", &[("xc".into(), d("1"))]).is_err());
        let k = KernelSpec::from_name("imq", &[("xc".into(), d("1")), ("delta".into(), d("0.5"))]).unwrap();
        assert_eq!(k.params().len(), 2);
    }
}
