//! Modified Bessel function of the second kind, `K_nu(x)`, in extended
//! precision.
//!
//! Moderate arguments use the ascending series, with the logarithmic form for
//! integer orders. Its terms grow like `e^x` while the result is of size
//! `e^-x`, so `2x / ln 2` extra bits are carried. Large arguments integrate
//! `K_nu(x) = ∫_0^∞ exp(-x cosh u) cosh(nu u) du` with the trapezoidal rule;
//! the integrand already decays double-exponentially, so halving the step
//! roughly doubles the number of correct digits.

use crate::error::{Result, SogError};
use crate::numerics::HiPrec;

const GUARD_BITS: u32 = 64;
const MAX_HALVINGS: usize = 40;

/// `K_nu(x)` for `nu >= 0`, `x > 0`, rounded to the precision of `x`.
pub fn bessel_k(nu: &HiPrec, x: &HiPrec) -> Result<HiPrec> {
    if x.is_sign_negative() || x.is_zero() || !x.is_finite() {
        return Err(SogError::DomainError(format!("bessel_k at x = {}", x.to_sci(6))));
    }
    let prec = x.prec();
    let scaled = scaled_bessel_k(&nu.abs(), x)?;
    let wp = prec + GUARD_BITS;
    let xw = x.with_prec(wp);
    Ok((scaled.with_prec(wp) / xw.pow(&nu.abs().with_prec(wp))).with_prec(prec))
}

/// `x^nu K_nu(x)` for `nu >= 0`, `x > 0`. Finite as `x -> 0` for `nu > 0`.
pub fn scaled_bessel_k(nu: &HiPrec, x: &HiPrec) -> Result<HiPrec> {
    if x.is_sign_negative() || x.is_zero() {
        return Err(SogError::DomainError(format!("bessel_k at x = {}", x.to_sci(6))));
    }
    let prec = x.prec();
    let xf = x.to_f64();
    let out = if xf <= series_limit(prec) {
        let wp = prec + GUARD_BITS + (2.0 * xf / std::f64::consts::LN_2).ceil() as u32;
        if nu.is_integer() {
            let m = nu.to_f64() as u32;
            integer_order_series(m, x, wp)
        } else {
            fractional_order_series(nu, x, wp)
        }
    } else {
        let wp = prec + GUARD_BITS;
        let k = integral(&nu.with_prec(wp), &x.with_prec(wp))?;
        k * &x.with_prec(wp).pow(&nu.with_prec(wp))
    };
    Ok(out.with_prec(prec))
}

/// Largest argument handled by the series at this precision.
fn series_limit(prec: u32) -> f64 {
    (prec as f64 * std::f64::consts::LN_2 / 2.0).max(2.0)
}

/// `x^m K_m(x)` from the logarithmic ascending series.
fn integer_order_series(m: u32, x: &HiPrec, wp: u32) -> HiPrec {
    let x = x.with_prec(wp);
    let half_x = x.mul_pow2(-1);
    let q = half_x.sqr(); // x^2 / 4
    let tiny = HiPrec::pow2(-(wp as i32), wp);

    // finite part: ½ (x/2)^{-m} Σ_{k<m} (m-k-1)!/k! (-q)^k, times x^m
    let mut finite = HiPrec::zero(wp);
    if m > 0 {
        let mut fact_ratio = factorial(m as u64 - 1, wp); // (m-1)!/0!
        let mut qpow = HiPrec::one(wp);
        for k in 0..m {
            let term = &fact_ratio * &qpow;
            if k % 2 == 0 {
                finite += &term;
            } else {
                finite -= &term;
            }
            if k + 1 < m {
                // (m-k-2)!/(k+1)! = (m-k-1)!/k! / ((m-k-1)(k+1))
                fact_ratio /= ((m - k - 1) as i64) * ((k + 1) as i64);
                qpow *= &q;
            }
        }
        finite = finite.mul_pow2(m as i32 - 1);
    }

    // I_m(x) and the digamma sum share the factor (x/2)^m q^k / (k!(m+k)!)
    let euler = HiPrec::euler_gamma(wp);
    let mut harmonic_k = HiPrec::zero(wp);
    let mut harmonic_mk = HiPrec::zero(wp);
    for j in 1..=m {
        harmonic_mk += &HiPrec::ratio(1, j as i64, wp);
    }
    let mut base = factorial(m as u64, wp).recip(); // 1/(0! m!)
    let mut i_sum = HiPrec::zero(wp);
    let mut psi_sum = HiPrec::zero(wp);
    let mut k: u64 = 0;
    loop {
        i_sum += &base;
        let psi = &harmonic_k + &harmonic_mk - euler.mul_pow2(1);
        psi_sum.add_mul(&psi, &base);
        k += 1;
        base *= &q;
        base /= (k * (m as u64 + k)) as i64;
        harmonic_k += &HiPrec::ratio(1, k as i64, wp);
        harmonic_mk += &HiPrec::ratio(1, (m as u64 + k) as i64, wp);
        if base.cmp_abs(&(&tiny * &i_sum)).is_lt() && k > 2 {
            break;
        }
    }
    // (x/2)^m I_m = (x/2)^{2m} i_sum
    let half_pow = half_x.powi(2 * m as i32);
    let log_term = {
        let t = &half_x.ln() * &(&half_pow * &i_sum);
        // (-1)^{m+1} ln(x/2) I_m(x) x^m, with x^m (x/2)^m = 2^m (x/2)^{2m}
        let t = t.mul_pow2(m as i32);
        if m % 2 == 0 {
            -t
        } else {
            t
        }
    };
    let psi_term = {
        let t = (&half_pow * &psi_sum).mul_pow2(m as i32 - 1);
        if m % 2 == 0 {
            t
        } else {
            -t
        }
    };
    finite + log_term + psi_term
}

/// `x^nu K_nu(x)` for non-integer `nu` via `I_{-nu}` and `I_nu`.
fn fractional_order_series(nu: &HiPrec, x: &HiPrec, wp: u32) -> HiPrec {
    // cancellation grows like 1/|sin(nu pi)|
    let dist = (nu - &nu.round()).abs();
    let extra = dist
        .exponent()
        .map_or(0, |e| (-e).max(0) as u32 + 8);
    let wp = wp + extra;
    let nu = nu.with_prec(wp);
    let x = x.with_prec(wp);
    let q = x.mul_pow2(-1).sqr();
    let tiny = HiPrec::pow2(-(wp as i32), wp);
    let one = HiPrec::one(wp);

    let series = |order: &HiPrec| -> HiPrec {
        // Σ q^k / (k! Γ(k + order + 1))
        let mut term = (order + &one).gamma().recip();
        let mut sum = HiPrec::zero(wp);
        let mut k: i64 = 0;
        loop {
            sum += &term;
            k += 1;
            term *= &q;
            term /= &(order + k) * &HiPrec::from_i64(k, wp);
            if term.cmp_abs(&(&tiny * &sum)).is_lt() && k > 2 {
                break;
            }
        }
        sum
    };
    let neg = series(&-&nu);
    let pos = series(&nu);
    let two_nu = HiPrec::from_i64(2, wp).pow(&nu);
    let lead = &two_nu * &neg;
    let trail = &(x.pow(&nu.mul_pow2(1)) / &two_nu) * &pos;
    let pi = HiPrec::pi(wp);
    let sin = (&nu * &pi).sin();
    (lead - trail) * &pi / sin.mul_pow2(1)
}

fn factorial(n: u64, prec: u32) -> HiPrec {
    let f = rug::Integer::from(rug::Integer::factorial(n as u32));
    HiPrec::from_integer(&f, prec)
}

/// Trapezoidal rule for `∫_0^∞ exp(-x cosh u) cosh(nu u) du`.
fn integral(nu: &HiPrec, x: &HiPrec) -> Result<HiPrec> {
    let wp = x.prec();
    let tol = HiPrec::pow2(-(wp as i32) / 2 - 16, wp);
    // initial step resolves the peak of width ~ 1/sqrt(x)
    let h0 = (0.5f64).min(1.0 / x.to_f64().sqrt().max(1e-300));
    let mut h = HiPrec::from_f64(h0, wp);
    let mut sum = integrand(nu, x, &HiPrec::zero(wp)).mul_pow2(-1);
    sum += &tail_sum(nu, x, &h, &h);
    let mut estimate = &sum * &h;
    for _ in 0..MAX_HALVINGS {
        let half = h.mul_pow2(-1);
        // odd multiples of the new step: (2k+1) * half
        let odd = tail_sum(nu, x, &h, &half);
        sum += &odd;
        let next = &sum * &half;
        let change = (&next - &estimate).abs();
        h = half;
        estimate = next;
        if change <= &tol * &estimate.abs() {
            return Ok(estimate);
        }
    }
    Err(SogError::ConvergenceFailure {
        stage: "bessel_k quadrature",
        iterations: MAX_HALVINGS,
    })
}

fn integrand(nu: &HiPrec, x: &HiPrec, u: &HiPrec) -> HiPrec {
    (-(x * &u.cosh())).exp() * &(nu * u).cosh()
}

/// Σ_{k>=0} f(start + k*stride), stopping once the integrand is past its
/// peak and negligible.
fn tail_sum(nu: &HiPrec, x: &HiPrec, stride: &HiPrec, start: &HiPrec) -> HiPrec {
    let wp = x.prec();
    let tiny = HiPrec::pow2(-(wp as i32) - 8, wp);
    let mut u = start.clone();
    let mut sum = HiPrec::zero(wp);
    let mut prev = HiPrec::zero(wp);
    // x sinh u > nu past asinh(nu/x), where the integrand is decreasing
    let peak = (nu / x).to_f64().asinh();
    loop {
        let f = integrand(nu, x, &u);
        sum += &f;
        if u.to_f64() > peak && f <= prev && f <= &tiny * &sum {
            break;
        }
        prev = f;
        u += stride;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hp(v: f64, prec: u32) -> HiPrec {
        HiPrec::from_f64(v, prec)
    }

    #[test]
    fn half_order_closed_form() {
        let prec = 256;
        let nu = HiPrec::ratio(1, 2, prec);
        for x in [0.01, 0.3, 1.5, 2.0, 2.5, 7.0, 40.0] {
            let x = hp(x, prec);
            let k = bessel_k(&nu, &x).unwrap();
            let exact = (HiPrec::pi(prec) / x.mul_pow2(1)).sqrt() * (-&x).exp();
            let rel = ((&k - &exact) / &exact).abs();
            assert!(rel < HiPrec::pow2(-240, prec), "x={x:?} rel={rel:?}");
        }
    }

    #[test]
    fn domain_error() {
        let nu = hp(1.0, 64);
        assert!(bessel_k(&nu, &hp(0.0, 64)).is_err());
        assert!(bessel_k(&nu, &hp(-1.0, 64)).is_err());
    }

    #[test]
    fn series_and_integral_agree() {
        let prec = 200;
        for (nu, x) in [(0.0, 2.0), (1.0, 9.0), (2.0, 30.0), (0.75, 2.0), (3.5, 60.0)] {
            let nu = hp(nu, prec);
            let wp = prec + GUARD_BITS + (3.0 * x) as u32;
            let x = hp(x, prec);
            let series = if nu.is_integer() {
                integer_order_series(nu.to_f64() as u32, &x, wp)
            } else {
                fractional_order_series(&nu, &x, wp)
            };
            let quad = integral(&nu.with_prec(wp), &x.with_prec(wp)).unwrap()
                * &x.with_prec(wp).pow(&nu.with_prec(wp));
            let rel = ((&series - &quad) / &quad).abs();
            assert!(rel < HiPrec::pow2(-(prec as i32), wp), "nu={nu:?} rel={rel:?}");
        }
    }
}
