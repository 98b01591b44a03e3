//! Cosine coefficients of `phi(t) = f(x(t))` on `[0, pi]`.

use rayon::prelude::*;

use super::{x_from_angles, Quadrature, VpConfig};
use crate::error::{Result, SogError};
use crate::kernels::KernelSpec;
use crate::numerics::HiPrec;

const GUARD_BITS: u32 = 64;
const CHUNK: usize = 32;
const MAX_LEVELS: usize = 14;

/// `a_0 = (1/pi) ∫ phi`, `a_k = (2/pi) ∫ phi cos(kt)` over `[0, pi]`,
/// `k = 0..2n-1`.
#[derive(Clone, Debug)]
pub struct FourierCoeffs {
    pub a: Vec<HiPrec>,
    /// Largest `|a_k|` over the last tenth of the indices.
    pub tail_estimate: HiPrec,
    /// Quadrature nodes used, for reporting.
    pub nodes: usize,
}

impl FourierCoeffs {
    pub fn from_vec(a: Vec<HiPrec>) -> Self {
        let prec = a.first().map_or(53, HiPrec::prec);
        let tail = tail_estimate(&a, prec);
        FourierCoeffs {
            a,
            tail_estimate: tail,
            nodes: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }
}

fn tail_estimate(a: &[HiPrec], prec: u32) -> HiPrec {
    let start = a.len() - a.len().div_ceil(10).min(a.len());
    a[start..]
        .iter()
        .map(HiPrec::abs)
        .fold(HiPrec::zero(prec), |m, v| if v > m { v } else { m })
}

pub fn fourier_cosine_coeffs(kernel: &KernelSpec, config: &VpConfig) -> Result<FourierCoeffs> {
    config.validate()?;
    if !kernel.decays() {
        return Err(SogError::NonDecayingKernel(format!(
            "kernel '{}' does not vanish at infinity; localize it first",
            kernel.name()
        )));
    }
    let prec = config.precision_bits();
    let count = config.p();
    let (raw, nodes) = match config.quadrature {
        Quadrature::Fixed(intervals) => (trapezoid(kernel, config, count, intervals, quadrature_bits(prec))?, intervals + 1),
        Quadrature::Adaptive => double_exponential(kernel, config, count, prec)?,
    };
    let a: Vec<HiPrec> = raw.into_iter().map(|v| v.with_prec(prec)).collect();
    let tail = tail_estimate(&a, prec);
    Ok(FourierCoeffs {
        a,
        tail_estimate: tail,
        nodes,
    })
}

/// The coefficients are only resolved to `2^-prec/2`, so the sums run at
/// half the build precision plus guard bits.
fn quadrature_bits(prec: u32) -> u32 {
    prec / 2 + GUARD_BITS
}

/// A node `t` with complement `s = pi - t` and quadrature weight.
struct Node {
    t: HiPrec,
    s: HiPrec,
    weight: HiPrec,
}

/// `Σ weight * phi(t) * cos(k t)` for `k < count`, summed chunk by chunk in a
/// fixed order.
fn weighted_sums(kernel: &KernelSpec, config: &VpConfig, nodes: &[Node], count: usize, wp: u32) -> Result<Vec<HiPrec>> {
    let partials: Vec<Result<Vec<HiPrec>>> = nodes
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = vec![HiPrec::zero(wp); count];
            for node in chunk {
                if node.weight.is_zero() {
                    continue;
                }
                let x = x_from_angles(&node.t, &node.s, &config.n_c);
                if !x.is_finite() {
                    continue;
                }
                let phi = kernel.eval(&x)?;
                let g = &phi * &node.weight;
                if g.is_zero() {
                    continue;
                }
                // cos t = 1 - 2 sin^2(t/2) = -(1 - 2 sin^2(s/2))
                let cos_t = if node.t <= node.s {
                    HiPrec::one(wp) - node.t.mul_pow2(-1).sin().sqr().mul_pow2(1)
                } else {
                    node.s.mul_pow2(-1).sin().sqr().mul_pow2(1) - 1
                };
                let two_cos = cos_t.mul_pow2(1);
                let mut prev = HiPrec::one(wp);
                let mut cur = cos_t;
                acc[0] += &g;
                for (k, slot) in acc.iter_mut().enumerate().skip(1) {
                    slot.add_mul(&g, &cur);
                    if k + 1 < count {
                        let mut next = &two_cos * &cur;
                        next -= &prev;
                        prev = std::mem::replace(&mut cur, next);
                    }
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total = vec![HiPrec::zero(wp); count];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part?) {
            *t += &p;
        }
    }
    Ok(total)
}

fn normalize(sums: Vec<HiPrec>, scale: &HiPrec) -> Vec<HiPrec> {
    let prec = scale.prec();
    let pi = HiPrec::pi(prec);
    sums.into_iter()
        .enumerate()
        .map(|(k, s)| {
            let v = s * scale / &pi;
            if k == 0 {
                v
            } else {
                v.mul_pow2(1)
            }
        })
        .collect()
}

/// Trapezoidal rule on `intervals` equal steps (a type-I DCT), `phi(pi) = 0`.
fn trapezoid(kernel: &KernelSpec, config: &VpConfig, count: usize, intervals: usize, wp: u32) -> Result<Vec<HiPrec>> {
    let pi = HiPrec::pi(wp);
    let nodes: Vec<Node> = (0..intervals)
        .map(|j| Node {
            t: &pi * &HiPrec::ratio(j as i64, intervals as i64, wp),
            s: &pi * &HiPrec::ratio((intervals - j) as i64, intervals as i64, wp),
            weight: if j == 0 { HiPrec::ratio(1, 2, wp) } else { HiPrec::one(wp) },
        })
        .collect();
    let sums = weighted_sums(kernel, config, &nodes, count, wp)?;
    let h = &pi / intervals as i64;
    Ok(normalize(sums, &h))
}

/// Nodes `t = pi / (1 + exp(-pi sinh u))` at `u = k h` for the given `k`,
/// weighted by `dt/du = cosh(u) t s`.
fn de_nodes(ks: impl Iterator<Item = i64>, h: &HiPrec) -> Vec<Node> {
    let wp = h.prec();
    let pi = HiPrec::pi(wp);
    ks.map(|k| {
        let u = h * &HiPrec::from_i64(k, wp);
        let v = &pi * &u.sinh();
        // t = pi/(1+e^-v), s = pi/(1+e^v)
        let t = &pi / &((-&v).exp() + 1);
        let s = &pi / &(v.exp() + 1);
        let weight = u.cosh() * &t * &s;
        Node { t, s, weight }
    })
    .collect()
}

/// Largest `u` at which the double-exponential weight still exceeds
/// `2^-bits`.
fn de_cutoff(bits: u32) -> f64 {
    let target = bits as f64 * std::f64::consts::LN_2;
    let log_weight = |u: f64| {
        let v = std::f64::consts::PI * u.sinh();
        u.cosh().ln() + 2.0 * std::f64::consts::PI.ln() - v
    };
    let mut u = 1.0;
    while log_weight(u) > -target {
        u += 0.0625;
    }
    u
}

fn double_exponential(kernel: &KernelSpec, config: &VpConfig, count: usize, prec: u32) -> Result<(Vec<HiPrec>, usize)> {
    let wp = quadrature_bits(prec);
    let u_max = de_cutoff(wp + 16);
    let mut h = HiPrec::ratio(1, 4, wp);
    let k_max = |h: &HiPrec| (u_max / h.to_f64()).ceil() as i64;

    let first = de_nodes(-k_max(&h)..=k_max(&h), &h);
    let mut nodes = first.len();
    let mut sums = weighted_sums(kernel, config, &first, count, wp)?;
    let mut estimate = normalize(sums.clone(), &h);
    let mut last_change: Option<HiPrec> = None;
    for _ in 0..MAX_LEVELS {
        h = h.mul_pow2(-1);
        let km = k_max(&h);
        let odd = de_nodes((-km..=km).filter(|k| k % 2 != 0), &h);
        nodes += odd.len();
        let extra = weighted_sums(kernel, config, &odd, count, wp)?;
        for (s, e) in sums.iter_mut().zip(extra) {
            *s += &e;
        }
        let next = normalize(sums.clone(), &h);
        let scale = next
            .iter()
            .map(HiPrec::abs)
            .fold(HiPrec::zero(wp), |m, v| if v > m { v } else { m });
        let change = next
            .iter()
            .zip(&estimate)
            .map(|(a, b)| (a - b).abs())
            .fold(HiPrec::zero(wp), |m, v| if v > m { v } else { m })
            / &scale;
        estimate = next;
        let tol = HiPrec::pow2(-(prec as i32) / 2, wp);
        // the error roughly squares with every halving once the rule is in
        // its asymptotic regime
        let squared_ok = last_change
            .as_ref()
            .is_some_and(|prev| change.sqr() <= tol && change <= prev.pow(&HiPrec::from_f64(1.5, wp)));
        if change <= tol || squared_ok {
            return Ok((estimate, nodes));
        }
        last_change = Some(change);
    }
    Err(SogError::QuadratureNotConverged {
        last_change: last_change.map_or(f64::NAN, |c| c.to_f64()),
        nodes,
    })
}
