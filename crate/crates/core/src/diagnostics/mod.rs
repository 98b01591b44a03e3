//! Error metrics and experiment drivers.
//!
//! Monitoring points are drawn with ChaCha8 (`rand_chacha::ChaCha8Rng`)
//! seeded by `seed_from_u64(seed)`: `x_i = lo + (hi - lo) * u_i` where `u_i` is
//! the `i`-th `gen::<f64>()` draw, uniform on `[0, 1)`. The default seed is
//! [`DEFAULT_SEED`].

use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decimal::Decimal;
use crate::error::{Result, SogError};
use crate::kernels::KernelSpec;
use crate::numerics::HiPrec;
use crate::reduction::ReducedSog;
use crate::vp::{build_sog, Precision, SogApproximant, VpConfig};

pub const DEFAULT_SEED: u64 = 2021;
pub const DEFAULT_POINTS: usize = 1000;

/// Anything that can be evaluated against a kernel.
pub trait Approximant: Sync {
    fn value(&self, x: &HiPrec) -> HiPrec;
    fn precision_bits(&self) -> u32;
    fn max_weight(&self) -> HiPrec;
    /// Smallest Gaussian bandwidth `1/sqrt(max |t|)`.
    fn min_bandwidth(&self) -> HiPrec;
}

impl Approximant for SogApproximant {
    fn value(&self, x: &HiPrec) -> HiPrec {
        self.evaluate(x)
    }
    fn precision_bits(&self) -> u32 {
        SogApproximant::precision_bits(self)
    }
    fn max_weight(&self) -> HiPrec {
        self.w_max()
    }
    fn min_bandwidth(&self) -> HiPrec {
        self.s_min()
    }
}

impl Approximant for ReducedSog {
    fn value(&self, x: &HiPrec) -> HiPrec {
        self.evaluate(x)
    }
    fn precision_bits(&self) -> u32 {
        self.precision_bits
    }
    fn max_weight(&self) -> HiPrec {
        self.w_max()
    }
    fn min_bandwidth(&self) -> HiPrec {
        self.s_min_modulus()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
}

impl Default for Domain {
    fn default() -> Self {
        Domain { lo: 0.0, hi: 1.0 }
    }
}

impl Domain {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
            return Err(SogError::InvalidParameter(format!("domain [{lo}, {hi}] must satisfy 0 <= lo <= hi")));
        }
        Ok(Domain { lo, hi })
    }

    pub fn up_to(x_max: f64) -> Result<Self> {
        Domain::new(0.0, x_max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub eps_inf: f64,
    pub m: usize,
    pub domain: Domain,
    /// `None` for the equispaced grid.
    pub seed: Option<u64>,
    pub argmax_x: f64,
    pub w_max: f64,
    pub s_min: f64,
}

pub fn random_points(m: usize, domain: Domain, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..m)
        .map(|_| {
            let u: f64 = rng.gen();
            (domain.lo + (domain.hi - domain.lo) * u).min(domain.hi)
        })
        .collect()
}

/// `m` equispaced points including both ends.
pub fn grid_points(m: usize, domain: Domain) -> Vec<f64> {
    if m == 1 {
        return vec![domain.lo];
    }
    (0..m)
        .map(|i| domain.lo + (domain.hi - domain.lo) * i as f64 / (m - 1) as f64)
        .collect()
}

/// `max_i |f_p(x_i) - f(x_i)| / max_i |f(x_i)|` over `m` random points.
pub fn max_relative_error<A: Approximant + ?Sized>(
    approx: &A,
    kernel: &KernelSpec,
    m: usize,
    domain: Domain,
    seed: u64,
) -> Result<ErrorReport> {
    if m == 0 {
        return Err(SogError::InvalidParameter("need at least one monitoring point".into()));
    }
    let mut report = error_at(approx, kernel, &random_points(m, domain, seed))?;
    report.domain = domain;
    report.seed = Some(seed);
    Ok(report)
}

/// Same metric on `m` equispaced points.
pub fn grid_relative_error<A: Approximant + ?Sized>(
    approx: &A,
    kernel: &KernelSpec,
    m: usize,
    domain: Domain,
) -> Result<ErrorReport> {
    if m == 0 {
        return Err(SogError::InvalidParameter("need at least one monitoring point".into()));
    }
    let mut report = error_at(approx, kernel, &grid_points(m, domain))?;
    report.domain = domain;
    Ok(report)
}

fn error_at<A: Approximant + ?Sized>(approx: &A, kernel: &KernelSpec, xs: &[f64]) -> Result<ErrorReport> {
    let prec = approx.precision_bits();
    let values: Vec<(HiPrec, HiPrec)> = xs
        .par_iter()
        .map(|&x| {
            let xh = HiPrec::from_f64(x, prec);
            let f = kernel.eval(&xh)?;
            let d = (approx.value(&xh) - &f).abs();
            Ok((d, f.abs()))
        })
        .collect::<Result<_>>()?;
    let mut worst = 0;
    let mut f_max = HiPrec::zero(prec);
    for (i, (d, f)) in values.iter().enumerate() {
        if *d > values[worst].0 {
            worst = i;
        }
        if *f > f_max {
            f_max = f.clone();
        }
    }
    let eps = if f_max.is_zero() {
        f64::INFINITY
    } else {
        (&values[worst].0 / &f_max).to_f64()
    };
    Ok(ErrorReport {
        eps_inf: eps,
        m: xs.len(),
        domain: Domain::default(),
        seed: None,
        argmax_x: xs[worst],
        w_max: approx.max_weight().to_f64(),
        s_min: approx.min_bandwidth().to_f64(),
    })
}

/// How `n_c` follows `n` in a sweep over `p = 2n`.
#[derive(Clone, Debug, PartialEq)]
pub enum NcPolicy {
    Fixed(Decimal),
    /// `n_c = ceil(n / 4)`, which keeps `s_min` nearly constant.
    QuarterN,
}

impl NcPolicy {
    pub fn n_c(&self, n: usize) -> Decimal {
        match self {
            NcPolicy::Fixed(v) => v.clone(),
            NcPolicy::QuarterN => Decimal::from_int(n.div_ceil(4) as i64),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepOptions {
    pub m: usize,
    pub seed: u64,
    pub domain: Domain,
    pub precision: Precision,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            m: DEFAULT_POINTS,
            seed: DEFAULT_SEED,
            domain: Domain::default(),
            precision: Precision::Auto,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub swept_var: f64,
    pub p: usize,
    pub n_c: Decimal,
    pub s_min: f64,
    pub eps_inf: f64,
    pub w_max: f64,
    pub wall_ms: u128,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// `"p"` or `"s_min"`.
    pub swept: String,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub const HEADER: &'static str = "swept_var,p,n_c,s_min,eps_inf,w_max,wall_ms";

    /// CSV with the header row. Wall times are left blank unless
    /// `with_timing`, so that reruns produce identical files.
    pub fn to_csv(&self, with_timing: bool) -> String {
        let mut out = String::from(Self::HEADER);
        out.push('\n');
        for r in &self.rows {
            let wall = if with_timing { r.wall_ms.to_string() } else { String::new() };
            let _ = writeln!(
                out,
                "{:e},{},{},{:e},{:e},{:e},{}",
                r.swept_var, r.p, r.n_c, r.s_min, r.eps_inf, r.w_max, wall
            );
        }
        out
    }
}

fn sweep_row(kernel: &KernelSpec, n: usize, n_c: Decimal, opts: &SweepOptions, by_p: bool) -> Result<SweepRow> {
    let start = Instant::now();
    let cfg = VpConfig::new(n, n_c.clone())?.with_precision(opts.precision);
    let approx = build_sog(kernel, &cfg)?;
    let report = max_relative_error(&approx, kernel, opts.m, opts.domain, opts.seed)?;
    let p = 2 * n;
    Ok(SweepRow {
        swept_var: if by_p { p as f64 } else { report.s_min },
        p,
        n_c,
        s_min: report.s_min,
        eps_inf: report.eps_inf,
        w_max: report.w_max,
        wall_ms: start.elapsed().as_millis(),
    })
}

/// Accuracy against the number of Gaussians `p = 2n`.
pub fn sweep_p(kernel: &KernelSpec, n_list: &[usize], policy: &NcPolicy, opts: &SweepOptions) -> Result<SweepResult> {
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SogError::InvalidParameter("n values must be strictly ascending".into()));
    }
    let rows = n_list
        .iter()
        .map(|&n| sweep_row(kernel, n, policy.n_c(n), opts, true))
        .collect::<Result<_>>()?;
    Ok(SweepResult { swept: "p".into(), rows })
}

/// Accuracy against the minimal bandwidth at fixed `n`. Rows are ordered
/// by increasing `s_min`, i.e. increasing `n_c`.
pub fn sweep_bandwidth(kernel: &KernelSpec, n: usize, n_c_list: &[Decimal], opts: &SweepOptions) -> Result<SweepResult> {
    if n_c_list.windows(2).any(|w| w[0].rational() >= w[1].rational()) {
        return Err(SogError::InvalidParameter("n_c values must be strictly ascending".into()));
    }
    let rows = n_c_list
        .iter()
        .map(|nc| sweep_row(kernel, n, nc.clone(), opts, false))
        .collect::<Result<_>>()?;
    Ok(SweepResult {
        swept: "s_min".into(),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    /// `(n, f_p(0) - f(0))`.
    pub errors: Vec<(usize, f64)>,
    /// Least-squares fit `ln|err| = intercept + slope ln n`.
    pub slope: f64,
    pub intercept: f64,
    /// For `f'(0) != 0`: error at the largest `n` divided by
    /// `-(ln 2 / (n pi)) sqrt(n_c) f'(0)`.
    pub leading_ratio: Option<f64>,
}

/// Number of leading (smallest) `n` left out of the fit.
pub const PRE_ASYMPTOTIC: usize = 2;

/// Construction error at `x = 0` for each `n` and its log-log slope.
pub fn rate_at_zero(kernel: &KernelSpec, n_list: &[usize], n_c: &Decimal) -> Result<RateFit> {
    if n_list.len() < PRE_ASYMPTOTIC + 2 {
        return Err(SogError::InvalidParameter(format!(
            "need at least {} values of n",
            PRE_ASYMPTOTIC + 2
        )));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SogError::InvalidParameter("n values must be strictly ascending".into()));
    }
    let mut errors = Vec::with_capacity(n_list.len());
    let mut last = None;
    for &n in n_list {
        let cfg = VpConfig::new(n, n_c.clone())?;
        let approx = build_sog(kernel, &cfg)?;
        let prec = approx.precision_bits();
        let zero = HiPrec::zero(prec);
        let err = approx.evaluate(&zero) - &kernel.f_at_zero(prec)?;
        errors.push((n, err.to_f64()));
        last = Some((n, prec, err));
    }
    let pts: Vec<(f64, f64)> = errors[PRE_ASYMPTOTIC..]
        .iter()
        .map(|&(n, e)| ((n as f64).ln(), e.abs().ln()))
        .collect();
    let (slope, intercept) = ols(&pts);
    let leading_ratio = match last {
        Some((n, prec, err)) => kernel.fprime_at_zero(prec).filter(|d| !d.is_zero()).map(|d| {
            let lead = -(HiPrec::ln2(prec) / (HiPrec::pi(prec) * n as i64)) * n_c.to_hiprec(prec).sqrt() * &d;
            (err / &lead).to_f64()
        }),
        None => None,
    };
    Ok(RateFit {
        errors,
        slope,
        intercept,
        leading_ratio,
    })
}

/// Ordinary least squares line through `(x, y)`: `(slope, intercept)`.
pub fn ols(pts: &[(f64, f64)]) -> (f64, f64) {
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
