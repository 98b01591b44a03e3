//! Balanced truncation of a ladder SOG.
//!
//! In `y = x^2` the approximant is a sum of exponentials, whose Laplace
//! transform is the sum of poles `Σ w_j / (z + a_j)`. That is the transfer
//! function of the diagonal system `A = -diag(a)`, `b_j = sqrt|w_j|`,
//! `c_j = sign(w_j) sqrt|w_j|`. Square-root balancing compresses it, and the
//! eigendecomposition of the reduced matrix turns the result back into
//! (possibly complex) Gaussians.

use log::{debug, info};

use crate::decimal::Decimal;
use crate::error::{Result, SogError};
use crate::numerics::{cholesky_with_tolerance, eig, eig::complex_solve, svd, Complex, DenseMatrix, HiPrec};
use crate::vp::{KernelDescriptor, SogApproximant};

/// Diagonal state-space realization of a ladder approximant without its
/// constant term.
#[derive(Clone, Debug)]
pub struct PoleSystem {
    /// Decay rates `j / n_c` (the diagonal of `-A`).
    pub a: Vec<HiPrec>,
    pub b: Vec<HiPrec>,
    pub c: Vec<HiPrec>,
    /// Ladder index `j` of each retained pole.
    pub index: Vec<usize>,
    pub constant_term: HiPrec,
}

impl PoleSystem {
    /// `Σ w_j exp(-a_j y)` with the same splitting as [`to_pole_system`]
    /// (nothing is pruned).
    pub fn from_weights(rates: &[HiPrec], weights: &[HiPrec], constant_term: HiPrec) -> Result<Self> {
        if rates.len() != weights.len() {
            return Err(SogError::LengthMismatch {
                expected: rates.len(),
                got: weights.len(),
            });
        }
        let mut sys = PoleSystem {
            a: Vec::new(),
            b: Vec::new(),
            c: Vec::new(),
            index: Vec::new(),
            constant_term,
        };
        for (j, (a, w)) in rates.iter().zip(weights).enumerate() {
            if !(*a > 0.0) {
                return Err(SogError::InvalidParameter(format!("rate {j} must be positive")));
            }
            let root = w.abs().sqrt();
            sys.c.push(if w.is_sign_negative() { -&root } else { root.clone() });
            sys.b.push(root);
            sys.a.push(a.clone());
            sys.index.push(j);
        }
        Ok(sys)
    }

    pub fn order(&self) -> usize {
        self.a.len()
    }

    pub fn prec(&self) -> u32 {
        self.constant_term.prec()
    }

    /// `Σ c_j b_j / (z + a_j)`.
    pub fn transfer(&self, z: &Complex) -> Complex {
        let prec = self.prec().max(z.prec());
        let mut acc = Complex::zero(prec);
        for ((a, b), c) in self.a.iter().zip(&self.b).zip(&self.c) {
            let den = z + &Complex::from_real(a.clone());
            acc += &den.recip().scale(&(b * c));
        }
        acc
    }

    /// The state matrix `A = -diag(a)`.
    pub fn state_matrix(&self) -> DenseMatrix {
        let neg: Vec<HiPrec> = self.a.iter().map(|v| -v).collect();
        DenseMatrix::diag(&neg)
    }
}

/// Splits each ladder weight as `w_j = c_j b_j`. Weights below
/// `2^-prec/2 * w_max` are dropped.
pub fn to_pole_system(approx: &SogApproximant) -> Result<PoleSystem> {
    let prec = approx.precision_bits();
    check_ladder(approx)?;
    let w_max = approx.w_max();
    let cut = &w_max * &HiPrec::pow2(-(prec as i32) / 2, prec);
    let mut sys = PoleSystem {
        a: Vec::new(),
        b: Vec::new(),
        c: Vec::new(),
        index: Vec::new(),
        constant_term: approx.constant_term().with_prec(prec),
    };
    let mut dropped = 0;
    for (j, (w, t)) in approx.terms().enumerate().skip(1) {
        if w.abs() < cut || w.is_zero() {
            dropped += 1;
            continue;
        }
        let root = w.abs().sqrt();
        sys.c.push(if w.is_sign_negative() { -&root } else { root.clone() });
        sys.b.push(root);
        sys.a.push(t.with_prec(prec));
        sys.index.push(j);
    }
    if dropped > 0 {
        info!("dropped {dropped} negligible ladder weights before reduction");
    }
    Ok(sys)
}

fn check_ladder(approx: &SogApproximant) -> Result<()> {
    let prec = approx.precision_bits();
    let inv = rug::Rational::from(approx.n_c().rational().clone().recip());
    for (j, t) in approx.exponents.iter().enumerate() {
        let expect = HiPrec::from_rational(&rug::Rational::from(&inv * j as u32), prec);
        if (t - &expect).abs() > &expect * &HiPrec::pow2(-(prec as i32) / 2, prec) {
            return Err(SogError::NotLadder(format!(
                "exponent {j} is {} but the ladder needs {j}/{}",
                t.to_sci(12),
                approx.n_c()
            )));
        }
    }
    Ok(())
}

/// Controllability and observability Gramians in closed form:
/// `P_ij = b_i b_j / (a_i + a_j)`, `Q_ij = c_i c_j / (a_i + a_j)`.
pub fn gramians(sys: &PoleSystem) -> (DenseMatrix, DenseMatrix) {
    let n = sys.order();
    let p = DenseMatrix::from_fn(n, n, |i, j| &(&sys.b[i] * &sys.b[j]) / &(&sys.a[i] + &sys.a[j]));
    let q = DenseMatrix::from_fn(n, n, |i, j| &(&sys.c[i] * &sys.c[j]) / &(&sys.a[i] + &sys.a[j]));
    (p, q)
}

#[derive(Clone, Debug)]
pub enum Target {
    /// Keep this many states (rounded up to the end of a tie in the Hankel
    /// singular values).
    Order(usize),
    /// Keep the fewest states with `2 Σ_{l>q} sigma_l <= delta`.
    Tolerance(f64),
}

/// Reduced realization `(Ã, b̃, c̃)` and its Hankel data.
#[derive(Clone, Debug)]
pub struct Truncation {
    pub a: DenseMatrix,
    pub b: Vec<HiPrec>,
    pub c: Vec<HiPrec>,
    /// All Hankel singular values that survived the rank-revealing
    /// factorizations, non-increasing.
    pub sigma: Vec<HiPrec>,
    /// `2 Σ` of the discarded singular values.
    pub hankel_bound: HiPrec,
}

impl Truncation {
    pub fn order(&self) -> usize {
        self.b.len()
    }
}

/// Rank cut applied to the Gramian factorizations, relative to the largest
/// pivot: `2^-(prec - 64)`, or `2^-prec/2` below 128 bits.
///
/// The small directions of `P` are the large ones of `Q`, so anything
/// dropped from `P` is magnified by `‖Q‖` in the Hankel singular values;
/// the cut sits just above the rounding level.
pub fn default_rank_tolerance(prec: u32) -> HiPrec {
    let bits = (prec as i32 - 64).max(prec as i32 / 2);
    HiPrec::pow2(-bits, prec)
}

pub fn balanced_truncate(sys: &PoleSystem, target: &Target) -> Result<Truncation> {
    Balancing::new(sys, &default_rank_tolerance(sys.prec()))?.truncate(target)
}

/// Square-root balanced truncation with an explicit Gramian rank cut.
pub fn balanced_truncate_with(sys: &PoleSystem, target: &Target, rank_tol: &HiPrec) -> Result<Truncation> {
    Balancing::new(sys, rank_tol)?.truncate(target)
}

/// Gramian factors and the SVD of `L_Qᵀ L_P`, shared by truncations of the
/// same system to different orders.
#[derive(Clone, Debug)]
pub struct Balancing {
    sys: PoleSystem,
    lp: DenseMatrix,
    lq: DenseMatrix,
    u: DenseMatrix,
    v: DenseMatrix,
    sigma: Vec<HiPrec>,
}

impl Balancing {
    pub fn new(sys: &PoleSystem, rank_tol: &HiPrec) -> Result<Self> {
        let prec = sys.prec();
        if sys.order() == 0 {
            return Err(SogError::InvalidParameter("pole system is empty".into()));
        }
        let (p, q) = gramians(sys);
        let lp = cholesky_with_tolerance(&p, rank_tol)?.factor();
        let lq = cholesky_with_tolerance(&q, rank_tol)?.factor();
        let dec = svd(&lq.transpose().matmul(&lp))?;
        let floor = dec.sigma.first().map_or(HiPrec::zero(prec), |s| s * &HiPrec::pow2(-(prec as i32) + 16, prec));
        let rank = dec.sigma.iter().take_while(|s| **s > floor).count();
        if rank == 0 {
            return Err(SogError::InvalidParameter("pole system has zero transfer function".into()));
        }
        debug!("hankel singular values: {rank} above the noise floor");
        Ok(Balancing {
            sys: sys.clone(),
            lp,
            lq,
            u: dec.u,
            v: dec.v,
            sigma: dec.sigma[..rank].to_vec(),
        })
    }

    /// Non-increasing Hankel singular values above the rounding floor.
    pub fn hankel_singular_values(&self) -> &[HiPrec] {
        &self.sigma
    }

    /// Order actually kept for `target`.
    pub fn order_for(&self, target: &Target) -> Result<usize> {
        let prec = self.sys.prec();
        let rank = self.sigma.len();
        let mut order = match target {
            Target::Order(k) => {
                if *k == 0 {
                    return Err(SogError::InvalidParameter("reduced order must be at least 1".into()));
                }
                (*k).min(rank)
            }
            Target::Tolerance(delta) => {
                if !(delta.is_finite() && *delta > 0.0) {
                    return Err(SogError::TargetUnreachable(*delta));
                }
                let delta = HiPrec::from_f64(*delta, prec);
                let mut tail = HiPrec::zero(prec);
                let mut k = rank;
                while k > 1 {
                    let next = &tail + &self.sigma[k - 1].mul_pow2(1);
                    if next > delta {
                        break;
                    }
                    tail = next;
                    k -= 1;
                }
                k
            }
        };
        // never cut through a group of equal singular values
        let tie = HiPrec::pow2(-(prec as i32) / 2, prec);
        while order < rank && (&self.sigma[order - 1] - &self.sigma[order]).abs() <= &self.sigma[order - 1] * &tie {
            order += 1;
        }
        Ok(order)
    }

    pub fn truncate(&self, target: &Target) -> Result<Truncation> {
        let sys = &self.sys;
        let prec = sys.prec();
        let n = sys.order();
        let order = self.order_for(target)?;
        let mut bound = HiPrec::zero(prec);
        for s in &self.sigma[order..] {
            bound += &s.mul_pow2(1);
        }
        let (lp, lq) = (&self.lp, &self.lq);

        // T = S^-1/2 Uᵀ L_Qᵀ, T⁻¹ = L_P V S^-1/2
        let inv_root: Vec<HiPrec> = self.sigma[..order].iter().map(|s| s.sqrt().recip()).collect();
        let t = DenseMatrix::from_fn(order, n, |i, k| {
            let mut acc = HiPrec::zero(prec);
            for r in 0..lq.cols() {
                acc.add_mul(&self.u[(r, i)], &lq[(k, r)]);
            }
            acc * &inv_root[i]
        });
        let t_inv = DenseMatrix::from_fn(n, order, |k, j| {
            let mut acc = HiPrec::zero(prec);
            for r in 0..lp.cols() {
                acc.add_mul(&lp[(k, r)], &self.v[(r, j)]);
            }
            acc * &inv_root[j]
        });
        let a = DenseMatrix::from_fn(order, order, |i, j| {
            let mut acc = HiPrec::zero(prec);
            for k in 0..n {
                acc.sub_mul(&(&t[(i, k)] * &sys.a[k]), &t_inv[(k, j)]);
            }
            acc
        });
        let b = t.mul_vec(&sys.b);
        let c: Vec<HiPrec> = (0..order)
            .map(|j| {
                let mut acc = HiPrec::zero(prec);
                for k in 0..n {
                    acc.add_mul(&sys.c[k], &t_inv[(k, j)]);
                }
                acc
            })
            .collect();
        Ok(Truncation {
            a,
            b,
            c,
            sigma: self.sigma.clone(),
            hankel_bound: bound,
        })
    }
}

/// A Gaussian `w exp(-t x^2)` with complex weight and exponent.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedTerm {
    pub w: Complex,
    pub t: Complex,
}

/// Compressed approximant `w_0 + Σ_l w̃_l exp(-t̃_l x^2)`. Non-real terms come
/// in conjugate pairs, both of which are stored.
#[derive(Clone, Debug)]
pub struct ReducedSog {
    pub kernel: KernelDescriptor,
    /// `n` and `n_c` of the ladder this was reduced from.
    pub source_n: usize,
    pub n_c: Decimal,
    pub precision_bits: u32,
    pub terms: Vec<ReducedTerm>,
    pub constant_term: HiPrec,
    pub hankel_bound: HiPrec,
    pub eps_inf: Option<f64>,
}

impl ReducedSog {
    /// Number of Gaussians, not counting the constant term.
    pub fn q(&self) -> usize {
        self.terms.len()
    }

    pub fn complex_pairs(&self) -> usize {
        self.terms.iter().filter(|t| t.t.im > 0.0).count()
    }

    pub fn w_max(&self) -> HiPrec {
        self.terms
            .iter()
            .map(|t| t.w.abs())
            .fold(HiPrec::zero(self.precision_bits), |m, v| if v > m { v } else { m })
    }

    /// `min_l 1/sqrt(Re t̃_l)`.
    pub fn s_min(&self) -> HiPrec {
        self.terms
            .iter()
            .map(|t| t.t.re.sqrt().recip())
            .fold(HiPrec::infinity(self.precision_bits), |m, v| if v < m { v } else { m })
    }

    /// `min_l |s_l|` with `s_l = 1/sqrt(t̃_l)`, i.e. `1/sqrt(max |t̃_l|)`.
    pub fn s_min_modulus(&self) -> HiPrec {
        self.terms
            .iter()
            .map(|t| t.t.abs().sqrt().recip())
            .fold(HiPrec::infinity(self.precision_bits), |m, v| if v < m { v } else { m })
    }

    /// Real value; each conjugate pair contributes `2 Re(w e^{-t x^2})`.
    pub fn evaluate(&self, x: &HiPrec) -> HiPrec {
        let prec = self.precision_bits.max(x.prec());
        let x2 = Complex::from_real(x.with_prec(prec).sqr());
        let mut acc = self.constant_term.with_prec(prec);
        for term in &self.terms {
            if term.t.im < 0.0 {
                continue;
            }
            let e = (-&(&term.t * &x2)).exp();
            let v = &term.w * &e;
            if term.t.im > 0.0 {
                acc += &v.re.mul_pow2(1);
            } else {
                acc += &v.re;
            }
        }
        acc
    }

    /// Plain complex sum over every stored term.
    pub fn evaluate_complex(&self, x: &HiPrec) -> Complex {
        let prec = self.precision_bits.max(x.prec());
        let x2 = Complex::from_real(x.with_prec(prec).sqr());
        let mut acc = Complex::from_real(self.constant_term.with_prec(prec));
        for term in &self.terms {
            let e = (-&(&term.t * &x2)).exp();
            acc += &(&term.w * &e);
        }
        acc
    }

    /// `Σ w̃_l / (z + t̃_l)`, the constant term excluded.
    pub fn transfer(&self, z: &Complex) -> Complex {
        let prec = self.precision_bits.max(z.prec());
        let mut acc = Complex::zero(prec);
        for term in &self.terms {
            acc += &(&term.w / &(z + &term.t));
        }
        acc
    }
}

/// Diagonalizes `Ã` and reads off the Gaussians: `t̃ = -lambda`,
/// `w̃ = (c̃ V)_l (V⁻¹ b̃)_l`.
pub fn to_reduced_terms(tr: &Truncation) -> Result<Vec<ReducedTerm>> {
    let prec = tr.a.prec();
    let dec = eig(&tr.a)?;
    let q = dec.values.len();
    let bc: Vec<Complex> = tr.b.iter().map(|v| Complex::from_real(v.clone())).collect();
    let right = complex_solve(&dec.vectors, &bc)?;
    let mut terms = Vec::with_capacity(q);
    for l in 0..q {
        let mut left = Complex::zero(prec);
        for k in 0..q {
            left.add_mul(&Complex::from_real(tr.c[k].clone()), &dec.vectors[(k, l)]);
        }
        let t = -&dec.values[l];
        if t.re <= 0.0 {
            return Err(SogError::UnstablePole(t.re.to_f64()));
        }
        terms.push(ReducedTerm { w: &left * &right[l], t });
    }
    pair_conjugates(&mut terms);
    Ok(terms)
}

fn pair_conjugates(terms: &mut [ReducedTerm]) {
    let mut l = 0;
    while l < terms.len() {
        if terms[l].t.im.is_zero() {
            terms[l].w.im = HiPrec::zero(terms[l].w.prec());
            l += 1;
            continue;
        }
        let Some(m) = (l + 1..terms.len()).find(|&m| terms[m].t == terms[l].t.conj()) else {
            l += 1;
            continue;
        };
        terms.swap(l + 1, m);
        if terms[l].t.im < 0.0 {
            terms.swap(l, l + 1);
        }
        let avg = Complex::new(
            (&terms[l].w.re + &terms[l + 1].w.re).mul_pow2(-1),
            (&terms[l].w.im - &terms[l + 1].w.im).mul_pow2(-1),
        );
        terms[l + 1].w = avg.conj();
        terms[l].w = avg;
        l += 2;
    }
}

/// Full pipeline: pole system, balanced truncation, back to Gaussians.
pub fn reduce(approx: &SogApproximant, target: &Target) -> Result<ReducedSog> {
    let sys = to_pole_system(approx)?;
    let tr = balanced_truncate(&sys, target)?;
    to_reduced_sog(approx, &sys, &tr)
}

pub fn to_reduced_sog(approx: &SogApproximant, sys: &PoleSystem, tr: &Truncation) -> Result<ReducedSog> {
    let terms = to_reduced_terms(tr)?;
    Ok(ReducedSog {
        kernel: approx.kernel.clone(),
        source_n: approx.n(),
        n_c: approx.n_c().clone(),
        precision_bits: approx.precision_bits(),
        terms,
        constant_term: sys.constant_term.clone(),
        hankel_bound: tr.hankel_bound.clone(),
        eps_inf: None,
    })
}

/// Frequencies `omega` for transfer-function checks: 10 per decade on
/// `[1e-3, 1e6]`, 91 points.
pub fn frequency_grid() -> Vec<f64> {
    (0..=90).map(|k| 10f64.powf(-3.0 + k as f64 / 10.0)).collect()
}

/// `max_omega |H(i omega) - H̃(i omega)|` over `omegas`.
pub fn max_transfer_error(sys: &PoleSystem, reduced: &ReducedSog, omegas: &[f64]) -> HiPrec {
    let prec = sys.prec();
    let mut worst = HiPrec::zero(prec);
    for w in omegas {
        let z = Complex::new(HiPrec::zero(prec), HiPrec::from_f64(*w, prec));
        let d = (&sys.transfer(&z) - &reduced.transfer(&z)).abs();
        if d > worst {
            worst = d;
        }
    }
    worst
}
