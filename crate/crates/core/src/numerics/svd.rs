//! One-sided (Hestenes) Jacobi SVD.
//!
//! Column pairs are visited in round-robin tournament order. Every pair of a
//! round is disjoint, so a round runs in parallel without changing a single
//! bit of the result.

use rayon::prelude::*;

use super::hiprec::HiPrec;
use super::matrix::DenseMatrix;
use crate::error::{Result, SogError};

const MAX_SWEEPS: usize = 80;

/// Thin SVD `M = U diag(sigma) Vᵀ` with `sigma` non-increasing.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: DenseMatrix,
    pub sigma: Vec<HiPrec>,
    pub v: DenseMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> DenseMatrix {
        let k = self.sigma.len();
        let us = DenseMatrix::from_fn(self.u.rows(), k, |i, j| &self.u[(i, j)] * &self.sigma[j]);
        us.matmul(&self.v.transpose())
    }

    /// Number of singular values above `rel_tol * sigma_max`.
    pub fn numerical_rank(&self, rel_tol: &HiPrec) -> usize {
        match self.sigma.first() {
            None => 0,
            Some(s0) => {
                let cut = s0 * rel_tol;
                self.sigma.iter().filter(|s| **s > cut).count()
            }
        }
    }
}

struct Column {
    a: Vec<HiPrec>,
    v: Vec<HiPrec>,
}

pub fn svd(m: &DenseMatrix) -> Result<Svd> {
    if m.rows() < m.cols() {
        let t = svd(&m.transpose())?;
        return Ok(Svd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        });
    }
    let (rows, cols) = (m.rows(), m.cols());
    let prec = m.prec();
    let mut columns: Vec<Column> = (0..cols)
        .map(|j| Column {
            a: m.col(j),
            v: (0..cols)
                .map(|i| if i == j { HiPrec::one(prec) } else { HiPrec::zero(prec) })
                .collect(),
        })
        .collect();

    // rounding noise in the Gram entries is about rows * 2^-prec
    let noise_bits = (usize::BITS - rows.leading_zeros()) as i32;
    let tol = HiPrec::pow2(-(prec as i32) + 2 * noise_bits + 10, prec);
    // columns whose squared norm sinks below this are rounding noise
    let mut frob2 = HiPrec::zero(prec);
    for c in &columns {
        frob2 += dot(&c.a, &c.a, prec);
    }
    let floor = &frob2 * &tol.sqr();
    let schedule = round_robin(cols);
    let mut converged = cols < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for round in &schedule {
            let mut work: Vec<(usize, usize, Column, Column)> = round
                .iter()
                .map(|&(p, q)| {
                    let cp = std::mem::replace(&mut columns[p], Column { a: Vec::new(), v: Vec::new() });
                    let cq = std::mem::replace(&mut columns[q], Column { a: Vec::new(), v: Vec::new() });
                    (p, q, cp, cq)
                })
                .collect();
            let any = work
                .par_iter_mut()
                .map(|(_, _, cp, cq)| rotate_pair(cp, cq, &tol, &floor))
                .reduce(|| false, |x, y| x || y);
            rotated |= any;
            for (p, q, cp, cq) in work {
                columns[p] = cp;
                columns[q] = cq;
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(SogError::ConvergenceFailure {
            stage: "jacobi svd",
            iterations: MAX_SWEEPS,
        });
    }

    let mut order: Vec<(usize, HiPrec)> = columns
        .iter()
        .enumerate()
        .map(|(j, c)| (j, dot(&c.a, &c.a, prec).sqrt()))
        .collect();
    order.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));

    let smax = order.first().map(|x| x.1.clone()).unwrap_or_else(|| HiPrec::zero(prec));
    let negligible = &smax * &HiPrec::pow2(-(prec as i32) + 16, prec);
    let mut u_cols: Vec<Vec<HiPrec>> = Vec::with_capacity(cols);
    let mut sigma = Vec::with_capacity(cols);
    let mut v = DenseMatrix::zeros(cols, cols, prec);
    for (k, (j, s)) in order.iter().enumerate() {
        for i in 0..cols {
            v[(i, k)] = columns[*j].v[i].clone();
        }
        if *s > negligible && !s.is_zero() {
            u_cols.push(columns[*j].a.iter().map(|x| x / s).collect());
        } else {
            u_cols.push(complete_basis(&u_cols, rows, prec));
        }
        sigma.push(s.clone());
    }
    let u = DenseMatrix::from_fn(rows, cols, |i, j| u_cols[j][i].clone());
    Ok(Svd { u, sigma, v })
}

fn dot(x: &[HiPrec], y: &[HiPrec], prec: u32) -> HiPrec {
    let mut acc = HiPrec::zero(prec);
    for (a, b) in x.iter().zip(y) {
        acc.add_mul(a, b);
    }
    acc
}

/// Orthogonalizes column `q` against column `p`. Returns whether a rotation
/// was applied.
fn rotate_pair(cp: &mut Column, cq: &mut Column, tol: &HiPrec, floor: &HiPrec) -> bool {
    let prec = tol.prec();
    let alpha = dot(&cp.a, &cp.a, prec);
    let beta = dot(&cq.a, &cq.a, prec);
    if alpha <= *floor || beta <= *floor {
        return false;
    }
    let gamma = dot(&cp.a, &cq.a, prec);
    let bound = (&alpha * &beta).sqrt() * tol;
    if gamma.abs() <= bound {
        return false;
    }
    let zeta = (&beta - &alpha) / gamma.mul_pow2(1);
    let root = (zeta.sqr() + 1).sqrt();
    let t = if zeta.is_sign_negative() {
        -(zeta.abs() + &root).recip()
    } else {
        (zeta.abs() + &root).recip()
    };
    let c = (t.sqr() + 1).sqrt().recip();
    let s = &c * &t;
    rotate(&mut cp.a, &mut cq.a, &c, &s);
    rotate(&mut cp.v, &mut cq.v, &c, &s);
    true
}

fn rotate(x: &mut [HiPrec], y: &mut [HiPrec], c: &HiPrec, s: &HiPrec) {
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let x0 = xi.clone();
        *xi *= c;
        xi.sub_mul(s, yi);
        *yi *= c;
        yi.add_mul(s, &x0);
    }
}

/// Pairs for each round of a round-robin tournament over `n` players.
fn round_robin(n: usize) -> Vec<Vec<(usize, usize)>> {
    if n < 2 {
        return Vec::new();
    }
    let m = if n % 2 == 0 { n } else { n + 1 };
    let mut ring: Vec<usize> = (0..m).collect();
    let mut rounds = Vec::with_capacity(m - 1);
    for _ in 0..m - 1 {
        let mut pairs = Vec::with_capacity(m / 2);
        for k in 0..m / 2 {
            let (p, q) = (ring[k], ring[m - 1 - k]);
            if p < n && q < n {
                pairs.push((p.min(q), p.max(q)));
            }
        }
        rounds.push(pairs);
        let last = ring.pop().expect("ring is non-empty");
        ring.insert(1, last);
    }
    rounds
}

/// A unit vector orthogonal to `basis` (Gram-Schmidt over unit vectors).
fn complete_basis(basis: &[Vec<HiPrec>], rows: usize, prec: u32) -> Vec<HiPrec> {
    for e in 0..rows {
        let mut cand: Vec<HiPrec> = (0..rows)
            .map(|i| if i == e { HiPrec::one(prec) } else { HiPrec::zero(prec) })
            .collect();
        for _ in 0..2 {
            for b in basis {
                let proj = dot(b, &cand, prec);
                for (c, bi) in cand.iter_mut().zip(b) {
                    c.sub_mul(&proj, bi);
                }
            }
        }
        let norm = dot(&cand, &cand, prec).sqrt();
        if norm > 0.5 {
            return cand.iter().map(|c| c / &norm).collect();
        }
    }
    vec![HiPrec::zero(prec); rows]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orthonormality_error(q: &DenseMatrix) -> HiPrec {
        let g = q.transpose().matmul(q);
        g.sub(&DenseMatrix::identity(g.rows(), q.prec())).max_abs()
    }

    #[test]
    fn round_robin_covers_every_pair_once() {
        for n in [2, 5, 8] {
            let mut seen = std::collections::BTreeSet::new();
            for round in round_robin(n) {
                let mut used = std::collections::BTreeSet::new();
                for (p, q) in round {
                    assert!(used.insert(p) && used.insert(q));
                    assert!(seen.insert((p, q)));
                }
            }
            assert_eq!(seen.len(), n * (n - 1) / 2);
        }
    }

    #[test]
    fn diagonal_matrix() {
        let m = DenseMatrix::from_f64(2, 2, &[3.0, 0.0, 0.0, 1.0], 128);
        let s = svd(&m).unwrap();
        assert_eq!(s.sigma[0], 3.0);
        assert_eq!(s.sigma[1], 1.0);
        for i in 0..2 {
            assert_eq!(s.u[(i, i)].abs(), 1.0);
            assert_eq!(s.v[(i, i)].abs(), 1.0);
        }
    }

    #[test]
    fn rank_one_outer_product() {
        let prec = 192;
        let u = [1.0, -2.0, 0.5, 4.0];
        let v = [3.0, 1.0, -1.0];
        let m = DenseMatrix::from_fn(4, 3, |i, j| HiPrec::from_f64(u[i] * v[j], prec));
        let s = svd(&m).unwrap();
        let rel = HiPrec::pow2(-(prec as i32) / 2, prec);
        assert_eq!(s.numerical_rank(&rel), 1);
        assert!(s.reconstruct().sub(&m).max_abs() < 1e-50);
        assert!(orthonormality_error(&s.u) < 1e-50);
    }

    #[test]
    fn wide_matrix_uses_transpose() {
        let m = DenseMatrix::from_f64(2, 3, &[1.0, 2.0, 0.0, -1.0, 0.5, 3.0], 128);
        let s = svd(&m).unwrap();
        assert_eq!((s.u.rows(), s.v.rows()), (2, 3));
        assert!(s.reconstruct().sub(&m).max_abs() < 1e-35);
    }
}
