//! Eigendecomposition of real nonsymmetric matrices.
//!
//! Householder reduction to upper Hessenberg form, then single-shift complex
//! QR iterations with Wilkinson shifts on the active window. Eigenvectors come
//! from one step of inverse iteration per eigenvalue on the Hessenberg matrix.

use super::complex::Complex;
use super::hiprec::HiPrec;
use super::matrix::{ComplexMatrix, DenseMatrix};
use crate::error::{Result, SogError};

const ITERATIONS_PER_EIGENVALUE: usize = 60;

#[derive(Clone, Debug)]
pub struct Eigen {
    /// Sorted by descending real part, then descending imaginary part.
    pub values: Vec<Complex>,
    /// Unit-norm eigenvectors as columns, matching `values`.
    pub vectors: ComplexMatrix,
}

impl Eigen {
    /// `max |M v - lambda v|` over all columns.
    pub fn residual(&self, m: &DenseMatrix) -> HiPrec {
        let mc = m.to_complex();
        let mv = mc.matmul(&self.vectors);
        let mut worst = HiPrec::zero(m.prec());
        for j in 0..self.values.len() {
            for i in 0..m.rows() {
                let r = &mv[(i, j)] - &(&self.vectors[(i, j)] * &self.values[j]);
                let a = r.abs();
                if a > worst {
                    worst = a;
                }
            }
        }
        worst
    }

    /// Number of eigenvalues with positive imaginary part.
    pub fn complex_pairs(&self) -> usize {
        self.values.iter().filter(|v| v.im > 0.0).count()
    }
}

/// Hessenberg form `H = Qᵀ M Q` with `Q` orthogonal.
pub fn hessenberg(m: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    let n = m.rows();
    let prec = m.prec();
    let mut h = m.clone();
    let mut q = DenseMatrix::identity(n, prec);
    for k in 0..n.saturating_sub(2) {
        let mut v: Vec<HiPrec> = (k + 1..n).map(|i| h[(i, k)].clone()).collect();
        let mut norm2 = HiPrec::zero(prec);
        for x in &v {
            norm2.add_mul(x, x);
        }
        if norm2.is_zero() {
            continue;
        }
        let norm = norm2.sqrt();
        let alpha = if v[0].is_sign_negative() { norm } else { -norm };
        v[0] -= &alpha;
        let mut vv = HiPrec::zero(prec);
        for x in &v {
            vv.add_mul(x, x);
        }
        if vv.is_zero() {
            continue;
        }
        let beta = vv.recip().mul_pow2(1);
        // H <- (I - beta v vᵀ) H
        for j in 0..n {
            let mut s = HiPrec::zero(prec);
            for (t, x) in v.iter().enumerate() {
                s.add_mul(x, &h[(k + 1 + t, j)]);
            }
            s *= &beta;
            for (t, x) in v.iter().enumerate() {
                h[(k + 1 + t, j)].sub_mul(&s, x);
            }
        }
        // H <- H (I - beta v vᵀ), Q <- Q (I - beta v vᵀ)
        for target in [&mut h, &mut q] {
            for i in 0..n {
                let mut s = HiPrec::zero(prec);
                for (t, x) in v.iter().enumerate() {
                    s.add_mul(&target[(i, k + 1 + t)], x);
                }
                s *= &beta;
                for (t, x) in v.iter().enumerate() {
                    target[(i, k + 1 + t)].sub_mul(&s, x);
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = HiPrec::zero(prec);
        }
    }
    (h, q)
}

/// Eigenvalues and eigenvectors of a real square matrix.
pub fn eig(m: &DenseMatrix) -> Result<Eigen> {
    if !m.is_square() {
        return Err(SogError::InvalidParameter(format!(
            "eig needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let prec = m.prec();
    if n == 0 {
        return Ok(Eigen {
            values: Vec::new(),
            vectors: ComplexMatrix::zeros(0, 0, prec),
        });
    }
    let (h_real, q) = hessenberg(m);
    let h = h_real.to_complex();
    let scale = {
        let s = m.max_abs();
        if s.is_zero() {
            HiPrec::one(prec)
        } else {
            s
        }
    };
    let raw = hessenberg_eigenvalues(h.clone(), &scale)?;
    let values = pair_conjugates(raw, &scale)?;

    let mut vectors = ComplexMatrix::zeros(n, n, prec);
    let mut done = vec![false; n];
    for j in 0..n {
        if done[j] {
            continue;
        }
        let y = inverse_iteration(&h, &values[j], &scale)?;
        // v = Q y
        let mut v: Vec<Complex> = (0..n)
            .map(|i| {
                let mut acc = Complex::zero(prec);
                for (k, yk) in y.iter().enumerate() {
                    acc.re.add_mul(&q[(i, k)], &yk.re);
                    acc.im.add_mul(&q[(i, k)], &yk.im);
                }
                acc
            })
            .collect();
        normalize(&mut v);
        for i in 0..n {
            vectors[(i, j)] = v[i].clone();
        }
        done[j] = true;
        if values[j].im > 0.0 {
            if let Some(partner) = (j + 1..n).find(|&k| !done[k] && values[k] == values[j].conj()) {
                for i in 0..n {
                    vectors[(i, partner)] = v[i].conj();
                }
                done[partner] = true;
            }
        }
    }
    Ok(Eigen { values, vectors })
}

fn normalize(v: &mut [Complex]) {
    let prec = v.first().map_or(64, Complex::prec);
    let mut n2 = HiPrec::zero(prec);
    let mut big = 0;
    let mut big_abs = HiPrec::zero(prec);
    for (i, x) in v.iter().enumerate() {
        let a = x.norm_sqr();
        if a > big_abs {
            big_abs = a.clone();
            big = i;
        }
        n2 += &a;
    }
    if n2.is_zero() {
        return;
    }
    // fix the phase so the largest component is real and positive
    let phase = v[big].scale(&big_abs.sqrt().recip()).conj();
    let inv = n2.sqrt().recip();
    for x in v.iter_mut() {
        *x = (&*x * &phase).scale(&inv);
    }
    v[big].im = HiPrec::zero(prec);
}

fn givens(a: &Complex, b: &Complex) -> (HiPrec, Complex) {
    let prec = a.prec().max(b.prec());
    let abs_a = a.abs();
    let rho = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if rho.is_zero() {
        return (HiPrec::one(prec), Complex::zero(prec));
    }
    if abs_a.is_zero() {
        return (HiPrec::zero(prec), Complex::one(prec));
    }
    let c = &abs_a / &rho;
    let s = (&a.scale(&abs_a.recip()) * &b.conj()).scale(&rho.recip());
    (c, s)
}

fn wilkinson_shift(h: &ComplexMatrix, hi: usize) -> Complex {
    let a = &h[(hi - 1, hi - 1)];
    let b = &h[(hi - 1, hi)];
    let c = &h[(hi, hi - 1)];
    let d = &h[(hi, hi)];
    let half = HiPrec::ratio(1, 2, a.prec());
    let mean = (a + d).scale(&half);
    let diff = (a - d).scale(&half);
    let disc = (&(&diff * &diff) + &(b * c)).sqrt();
    let l1 = &mean + &disc;
    let l2 = &mean - &disc;
    if (&l1 - d).abs1() <= (&l2 - d).abs1() {
        l1
    } else {
        l2
    }
}

fn hessenberg_eigenvalues(mut h: ComplexMatrix, scale: &HiPrec) -> Result<Vec<Complex>> {
    let n = h.rows();
    let prec = h.prec();
    let eps = HiPrec::pow2(-(prec as i32) + 4, prec);
    let mut values: Vec<Option<Complex>> = vec![None; n];
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let max_total = ITERATIONS_PER_EIGENVALUE * n.max(2);
    loop {
        if hi == 0 {
            values[0] = Some(h[(0, 0)].clone());
            break;
        }
        let mut lo = hi;
        while lo > 0 {
            let mut s = h[(lo - 1, lo - 1)].abs1() + h[(lo, lo)].abs1();
            if s.is_zero() {
                s = scale.clone();
            }
            if h[(lo, lo - 1)].abs1() <= &eps * &s {
                h[(lo, lo - 1)] = Complex::zero(prec);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            values[hi] = Some(h[(hi, hi)].clone());
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > max_total {
            return Err(SogError::ConvergenceFailure {
                stage: "hessenberg qr",
                iterations: total,
            });
        }
        let mu = if iter % 12 == 0 {
            // exceptional shift to break cycles
            let bump = h[(hi, hi - 1)].abs1() + h[(hi - 1, hi.saturating_sub(2).max(lo))].abs1();
            let mut m = h[(hi, hi)].clone();
            m.re += &bump.mul_pow2(-1);
            m
        } else {
            wilkinson_shift(&h, hi)
        };
        for i in lo..=hi {
            h[(i, i)] -= &mu;
        }
        let mut rotations = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = givens(&h[(k, k)], &h[(k + 1, k)]);
            let sc = s.conj();
            for j in k..=hi {
                let x = h[(k, j)].clone();
                let y = h[(k + 1, j)].clone();
                let mut nx = x.scale(&c);
                nx.add_mul(&s, &y);
                let mut ny = y.scale(&c);
                ny.sub_mul(&sc, &x);
                h[(k, j)] = nx;
                h[(k + 1, j)] = ny;
            }
            rotations.push((c, s));
        }
        for (off, (c, s)) in rotations.iter().enumerate() {
            let k = lo + off;
            let sc = s.conj();
            for i in lo..=(k + 1).min(hi) {
                let x = h[(i, k)].clone();
                let y = h[(i, k + 1)].clone();
                let mut nx = x.scale(c);
                nx.add_mul(&sc, &y);
                let mut ny = y.scale(c);
                ny.sub_mul(s, &x);
                h[(i, k)] = nx;
                h[(i, k + 1)] = ny;
            }
        }
        for i in lo..=hi {
            h[(i, i)] += &mu;
        }
    }
    Ok(values.into_iter().map(|v| v.expect("every eigenvalue deflated")).collect())
}

/// Snaps nearly-real eigenvalues onto the real axis and makes complex ones
/// exact conjugate pairs, then sorts.
fn pair_conjugates(raw: Vec<Complex>, scale: &HiPrec) -> Result<Vec<Complex>> {
    let prec = scale.prec();
    let thr = scale * &HiPrec::pow2(-(prec as i32) / 2, prec);
    let mut out = Vec::with_capacity(raw.len());
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for v in raw {
        if v.im.abs() <= thr {
            out.push(Complex::from_real(v.re));
        } else if v.im > 0.0 {
            upper.push(v);
        } else {
            lower.push(v);
        }
    }
    if upper.len() != lower.len() {
        return Err(SogError::ConvergenceFailure {
            stage: "conjugate pairing",
            iterations: 0,
        });
    }
    let mut used = vec![false; lower.len()];
    for u in upper {
        let target = u.conj();
        let mut best: Option<(usize, HiPrec)> = None;
        for (k, l) in lower.iter().enumerate() {
            if used[k] {
                continue;
            }
            let d = (l - &target).abs1();
            if best.as_ref().map_or(true, |(_, bd)| d < *bd) {
                best = Some((k, d));
            }
        }
        let (k, _) = best.expect("equal counts");
        used[k] = true;
        let half = HiPrec::ratio(1, 2, prec);
        let avg = (&u + &lower[k].conj()).scale(&half);
        out.push(avg.conj());
        out.push(avg);
    }
    out.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    Ok(out)
}

/// Solves `(H - lambda I) y = rhs` for upper Hessenberg `H` by Gaussian
/// elimination with adjacent-row pivoting; tiny pivots are replaced by
/// `eps * scale`, which is what makes this an inverse-iteration step.
fn shifted_hessenberg_solve(
    h: &ComplexMatrix,
    lambda: &Complex,
    rhs: Vec<Complex>,
    scale: &HiPrec,
) -> Vec<Complex> {
    let n = h.rows();
    let prec = h.prec();
    let floor = scale * &HiPrec::pow2(-(prec as i32) + 8, prec);
    let mut a = h.clone();
    for i in 0..n {
        a[(i, i)] -= lambda;
    }
    let mut b = rhs;
    for k in 0..n.saturating_sub(1) {
        if a[(k + 1, k)].abs1() > a[(k, k)].abs1() {
            for j in k..n {
                a.swap((k, j), (k + 1, j));
            }
            b.swap(k, k + 1);
        }
        if a[(k, k)].abs1() <= floor {
            a[(k, k)] = Complex::from_real(floor.clone());
        }
        let f = &a[(k + 1, k)] / &a[(k, k)];
        if f.is_zero() {
            continue;
        }
        for j in k..n {
            let t = a[(k, j)].clone();
            a[(k + 1, j)].sub_mul(&f, &t);
        }
        let t = b[k].clone();
        b[k + 1].sub_mul(&f, &t);
    }
    if a[(n - 1, n - 1)].abs1() <= floor {
        a[(n - 1, n - 1)] = Complex::from_real(floor.clone());
    }
    let mut y = vec![Complex::zero(prec); n];
    for i in (0..n).rev() {
        let mut acc = b[i].clone();
        for j in i + 1..n {
            acc.sub_mul(&a[(i, j)], &y[j]);
        }
        y[i] = &acc / &a[(i, i)];
    }
    y
}

fn inverse_iteration(h: &ComplexMatrix, lambda: &Complex, scale: &HiPrec) -> Result<Vec<Complex>> {
    let n = h.rows();
    let prec = h.prec();
    // deterministic, generic start vector
    let mut y: Vec<Complex> = (0..n)
        .map(|i| Complex::from_real(HiPrec::ratio(1, 1 + (i as i64 * 7919) % 97, prec) + 1))
        .collect();
    for _ in 0..2 {
        y = shifted_hessenberg_solve(h, lambda, y, scale);
        normalize(&mut y);
    }
    if y.iter().all(Complex::is_zero) {
        return Err(SogError::DefectiveMatrix);
    }
    Ok(y)
}

/// Solves `V x = rhs` by LU with partial pivoting. Fails with
/// [`SogError::DefectiveMatrix`] when `V` is numerically singular.
pub fn complex_solve(v: &ComplexMatrix, rhs: &[Complex]) -> Result<Vec<Complex>> {
    let n = v.rows();
    let prec = v.prec();
    let mut a = v.clone();
    let mut b = rhs.to_vec();
    let scale = v.max_abs();
    let floor = &scale * &HiPrec::pow2(-(prec as i32) / 2, prec);
    for k in 0..n {
        let mut p = k;
        let mut best = a[(k, k)].abs1();
        for i in k + 1..n {
            let c = a[(i, k)].abs1();
            if c > best {
                best = c;
                p = i;
            }
        }
        if best <= floor {
            return Err(SogError::DefectiveMatrix);
        }
        if p != k {
            for j in 0..n {
                a.swap((k, j), (p, j));
            }
            b.swap(k, p);
        }
        let pivot = a[(k, k)].clone();
        for i in k + 1..n {
            let f = &a[(i, k)] / &pivot;
            if f.is_zero() {
                continue;
            }
            for j in k..n {
                let t = a[(k, j)].clone();
                a[(i, j)].sub_mul(&f, &t);
            }
            let t = b[k].clone();
            b[i].sub_mul(&f, &t);
        }
    }
    let mut x = vec![Complex::zero(prec); n];
    for i in (0..n).rev() {
        let mut acc = b[i].clone();
        for j in i + 1..n {
            acc.sub_mul(&a[(i, j)], &x[j]);
        }
        x[i] = &acc / &a[(i, i)];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_spectrum() {
        let m = DenseMatrix::from_f64(2, 2, &[-1.0, 0.0, 0.0, -2.0], 128);
        let e = eig(&m).unwrap();
        assert_eq!(e.values[0].to_f64_pair(), (-1.0, 0.0));
        assert_eq!(e.values[1].to_f64_pair(), (-2.0, 0.0));
        assert!(e.residual(&m) < 1e-30);
    }

    #[test]
    fn rotation_has_conjugate_pair() {
        let m = DenseMatrix::from_f64(2, 2, &[0.0, 1.0, -1.0, 0.0], 128);
        let e = eig(&m).unwrap();
        assert_eq!(e.complex_pairs(), 1);
        let (r0, i0) = e.values[0].to_f64_pair();
        let (r1, i1) = e.values[1].to_f64_pair();
        assert!(r0.abs() < 1e-30 && r1.abs() < 1e-30);
        assert_eq!((i0, i1), (1.0, -1.0));
        assert!(e.residual(&m) < 1e-30);
    }

    #[test]
    fn hessenberg_is_a_similarity() {
        let prec = 160;
        let m = DenseMatrix::from_fn(5, 5, |i, j| {
            HiPrec::from_f64(((i * 7 + j * 3) % 11) as f64 - 5.0, prec)
        });
        let (h, q) = hessenberg(&m);
        for i in 2..5 {
            for j in 0..i - 1 {
                assert!(h[(i, j)].is_zero());
            }
        }
        let back = q.matmul(&h).matmul(&q.transpose());
        assert!(back.sub(&m).max_abs() < 1e-40);
    }

    #[test]
    fn general_matrix_residual() {
        let prec = 256;
        let m = DenseMatrix::from_fn(6, 6, |i, j| {
            HiPrec::from_f64(((i * 13 + j * 5 + i * j) % 17) as f64 / 4.0 - 2.0, prec)
        });
        let e = eig(&m).unwrap();
        let tol = m.max_abs() * HiPrec::pow2(-128, prec);
        assert!(e.residual(&m) < tol, "{:?}", e.residual(&m));
        // trace check
        let mut tr = Complex::zero(prec);
        for v in &e.values {
            tr += v;
        }
        let mut expected = HiPrec::zero(prec);
        for i in 0..6 {
            expected += &m[(i, i)];
        }
        assert!((&tr.re - &expected).abs() < 1e-60 && tr.im.abs() < 1e-60);
    }

    #[test]
    fn solve_detects_singular() {
        let prec = 128;
        let v = DenseMatrix::from_f64(2, 2, &[1.0, 2.0, 2.0, 4.0], prec).to_complex();
        let rhs = vec![Complex::one(prec), Complex::one(prec)];
        assert!(matches!(complex_solve(&v, &rhs), Err(SogError::DefectiveMatrix)));
        let v = DenseMatrix::from_f64(2, 2, &[2.0, 1.0, 1.0, 3.0], prec).to_complex();
        let x = complex_solve(&v, &rhs).unwrap();
        assert!((x[0].re.to_f64() - 0.4).abs() < 1e-15);
        assert!((x[1].re.to_f64() - 0.2).abs() < 1e-15);
    }
}
