use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use super::hiprec::HiPrec;

/// Complex number with [`HiPrec`] parts.
#[derive(Clone, PartialEq)]
pub struct Complex {
    pub re: HiPrec,
    pub im: HiPrec,
}

impl Complex {
    pub fn new(re: HiPrec, im: HiPrec) -> Self {
        Complex { re, im }
    }

    pub fn zero(prec: u32) -> Self {
        Complex::new(HiPrec::zero(prec), HiPrec::zero(prec))
    }

    pub fn one(prec: u32) -> Self {
        Complex::new(HiPrec::one(prec), HiPrec::zero(prec))
    }

    pub fn from_real(re: HiPrec) -> Self {
        let im = HiPrec::zero(re.prec());
        Complex { re, im }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -&self.im)
    }

    pub fn norm_sqr(&self) -> HiPrec {
        let mut n = self.re.sqr();
        n.add_mul(&self.im, &self.im);
        n
    }

    pub fn abs(&self) -> HiPrec {
        self.norm_sqr().sqrt()
    }

    /// |re| + |im|, a cheap norm for convergence tests.
    pub fn abs1(&self) -> HiPrec {
        self.re.abs() + self.im.abs()
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn scale(&self, s: &HiPrec) -> Self {
        Complex::new(&self.re * s, &self.im * s)
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Self {
        let prec = self.prec();
        if self.im.is_zero() {
            return if self.re.is_sign_negative() {
                Complex::new(HiPrec::zero(prec), (-&self.re).sqrt())
            } else {
                Complex::new(self.re.sqrt(), HiPrec::zero(prec))
            };
        }
        let r = self.abs();
        let re = ((&r + &self.re).mul_pow2(-1)).sqrt();
        let mut im = ((&r - &self.re).mul_pow2(-1)).sqrt();
        if self.im.is_sign_negative() {
            im = -im;
        }
        Complex::new(re, im)
    }

    pub fn exp(&self) -> Self {
        let m = self.re.exp();
        Complex::new(&m * &self.im.cos(), &m * &self.im.sin())
    }

    pub fn recip(&self) -> Self {
        let d = self.norm_sqr();
        Complex::new(&self.re / &d, -(&self.im / &d))
    }

    /// `self += a * b`.
    pub fn add_mul(&mut self, a: &Complex, b: &Complex) {
        self.re.add_mul(&a.re, &b.re);
        self.re.sub_mul(&a.im, &b.im);
        self.im.add_mul(&a.re, &b.im);
        self.im.add_mul(&a.im, &b.re);
    }

    /// `self -= a * b`.
    pub fn sub_mul(&mut self, a: &Complex, b: &Complex) {
        self.re.sub_mul(&a.re, &b.re);
        self.re.add_mul(&a.im, &b.im);
        self.im.sub_mul(&a.re, &b.im);
        self.im.sub_mul(&a.im, &b.re);
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

impl fmt::Debug for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {:+}i)", self.re.to_sci(16), self.im.to_f64())
    }
}

impl<'a> Add<&'a Complex> for &'a Complex {
    type Output = Complex;
    fn add(self, rhs: &'a Complex) -> Complex {
        Complex::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl<'a> Sub<&'a Complex> for &'a Complex {
    type Output = Complex;
    fn sub(self, rhs: &'a Complex) -> Complex {
        Complex::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl<'a> Mul<&'a Complex> for &'a Complex {
    type Output = Complex;
    fn mul(self, rhs: &'a Complex) -> Complex {
        let mut re = &self.re * &rhs.re;
        re.sub_mul(&self.im, &rhs.im);
        let mut im = &self.re * &rhs.im;
        im.add_mul(&self.im, &rhs.re);
        Complex::new(re, im)
    }
}

impl<'a> Div<&'a Complex> for &'a Complex {
    type Output = Complex;
    fn div(self, rhs: &'a Complex) -> Complex {
        // Smith's algorithm keeps intermediates in range.
        if rhs.im.cmp_abs(&rhs.re).is_le() {
            let r = &rhs.im / &rhs.re;
            let mut d = rhs.re.clone();
            d.add_mul(&rhs.im, &r);
            let mut re = self.re.clone();
            re.add_mul(&self.im, &r);
            let mut im = self.im.clone();
            im.sub_mul(&self.re, &r);
            Complex::new(re / &d, im / &d)
        } else {
            let r = &rhs.re / &rhs.im;
            let mut d = rhs.im.clone();
            d.add_mul(&rhs.re, &r);
            let mut re = self.im.clone();
            re.add_mul(&self.re, &r);
            let mut im = &self.im * &r;
            im -= &self.re;
            Complex::new(re / &d, im / &d)
        }
    }
}

impl Neg for &Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        Complex::new(-&self.re, -&self.im)
    }
}

impl<'a> AddAssign<&'a Complex> for Complex {
    fn add_assign(&mut self, rhs: &'a Complex) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl<'a> SubAssign<&'a Complex> for Complex {
    fn sub_assign(&mut self, rhs: &'a Complex) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}
