//! Extended-precision real scalar.
//!
//! [`HiPrec`] wraps an MPFR float and carries its own mantissa width. Binary
//! operations are evaluated at the wider of the two operand precisions and
//! rounded to nearest, so mixing precisions never silently loses bits.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use rug::float::{Constant, Round};
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::error::{Result, SogError};

/// Smallest precision accepted anywhere in the crate.
pub const MIN_PRECISION: u32 = 53;

/// An extended-precision real number with an explicit mantissa width in bits.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct HiPrec(Float);

impl HiPrec {
    pub fn zero(prec: u32) -> Self {
        HiPrec(Float::new(prec.max(MIN_PRECISION)))
    }

    pub fn one(prec: u32) -> Self {
        Self::from_i64(1, prec)
    }

    pub fn from_f64(v: f64, prec: u32) -> Self {
        HiPrec(Float::with_val(prec.max(MIN_PRECISION), v))
    }

    pub fn from_i64(v: i64, prec: u32) -> Self {
        HiPrec(Float::with_val(prec.max(MIN_PRECISION), v))
    }

    pub fn from_integer(v: &Integer, prec: u32) -> Self {
        HiPrec(Float::with_val(prec.max(MIN_PRECISION), v))
    }

    /// Correctly rounded conversion of an exact rational.
    pub fn from_rational(v: &Rational, prec: u32) -> Self {
        HiPrec(Float::with_val(prec.max(MIN_PRECISION), v))
    }

    /// `num / den` with a single rounding.
    pub fn ratio(num: i64, den: i64, prec: u32) -> Self {
        Self::from_rational(&Rational::from((num, den)), prec)
    }

    pub fn pi(prec: u32) -> Self {
        HiPrec(Float::with_val(prec.max(MIN_PRECISION), Constant::Pi))
    }

    pub fn ln2(prec: u32) -> Self {
        HiPrec(Float::with_val(prec.max(MIN_PRECISION), Constant::Log2))
    }

    pub fn euler_gamma(prec: u32) -> Self {
        HiPrec(Float::with_val(prec.max(MIN_PRECISION), Constant::Euler))
    }

    /// `2^exp` exactly.
    pub fn pow2(exp: i32, prec: u32) -> Self {
        let mut v = Float::with_val(prec.max(MIN_PRECISION), 1);
        v <<= exp;
        HiPrec(v)
    }

    pub fn infinity(prec: u32) -> Self {
        HiPrec(Float::with_val(prec.max(MIN_PRECISION), rug::float::Special::Infinity))
    }

    pub fn from_float(v: Float) -> Self {
        HiPrec(v)
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn into_float(self) -> Float {
        self.0
    }

    pub fn prec(&self) -> u32 {
        self.0.prec()
    }

    /// Rounds (or widens) to `prec` bits.
    pub fn with_prec(&self, prec: u32) -> Self {
        HiPrec(Float::with_val(prec.max(MIN_PRECISION), &self.0))
    }

    pub fn set_prec(&mut self, prec: u32) {
        self.0.set_prec(prec.max(MIN_PRECISION));
    }

    /// Round-to-nearest conversion to binary64.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64_round(Round::Nearest)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// Nearest integer, ties away from zero.
    pub fn round(&self) -> Self {
        HiPrec(self.0.clone().round())
    }

    pub fn floor(&self) -> Self {
        HiPrec(self.0.clone().floor())
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn is_sign_negative(&self) -> bool {
        self.0.is_sign_negative() && !self.0.is_zero()
    }

    /// -1, 0 or 1.
    pub fn signum_i32(&self) -> i32 {
        match self.0.cmp0() {
            Some(Ordering::Less) => -1,
            Some(Ordering::Greater) => 1,
            _ => 0,
        }
    }

    pub fn cmp_abs(&self, other: &HiPrec) -> Ordering {
        self.0.cmp_abs(&other.0).unwrap_or(Ordering::Equal)
    }

    pub fn total_cmp(&self, other: &HiPrec) -> Ordering {
        self.0.partial_cmp(&other.0).unwrap_or(Ordering::Equal)
    }

    /// Binary exponent `e` such that `|x| = m * 2^e` with `0.5 <= m < 1`.
    pub fn exponent(&self) -> Option<i32> {
        self.0.get_exp()
    }

    pub fn abs(&self) -> Self {
        HiPrec(self.0.clone().abs())
    }

    pub fn sqr(&self) -> Self {
        HiPrec(self.0.clone().square())
    }

    pub fn sqrt(&self) -> Self {
        HiPrec(self.0.clone().sqrt())
    }

    pub fn recip(&self) -> Self {
        HiPrec(self.0.clone().recip())
    }

    pub fn exp(&self) -> Self {
        HiPrec(self.0.clone().exp())
    }

    pub fn ln(&self) -> Self {
        HiPrec(self.0.clone().ln())
    }

    pub fn cos(&self) -> Self {
        HiPrec(self.0.clone().cos())
    }

    pub fn sin(&self) -> Self {
        HiPrec(self.0.clone().sin())
    }

    pub fn acos(&self) -> Self {
        HiPrec(self.0.clone().acos())
    }

    pub fn asin(&self) -> Self {
        HiPrec(self.0.clone().asin())
    }

    pub fn cosh(&self) -> Self {
        HiPrec(self.0.clone().cosh())
    }

    pub fn sinh(&self) -> Self {
        HiPrec(self.0.clone().sinh())
    }

    pub fn erf(&self) -> Self {
        HiPrec(self.0.clone().erf())
    }

    pub fn gamma(&self) -> Self {
        HiPrec(self.0.clone().gamma())
    }

    pub fn ln_1p(&self) -> Self {
        HiPrec(self.0.clone().ln_1p())
    }

    pub fn exp_m1(&self) -> Self {
        HiPrec(self.0.clone().exp_m1())
    }

    pub fn powi(&self, k: i32) -> Self {
        HiPrec(self.0.clone().pow(k))
    }

    pub fn pow(&self, e: &HiPrec) -> Self {
        let prec = self.prec().max(e.prec());
        HiPrec(Float::with_val(prec, (&self.0).pow(&e.0)))
    }

    /// Multiplies by `2^k` exactly.
    pub fn mul_pow2(&self, k: i32) -> Self {
        let mut v = self.0.clone();
        v <<= k;
        HiPrec(v)
    }

    pub fn max<'a>(&'a self, other: &'a HiPrec) -> &'a HiPrec {
        if other.0 > self.0 {
            other
        } else {
            self
        }
    }

    /// `self += a * b` with a single rounding.
    pub fn add_mul(&mut self, a: &HiPrec, b: &HiPrec) {
        self.widen_to(a.prec().max(b.prec()));
        self.0 += &a.0 * &b.0;
    }

    /// `self -= a * b` with a single rounding.
    pub fn sub_mul(&mut self, a: &HiPrec, b: &HiPrec) {
        self.widen_to(a.prec().max(b.prec()));
        self.0 -= &a.0 * &b.0;
    }

    fn widen_to(&mut self, prec: u32) {
        if prec > self.0.prec() {
            self.0.set_prec(prec);
        }
    }

    /// Decimal digits needed so that parsing the string back at the same
    /// precision recovers the value exactly.
    pub fn roundtrip_digits(prec: u32) -> usize {
        (f64::from(prec) * std::f64::consts::LOG10_2).ceil() as usize + 2
    }

    /// Scientific decimal notation with enough digits to round-trip.
    pub fn to_decimal_string(&self) -> String {
        if self.0.is_zero() {
            return "0".to_string();
        }
        self.0
            .to_string_radix(10, Some(Self::roundtrip_digits(self.prec())))
    }

    /// Short decimal rendering with `digits` significant digits.
    pub fn to_sci(&self, digits: usize) -> String {
        if self.0.is_zero() {
            return "0".to_string();
        }
        self.0.to_string_radix(10, Some(digits.max(1)))
    }

    /// Parses a decimal (or `inf`, `nan`) literal, rounding to `prec` bits.
    pub fn parse(s: &str, prec: u32) -> Result<Self> {
        let parsed = Float::parse(s.trim())
            .map_err(|e| SogError::Parse(format!("invalid decimal '{s}': {e}")))?;
        Ok(HiPrec(Float::with_val(prec.max(MIN_PRECISION), parsed)))
    }
}

impl fmt::Debug for HiPrec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HiPrec({}; {} bits)", self.to_sci(20), self.prec())
    }
}

impl fmt::Display for HiPrec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(d) => f.write_str(&self.to_sci(d)),
            None => f.write_str(&self.to_decimal_string()),
        }
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $assign_tr:ident, $assign:ident) => {
        impl<'a> $tr<&'a HiPrec> for &'a HiPrec {
            type Output = HiPrec;
            fn $method(self, rhs: &'a HiPrec) -> HiPrec {
                let prec = self.0.prec().max(rhs.0.prec());
                HiPrec(Float::with_val(prec, (&self.0).$method(&rhs.0)))
            }
        }
        impl $tr<HiPrec> for HiPrec {
            type Output = HiPrec;
            fn $method(mut self, rhs: HiPrec) -> HiPrec {
                self.$assign(&rhs);
                self
            }
        }
        impl<'a> $tr<&'a HiPrec> for HiPrec {
            type Output = HiPrec;
            fn $method(mut self, rhs: &'a HiPrec) -> HiPrec {
                self.$assign(rhs);
                self
            }
        }
        impl<'a> $tr<HiPrec> for &'a HiPrec {
            type Output = HiPrec;
            fn $method(self, rhs: HiPrec) -> HiPrec {
                self.$method(&rhs)
            }
        }
        impl<'a> $assign_tr<&'a HiPrec> for HiPrec {
            fn $assign(&mut self, rhs: &'a HiPrec) {
                self.widen_to(rhs.0.prec());
                self.0.$assign(&rhs.0);
            }
        }
        impl $assign_tr<HiPrec> for HiPrec {
            fn $assign(&mut self, rhs: HiPrec) {
                self.$assign(&rhs);
            }
        }
        impl $tr<i64> for &HiPrec {
            type Output = HiPrec;
            fn $method(self, rhs: i64) -> HiPrec {
                HiPrec(Float::with_val(self.0.prec(), (&self.0).$method(rhs)))
            }
        }
        impl $tr<i64> for HiPrec {
            type Output = HiPrec;
            fn $method(mut self, rhs: i64) -> HiPrec {
                self.0.$assign(rhs);
                self
            }
        }
        impl $assign_tr<i64> for HiPrec {
            fn $assign(&mut self, rhs: i64) {
                self.0.$assign(rhs);
            }
        }
    };
}

binop!(Add, add, AddAssign, add_assign);
binop!(Sub, sub, SubAssign, sub_assign);
binop!(Mul, mul, MulAssign, mul_assign);
binop!(Div, div, DivAssign, div_assign);

impl Neg for HiPrec {
    type Output = HiPrec;
    fn neg(self) -> HiPrec {
        HiPrec(-self.0)
    }
}

impl Neg for &HiPrec {
    type Output = HiPrec;
    fn neg(self) -> HiPrec {
        HiPrec(-self.0.clone())
    }
}

impl PartialEq<f64> for HiPrec {
    fn eq(&self, other: &f64) -> bool {
        self.0 == *other
    }
}

impl PartialOrd<f64> for HiPrec {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.0.partial_cmp(other)
    }
}

/// Sum with a fixed left-to-right order.
pub fn sum<'a, I: IntoIterator<Item = &'a HiPrec>>(items: I, prec: u32) -> HiPrec {
    items.into_iter().fold(HiPrec::zero(prec), |mut acc, v| {
        acc += v;
        acc
    })
}
