//! Exact decimal parameters.
//!
//! Kernel parameters and `n_c` are entered as decimal text (`0.1`, `13`,
//! `1e-2`) and kept as exact rationals, so `h = 0.1` squared equals
//! `n_c = 0.01` at every working precision.

use std::fmt;
use std::str::FromStr;

use rug::{Integer, Rational};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::SogError;
use crate::numerics::HiPrec;

#[derive(Clone, PartialEq, Eq)]
pub struct Decimal {
    text: String,
    value: Rational,
}

impl Decimal {
    pub fn from_int(v: i64) -> Self {
        Decimal {
            text: v.to_string(),
            value: Rational::from(v),
        }
    }

    pub fn rational(&self) -> &Rational {
        &self.value
    }

    pub fn to_hiprec(&self, prec: u32) -> HiPrec {
        HiPrec::from_rational(&self.value, prec)
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }

    pub fn is_positive(&self) -> bool {
        self.value > 0
    }

    pub fn is_integer(&self) -> bool {
        *self.value.denom() == 1
    }

    /// Ceiling of the value as an integer.
    pub fn ceil_i64(&self) -> i64 {
        let c = self.value.clone().ceil();
        c.numer().to_i64().unwrap_or(i64::MAX)
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

impl FromStr for Decimal {
    type Err = SogError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let text = s.trim();
        let bad = || SogError::Parse(format!("invalid decimal number '{s}'"));
        let (mantissa, exponent) = match text.find(['e', 'E']) {
            Some(pos) => {
                let exp: i32 = text[pos + 1..].parse().map_err(|_| bad())?;
                (&text[..pos], exp)
            }
            None => (text, 0),
        };
        let (negative, digits) = match mantissa.as_bytes().first() {
            Some(b'-') => (true, &mantissa[1..]),
            Some(b'+') => (false, &mantissa[1..]),
            _ => (false, mantissa),
        };
        let (int_part, frac_part) = match digits.find('.') {
            Some(pos) => (&digits[..pos], &digits[pos + 1..]),
            None => (digits, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let all: String = format!("{int_part}{frac_part}");
        let mut num = Integer::from_str(if all.is_empty() { "0" } else { &all }).map_err(|_| bad())?;
        if negative {
            num = -num;
        }
        let scale = exponent - frac_part.len() as i32;
        let value = if scale >= 0 {
            Rational::from(num * Integer::from(Integer::u_pow_u(10, scale as u32)))
        } else {
            Rational::from((num, Integer::from(Integer::u_pow_u(10, (-scale) as u32))))
        };
        Ok(Decimal {
            text: text.to_string(),
            value,
        })
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl fmt::Debug for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Decimal({})", self.text)
    }
}

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.text)
    }
}

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
