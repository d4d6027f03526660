//! Decimal fixed-point with 12 fractional digits.
//!
//! Funding rates are quoted at 1e-6 granularity and are summed over
//! dozens of periods; keeping them as scaled integers makes those sums
//! exact.

use alloc::format;
use alloc::string::String;
use core::fmt;
use core::iter::Sum;
use core::ops::{Add, AddAssign, Neg, Sub};
use core::str::FromStr;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

pub const FRACTION_DIGITS: u32 = 12;
pub const SCALE: i64 = 1_000_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Fixed(i64);

impl Fixed {
    pub const ZERO: Fixed = Fixed(0);

    pub const fn from_raw(raw: i64) -> Self {
        Fixed(raw)
    }

    pub const fn raw(self) -> i64 {
        self.0
    }

    /// Nearest representable value; non-finite input maps to zero.
    pub fn from_f64(value: f64) -> Self {
        if !value.is_finite() {
            return Fixed::ZERO;
        }
        Fixed(libm::round(value * SCALE as f64) as i64)
    }

    pub fn to_f64(self) -> f64 {
        let int = self.0 / SCALE;
        let frac = self.0 % SCALE;
        int as f64 + frac as f64 / SCALE as f64
    }

    pub fn abs(self) -> Self {
        Fixed(self.0.abs())
    }

    pub fn signum(self) -> i8 {
        self.0.signum() as i8
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn checked_mul_int(self, k: i64) -> Option<Self> {
        self.0.checked_mul(k).map(Fixed)
    }

    /// `self * num / den`, rounded half away from zero.
    pub fn mul_ratio(self, num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        let p = self.0 as i128 * num as i128;
        let d = den as i128;
        let q = p / d;
        let r = p % d;
        let bump = if 2 * r.abs() >= d.abs() {
            if (p < 0) != (d < 0) {
                -1
            } else {
                1
            }
        } else {
            0
        };
        Fixed((q + bump) as i64)
    }
}

impl Add for Fixed {
    type Output = Fixed;
    fn add(self, rhs: Fixed) -> Fixed {
        Fixed(self.0 + rhs.0)
    }
}

impl AddAssign for Fixed {
    fn add_assign(&mut self, rhs: Fixed) {
        self.0 += rhs.0;
    }
}

impl Sub for Fixed {
    type Output = Fixed;
    fn sub(self, rhs: Fixed) -> Fixed {
        Fixed(self.0 - rhs.0)
    }
}

impl Neg for Fixed {
    type Output = Fixed;
    fn neg(self) -> Fixed {
        Fixed(-self.0)
    }
}

impl Sum for Fixed {
    fn sum<I: Iterator<Item = Fixed>>(iter: I) -> Fixed {
        iter.fold(Fixed::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Fixed> for Fixed {
    fn sum<I: Iterator<Item = &'a Fixed>>(iter: I) -> Fixed {
        iter.copied().sum()
    }
}

impl fmt::Display for Fixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let neg = self.0 < 0;
        let mag = self.0.unsigned_abs();
        let int = mag / SCALE as u64;
        let frac = mag % SCALE as u64;
        if neg {
            f.write_str("-")?;
        }
        if frac == 0 {
            return write!(f, "{int}");
        }
        let digits = format!("{frac:012}");
        write!(f, "{int}.{}", digits.trim_end_matches('0'))
    }
}

impl FromStr for Fixed {
    type Err = Error;

    /// Accepts plain decimals (`-0.00025`) and exponent notation (`2.5e-4`).
    /// Digits beyond the 12th fractional place must be zero.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::Decimal(String::from(s));
        let s = s.trim();
        let (mantissa, exp) = match s.find(['e', 'E']) {
            Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
            None => (s, 0),
        };
        let (neg, body) = match mantissa.as_bytes().first() {
            Some(b'-') => (true, &mantissa[1..]),
            Some(b'+') => (false, &mantissa[1..]),
            _ => (false, mantissa),
        };
        let (int_part, frac_part) = match body.find('.') {
            Some(i) => (&body[..i], &body[i + 1..]),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        // All digits as one integer, with the decimal point shifted by `exp`.
        let mut digits: String = String::with_capacity(int_part.len() + frac_part.len());
        digits.push_str(int_part);
        digits.push_str(frac_part);
        let point = int_part.len() as i64 + exp as i64;
        let shift = point - digits.len() as i64 + FRACTION_DIGITS as i64;
        let mut value: i128 = 0;
        let kept = if shift >= 0 {
            digits.len()
        } else {
            let keep = digits.len() as i64 + shift;
            if keep < 0 {
                0
            } else {
                keep as usize
            }
        };
        for (i, b) in digits.bytes().enumerate() {
            let d = (b - b'0') as i128;
            if i < kept {
                value = value.checked_mul(10).and_then(|v| v.checked_add(d)).ok_or_else(bad)?;
            } else if d != 0 {
                return Err(bad());
            }
        }
        if shift > 0 {
            for _ in 0..shift {
                value = value.checked_mul(10).ok_or_else(bad)?;
            }
        }
        if value > i64::MAX as i128 {
            return Err(bad());
        }
        let v = value as i64;
        Ok(Fixed(if neg { -v } else { v }))
    }
}

impl Serialize for Fixed {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Fixed {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct FixedVisitor;

        impl Visitor<'_> for FixedVisitor {
            type Value = Fixed;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a decimal string or number")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Fixed, E> {
                v.parse().map_err(E::custom)
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Fixed, E> {
                Ok(Fixed::from_f64(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Fixed, E> {
                v.checked_mul(SCALE).map(Fixed).ok_or_else(|| E::custom("integer out of range"))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Fixed, E> {
                i64::try_from(v)
                    .ok()
                    .and_then(|v| v.checked_mul(SCALE))
                    .map(Fixed)
                    .ok_or_else(|| E::custom("integer out of range"))
            }
        }

        deserializer.deserialize_any(FixedVisitor)
    }
}
