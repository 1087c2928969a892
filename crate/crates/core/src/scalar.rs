//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! Two families are supported: exact rationals ([`Rational`]) for decisions and
//! certificates, and IEEE floats for large Monte Carlo runs. All comparisons go
//! through [`Scalar::tolerance`], which is zero for exact scalars.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, NumAssignRef, NumRef, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Arbitrary-precision rational number.
pub type Rational = BigRational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Double,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exact => f.write_str("exact"),
            Mode::Double => f.write_str("double"),
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" | "rational" => Ok(Mode::Exact),
            "double" | "f64" => Ok(Mode::Double),
            other => Err(format!("unknown mode `{other}` (expected exact|double)")),
        }
    }
}

pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialOrd
    + Signed
    + NumRef
    + NumAssignRef
    + FromPrimitive
    + Send
    + Sync
    + 'static
{
    const MODE: Mode;

    /// Absolute threshold below which a value is treated as zero.
    fn tolerance() -> Self;

    fn to_f64(&self) -> f64;

    /// Nearest representable value; exact for dyadic inputs in rational mode.
    fn approx_f64(x: f64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self;

    /// Parses a decimal (`0.25`, `-3`, `1e-3`) or a fraction (`num/den`).
    fn parse_scalar(s: &str) -> Option<Self>;

    /// Text form used by the file formats; exact scalars round-trip.
    fn to_text(&self) -> String {
        self.to_string()
    }

    fn from_sign(s: i8) -> Self {
        if s < 0 {
            -Self::one()
        } else {
            Self::one()
        }
    }

    /// `2^{-p}`.
    fn pow2_recip(p: usize) -> Self {
        let mut v = Self::one();
        let half = Self::from_ratio(1, 2);
        for _ in 0..p {
            v *= &half;
        }
        v
    }

    fn is_negligible(&self) -> bool {
        self.abs() <= Self::tolerance()
    }

    fn is_positive_strict(&self) -> bool {
        *self > Self::tolerance()
    }

    fn is_negative_strict(&self) -> bool {
        *self < -Self::tolerance()
    }
}

impl Scalar for f64 {
    const MODE: Mode = Mode::Double;

    fn tolerance() -> Self {
        1e-9
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn approx_f64(x: f64) -> Self {
        x
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn parse_scalar(s: &str) -> Option<Self> {
        let s = s.trim();
        match s.split_once('/') {
            Some((n, d)) => {
                let n: f64 = n.trim().parse().ok()?;
                let d: f64 = d.trim().parse().ok()?;
                (d != 0.0).then(|| n / d)
            }
            None => s.parse().ok(),
        }
    }

    fn to_text(&self) -> String {
        format!("{self:e}")
    }

    fn pow2_recip(p: usize) -> Self {
        (-(p as f64)).exp2()
    }
}

impl Scalar for f32 {
    const MODE: Mode = Mode::Double;

    fn tolerance() -> Self {
        1e-5
    }

    fn to_f64(&self) -> f64 {
        *self as f64
    }

    fn approx_f64(x: f64) -> Self {
        x as f32
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        (num as f64 / den as f64) as f32
    }

    fn parse_scalar(s: &str) -> Option<Self> {
        f64::parse_scalar(s).map(|v| v as f32)
    }

    fn to_text(&self) -> String {
        format!("{self:e}")
    }
}

impl Scalar for Rational {
    const MODE: Mode = Mode::Exact;

    fn tolerance() -> Self {
        Rational::zero()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn approx_f64(x: f64) -> Self {
        Rational::from_float(x).unwrap_or_else(Rational::zero)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn parse_scalar(s: &str) -> Option<Self> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            return (!d.is_zero()).then(|| Rational::new(n, d));
        }
        parse_decimal(s)
    }

    fn pow2_recip(p: usize) -> Self {
        Rational::new(BigInt::one(), BigInt::one() << p)
    }
}

/// Exact parse of a plain or scientific decimal literal.
fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let joined = format!("{int_part}{frac_part}");
    let numer: BigInt = if joined.is_empty() { BigInt::zero() } else { joined.parse().ok()? };
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = Rational::from_integer(numer);
    if scale >= 0 {
        value *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if negative { -value } else { value })
}
