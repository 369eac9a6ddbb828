//! Exact rational arithmetic and decimal rendering.
//!
//! All metrics are computed from integer pixel counts, so every score except
//! STQ is a rational number. STQ is the square root of one and is carried as
//! its exact square.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub type Rational = BigRational;

pub fn ratio(num: u64, den: u64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Sums rationals pairwise so intermediate denominators stay balanced.
pub fn sum(mut terms: Vec<Rational>) -> Rational {
    if terms.is_empty() {
        return Rational::zero();
    }
    while terms.len() > 1 {
        let mut next = Vec::with_capacity(terms.len().div_ceil(2));
        let mut it = terms.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a + b),
                None => next.push(a),
            }
        }
        terms = next;
    }
    terms.pop().unwrap()
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn pow10(places: u32) -> BigInt {
    num_traits::pow(BigInt::from(10u32), places as usize)
}

fn format_scaled(negative: bool, scaled: &BigInt, places: u32) -> String {
    let digits = scaled.to_string();
    let places = places as usize;
    let body = if places == 0 {
        digits
    } else {
        let padded = format!("{:0>width$}", digits, width = places + 1);
        let (int_part, frac) = padded.split_at(padded.len() - places);
        format!("{int_part}.{frac}")
    };
    if negative && !scaled.is_zero() {
        format!("-{body}")
    } else {
        body
    }
}

/// Decimal rendering of `r` rounded half-to-even at `places` digits.
pub fn render(r: &Rational, places: u32) -> String {
    let negative = r.is_negative();
    let mag = r.abs();
    let scaled = mag.numer() * pow10(places);
    let (mut q, rem) = scaled.div_rem(mag.denom());
    match (rem * 2u32).cmp(mag.denom()) {
        Ordering::Greater => q += 1u32,
        Ordering::Equal if q.is_odd() => q += 1u32,
        _ => {}
    }
    format_scaled(negative, &q, places)
}

/// Decimal rendering of `sqrt(r)` (r ≥ 0) rounded half-to-even.
pub fn render_sqrt(r: &Rational, places: u32) -> String {
    assert!(!r.is_negative(), "square root of a negative rational");
    // floor(2·sqrt(r)·10^p) = isqrt(floor(4·r·10^2p))
    let scaled = Rational::from_integer(pow10(2 * places) * 4u32) * r;
    let floor = scaled.floor().to_integer();
    let floor_u = floor.to_biguint().unwrap_or_else(BigUint::zero);
    let twice = floor_u.sqrt();
    let exact_twice = scaled.is_integer() && &twice * &twice == floor_u;
    let mut q = BigInt::from_biguint(Sign::Plus, &twice >> 1);
    if twice.is_odd() {
        // fractional part of x is ≥ 1/2; exactly 1/2 only for a perfect square
        if !exact_twice || q.is_odd() {
            q += 1u32;
        }
    }
    format_scaled(false, &q, places)
}

/// A reported number: either a rational or the square root of one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Exact {
    Rational(Rational),
    Sqrt(Rational),
}

impl Exact {
    pub fn to_f64(&self) -> f64 {
        match self {
            Exact::Rational(r) => to_f64(r),
            Exact::Sqrt(r) => to_f64(r).sqrt(),
        }
    }

    pub fn render(&self, places: u32) -> String {
        match self {
            Exact::Rational(r) => render(r, places),
            Exact::Sqrt(r) => render_sqrt(r, places),
        }
    }

    /// The square of the value, always rational.
    pub fn squared(&self) -> Rational {
        match self {
            Exact::Rational(r) => r * r,
            Exact::Sqrt(r) => r.clone(),
        }
    }
}

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exact::Rational(r) => write!(f, "{r}"),
            Exact::Sqrt(r) => write!(f, "sqrt({r})"),
        }
    }
}

/// Decimal places used for the `value` field of serialized numbers.
pub const REPORT_PLACES: u32 = 6;

/// Serialized form of [`Exact`]: numerator and denominator as decimal strings
/// so arbitrarily large counts survive JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactNumber {
    pub num: String,
    pub den: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub sqrt: bool,
    pub value: String,
}

impl From<&Exact> for ExactNumber {
    fn from(e: &Exact) -> Self {
        let (r, sqrt) = match e {
            Exact::Rational(r) => (r, false),
            Exact::Sqrt(r) => (r, true),
        };
        ExactNumber {
            num: r.numer().to_string(),
            den: r.denom().to_string(),
            sqrt,
            value: e.render(REPORT_PLACES),
        }
    }
}

impl From<Exact> for ExactNumber {
    fn from(e: Exact) -> Self {
        (&e).into()
    }
}

impl ExactNumber {
    pub fn to_exact(&self) -> Option<Exact> {
        let num: BigInt = self.num.parse().ok()?;
        let den: BigInt = self.den.parse().ok()?;
        if den.is_zero() {
            return None;
        }
        let r = Rational::new(num, den);
        Some(if self.sqrt { Exact::Sqrt(r) } else { Exact::Rational(r) })
    }
}
