//! Exact rational helpers for the geometric slice schedule.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = BigRational;

/// Largest denominator kept when a decimal is converted to a fraction.
pub const MAX_DECIMAL_DENOMINATOR: u64 = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RationalError {
    #[error("ParseRational: cannot read {0:?} as p/q or a decimal")]
    Parse(String),
    #[error("ParseRational: zero denominator in {0:?}")]
    ZeroDenominator(String),
}

pub fn from_u64(v: u64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(num: u64, den: u64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Floor of a non-negative rational; saturates at `u64::MAX`.
pub fn floor_u64(r: &Rational) -> u64 {
    let f = r.floor().to_integer();
    if f.is_negative() {
        0
    } else {
        f.to_u64().unwrap_or(u64::MAX)
    }
}

pub fn ceil_u64(r: &Rational) -> u64 {
    let c = r.ceil().to_integer();
    if c.is_negative() {
        0
    } else {
        c.to_u64().unwrap_or(u64::MAX)
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `p/q` when the denominator is not one, the bare integer otherwise.
pub fn format(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Reads `p/q`, an integer, or a decimal. Decimals snap to the nearest
/// fraction with denominator at most [`MAX_DECIMAL_DENOMINATOR`] (smallest
/// denominator wins a tie); `p/q` input is kept exactly.
pub fn parse(text: &str) -> Result<Rational, RationalError> {
    let t = text.trim();
    let bad = || RationalError::Parse(text.to_string());
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(RationalError::ZeroDenominator(text.to_string()));
        }
        return Ok(Rational::new(p, q));
    }
    let exact = parse_decimal(t).ok_or_else(bad)?;
    if exact.denom().is_one() {
        return Ok(exact);
    }
    Ok(nearest_with_denominator(&exact, MAX_DECIMAL_DENOMINATOR))
}

fn parse_decimal(t: &str) -> Option<Rational> {
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let all_digits = |s: &str| s.chars().all(|c| c.is_ascii_digit());
    if !all_digits(int_part) || !all_digits(frac_part) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().ok()?
    };
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let r = Rational::new(numer, denom);
    Some(if neg { -r } else { r })
}

/// Closest `p/q` to `x` with `1 <= q <= max_den`.
pub fn nearest_with_denominator(x: &Rational, max_den: u64) -> Rational {
    let mut best: Option<(Rational, Rational)> = None;
    for q in 1..=max_den.max(1) {
        let qr = from_u64(q);
        let scaled = x * &qr;
        // Round half away from zero, then compare exactly.
        let p = (scaled + Rational::new(BigInt::one(), BigInt::from(2))).floor();
        let cand = p / qr;
        let err = (&cand - x).abs();
        match &best {
            Some((_, e)) if *e <= err => {}
            _ => best = Some((cand, err)),
        }
    }
    best.map(|(c, _)| c).unwrap_or_else(|| x.clone())
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}
