//! Lossless text round-trip for binary64 values in C99 `%a` style
//! (`-0x1.921fb54442d18p+1`). Formatting and parsing are exact: every finite
//! value, including subnormals, round-trips bit for bit.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HexFloatError {
    #[error("malformed hex float literal: {0}")]
    Malformed(String),
    #[error("hex float out of binary64 range: {0}")]
    OutOfRange(String),
}

/// Formats a finite binary64 value as a hex-float literal.
/// Normals print as `0x1.<frac>p<exp>`, subnormals as `0x0.<frac>p-1022`,
/// zeros as `0x0p+0` / `-0x0p+0`. Panics on NaN or infinity.
pub fn format_hex(x: f64) -> String {
    assert!(x.is_finite(), "hex float formatting requires a finite value");
    let bits = x.to_bits();
    let sign = if bits >> 63 != 0 { "-" } else { "" };
    let exp_bits = ((bits >> 52) & 0x7ff) as i32;
    let mant = bits & ((1u64 << 52) - 1);
    if exp_bits == 0 && mant == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, exp) = if exp_bits == 0 {
        ('0', -1022)
    } else {
        ('1', exp_bits - 1023)
    };
    let mut frac = format!("{mant:013x}");
    while frac.ends_with('0') {
        frac.pop();
    }
    let mut out = String::with_capacity(24);
    let _ = if frac.is_empty() {
        write!(out, "{sign}0x{lead}p{exp:+}")
    } else {
        write!(out, "{sign}0x{lead}.{frac}p{exp:+}")
    };
    out
}

/// Parses a hex-float literal produced by [`format_hex`] (or any equivalent
/// C99 form with at most 32 significant hex digits). The conversion is exact;
/// literals with more than 53 significant bits or outside the binary64 range
/// are rejected rather than rounded.
pub fn parse_hex(s: &str) -> Result<f64, HexFloatError> {
    let err = || HexFloatError::Malformed(s.to_string());
    let mut rest = s.trim();
    let negative = match rest.as_bytes().first() {
        Some(b'-') => {
            rest = &rest[1..];
            true
        }
        Some(b'+') => {
            rest = &rest[1..];
            false
        }
        _ => false,
    };
    let rest = rest
        .strip_prefix("0x")
        .or_else(|| rest.strip_prefix("0X"))
        .ok_or_else(err)?;
    let (digits, exp_str) = rest
        .split_once(['p', 'P'])
        .ok_or_else(err)?;
    let exp: i32 = exp_str.parse().map_err(|_| err())?;
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() || int_part.len() + frac_part.len() > 32 {
        return Err(err());
    }
    let mut mant: u128 = 0;
    for c in int_part.chars().chain(frac_part.chars()) {
        let d = c.to_digit(16).ok_or_else(err)?;
        mant = mant
            .checked_mul(16)
            .and_then(|m| m.checked_add(d as u128))
            .ok_or_else(err)?;
    }
    if mant == 0 {
        return Ok(if negative { -0.0 } else { 0.0 });
    }
    // normalize: value = mant * 2^e2 with mant odd
    let mut e2 = exp as i64 - 4 * frac_part.len() as i64;
    let tz = mant.trailing_zeros();
    mant >>= tz;
    e2 += tz as i64;
    if mant >> 53 != 0 {
        return Err(HexFloatError::OutOfRange(s.to_string()));
    }
    let m = mant as u64 as f64; // exact: < 2^53
    let top = (128 - mant.leading_zeros()) as i64; // significant bits of mant
    // the top bit must stay in range and the bottom bit (mant is odd, so it
    // sits exactly at 2^e2) must not fall below the smallest subnormal
    if e2 + top - 1 > 1023 || e2 < -1074 {
        return Err(HexFloatError::OutOfRange(s.to_string()));
    }
    // exact two-chunk power-of-two scaling; each factor is representable and
    // each product is exact because the final value is representable
    let e1 = (e2 / 2) as i32;
    let e2b = (e2 - e1 as i64) as i32;
    let v = m * pow2(e1) * pow2(e2b);
    Ok(if negative { -v } else { v })
}

/// `2^k` for `k` in the representable range `[-1074, 1023]`.
fn pow2(k: i32) -> f64 {
    debug_assert!((-1074..=1023).contains(&k));
    if k >= -1022 {
        f64::from_bits(((k + 1023) as u64) << 52)
    } else {
        f64::from_bits(1u64 << (k + 1074))
    }
}
