//! Exact rationals for probabilities and thresholds.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

pub type Ratio = num_rational::Ratio<i64>;

/// Parse `"3"`, `"1/5"` or a plain decimal such as `"0.25"` into an exact rational.
pub fn parse_ratio(text: &str) -> Result<Ratio> {
    let s = text.trim();
    let bad = || Error::Parse(format!("`{text}` is not a rational number"));
    if let Some((num, den)) = s.split_once('/') {
        let num: i64 = num.trim().parse().map_err(|_| bad())?;
        let den: i64 = den.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(num, den));
    }
    let (negative, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    if frac_part.len() > 17 {
        return Err(Error::Parse(format!(
            "`{text}` has too many decimal places"
        )));
    }
    let scale = 10i64.pow(frac_part.len() as u32);
    let int: i64 = if int_part.is_empty() {
        0
    } else {
        int_part.parse().map_err(|_| bad())?
    };
    let frac: i64 = if frac_part.is_empty() {
        0
    } else {
        frac_part.parse().map_err(|_| bad())?
    };
    let num = int
        .checked_mul(scale)
        .and_then(|v| v.checked_add(frac))
        .ok_or_else(bad)?;
    let r = Ratio::new(num, scale);
    Ok(if negative { -r } else { r })
}

pub fn format_ratio(r: &Ratio) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &Ratio) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `count <= ratio * scale`, by cross-multiplication.
#[inline]
pub fn count_at_most(count: usize, ratio: &Ratio, scale: usize) -> bool {
    (count as i128) * (*ratio.denom() as i128) <= (*ratio.numer() as i128) * (scale as i128)
}

/// `count >= ratio * scale`, by cross-multiplication.
#[inline]
pub fn count_at_least(count: usize, ratio: &Ratio, scale: usize) -> bool {
    (count as i128) * (*ratio.denom() as i128) >= (*ratio.numer() as i128) * (scale as i128)
}

pub(crate) fn is_nonnegative(r: &Ratio) -> bool {
    r.is_zero() || r.is_positive()
}

/// Serde adapter writing rationals as `"n/d"` strings.
pub mod serde_ratio {
    use super::{format_ratio, parse_ratio, Ratio};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Ratio, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_ratio(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Ratio, D::Error> {
        let text = String::deserialize(d)?;
        parse_ratio(&text).map_err(serde::de::Error::custom)
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(r: &Option<Ratio>, s: S) -> Result<S::Ok, S::Error> {
            match r {
                Some(r) => s.serialize_some(&format_ratio(r)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Ratio>, D::Error> {
            Option::<String>::deserialize(d)?
                .map(|t| parse_ratio(&t).map_err(serde::de::Error::custom))
                .transpose()
        }
    }
}
