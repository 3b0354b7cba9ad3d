//! Canonical text forms for hyperparameter values.
//!
//! Real and integer values are never held as binary floats. They are kept as
//! canonical decimal strings so that `"5e-06"`, `"0.000005"` and `"5.0e-6"`
//! all name the same grid point on every platform.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Value kind of a hyperparameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Real,
    Integer,
    Categorical,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Real => "real",
            Kind::Integer => "integer",
            Kind::Categorical => "categorical",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

// Integers are expanded to plain digits, so cap how far an exponent may push them.
const MAX_INTEGER_EXPONENT: i64 = 30;

/// A finite decimal `±digits × 10^exp` with no leading or trailing zeros in
/// `digits`. Zero is represented by empty `digits`.
#[derive(Debug, PartialEq, Eq)]
struct Decimal {
    negative: bool,
    digits: String,
    exp: i64,
}

fn parse_decimal(raw: &str) -> Option<Decimal> {
    let s = raw.trim();
    let (negative, s) = match s.as_bytes().first()? {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(at) => (&s[..at], Some(&s[at + 1..])),
        None => (s, None),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(at) => (&mantissa[..at], &mantissa[at + 1..]),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let mut exp: i64 = match exponent {
        None => 0,
        Some(e) => {
            let digits = e.strip_prefix(['+', '-']).unwrap_or(e);
            if digits.is_empty() || digits.len() > 9 || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            e.parse().ok()?
        }
    };
    exp -= frac_part.len() as i64;
    let all: String = int_part.chars().chain(frac_part.chars()).collect();
    let trimmed = all.trim_start_matches('0');
    let without_trailing = trimmed.trim_end_matches('0');
    exp += (trimmed.len() - without_trailing.len()) as i64;
    let digits = without_trailing.to_string();
    if digits.is_empty() {
        return Some(Decimal { negative: false, digits, exp: 0 });
    }
    Some(Decimal { negative, digits, exp })
}

fn render_real(d: &Decimal) -> String {
    if d.digits.is_empty() {
        return "0.0e0".to_string();
    }
    let sci_exp = d.exp + d.digits.len() as i64 - 1;
    let (lead, rest) = d.digits.split_at(1);
    let rest = if rest.is_empty() { "0" } else { rest };
    let sign = if d.negative { "-" } else { "" };
    format!("{sign}{lead}.{rest}e{sci_exp}")
}

fn render_integer(d: &Decimal) -> Option<String> {
    if d.digits.is_empty() {
        return Some("0".to_string());
    }
    if d.exp < 0 || d.exp > MAX_INTEGER_EXPONENT {
        return None;
    }
    let sign = if d.negative { "-" } else { "" };
    Some(format!("{sign}{}{}", d.digits, "0".repeat(d.exp as usize)))
}

/// Returns the canonical text of `raw` for a hyperparameter of `kind`, or a
/// short reason it is not a valid value.
///
/// Reals render as `D.DDDe±X` (`"5e-06"` becomes `"5.0e-6"`), integers as
/// plain digits, and categorical values lose surrounding whitespace.
pub fn canonical_value(kind: Kind, raw: &str) -> Result<String, String> {
    match kind {
        Kind::Categorical => {
            let v = raw.trim();
            if v.is_empty() {
                Err("empty categorical value".to_string())
            } else {
                Ok(v.to_string())
            }
        }
        Kind::Real => parse_decimal(raw)
            .map(|d| render_real(&d))
            .ok_or_else(|| format!("'{raw}' is not a decimal number")),
        Kind::Integer => {
            let d = parse_decimal(raw).ok_or_else(|| format!("'{raw}' is not a decimal number"))?;
            render_integer(&d).ok_or_else(|| format!("'{raw}' is not an integer"))
        }
    }
}
