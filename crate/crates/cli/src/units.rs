//! Numerals with SI suffixes.
//!
//! A quantity is a decimal numeral optionally followed (with or without a
//! space) by a unit suffix. Conversion to the base unit shifts the decimal
//! exponent of the numeral's text before a single correctly rounded parse,
//! so `0.77mm` is the nearest `f64` to `7.7e-4`, not `0.77 * 1e-3`.

use std::fmt;

/// Physical dimension of a configuration value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    /// Meters.
    Length,
    /// Seconds.
    Time,
    /// Events per second; no suffix accepted.
    Rate,
    /// Plain number; no suffix accepted.
    Dimensionless,
}

impl Dimension {
    pub fn base_unit(self) -> &'static str {
        match self {
            Dimension::Length => "m",
            Dimension::Time => "s",
            Dimension::Rate => "1/s",
            Dimension::Dimensionless => "",
        }
    }

    fn suffixes(self) -> &'static [(&'static str, i32)] {
        match self {
            Dimension::Length => &[("m", 0), ("cm", -2), ("mm", -3), ("um", -6), ("µm", -6), ("μm", -6), ("nm", -9)],
            Dimension::Time => &[("s", 0), ("ms", -3), ("us", -6), ("µs", -6), ("μs", -6), ("ns", -9), ("ps", -12)],
            Dimension::Rate | Dimension::Dimensionless => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitError(pub String);

impl fmt::Display for UnitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Splits `text` into the numeral and the (possibly empty) suffix.
fn split_numeral(text: &str) -> (&str, &str) {
    let b = text.as_bytes();
    let mut i = 0;
    if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
        i += 1;
    }
    while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
        i += 1;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        let mut j = i + 1;
        if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
            j += 1;
        }
        if j < b.len() && b[j].is_ascii_digit() {
            while j < b.len() && b[j].is_ascii_digit() {
                j += 1;
            }
            i = j;
        }
    }
    (&text[..i], text[i..].trim_start())
}

/// Rewrites a decimal numeral as `<sign><digits>e<exponent>` shifted by `shift`.
fn shift_exponent(numeral: &str, shift: i32) -> Option<String> {
    let (sign, rest) = match numeral.strip_prefix('-') {
        Some(r) => ("-", r),
        None => ("", numeral.strip_prefix('+').unwrap_or(numeral)),
    };
    let (mantissa, exp) = match rest.find(['e', 'E']) {
        Some(k) => (&rest[..k], rest[k + 1..].parse::<i32>().ok()?),
        None => (rest, 0),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().chain(frac.bytes()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let frac_len = i32::try_from(frac.len()).ok()?;
    let exponent = exp.checked_add(shift)?.checked_sub(frac_len)?;
    Some(format!("{sign}{int}{frac}e{exponent}"))
}

/// Parses `text` as a quantity of dimension `dim`, in base units.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64, UnitError> {
    let text = text.trim();
    let (numeral, suffix) = split_numeral(text);
    if numeral.is_empty() {
        return Err(UnitError(format!("`{text}` is not a number")));
    }
    let shift = if suffix.is_empty() {
        0
    } else {
        match dim.suffixes().iter().find(|(s, _)| *s == suffix) {
            Some(&(_, shift)) => shift,
            None if dim.suffixes().is_empty() => {
                return Err(UnitError(format!("`{text}`: this value takes no unit suffix, found `{suffix}`")));
            }
            None => {
                let allowed: Vec<&str> = dim.suffixes().iter().map(|(s, _)| *s).collect();
                return Err(UnitError(format!(
                    "`{text}`: unit `{suffix}` is not a {} unit (expected one of {})",
                    match dim {
                        Dimension::Length => "length",
                        _ => "time",
                    },
                    allowed.join(", ")
                )));
            }
        }
    };
    let canonical = shift_exponent(numeral, shift).ok_or_else(|| UnitError(format!("`{text}` is not a number")))?;
    let value: f64 = canonical.parse().map_err(|_| UnitError(format!("`{text}` is not a number")))?;
    if !value.is_finite() {
        return Err(UnitError(format!("`{text}` is out of range")));
    }
    Ok(value)
}

/// Shortest text that parses back to exactly `value`, with the base unit.
pub fn format_quantity(value: f64, dim: Dimension) -> String {
    match dim {
        Dimension::Length | Dimension::Time => format!("{value:e} {}", dim.base_unit()),
        Dimension::Rate | Dimension::Dimensionless => format!("{value:e}"),
    }
}
