// SPDX-License-Identifier: Apache-2.0

//! Quantities with explicit units, converted to rad/µs, µs and K.

use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Frequency,
    Time,
    Temperature,
    Number,
}

impl Dimension {
    fn name(self) -> &'static str {
        match self {
            Dimension::Frequency => "frequency",
            Dimension::Time => "time",
            Dimension::Temperature => "temperature",
            Dimension::Number => "number",
        }
    }

    fn hint(self) -> &'static str {
        match self {
            Dimension::Frequency => "MHz, GHz, kHz, Hz, rad/us or rabi",
            Dimension::Time => "ns, us, µs, ms or s",
            Dimension::Temperature => "mK, uK or K",
            Dimension::Number => "no unit",
        }
    }
}

/// Split "8.6 MHz", "8.6MHz" or "-1e-3 rad/us" into number and unit text.
fn split(text: &str) -> Option<(f64, &str)> {
    let t = text.trim();
    let bytes: Vec<(usize, char)> = t.char_indices().collect();
    let mut end = t.len();
    for (k, &(i, c)) in bytes.iter().enumerate() {
        let exponent = matches!(c, 'e' | 'E')
            && k > 0
            && (bytes[k - 1].1.is_ascii_digit() || bytes[k - 1].1 == '.')
            && bytes.get(k + 1).is_some_and(|&(_, n)| n.is_ascii_digit() || n == '-' || n == '+');
        if c.is_whitespace() || (c.is_alphabetic() && !exponent) || c == 'µ' || c == 'μ' {
            end = i;
            break;
        }
    }
    let number = t[..end].trim().parse::<f64>().ok()?;
    Some((number, t[end..].trim()))
}

/// Parse `text` as a quantity of `dim`. `rabi` (rad/µs) enables "rabi" multiples.
pub fn parse_quantity(text: &str, dim: Dimension, rabi: Option<f64>) -> Result<f64, String> {
    let (x, unit) = split(text).ok_or_else(|| format!("expected a number, got '{}'", text.trim()))?;
    if !x.is_finite() {
        return Err(format!("'{}' is not finite", text.trim()));
    }
    if unit.is_empty() {
        return if dim == Dimension::Number || x == 0.0 {
            Ok(x)
        } else {
            Err(format!("'{}' needs a {} unit ({})", text.trim(), dim.name(), dim.hint()))
        };
    }
    let scale = match (dim, unit) {
        (Dimension::Frequency, "rad/us" | "rad/µs" | "rad/μs") => 1.0,
        (Dimension::Frequency, "Hz") => TAU * 1e-6,
        (Dimension::Frequency, "kHz") => TAU * 1e-3,
        (Dimension::Frequency, "MHz") => TAU,
        (Dimension::Frequency, "GHz") => TAU * 1e3,
        (Dimension::Frequency, "rabi") => {
            rabi.ok_or("the 'rabi' unit needs [spectrum] rabi or an explicit coupling")?
        }
        (Dimension::Time, "ns") => 1e-3,
        (Dimension::Time, "us" | "µs" | "μs") => 1.0,
        (Dimension::Time, "ms") => 1e3,
        (Dimension::Time, "s") => 1e6,
        (Dimension::Temperature, "K") => 1.0,
        (Dimension::Temperature, "mK") => 1e-3,
        (Dimension::Temperature, "uK" | "µK" | "μK") => 1e-6,
        _ => return Err(format!("unit '{unit}' is not a {} unit (use {})", dim.name(), dim.hint())),
    };
    Ok(x * scale)
}
