//! Physical quantities written with explicit unit suffixes, e.g. `"166 kg"`,
//! `"1.2850 hz"`, `"21.6256 kg*m^2"`. Values are converted to SI (frequencies
//! to rad/s).

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dim {
    Dimensionless,
    Mass,
    Length,
    Inertia,
    /// Converted to rad/s.
    Frequency,
    Angle,
    Stiffness,
    RotStiffness,
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Dim::Dimensionless => "dimensionless",
            Dim::Mass => "mass (kg)",
            Dim::Length => "length (m)",
            Dim::Inertia => "inertia (kg*m^2)",
            Dim::Frequency => "frequency (hz or rad/s)",
            Dim::Angle => "angle (rad or deg)",
            Dim::Stiffness => "stiffness (N/m)",
            Dim::RotStiffness => "rotational stiffness (N*m/rad)",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum UnitError {
    #[error("cannot parse quantity {0:?}")]
    Malformed(String),
    #[error("unit {unit:?} in {text:?} is not a {expected}")]
    WrongUnit { text: String, unit: String, expected: Dim },
    #[error("{text:?} needs an explicit unit for {expected}")]
    MissingUnit { text: String, expected: Dim },
}

/// A number or a `"<number> <unit>"` string as found in the data files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Number(f64),
    Text(String),
}

impl From<f64> for Quantity {
    fn from(x: f64) -> Self {
        Quantity::Number(x)
    }
}

fn scale(unit: &str, dim: Dim) -> Option<f64> {
    let u: String = unit.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
    let u = u.as_str();
    match dim {
        Dim::Dimensionless => matches!(u, "" | "-" | "1").then_some(1.0),
        Dim::Mass => match u {
            "kg" => Some(1.0),
            "g" => Some(1e-3),
            _ => None,
        },
        Dim::Length => match u {
            "m" => Some(1.0),
            "cm" => Some(1e-2),
            "mm" => Some(1e-3),
            _ => None,
        },
        Dim::Inertia => matches!(u, "kg*m^2" | "kg.m^2" | "kgm^2" | "kg*m2" | "kgm2").then_some(1.0),
        Dim::Frequency => match u {
            "hz" => Some(2.0 * PI),
            "rad/s" => Some(1.0),
            _ => None,
        },
        Dim::Angle => match u {
            "rad" => Some(1.0),
            "deg" => Some(PI / 180.0),
            _ => None,
        },
        Dim::Stiffness => matches!(u, "n/m").then_some(1.0),
        Dim::RotStiffness => matches!(u, "n*m/rad" | "nm/rad" | "n.m/rad").then_some(1.0),
    }
}

/// Parses `text` as a quantity of dimension `dim`, in SI. Bare numbers are
/// taken as SI except for frequencies, which must say `hz` or `rad/s`.
pub fn parse(text: &str, dim: Dim) -> Result<f64, UnitError> {
    let t = text.trim();
    let split = t
        .char_indices()
        .find(|&(i, c)| {
            !(c.is_ascii_digit() || c == '.' || c == '+' || c == '-' || ((c == 'e' || c == 'E') && i > 0))
        })
        .map_or(t.len(), |(i, _)| i);
    // "1e" followed by a letter is a unit, not an exponent
    let (mut num, mut unit) = t.split_at(split);
    while num.ends_with(['e', 'E']) {
        num = &t[..num.len() - 1];
        unit = &t[num.len()..];
    }
    let value: f64 = num.parse().map_err(|_| UnitError::Malformed(text.to_string()))?;
    let unit = unit.trim();
    if unit.is_empty() && dim == Dim::Frequency {
        return Err(UnitError::MissingUnit {
            text: text.to_string(),
            expected: dim,
        });
    }
    let k = if unit.is_empty() {
        1.0
    } else {
        scale(unit, dim).ok_or_else(|| UnitError::WrongUnit {
            text: text.to_string(),
            unit: unit.to_string(),
            expected: dim,
        })?
    };
    Ok(value * k)
}

impl Quantity {
    pub fn get(&self, dim: Dim) -> Result<f64, UnitError> {
        match self {
            Quantity::Number(x) if dim == Dim::Frequency => Err(UnitError::MissingUnit {
                text: x.to_string(),
                expected: dim,
            }),
            Quantity::Number(x) => Ok(*x),
            Quantity::Text(s) => parse(s, dim),
        }
    }
}

pub fn vec3(q: &[Quantity; 3], dim: Dim) -> Result<nalgebra::Vector3<f64>, UnitError> {
    Ok(nalgebra::Vector3::new(q[0].get(dim)?, q[1].get(dim)?, q[2].get(dim)?))
}

pub fn all(q: &[Quantity], dim: Dim) -> Result<Vec<f64>, UnitError> {
    q.iter().map(|x| x.get(dim)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suffixes() {
        assert_eq!(parse("166 kg", Dim::Mass).unwrap(), 166.0);
        assert_eq!(parse("500g", Dim::Mass).unwrap(), 0.5);
        assert_eq!(parse("-0.5 m", Dim::Length).unwrap(), -0.5);
        assert_eq!(parse("21.6256 kg*m^2", Dim::Inertia).unwrap(), 21.6256);
        assert!((parse("1 hz", Dim::Frequency).unwrap() - 2.0 * PI).abs() < 1e-15);
        assert_eq!(parse("3 rad/s", Dim::Frequency).unwrap(), 3.0);
        assert!((parse("180 deg", Dim::Angle).unwrap() - PI).abs() < 1e-15);
        assert_eq!(parse("1e3 N/m", Dim::Stiffness).unwrap(), 1000.0);
        assert_eq!(parse("0.2", Dim::Dimensionless).unwrap(), 0.2);
    }

    #[test]
    fn rejects() {
        assert!(matches!(parse("1.2 kg", Dim::Length), Err(UnitError::WrongUnit { .. })));
        assert!(matches!(parse("1.285", Dim::Frequency), Err(UnitError::MissingUnit { .. })));
        assert!(matches!(Quantity::Number(1.0).get(Dim::Frequency), Err(UnitError::MissingUnit { .. })));
        assert!(matches!(parse("kg", Dim::Mass), Err(UnitError::Malformed(_))));
        assert!(matches!(parse("1.2.3 m", Dim::Length), Err(UnitError::Malformed(_))));
    }
}
