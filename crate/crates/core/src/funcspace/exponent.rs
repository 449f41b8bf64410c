use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A Lebesgue/Hardy exponent in `[1, ∞]`.
///
/// Infinity is its own variant and never enters arithmetic as `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn finite(value: f64) -> Result<Self> {
        if !value.is_finite() || value < 1.0 {
            return Err(invalid(format!("exponent must be a finite real >= 1, got {value}")));
        }
        Ok(Exponent::Finite(value))
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Exponent::Finite(v) => Some(v),
            Exponent::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    /// The finite value, or an error naming `what` when the exponent is infinite.
    pub fn require_finite(self, what: &str) -> Result<f64> {
        self.value()
            .ok_or_else(|| invalid(format!("{what} requires a finite exponent")))
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(v) => write!(f, "{v}"),
            Exponent::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s == "∞" {
            return Ok(Exponent::Infinity);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| invalid(format!("cannot parse exponent {s:?}")))?;
        Exponent::finite(v)
    }
}

impl From<Exponent> for String {
    fn from(e: Exponent) -> String {
        e.to_string()
    }
}

impl TryFrom<String> for Exponent {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_infinity_and_reals() {
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::Infinity);
        assert_eq!("2".parse::<Exponent>().unwrap(), Exponent::Finite(2.0));
        assert!("0.5".parse::<Exponent>().is_err());
        assert!(Exponent::finite(f64::INFINITY).is_err());
    }

    #[test]
    fn display_round_trips() {
        for e in [Exponent::Infinity, Exponent::Finite(1.0), Exponent::Finite(2.5)] {
            assert_eq!(e.to_string().parse::<Exponent>().unwrap(), e);
        }
    }
}
