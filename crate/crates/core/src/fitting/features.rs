//! Named real-valued features of an S-parameter array (`s21_db`, ...).

use std::fmt;
use std::str::FromStr;

use crate::autodiff::dual::Scalar;
use crate::error::{Error, Result};
use crate::netcore::{Quantity, SMatrixArray};

/// One S-parameter entry under one real transform. Port indices are stored
/// zero-based; names use the one-based `s{i}{j}_{kind}` form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Feature {
    pub i: usize,
    pub j: usize,
    pub kind: Quantity,
}

impl Feature {
    pub fn new(i: usize, j: usize, kind: Quantity) -> Self {
        Self { i, j, kind }
    }

    fn bad(s: &str) -> Error {
        Error::Config(format!(
            "invalid feature `{s}`; expected s<i><j>_<kind> with kind one of {}",
            Quantity::NAMES.join(", ")
        ))
    }
}

impl FromStr for Feature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        let (port, kind) = lower.split_once('_').ok_or_else(|| Feature::bad(s))?;
        let digits = port.strip_prefix('s').ok_or_else(|| Feature::bad(s))?;
        let mut it = digits.chars().map(|c| c.to_digit(10));
        let (i, j) = match (it.next(), it.next(), it.next()) {
            (Some(Some(i)), Some(Some(j)), None) if i >= 1 && j >= 1 => (i as usize, j as usize),
            _ => return Err(Feature::bad(s)),
        };
        let kind = kind
            .parse::<Quantity>()
            .map_err(|_| Error::unknown_name("feature kind", kind, &Quantity::NAMES))?;
        Ok(Feature::new(i - 1, j - 1, kind))
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}{}_{}", self.i + 1, self.j + 1, self.kind)
    }
}

pub fn parse_features<S: AsRef<str>>(names: &[S]) -> Result<Vec<Feature>> {
    if names.is_empty() {
        return Err(Error::Config("at least one feature is required".into()));
    }
    names.iter().map(|n| n.as_ref().parse()).collect()
}

/// Checks that every feature addresses an existing port pair.
pub fn check_ports(features: &[Feature], ports: usize) -> Result<()> {
    for f in features {
        if f.i >= ports || f.j >= ports {
            return Err(Error::Config(format!(
                "feature `{f}` needs a {}-port network, have {ports}",
                f.i.max(f.j) + 1
            )));
        }
    }
    Ok(())
}

/// Row-major `F × K` matrix of feature values.
pub fn extract<T: Scalar>(s: &SMatrixArray<T>, features: &[Feature]) -> Result<Vec<T::Real>> {
    check_ports(features, s.ports())?;
    let mut out = Vec::with_capacity(s.len() * features.len());
    for k in 0..s.len() {
        for f in features {
            out.push(f.kind.apply(s.get(k, f.i, f.j)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let f: Feature = "s21_db".parse().unwrap();
        assert_eq!(f, Feature::new(1, 0, Quantity::Db));
        assert_eq!(f.to_string(), "s21_db");
        assert_eq!("S11_RE".parse::<Feature>().unwrap().to_string(), "s11_re");
    }

    #[test]
    fn rejects_malformed_names() {
        for bad in ["s1_re", "s111_re", "s01_re", "x11_re", "s11", "s11_phase"] {
            assert!(bad.parse::<Feature>().is_err(), "{bad}");
        }
        let msg = "s11_phase".parse::<Feature>().unwrap_err().to_string();
        assert!(msg.contains("phase") && msg.contains("deg"), "{msg}");
    }

    #[test]
    fn port_range_checked() {
        let f = parse_features(&["s22_mag"]).unwrap();
        assert!(check_ports(&f, 1).is_err());
        assert!(check_ports(&f, 2).is_ok());
    }
}
