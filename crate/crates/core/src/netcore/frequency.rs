use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FreqUnit {
    Hz,
    KHz,
    MHz,
    GHz,
}

impl FreqUnit {
    pub const NAMES: [&'static str; 4] = ["Hz", "kHz", "MHz", "GHz"];

    pub fn factor(self) -> f64 {
        match self {
            FreqUnit::Hz => 1.0,
            FreqUnit::KHz => 1e3,
            FreqUnit::MHz => 1e6,
            FreqUnit::GHz => 1e9,
        }
    }
}

impl FromStr for FreqUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hz" => Ok(FreqUnit::Hz),
            "khz" => Ok(FreqUnit::KHz),
            "mhz" => Ok(FreqUnit::MHz),
            "ghz" => Ok(FreqUnit::GHz),
            _ => Err(Error::UnknownUnit(s.to_string())),
        }
    }
}

impl fmt::Display for FreqUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FreqUnit::Hz => "Hz",
            FreqUnit::KHz => "kHz",
            FreqUnit::MHz => "MHz",
            FreqUnit::GHz => "GHz",
        };
        f.write_str(s)
    }
}

/// A frequency evaluation grid.
///
/// Grids built with [`Frequency::new`] are linearly spaced with inclusive
/// endpoints. Grids read from measured files keep their tabulated points.
#[derive(Debug, Clone, PartialEq)]
pub struct Frequency {
    start: f64,
    stop: f64,
    unit: FreqUnit,
    f: Vec<f64>,
    w: Vec<f64>,
}

impl Frequency {
    /// Linear grid from `start` to `stop` (in `unit`) with `npoints` points.
    pub fn new(start: f64, stop: f64, npoints: usize, unit: &str) -> Result<Self> {
        let unit: FreqUnit = unit.parse()?;
        Self::with_unit(start, stop, npoints, unit)
    }

    pub fn with_unit(start: f64, stop: f64, npoints: usize, unit: FreqUnit) -> Result<Self> {
        if npoints == 0 {
            return Err(Error::InvalidGrid("npoints must be at least 1".into()));
        }
        if !start.is_finite() || !stop.is_finite() || stop < start || start < 0.0 {
            return Err(Error::InvalidGrid(format!(
                "need 0 <= start <= stop, got start={start}, stop={stop}"
            )));
        }
        if npoints > 1 && stop == start {
            return Err(Error::InvalidGrid(
                "a multi-point grid needs stop > start".into(),
            ));
        }
        let k = unit.factor();
        let f: Vec<f64> = if npoints == 1 {
            vec![start * k]
        } else {
            let last = (npoints - 1) as f64;
            (0..npoints)
                .map(|i| {
                    if i == npoints - 1 {
                        stop * k
                    } else {
                        (start + (stop - start) * (i as f64 / last)) * k
                    }
                })
                .collect()
        };
        let w = f.iter().map(|&x| TAU * x).collect();
        Ok(Self {
            start,
            stop,
            unit,
            f,
            w,
        })
    }

    /// Grid from explicit Hz values, which must be finite, non-negative and
    /// strictly increasing.
    pub fn from_hz(f: Vec<f64>) -> Result<Self> {
        if f.is_empty() {
            return Err(Error::InvalidGrid("empty frequency list".into()));
        }
        if f.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidGrid("non-finite or negative frequency".into()));
        }
        if let Some(i) = f.windows(2).position(|p| p[1] <= p[0]) {
            return Err(Error::InvalidGrid(format!(
                "frequencies not strictly increasing at index {}",
                i + 1
            )));
        }
        let w = f.iter().map(|&x| TAU * x).collect();
        Ok(Self {
            start: f[0],
            stop: f[f.len() - 1],
            unit: FreqUnit::Hz,
            f,
            w,
        })
    }

    /// Frequencies in Hz.
    pub fn f(&self) -> &[f64] {
        &self.f
    }

    /// Angular frequencies in rad/s.
    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn stop(&self) -> f64 {
        self.stop
    }

    pub fn unit(&self) -> FreqUnit {
        self.unit
    }

    pub fn f_min(&self) -> f64 {
        self.f[0]
    }

    pub fn f_max(&self) -> f64 {
        self.f[self.f.len() - 1]
    }
}
