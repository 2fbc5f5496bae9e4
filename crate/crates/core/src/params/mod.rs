//! Model parameters: raw values with a physical scale, priors and bounds.
//!
//! Prior arguments and bounds are stated in raw units; the physical value of
//! component `k` is `raw[k] * scale`. Vector parameters (`n > 1`) carry one
//! independent copy of the prior per component.

mod quantile;

use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

pub use quantile::{normal_cdf, normal_quantile};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Prior {
    /// Not varied by any fitter.
    Fixed,
    /// Free with an improper flat density; usable by optimizers only.
    Flat,
    Uniform { lo: f64, hi: f64 },
    Normal { mu: f64, sigma: f64 },
}

impl fmt::Display for Prior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prior::Fixed => write!(f, "Fixed"),
            Prior::Flat => write!(f, "Flat"),
            Prior::Uniform { lo, hi } => write!(f, "Uniform({lo}, {hi})"),
            Prior::Normal { mu, sigma } => write!(f, "Normal({mu}, {sigma})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Parameter {
    raw: Vec<f64>,
    scale: f64,
    prior: Prior,
    bounds: Option<(f64, f64)>,
}

fn finite(x: f64, what: &str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::InvalidParameter(format!("{what} must be finite, got {x}")))
    }
}

impl Parameter {
    fn with_prior(prior: Prior, raw: f64) -> Self {
        Self {
            raw: vec![raw],
            scale: 1.0,
            prior,
            bounds: None,
        }
    }

    /// A fixed value. Non-finite values are kept as given; the model
    /// rejects them at evaluation.
    pub fn fixed(value: f64) -> Self {
        Self::with_prior(Prior::Fixed, value)
    }

    /// A free value with no prior density (plain numbers in model
    /// declarations).
    pub fn free(value: f64) -> Self {
        Self::with_prior(Prior::Flat, value)
    }

    /// Uniform prior on `[lo, hi]`, initialised at the midpoint.
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        finite(lo, "uniform lower edge")?;
        finite(hi, "uniform upper edge")?;
        if hi <= lo {
            return Err(Error::InvalidParameter(format!(
                "uniform prior needs hi > lo, got [{lo}, {hi}]"
            )));
        }
        Ok(Self::with_prior(Prior::Uniform { lo, hi }, 0.5 * (lo + hi)))
    }

    /// Normal prior, initialised at the mean.
    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        finite(mu, "normal mean")?;
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "normal prior needs sigma > 0, got {sigma}"
            )));
        }
        Ok(Self::with_prior(Prior::Normal { mu, sigma }, mu))
    }

    /// Normal prior whose standard deviation is `percent`% of `|mean|`.
    pub fn percent_normal(mean: f64, percent: f64) -> Result<Self> {
        if mean == 0.0 {
            return Err(Error::InvalidParameter(
                "percent-normal prior needs a non-zero mean".into(),
            ));
        }
        if !(percent > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "percent-normal prior needs percent > 0, got {percent}"
            )));
        }
        Self::normal(mean, percent / 100.0 * mean.abs())
    }

    pub fn scale(mut self, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale != 0.0) {
            return Err(Error::InvalidParameter(format!(
                "scale must be finite and non-zero, got {scale}"
            )));
        }
        self.scale = scale;
        Ok(self)
    }

    /// Replicates the first raw component into `n` components.
    pub fn n(mut self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        self.raw = vec![self.raw[0]; n];
        Ok(self)
    }

    /// Overrides the initial raw value of every component.
    pub fn value(mut self, raw: f64) -> Result<Self> {
        finite(raw, "initial value")?;
        self.raw.iter_mut().for_each(|r| *r = raw);
        self.check_bounds()?;
        Ok(self)
    }

    /// Overrides the initial raw values component by component.
    pub fn values(mut self, raw: Vec<f64>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::InvalidParameter("empty value list".into()));
        }
        for &r in &raw {
            finite(r, "initial value")?;
        }
        self.raw = raw;
        self.check_bounds()?;
        Ok(self)
    }

    /// Hard bounds in raw units.
    pub fn bounds(mut self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) {
            return Err(Error::InvalidParameter(format!(
                "bounds need lo <= hi, got [{lo}, {hi}]"
            )));
        }
        self.bounds = Some((lo, hi));
        self.check_bounds()?;
        Ok(self)
    }

    /// Same metadata, all components fixed at their current values.
    pub fn into_fixed(mut self) -> Self {
        self.prior = Prior::Fixed;
        self
    }

    fn check_bounds(&self) -> Result<()> {
        if let Some((lo, hi)) = self.effective_bounds() {
            if let Some(r) = self.raw.iter().find(|r| **r < lo || **r > hi) {
                return Err(Error::InvalidParameter(format!(
                    "value {r} outside bounds [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    /// Replaces the raw values without bound checks; fitters project or
    /// reject out-of-bound points themselves.
    pub(crate) fn with_raw(&self, raw: Vec<f64>) -> Self {
        debug_assert_eq!(raw.len(), self.raw.len());
        Self {
            raw,
            ..self.clone()
        }
    }

    pub(crate) fn gradient_leaf(&self, grad: Vec<f64>) -> Self {
        Self {
            raw: grad,
            scale: 1.0,
            prior: if self.is_free() { Prior::Flat } else { Prior::Fixed },
            bounds: None,
        }
    }

    pub fn raw(&self) -> &[f64] {
        &self.raw
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn scale_factor(&self) -> f64 {
        self.scale
    }

    pub fn prior(&self) -> Prior {
        self.prior
    }

    pub fn is_free(&self) -> bool {
        self.prior != Prior::Fixed
    }

    /// Explicit bounds intersected with the support of a uniform prior.
    pub fn effective_bounds(&self) -> Option<(f64, f64)> {
        match (self.prior, self.bounds) {
            (Prior::Uniform { lo, hi }, None) => Some((lo, hi)),
            (Prior::Uniform { lo, hi }, Some((blo, bhi))) => Some((lo.max(blo), hi.min(bhi))),
            (_, b) => b,
        }
    }

    pub fn physical_value(&self) -> Vec<f64> {
        self.raw.iter().map(|r| r * self.scale).collect()
    }

    /// Maps one unit-cube coordinate to a raw value.
    pub fn transform_component(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::InvalidParameter(format!(
                "unit-cube coordinate {u} outside [0, 1]"
            )));
        }
        let x = match self.prior {
            Prior::Fixed | Prior::Flat => {
                return Err(Error::InvalidParameter(format!(
                    "no prior transform for a {} parameter",
                    self.prior
                )))
            }
            Prior::Uniform { lo, hi } => lo + u * (hi - lo),
            Prior::Normal { mu, sigma } => {
                let z = if u <= 0.0 {
                    f64::NEG_INFINITY
                } else if u >= 1.0 {
                    f64::INFINITY
                } else {
                    normal_quantile(u)?
                };
                mu + sigma * z
            }
        };
        Ok(match self.effective_bounds() {
            Some((lo, hi)) => x.clamp(lo, hi),
            None => x,
        })
    }

    /// Maps unit-cube coordinates (one per component) to raw values.
    pub fn prior_transform(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.raw.len() {
            return Err(Error::VectorLength {
                expected: self.raw.len(),
                got: u.len(),
            });
        }
        u.iter().map(|&x| self.transform_component(x)).collect()
    }

    /// Log density of one raw component; `-inf` outside support or bounds.
    pub fn log_prior_component(&self, x: f64) -> f64 {
        if let Some((lo, hi)) = self.effective_bounds() {
            if !(x >= lo && x <= hi) {
                return f64::NEG_INFINITY;
            }
        }
        match self.prior {
            Prior::Fixed | Prior::Flat => 0.0,
            Prior::Uniform { lo, hi } => -(hi - lo).ln(),
            Prior::Normal { mu, sigma } => {
                let z = (x - mu) / sigma;
                -0.5 * z * z - (sigma * (2.0 * PI).sqrt()).ln()
            }
        }
    }

    /// Sum of component log densities.
    pub fn log_prior(&self, raw: &[f64]) -> f64 {
        raw.iter().map(|&x| self.log_prior_component(x)).sum()
    }
}

impl From<f64> for Parameter {
    fn from(v: f64) -> Self {
        Parameter::free(v)
    }
}
