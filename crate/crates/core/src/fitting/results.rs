use std::fmt;

use serde::Serialize;

use crate::models::Model;

/// Why a fitter stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Converged,
    /// Converged with at least one component on a bound.
    BoundActive,
    MaxIter,
    LineSearch,
    /// Nested sampling could not replace a live point.
    Stuck,
    /// MCMC chains did not mix (split R-hat above threshold).
    NotMixed,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::BoundActive => "bound-active",
            Termination::MaxIter => "max-iter",
            Termination::LineSearch => "line-search",
            Termination::Stuck => "stuck",
            Termination::NotMixed => "not-mixed",
        }
    }

    pub fn is_converged(self) -> bool {
        matches!(self, Termination::Converged | Termination::BoundActive)
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Result of a raw-vector optimizer.
#[derive(Debug, Clone)]
pub struct OptimOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub n_eval: usize,
    pub n_iter: usize,
    pub reason: Termination,
    /// Best value after each iteration.
    pub history: Vec<f64>,
}

/// Posterior summary of a Bayesian fit. Samples are raw vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub samples: Vec<Vec<f64>>,
    /// Normalised to sum to one.
    pub weights: Vec<f64>,
    pub log_likelihood: Vec<f64>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub log_evidence: Option<(f64, f64)>,
    pub information: Option<f64>,
    pub rhat: Option<Vec<f64>>,
    pub ess: Option<Vec<f64>>,
    pub acceptance: Option<Vec<f64>>,
}

impl Posterior {
    /// Weighted mean and standard deviation per component.
    pub(crate) fn moments(samples: &[Vec<f64>], weights: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let p = samples.first().map_or(0, |s| s.len());
        let mut mean = vec![0.0; p];
        for (s, &w) in samples.iter().zip(weights) {
            for (m, &x) in mean.iter_mut().zip(s) {
                *m += w * x;
            }
        }
        let mut var = vec![0.0; p];
        for (s, &w) in samples.iter().zip(weights) {
            for ((v, &x), &m) in var.iter_mut().zip(s).zip(&mean) {
                *v += w * (x - m) * (x - m);
            }
        }
        (mean, var.into_iter().map(f64::sqrt).collect())
    }
}

#[derive(Debug, Clone)]
pub struct FitResults {
    pub method: &'static str,
    /// The input model with the best raw values applied.
    pub model: Model,
    pub x: Vec<f64>,
    pub paths: Vec<String>,
    /// Objective cost at `x`.
    pub cost: f64,
    pub n_eval: usize,
    pub n_iter: usize,
    pub converged: bool,
    pub reason: Termination,
    pub history: Vec<f64>,
    pub posterior: Option<Posterior>,
}
