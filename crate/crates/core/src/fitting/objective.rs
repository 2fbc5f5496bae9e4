//! Scalar objectives and likelihoods over a model's free raw values.

use std::f64::consts::PI;

use crate::autodiff::dual::Dual;
use crate::error::{Error, Result};
use crate::fitting::cost::CostPipeline;
use crate::fitting::features::{check_ports, extract, Feature};
use crate::models::{EvalCtx, FreeEntry, Model, Seed};
use crate::netcore::{Frequency, SMatrixArray};

/// Residual-based cost of a model against measured S data, as a function of
/// the model's free raw values. Residuals are model minus measured.
#[derive(Debug, Clone)]
pub struct Objective {
    model: Model,
    entries: Vec<FreeEntry>,
    freq: Frequency,
    z0: f64,
    features: Vec<Feature>,
    target: Vec<f64>,
    pipeline: CostPipeline,
}

impl Objective {
    pub fn new(
        model: Model,
        freq: Frequency,
        measured: &SMatrixArray,
        features: Vec<Feature>,
        pipeline: CostPipeline,
    ) -> Result<Self> {
        if measured.len() != freq.len() {
            return Err(Error::LengthMismatch {
                left: measured.len(),
                right: freq.len(),
            });
        }
        if features.is_empty() {
            return Err(Error::Config("at least one feature is required".into()));
        }
        check_ports(&features, model.ports())?;
        let target = extract(measured, &features)?;
        if target.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidFit("measured features are not finite".into()));
        }
        Ok(Self {
            entries: model.flatten_free(),
            model,
            freq,
            z0: measured.z0(),
            features,
            target,
            pipeline,
        })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn freq(&self) -> &Frequency {
        &self.freq
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn pipeline(&self) -> &CostPipeline {
        &self.pipeline
    }

    pub fn z0(&self) -> f64 {
        self.z0
    }

    /// Free components in `flatten_free` order.
    pub fn entries(&self) -> &[FreeEntry] {
        &self.entries
    }

    pub fn n_free(&self) -> usize {
        self.entries.len()
    }

    /// Starting raw values.
    pub fn x0(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.raw).collect()
    }

    /// Per-component raw bounds; unbounded sides are infinite.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.entries
            .iter()
            .map(|e| {
                e.param
                    .effective_bounds()
                    .unwrap_or((f64::NEG_INFINITY, f64::INFINITY))
            })
            .collect()
    }

    /// Measured feature matrix, row-major `F × K`.
    pub fn measured_features(&self) -> &[f64] {
        &self.target
    }

    fn residual_dual(&self, raw: &[f64], seed: Seed) -> Result<Vec<Dual>> {
        let m = self.model.with_params(raw)?;
        let ctx = EvalCtx::new(&self.freq, seed, self.z0)?;
        let s = m.s_dual(&ctx, 0)?;
        let mut r = extract(&s, &self.features)?;
        for (x, &t) in r.iter_mut().zip(&self.target) {
            *x = *x - t;
        }
        Ok(r)
    }

    /// Residual matrix `model − measured`, row-major `F × K`.
    pub fn residuals(&self, raw: &[f64]) -> Result<Vec<f64>> {
        Ok(self
            .residual_dual(raw, Seed::None)?
            .into_iter()
            .map(|x| x.v)
            .collect())
    }

    pub fn try_cost(&self, raw: &[f64]) -> Result<f64> {
        let r = self.residual_dual(raw, Seed::None)?;
        Ok(self.pipeline.apply(r, self.freq.len(), self.features.len()).v)
    }

    /// Cost, or `+inf` where the model cannot be evaluated.
    pub fn cost(&self, raw: &[f64]) -> f64 {
        match self.try_cost(raw) {
            Ok(c) if !c.is_nan() => c,
            _ => f64::INFINITY,
        }
    }

    /// Cost and its gradient with respect to the raw values.
    pub fn cost_grad(&self, raw: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (rows, cols) = (self.freq.len(), self.features.len());
        if raw.is_empty() {
            return Ok((self.try_cost(raw)?, Vec::new()));
        }
        let mut value = f64::NAN;
        let mut grad = Vec::with_capacity(raw.len());
        for k in 0..raw.len() {
            let c = self
                .pipeline
                .apply(self.residual_dual(raw, Seed::Raw(k))?, rows, cols);
            if k == 0 {
                value = c.v;
            }
            grad.push(c.d);
        }
        Ok((value, grad))
    }

    /// Sum of the component log prior densities.
    pub fn log_prior(&self, raw: &[f64]) -> f64 {
        self.entries
            .iter()
            .zip(raw)
            .map(|(e, &x)| e.param.log_prior_component(x))
            .sum()
    }

    /// Raw values of a unit-cube point under the component priors.
    pub fn prior_transform(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.entries
            .iter()
            .zip(u)
            .map(|(e, &x)| e.param.transform_component(x))
            .collect()
    }

    /// The model with the given raw values.
    pub fn fitted(&self, raw: &[f64]) -> Result<Model> {
        self.model.with_params(raw)
    }
}

/// Gaussian likelihood with one noise level across all features.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Likelihood {
    sigma: f64,
}

impl Default for Likelihood {
    fn default() -> Self {
        Self { sigma: 0.01 }
    }
}

impl Likelihood {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Config(format!(
                "likelihood sigma must be positive, got {sigma}"
            )));
        }
        Ok(Self { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `−½·Σ(r/σ)² − M·log(σ·√(2π))` over a residual set of size `M`.
    pub fn of_residuals(&self, r: &[f64]) -> f64 {
        let chi2: f64 = r.iter().map(|x| (x / self.sigma).powi(2)).sum();
        -0.5 * chi2 - r.len() as f64 * (self.sigma * (2.0 * PI).sqrt()).ln()
    }

    /// Log-likelihood, or `-inf` where the model cannot be evaluated.
    pub fn log_likelihood(&self, obj: &Objective, raw: &[f64]) -> f64 {
        match obj.residuals(raw) {
            Ok(r) => {
                let l = self.of_residuals(&r);
                if l.is_nan() {
                    f64::NEG_INFINITY
                } else {
                    l
                }
            }
            Err(_) => f64::NEG_INFINITY,
        }
    }
}

/// Log prior plus log-likelihood.
pub fn log_posterior(obj: &Objective, lik: &Likelihood, raw: &[f64]) -> f64 {
    let lp = obj.log_prior(raw);
    if lp == f64::NEG_INFINITY {
        return lp;
    }
    lp + lik.log_likelihood(obj, raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitting::features::parse_features;
    use crate::models::{series_resistor, smodel};
    use crate::params::Parameter;

    fn grid() -> Frequency {
        Frequency::new(1.0, 2.0, 4, "GHz").unwrap()
    }

    #[test]
    fn measured_wrapper_has_floor_cost() {
        let f = grid();
        let s = series_resistor(20.0).eval_s(&f).unwrap();
        let obj = Objective::new(
            smodel(s.clone(), &f).unwrap(),
            f,
            &s,
            parse_features(&["s11_re", "s11_im", "s21_db"]).unwrap(),
            CostPipeline::parse(&["l2_norm_ax0", "mean", "mag_2_db"]).unwrap(),
        )
        .unwrap();
        assert_eq!(obj.cost(&[]), -600.0);
    }

    #[test]
    fn gradient_matches_difference_quotient() {
        let f = grid();
        let s = series_resistor(20.0).eval_s(&f).unwrap();
        let obj = Objective::new(
            series_resistor(25.0),
            f,
            &s,
            parse_features(&["s11_re", "s21_re"]).unwrap(),
            CostPipeline::parse(&["square", "mean"]).unwrap(),
        )
        .unwrap();
        let (c, g) = obj.cost_grad(&[25.0]).unwrap();
        assert_eq!(c, obj.cost(&[25.0]));
        let h = 1e-5;
        let fd = (obj.cost(&[25.0 + h]) - obj.cost(&[25.0 - h])) / (2.0 * h);
        assert!((fd - g[0]).abs() < 1e-9 * g[0].abs().max(1e-12) + 1e-12);
        assert!(obj.residuals(&[20.0]).unwrap().iter().all(|&r| r.abs() < 1e-15));
    }

    #[test]
    fn likelihood_normalisation() {
        let l = Likelihood::new(1.0).unwrap();
        assert!((l.of_residuals(&[0.0]) + 0.5 * (2.0 * PI).ln()).abs() < 1e-15);
        let l2 = Likelihood::new(2.0).unwrap();
        let drop = l.of_residuals(&[0.0; 5]) - l2.of_residuals(&[0.0; 5]);
        assert!((drop - 5.0 * 2f64.ln()).abs() < 1e-12);
        assert!(Likelihood::new(0.0).is_err());
    }

    #[test]
    fn posterior_excludes_outside_prior() {
        let f = grid();
        let s = series_resistor(0.5).eval_s(&f).unwrap();
        let obj = Objective::new(
            series_resistor(Parameter::uniform(0.0, 1.0).unwrap()),
            f,
            &s,
            parse_features(&["s11_re"]).unwrap(),
            CostPipeline::parse(&["square", "mean"]).unwrap(),
        )
        .unwrap();
        let lik = Likelihood::default();
        assert_eq!(log_posterior(&obj, &lik, &[1.5]), f64::NEG_INFINITY);
        assert!(log_posterior(&obj, &lik, &[0.5]).is_finite());
    }
}
