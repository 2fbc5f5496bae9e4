//! TOML fit configuration.
//!
//! ```toml
//! data = "cable_10m.s2p"          # relative to the config file
//! model = "PhysicalCoaxial"
//! features = ["s11_re", "s11_im"]
//! cost = ["l2_norm_ax0", "mean", "mag_2_db"]
//! seed = 0
//!
//! [fitter]
//! method = "nelder-mead"          # nelder-mead | lbfgs | mcmc | nested
//!
//! [params.din]
//! prior = "percent_normal"
//! mean = 1.12
//! percent = 5
//! scale = 1e-3
//!
//! [static]
//! epr_model = "bpoly"
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fitting::{
    fit_lbfgs, fit_mcmc, fit_nelder_mead, fit_nested, parse_features, CostPipeline, FitResults,
    LbfgsOptions, Likelihood, McmcOptions, NelderMeadOptions, NestedOptions, Objective,
};
use crate::io::touchstone::{read_touchstone, MeasuredNetwork};
use crate::models::{default_model, Field, Model, StaticValue};
use crate::params::Parameter;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    NelderMead,
    Lbfgs,
    Mcmc,
    Nested,
}

impl Method {
    pub const NAMES: [&'static str; 4] = ["nelder-mead", "lbfgs", "mcmc", "nested"];

    pub fn is_bayesian(self) -> bool {
        matches!(self, Method::Mcmc | Method::Nested)
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "nelder-mead" => Ok(Method::NelderMead),
            "lbfgs" | "l-bfgs" | "l-bfgs-b" => Ok(Method::Lbfgs),
            "mcmc" => Ok(Method::Mcmc),
            "nested" => Ok(Method::Nested),
            _ => Err(Error::unknown_name("fitter", s, &Self::NAMES)),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::NelderMead => "nelder-mead",
            Method::Lbfgs => "lbfgs",
            Method::Mcmc => "mcmc",
            Method::Nested => "nested",
        })
    }
}

/// Fitter choice and options. Options belonging to other fitters are
/// ignored, so `--method` can switch families without editing the file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitterConfig {
    pub method: Option<String>,
    pub max_iter: Option<usize>,
    pub xtol: Option<f64>,
    pub ftol: Option<f64>,
    pub gtol: Option<f64>,
    pub memory: Option<usize>,
    pub n_chains: Option<usize>,
    pub warmup: Option<usize>,
    pub samples: Option<usize>,
    pub n_live: Option<usize>,
    pub n_repeats: Option<usize>,
    pub stop_fraction: Option<f64>,
}

/// Override of one parameter. With `prior` set the parameter is rebuilt
/// from scratch; otherwise the catalogue default is modified.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamOverride {
    /// fixed | flat | uniform | normal | percent_normal
    pub prior: Option<String>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    pub mean: Option<f64>,
    pub percent: Option<f64>,
    pub scale: Option<f64>,
    pub n: Option<usize>,
    pub value: Option<f64>,
    pub values: Option<Vec<f64>>,
    pub bounds: Option<[f64; 2]>,
    pub fixed: Option<bool>,
}

pub const PRIOR_NAMES: [&str; 5] = ["fixed", "flat", "uniform", "normal", "percent_normal"];

impl ParamOverride {
    fn require(&self, v: Option<f64>, key: &str, path: &str) -> Result<f64> {
        v.ok_or_else(|| Error::Config(format!("params.{path}: prior needs `{key}`")))
    }

    fn reject(&self, keys: &[(&str, Option<f64>)], path: &str, prior: &str) -> Result<()> {
        for (k, v) in keys {
            if v.is_some() {
                return Err(Error::Config(format!(
                    "params.{path}: `{k}` does not apply to a {prior} prior"
                )));
            }
        }
        Ok(())
    }

    /// Applies the override to the catalogue default `base`.
    pub fn apply(&self, base: &Parameter, path: &str) -> Result<Parameter> {
        let ctx = |e: Error| Error::Config(format!("params.{path}: {e}"));
        let mut p = match self.prior.as_deref() {
            None => {
                self.reject(
                    &[("lo", self.lo), ("hi", self.hi), ("mu", self.mu), ("sigma", self.sigma), ("mean", self.mean), ("percent", self.percent)],
                    path,
                    "unchanged",
                )?;
                let mut p = base.clone();
                if let Some(s) = self.scale {
                    p = p.scale(s).map_err(ctx)?;
                }
                p
            }
            Some(kind) => {
                let p = match kind.to_ascii_lowercase().as_str() {
                    "fixed" | "flat" => {
                        self.reject(
                            &[("lo", self.lo), ("hi", self.hi), ("mu", self.mu), ("sigma", self.sigma), ("mean", self.mean), ("percent", self.percent)],
                            path,
                            kind,
                        )?;
                        let v = self.value.or_else(|| self.values.as_ref().and_then(|v| v.first().copied()));
                        let v = v.unwrap_or(base.raw()[0]);
                        if kind.eq_ignore_ascii_case("fixed") {
                            Parameter::fixed(v)
                        } else {
                            Parameter::free(v)
                        }
                    }
                    "uniform" => {
                        self.reject(&[("mu", self.mu), ("sigma", self.sigma), ("mean", self.mean), ("percent", self.percent)], path, kind)?;
                        Parameter::uniform(self.require(self.lo, "lo", path)?, self.require(self.hi, "hi", path)?)
                            .map_err(ctx)?
                    }
                    "normal" => {
                        self.reject(&[("lo", self.lo), ("hi", self.hi), ("mean", self.mean), ("percent", self.percent)], path, kind)?;
                        Parameter::normal(self.require(self.mu, "mu", path)?, self.require(self.sigma, "sigma", path)?)
                            .map_err(ctx)?
                    }
                    "percent_normal" => {
                        self.reject(&[("lo", self.lo), ("hi", self.hi), ("mu", self.mu), ("sigma", self.sigma)], path, kind)?;
                        Parameter::percent_normal(
                            self.require(self.mean, "mean", path)?,
                            self.require(self.percent, "percent", path)?,
                        )
                        .map_err(ctx)?
                    }
                    other => return Err(Error::unknown_name("prior", other, &PRIOR_NAMES)),
                };
                p.scale(self.scale.unwrap_or(1.0)).map_err(ctx)?
            }
        };
        if let Some(n) = self.n {
            p = p.n(n).map_err(ctx)?;
        } else if self.prior.is_some() && base.len() > 1 && self.values.is_none() {
            p = p.n(base.len()).map_err(ctx)?;
        }
        if let Some([lo, hi]) = self.bounds {
            p = p.bounds(lo, hi).map_err(ctx)?;
        }
        if let Some(v) = self.value {
            p = p.value(v).map_err(ctx)?;
        }
        if let Some(v) = &self.values {
            if self.n.is_some_and(|n| n != v.len()) {
                return Err(Error::Config(format!(
                    "params.{path}: `values` has {} entries but n = {}",
                    v.len(),
                    self.n.unwrap_or(0)
                )));
            }
            p = p.values(v.clone()).map_err(ctx)?;
        }
        match self.fixed {
            Some(true) => p = p.into_fixed(),
            Some(false) if !p.is_free() => {
                return Err(Error::Config(format!(
                    "params.{path}: `fixed = false` needs a prior to free the parameter"
                )))
            }
            _ => {}
        }
        Ok(p)
    }
}

/// Applies `[params]` overrides, then `[static]` fields, to `model`.
pub fn apply_overrides(
    mut model: Model,
    params: &BTreeMap<String, ParamOverride>,
    statics: &BTreeMap<String, toml::Value>,
) -> Result<Model> {
    for (path, ov) in params {
        let base = model.param(path).ok_or_else(|| {
            let valid: Vec<String> = model.all_params().into_iter().map(|(p, _)| p.0).collect();
            Error::Config(format!(
                "unknown parameter `{path}` for {}; valid: {}",
                model.type_name(),
                valid.join(", ")
            ))
        })?;
        let p = ov.apply(base, path)?;
        model = model.with_field(path, Field::Param(p))?;
    }
    for (name, v) in statics {
        let value = match v {
            toml::Value::String(s) => StaticValue::Text(s.clone()),
            toml::Value::Integer(i) => StaticValue::Int(*i),
            toml::Value::Boolean(b) => StaticValue::Flag(*b),
            other => {
                return Err(Error::Config(format!(
                    "static.{name}: expected a string, integer or boolean, got {other}"
                )))
            }
        };
        if !matches!(model.field(name), Some(Field::Static(_))) {
            return Err(Error::Config(format!(
                "{} has no static field `{name}`",
                model.type_name()
            )));
        }
        model = model.with_field(name, Field::Static(value))?;
    }
    Ok(model)
}

/// A standalone `[params]` / `[static]` document, as used for ground-truth
/// files.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelOverrides {
    #[serde(default)]
    pub params: BTreeMap<String, ParamOverride>,
    #[serde(default, rename = "static")]
    pub statics: BTreeMap<String, toml::Value>,
}

impl ModelOverrides {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn apply(&self, model: Model) -> Result<Model> {
        apply_overrides(model, &self.params, &self.statics)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub data: PathBuf,
    pub model: String,
    pub features: Vec<String>,
    pub cost: Vec<String>,
    #[serde(default)]
    pub fitter: FitterConfig,
    #[serde(default)]
    pub params: BTreeMap<String, ParamOverride>,
    #[serde(default, rename = "static")]
    pub statics: BTreeMap<String, toml::Value>,
    pub sigma: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl FromStr for FitConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }
}

impl FitConfig {
    pub fn method(&self) -> Result<Method> {
        self.fitter.method.as_deref().unwrap_or("nelder-mead").parse()
    }

    /// The catalogue model with parameter overrides, then static fields,
    /// applied.
    pub fn build_model(&self) -> Result<Model> {
        apply_overrides(default_model(&self.model)?, &self.params, &self.statics)
    }

    pub fn nelder_mead_options(&self) -> NelderMeadOptions {
        let d = NelderMeadOptions::default();
        NelderMeadOptions {
            max_iter: self.fitter.max_iter,
            xtol: self.fitter.xtol.unwrap_or(d.xtol),
            ftol: self.fitter.ftol.unwrap_or(d.ftol),
        }
    }

    pub fn lbfgs_options(&self) -> LbfgsOptions {
        let d = LbfgsOptions::default();
        LbfgsOptions {
            memory: self.fitter.memory.unwrap_or(d.memory),
            gtol: self.fitter.gtol.unwrap_or(d.gtol),
            max_iter: self.fitter.max_iter.unwrap_or(d.max_iter),
            ..d
        }
    }

    pub fn mcmc_options(&self, seed: u64) -> McmcOptions {
        let d = McmcOptions::default();
        McmcOptions {
            n_chains: self.fitter.n_chains.unwrap_or(d.n_chains),
            warmup: self.fitter.warmup.unwrap_or(d.warmup),
            samples: self.fitter.samples.unwrap_or(d.samples),
            seed,
        }
    }

    pub fn nested_options(&self, seed: u64) -> NestedOptions {
        let d = NestedOptions::default();
        NestedOptions {
            n_live: self.fitter.n_live.unwrap_or(d.n_live),
            n_repeats: self.fitter.n_repeats.or(d.n_repeats),
            stop_fraction: self.fitter.stop_fraction.unwrap_or(d.stop_fraction),
            max_iter: self.fitter.max_iter.unwrap_or(d.max_iter),
            seed,
        }
    }
}

/// Everything needed to run and export one fit.
#[derive(Debug, Clone)]
pub struct FitSetup {
    pub config: FitConfig,
    pub config_path: PathBuf,
    /// SHA-256 of the config file bytes, lower-case hex.
    pub config_hash: String,
    pub method: Method,
    pub seed: u64,
    pub out: PathBuf,
    pub measured: MeasuredNetwork,
    pub objective: Objective,
    pub likelihood: Likelihood,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Command-line overrides of config values.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub method: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl FitSetup {
    /// Reads and validates a config file, loads its data and builds the
    /// objective. Relative paths resolve against the config's directory.
    pub fn load(path: impl AsRef<Path>, ov: &Overrides) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let text = String::from_utf8(bytes.clone())
            .map_err(|_| Error::Config(format!("{}: not valid UTF-8", path.display())))?;
        let config: FitConfig = text
            .parse()
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::from_config(config, path, sha256_hex(&bytes), base, ov)
    }

    pub fn from_config(
        config: FitConfig,
        config_path: &Path,
        config_hash: String,
        base: &Path,
        ov: &Overrides,
    ) -> Result<Self> {
        let method = match &ov.method {
            Some(m) => m.parse()?,
            None => config.method()?,
        };
        let features = parse_features(&config.features)?;
        let pipeline = CostPipeline::parse(&config.cost)?;
        let model = config.build_model()?;
        let likelihood = match config.sigma {
            Some(s) => Likelihood::new(s)?,
            None => Likelihood::default(),
        };
        let data = base.join(&config.data);
        let measured = read_touchstone(&data)?;
        let objective = Objective::new(
            model,
            measured.freq.clone(),
            &measured.s,
            features,
            pipeline,
        )?;
        let out = ov
            .out
            .clone()
            .or_else(|| config.out.as_ref().map(|o| base.join(o)))
            .unwrap_or_else(|| PathBuf::from("results"));
        Ok(Self {
            seed: ov.seed.or(config.seed).unwrap_or(0),
            method,
            out,
            config_path: config_path.to_path_buf(),
            config_hash,
            config,
            measured,
            objective,
            likelihood,
        })
    }

    pub fn run(&self) -> Result<FitResults> {
        let c = &self.config;
        match self.method {
            Method::NelderMead => fit_nelder_mead(&self.objective, &c.nelder_mead_options()),
            Method::Lbfgs => fit_lbfgs(&self.objective, &c.lbfgs_options()),
            Method::Mcmc => fit_mcmc(&self.objective, &self.likelihood, &c.mcmc_options(self.seed)),
            Method::Nested => fit_nested(&self.objective, &self.likelihood, &c.nested_options(self.seed)),
        }
    }
}
