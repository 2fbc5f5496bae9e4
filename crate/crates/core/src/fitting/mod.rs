//! Objectives, optimizers and samplers over a model's free raw values.

pub mod cost;
pub mod features;
pub mod lbfgs;
pub mod mcmc;
pub mod nelder_mead;
pub mod nested;
pub mod objective;
pub mod results;

pub use cost::{CostPipeline, Stage};
pub use features::{parse_features, Feature};
pub use lbfgs::{lbfgs, LbfgsOptions};
pub use mcmc::{effective_sample_size, run_mcmc, split_rhat, McmcOptions, McmcRun};
pub use nelder_mead::{nelder_mead, NelderMeadOptions};
pub use nested::{run_nested, NestedOptions, NestedRun};
pub use objective::{log_posterior, Likelihood, Objective};
pub use results::{FitResults, OptimOutcome, Posterior, Termination};

use crate::error::{Error, Result};
use crate::params::Prior;

fn require_free(obj: &Objective) -> Result<()> {
    if obj.n_free() == 0 {
        return Err(Error::InvalidFit("the model has no free parameters".into()));
    }
    Ok(())
}

fn paths(obj: &Objective) -> Vec<String> {
    obj.entries().iter().map(|e| e.path.0.clone()).collect()
}

fn finish(
    obj: &Objective,
    method: &'static str,
    x: Vec<f64>,
    n_eval: usize,
    n_iter: usize,
    reason: Termination,
    history: Vec<f64>,
    posterior: Option<Posterior>,
) -> Result<FitResults> {
    Ok(FitResults {
        method,
        model: obj.fitted(&x)?,
        cost: obj.cost(&x),
        paths: paths(obj),
        x,
        n_eval,
        n_iter,
        converged: reason.is_converged(),
        reason,
        history,
        posterior,
    })
}

pub fn fit_nelder_mead(obj: &Objective, opts: &NelderMeadOptions) -> Result<FitResults> {
    require_free(obj)?;
    let r = nelder_mead(|x| obj.cost(x), &obj.x0(), &obj.bounds(), opts);
    finish(obj, "nelder-mead", r.x, r.n_eval, r.n_iter, r.reason, r.history, None)
}

pub fn fit_lbfgs(obj: &Objective, opts: &LbfgsOptions) -> Result<FitResults> {
    require_free(obj)?;
    let r = lbfgs(|x| obj.cost_grad(x), &obj.x0(), &obj.bounds(), opts)?;
    finish(obj, "lbfgs", r.x, r.n_eval, r.n_iter, r.reason, r.history, None)
}

/// Starting point of the Bayesian fitters: the prior transform of 0.5.
fn prior_centre(obj: &Objective) -> Result<Vec<f64>> {
    for e in obj.entries() {
        if matches!(e.param.prior(), Prior::Flat) {
            return Err(Error::InvalidFit(format!(
                "parameter `{}` has no prior; Bayesian fits need Uniform or Normal priors",
                e.path
            )));
        }
    }
    obj.prior_transform(&vec![0.5; obj.n_free()])
}

fn best_index(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map_or(0, |(i, _)| i)
}

/// R-hat threshold above which an MCMC run is reported as not mixed.
pub const RHAT_LIMIT: f64 = 1.05;

pub fn fit_mcmc(obj: &Objective, lik: &Likelihood, opts: &McmcOptions) -> Result<FitResults> {
    require_free(obj)?;
    let x0 = prior_centre(obj)?;
    for (e, &x) in obj.entries().iter().zip(&x0) {
        if e.param.log_prior_component(x) == f64::NEG_INFINITY {
            return Err(Error::InvalidFit(format!(
                "parameter `{}` starts outside its prior support",
                e.path
            )));
        }
    }
    if !lik.log_likelihood(obj, &x0).is_finite() {
        let m = obj.fitted(&x0).and_then(|m| m.eval_s(obj.freq()).map(|_| m));
        return Err(Error::InvalidFit(match m {
            Err(e) => format!("the model cannot be evaluated at the prior centre: {e}"),
            Ok(_) => "log-likelihood is not finite at the prior centre".into(),
        }));
    }
    let step: Vec<f64> = obj
        .entries()
        .iter()
        .zip(&x0)
        .map(|(e, &x)| match e.param.prior() {
            Prior::Uniform { lo, hi } => (hi - lo) / 10.0,
            Prior::Normal { sigma, .. } => sigma,
            _ => 0.05 * x.abs().max(1e-3),
        })
        .collect();
    let run = run_mcmc(|x| log_posterior(obj, lik, x), &x0, &step, opts)?;
    let samples = run.pooled();
    let lps: Vec<f64> = run.log_post.iter().flatten().copied().collect();
    let n = samples.len();
    let weights = vec![1.0 / n as f64; n];
    let (mean, std) = Posterior::moments(&samples, &weights);
    let best = samples[best_index(&lps)].clone();
    let log_likelihood = samples
        .iter()
        .map(|x| lik.log_likelihood(obj, x))
        .collect();
    let reason = if run.rhat.iter().all(|r| *r < RHAT_LIMIT) {
        Termination::Converged
    } else {
        Termination::NotMixed
    };
    let posterior = Posterior {
        samples,
        weights,
        log_likelihood,
        mean,
        std,
        log_evidence: None,
        information: None,
        rhat: Some(run.rhat.clone()),
        ess: Some(run.ess.clone()),
        acceptance: Some(run.acceptance.clone()),
    };
    let evals = opts.n_chains * (opts.warmup + opts.samples);
    finish(obj, "mcmc", best, evals, opts.warmup + opts.samples, reason, Vec::new(), Some(posterior))
}

pub fn fit_nested(obj: &Objective, lik: &Likelihood, opts: &NestedOptions) -> Result<FitResults> {
    require_free(obj)?;
    prior_centre(obj)?;
    let run = run_nested(
        |x| lik.log_likelihood(obj, x),
        |u| obj.prior_transform(u),
        obj.n_free(),
        opts,
    )?;
    let (mean, std) = Posterior::moments(&run.samples, &run.weights);
    let best = run.samples[best_index(&run.log_l)].clone();
    let posterior = Posterior {
        samples: run.samples,
        weights: run.weights,
        log_likelihood: run.log_l,
        mean,
        std,
        log_evidence: Some((run.log_z, run.log_z_err)),
        information: Some(run.information),
        rhat: None,
        ess: None,
        acceptance: None,
    };
    finish(obj, "nested", best, run.n_eval, run.n_iter, run.reason, Vec::new(), Some(posterior))
}
