//! Adaptive random-walk Metropolis with split R-hat and effective sample
//! size diagnostics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McmcOptions {
    pub n_chains: usize,
    pub warmup: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for McmcOptions {
    fn default() -> Self {
        Self {
            n_chains: 4,
            warmup: 2000,
            samples: 5000,
            seed: 0,
        }
    }
}

const TARGET_ACCEPTANCE: f64 = 0.234;
const ADAPT_WINDOW: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct McmcRun {
    /// `chains[c][t]` is the raw vector of chain `c` at draw `t`.
    pub chains: Vec<Vec<Vec<f64>>>,
    pub log_post: Vec<Vec<f64>>,
    /// Post-warmup acceptance rate per chain.
    pub acceptance: Vec<f64>,
    pub rhat: Vec<f64>,
    pub ess: Vec<f64>,
}

impl McmcRun {
    /// All post-warmup draws, chain after chain.
    pub fn pooled(&self) -> Vec<Vec<f64>> {
        self.chains.iter().flatten().cloned().collect()
    }
}

fn cholesky(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if !(d > 0.0) {
                    return None;
                }
                l[i][j] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}

fn covariance(xs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = xs.len() as f64;
    let p = xs[0].len();
    let mean: Vec<f64> = (0..p).map(|k| xs.iter().map(|x| x[k]).sum::<f64>() / n).collect();
    let mut c = vec![vec![0.0; p]; p];
    for x in xs {
        for i in 0..p {
            for j in 0..=i {
                c[i][j] += (x[i] - mean[i]) * (x[j] - mean[j]);
            }
        }
    }
    for i in 0..p {
        for j in 0..=i {
            c[i][j] /= n - 1.0;
            c[j][i] = c[i][j];
        }
    }
    c
}

struct Chain {
    x: Vec<f64>,
    lp: f64,
    chol: Vec<Vec<f64>>,
    scale: f64,
}

impl Chain {
    fn propose(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let p = self.x.len();
        let z: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
        (0..p)
            .map(|i| self.x[i] + self.scale * (0..=i).map(|k| self.chol[i][k] * z[k]).sum::<f64>())
            .collect()
    }

    fn step<F: Fn(&[f64]) -> f64>(&mut self, log_post: &F, rng: &mut ChaCha8Rng) -> bool {
        let y = self.propose(rng);
        let lp = log_post(&y);
        let u: f64 = rng.random();
        let accept = lp.is_finite() && (lp >= self.lp || u.ln() < lp - self.lp);
        if accept {
            self.x = y;
            self.lp = lp;
        }
        accept
    }
}

fn run_chain<F: Fn(&[f64]) -> f64>(
    log_post: &F,
    x0: &[f64],
    lp0: f64,
    step: &[f64],
    opts: &McmcOptions,
    index: usize,
) -> (Vec<Vec<f64>>, Vec<f64>, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(index as u64);
    let p = x0.len();
    let diag: Vec<Vec<f64>> = (0..p)
        .map(|i| (0..p).map(|j| if i == j { step[i] } else { 0.0 }).collect())
        .collect();
    let mut chain = Chain {
        x: x0.to_vec(),
        lp: lp0,
        chol: diag,
        scale: 2.38 / (p as f64).sqrt(),
    };

    let mut warm = Vec::with_capacity(opts.warmup);
    let mut accepted = 0;
    let mut adopted = false;
    for t in 1..=opts.warmup {
        accepted += usize::from(chain.step(log_post, &mut rng));
        warm.push(chain.x.clone());
        if t % ADAPT_WINDOW == 0 {
            let rate = accepted as f64 / ADAPT_WINDOW as f64;
            accepted = 0;
            let factor = 2f64.powf((rate - TARGET_ACCEPTANCE) / TARGET_ACCEPTANCE);
            chain.scale *= factor.clamp(0.5, 2.0);
            if t >= 2 * ADAPT_WINDOW {
                let mut cov = covariance(&warm[t / 2..]);
                for (i, row) in cov.iter_mut().enumerate() {
                    row[i] += 1e-12 * row[i].abs().max(1e-300);
                }
                if let Some(l) = cholesky(&cov) {
                    if !adopted {
                        // the empirical covariance already carries the target's scale
                        chain.scale = 2.38 / (p as f64).sqrt();
                        adopted = true;
                    }
                    chain.chol = l;
                }
            }
        }
    }

    let mut draws = Vec::with_capacity(opts.samples);
    let mut lps = Vec::with_capacity(opts.samples);
    let mut acc = 0;
    for _ in 0..opts.samples {
        acc += usize::from(chain.step(log_post, &mut rng));
        draws.push(chain.x.clone());
        lps.push(chain.lp);
    }
    (draws, lps, acc as f64 / opts.samples.max(1) as f64)
}

/// Runs `n_chains` chains from `x0` in parallel. `step` gives initial
/// per-component proposal standard deviations.
pub fn run_mcmc<F>(log_post: F, x0: &[f64], step: &[f64], opts: &McmcOptions) -> Result<McmcRun>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if x0.is_empty() {
        return Err(Error::InvalidFit("MCMC needs at least one free parameter".into()));
    }
    if opts.n_chains < 2 || opts.samples < 4 {
        return Err(Error::InvalidFit(
            "MCMC needs at least 2 chains and 4 samples per chain".into(),
        ));
    }
    if step.len() != x0.len() || step.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::InvalidFit("proposal steps must be positive".into()));
    }
    let lp0 = log_post(x0);
    if !lp0.is_finite() {
        return Err(Error::InvalidFit(format!(
            "log posterior is {lp0} at the initial point"
        )));
    }
    let outputs: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..opts.n_chains)
            .map(|c| {
                let lp = &log_post;
                s.spawn(move || run_chain(lp, x0, lp0, step, opts, c))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("MCMC chain panicked"))
            .collect()
    });
    let mut chains = Vec::new();
    let mut log_post = Vec::new();
    let mut acceptance = Vec::new();
    for (d, l, a) in outputs {
        chains.push(d);
        log_post.push(l);
        acceptance.push(a);
    }
    let p = x0.len();
    let component = |k: usize| -> Vec<Vec<f64>> {
        chains
            .iter()
            .map(|c| c.iter().map(|x| x[k]).collect())
            .collect()
    };
    let rhat = (0..p).map(|k| split_rhat(&component(k))).collect();
    let ess = (0..p).map(|k| effective_sample_size(&component(k))).collect();
    Ok(McmcRun {
        chains,
        log_post,
        acceptance,
        rhat,
        ess,
    })
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v)
}

fn split(chains: &[Vec<f64>]) -> Vec<&[f64]> {
    chains
        .iter()
        .flat_map(|c| {
            let h = c.len() / 2;
            [&c[..h], &c[c.len() - h..]]
        })
        .collect()
}

/// Split potential scale reduction factor.
pub fn split_rhat(chains: &[Vec<f64>]) -> f64 {
    let parts = split(chains);
    let n = parts[0].len() as f64;
    let m = parts.len() as f64;
    let stats: Vec<(f64, f64)> = parts.iter().map(|c| mean_var(c)).collect();
    let grand = stats.iter().map(|s| s.0).sum::<f64>() / m;
    let b = n / (m - 1.0) * stats.iter().map(|s| (s.0 - grand).powi(2)).sum::<f64>();
    let w = stats.iter().map(|s| s.1).sum::<f64>() / m;
    if w == 0.0 {
        return if b == 0.0 { 1.0 } else { f64::INFINITY };
    }
    let var_plus = (n - 1.0) / n * w + b / n;
    (var_plus / w).sqrt()
}

fn autocovariance(x: &[f64], lag: usize) -> f64 {
    let n = x.len();
    let m = x.iter().sum::<f64>() / n as f64;
    (0..n - lag).map(|t| (x[t] - m) * (x[t + lag] - m)).sum::<f64>() / n as f64
}

/// Multi-chain effective sample size with Geyer's initial positive sequence.
pub fn effective_sample_size(chains: &[Vec<f64>]) -> f64 {
    let parts = split(chains);
    let m = parts.len() as f64;
    let n = parts[0].len();
    let stats: Vec<(f64, f64)> = parts.iter().map(|c| mean_var(c)).collect();
    let w = stats.iter().map(|s| s.1).sum::<f64>() / m;
    let grand = stats.iter().map(|s| s.0).sum::<f64>() / m;
    let b = n as f64 / (m - 1.0) * stats.iter().map(|s| (s.0 - grand).powi(2)).sum::<f64>();
    let var_plus = (n as f64 - 1.0) / n as f64 * w + b / n as f64;
    if !(var_plus > 0.0) {
        return m * n as f64;
    }
    let rho = |t: usize| {
        let acov = parts.iter().map(|c| autocovariance(c, t)).sum::<f64>() / m;
        1.0 - (w - acov) / var_plus
    };
    let mut sum = 0.0;
    let mut t = 1;
    while t + 1 < n {
        let pair = rho(t) + rho(t + 1);
        if pair <= 0.0 {
            break;
        }
        sum += pair;
        t += 2;
    }
    let tau = (1.0 + 2.0 * sum).max(1.0 / (m * n as f64).log10().max(1.0));
    m * n as f64 / tau
}
