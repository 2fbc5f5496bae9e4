//! Nested sampling over the unit cube with constrained random-walk
//! replacement of the worst live point.
//!
//! Each point carries an extra uniform label coordinate; likelihood ties are
//! broken by comparing `(logL, label)` lexicographically, which keeps the
//! algorithm valid on likelihood plateaus.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::fitting::results::Termination;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NestedOptions {
    pub n_live: usize,
    /// Random-walk steps per replacement; `None` means `20·P`.
    pub n_repeats: Option<usize>,
    /// Stop once the live points could add less than this fraction of the
    /// evidence.
    pub stop_fraction: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for NestedOptions {
    fn default() -> Self {
        Self {
            n_live: 200,
            n_repeats: None,
            stop_fraction: 1e-4,
            max_iter: 1_000_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NestedRun {
    /// Transformed (raw) points, dead points first then the final live set.
    pub samples: Vec<Vec<f64>>,
    pub log_l: Vec<f64>,
    /// Posterior weights, normalised to sum to one.
    pub weights: Vec<f64>,
    pub log_z: f64,
    pub log_z_err: f64,
    /// Kullback-Leibler information of posterior relative to prior, nats.
    pub information: f64,
    pub n_iter: usize,
    pub n_eval: usize,
    pub reason: Termination,
}

#[derive(Clone)]
struct LivePoint {
    u: Vec<f64>,
    label: f64,
    x: Vec<f64>,
    log_l: f64,
}

impl LivePoint {
    fn above(&self, log_l: f64, label: f64) -> bool {
        self.log_l > log_l || (self.log_l == log_l && self.label > label)
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Estimates the evidence `∫ L(T(u)) du` over the `dim`-dimensional unit
/// cube, with `transform` mapping cube points to parameters.
pub fn run_nested<L, T>(log_likelihood: L, transform: T, dim: usize, opts: &NestedOptions) -> Result<NestedRun>
where
    L: Fn(&[f64]) -> f64,
    T: Fn(&[f64]) -> Result<Vec<f64>>,
{
    if dim == 0 {
        return Err(Error::InvalidFit("nested sampling needs at least one free parameter".into()));
    }
    if opts.n_live < 2 {
        return Err(Error::InvalidFit("nested sampling needs at least 2 live points".into()));
    }
    let n_live = opts.n_live;
    let n_repeats = opts.n_repeats.unwrap_or(20 * dim).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut n_eval = 0;
    let mut evaluate = |u: &[f64]| -> Result<(Vec<f64>, f64)> {
        let x = transform(u)?;
        n_eval += 1;
        let l = log_likelihood(&x);
        Ok((x, if l.is_nan() { f64::NEG_INFINITY } else { l }))
    };

    let mut live = Vec::with_capacity(n_live);
    for _ in 0..n_live {
        let u: Vec<f64> = (0..dim).map(|_| rng.random()).collect();
        let label = rng.random();
        let (x, log_l) = evaluate(&u)?;
        live.push(LivePoint { u, label, x, log_l });
    }

    let mut dead: Vec<(Vec<f64>, f64, f64)> = Vec::new(); // (x, logL, log weight)
    let mut log_z = f64::NEG_INFINITY;
    let mut step = 0.1;
    let mut reason = Termination::MaxIter;
    let n = n_live as f64;
    let mut iter = 0;

    while iter < opts.max_iter {
        let worst = (0..n_live)
            .min_by(|&a, &b| {
                live[a]
                    .log_l
                    .total_cmp(&live[b].log_l)
                    .then(live[a].label.total_cmp(&live[b].label))
            })
            .expect("live set is non-empty");
        iter += 1;
        let i = iter as f64;
        // trapezoid weight (X_{i-1} − X_{i+1}) / 2 with X_i = exp(−i/n)
        let log_w = (0.5 * ((-(i - 1.0) / n).exp() - (-(i + 1.0) / n).exp())).ln();
        let star = live[worst].clone();
        log_z = log_add(log_z, star.log_l + log_w);
        dead.push((star.x.clone(), star.log_l, log_w));

        let log_x = -i / n;
        let max_live = live.iter().map(|p| p.log_l).fold(f64::NEG_INFINITY, f64::max);
        if max_live + log_x - log_z < opts.stop_fraction.ln() {
            reason = Termination::Converged;
            // the worst point is already dead; drop it from the live set
            live.swap_remove(worst);
            break;
        }

        // constrained random walk from a surviving live point
        let mut start = rng.random_range(0..n_live - 1);
        if start >= worst {
            start += 1;
        }
        let mut cur = live[start].clone();
        let mut accepted = 0;
        let mut tries = 0;
        let mut since_accept = 0;
        let stuck_limit = 100 * n_repeats;
        while tries < n_repeats || accepted == 0 {
            tries += 1;
            let mut u = cur.u.clone();
            for v in u.iter_mut() {
                *v += step * rng.sample::<f64, _>(StandardNormal);
            }
            let label = cur.label + step * rng.sample::<f64, _>(StandardNormal);
            if u.iter().all(|v| (0.0..=1.0).contains(v)) && (0.0..=1.0).contains(&label) {
                let (x, log_l) = evaluate(&u)?;
                let cand = LivePoint { u, label, x, log_l };
                if cand.above(star.log_l, star.label) {
                    cur = cand;
                    accepted += 1;
                    since_accept = 0;
                    continue;
                }
            }
            since_accept += 1;
            if since_accept >= stuck_limit {
                break;
            }
        }
        if accepted == 0 {
            reason = Termination::Stuck;
            live.swap_remove(worst);
            break;
        }
        let rate = accepted as f64 / tries as f64;
        step = (step * (rate - 0.5).exp()).clamp(1e-9, 1.0);
        live[worst] = cur;
    }

    // remaining live points share the final prior volume equally
    let log_x_final = -(iter as f64) / n;
    let log_w_live = log_x_final - (live.len() as f64).ln();
    for p in &live {
        log_z = log_add(log_z, p.log_l + log_w_live);
        dead.push((p.x.clone(), p.log_l, log_w_live));
    }

    let mut weights: Vec<f64> = dead.iter().map(|(_, l, w)| (l + w - log_z).exp()).collect();
    let total: f64 = weights.iter().sum();
    if total > 0.0 && total.is_finite() {
        weights.iter_mut().for_each(|w| *w /= total);
    } else {
        // nothing finite was found; keep the samples but weight them equally
        let k = weights.len() as f64;
        weights.iter_mut().for_each(|w| *w = 1.0 / k);
    }
    let information = dead
        .iter()
        .zip(&weights)
        .filter(|(_, &p)| p > 0.0)
        .map(|((_, l, _), &p)| p * (l - log_z))
        .sum::<f64>()
        .max(0.0);
    let (samples, log_l) = dead.into_iter().map(|(x, l, _)| (x, l)).unzip();
    Ok(NestedRun {
        samples,
        log_l,
        weights,
        log_z,
        log_z_err: (information / n).sqrt(),
        information,
        n_iter: iter,
        n_eval,
        reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::normal_cdf;

    fn identity(u: &[f64]) -> Result<Vec<f64>> {
        Ok(u.to_vec())
    }

    fn gauss(x: &[f64]) -> f64 {
        let s = 0.1;
        x.iter()
            .map(|v| -0.5 * ((v - 0.5) / s).powi(2) - (s * (2.0 * std::f64::consts::PI).sqrt()).ln())
            .sum()
    }

    #[test]
    fn constant_likelihood() {
        let c = 2.5f64;
        let r = run_nested(|_| c.ln(), identity, 2, &NestedOptions::default()).unwrap();
        assert_eq!(r.reason, Termination::Converged);
        let tol = 3.0 * (r.information / 200.0).sqrt();
        assert!((r.log_z - c.ln()).abs() <= tol, "{} vs {}, tol {tol}", r.log_z, c.ln());
    }

    #[test]
    fn truncated_gaussian_1d() {
        let r = run_nested(gauss, identity, 1, &NestedOptions { seed: 5, ..Default::default() }).unwrap();
        let truth = (normal_cdf(5.0) - normal_cdf(-5.0)).ln();
        assert!((r.log_z - truth).abs() < 3.0 * r.log_z_err, "{} ± {}", r.log_z, r.log_z_err);
        let sum: f64 = r.weights.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(r.weights.iter().all(|&w| w >= 0.0));
    }

    #[test]
    fn seeded_runs_are_identical() {
        let o = NestedOptions {
            n_live: 50,
            seed: 9,
            ..Default::default()
        };
        let a = run_nested(gauss, identity, 1, &o).unwrap();
        let b = run_nested(gauss, identity, 1, &o).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_measure_region_gets_stuck() {
        // finite likelihood only on a single point: nothing can replace
        let o = NestedOptions {
            n_live: 10,
            n_repeats: Some(2),
            ..Default::default()
        };
        let spike = |x: &[f64]| if x[0] >= 1.0 { 0.0 } else { f64::NEG_INFINITY };
        let r = run_nested(spike, identity, 1, &o).unwrap();
        assert_eq!(r.reason, Termination::Stuck);
    }
}
