//! Bounded Nelder-Mead simplex search.

use crate::fitting::results::{OptimOutcome, Termination};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    /// Iteration limit; `None` means `2000·n`.
    pub max_iter: Option<usize>,
    pub xtol: f64,
    pub ftol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_iter: None,
            xtol: 1e-8,
            ftol: 1e-8,
        }
    }
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

pub(crate) fn project(x: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, &(lo, hi)) in x.iter_mut().zip(bounds) {
        *v = v.clamp(lo, hi);
    }
}

pub(crate) fn on_bound(x: &[f64], bounds: &[(f64, f64)]) -> bool {
    x.iter().zip(bounds).any(|(&v, &(lo, hi))| {
        let tol = 1e-12 * v.abs().max(1.0);
        (v - lo).abs() <= tol || (hi - v).abs() <= tol
    })
}

fn clean(f: f64) -> f64 {
    if f.is_nan() {
        f64::INFINITY
    } else {
        f
    }
}

/// Minimizes `f` from `x0`. Candidate points are projected onto `bounds`
/// (use infinite edges for unbounded components).
pub fn nelder_mead<F>(mut f: F, x0: &[f64], bounds: &[(f64, f64)], opts: &NelderMeadOptions) -> OptimOutcome
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    assert_eq!(bounds.len(), n, "one bound pair per component");
    let max_iter = opts.max_iter.unwrap_or(2000 * n.max(1));
    let mut n_eval = 0;
    let mut eval = |x: &[f64]| {
        n_eval += 1;
        clean(f(x))
    };

    let mut start = x0.to_vec();
    project(&mut start, bounds);
    let mut simplex = vec![start.clone()];
    for i in 0..n {
        let step = if start[i] == 0.0 { 0.00025 } else { 0.05 * start[i] };
        let mut v = start.clone();
        v[i] += step;
        project(&mut v, bounds);
        if v[i] == start[i] {
            v[i] = start[i] - step;
            project(&mut v, bounds);
        }
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| eval(x)).collect();

    let mut history = Vec::new();
    let mut n_iter = 0;
    let mut reason = Termination::MaxIter;
    let point = |c: &[f64], w: &[f64], t: f64| -> Vec<f64> {
        let mut p: Vec<f64> = c.iter().zip(w).map(|(&a, &b)| a + t * (b - a)).collect();
        project(&mut p, bounds);
        p
    };

    loop {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        history.push(values[0]);

        let size = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        let spread = values[1..]
            .iter()
            .map(|v| (v - values[0]).abs())
            .fold(0.0, f64::max);
        if size <= opts.xtol && (spread <= opts.ftol || spread.is_nan()) {
            reason = if on_bound(&simplex[0], bounds) {
                Termination::BoundActive
            } else {
                Termination::Converged
            };
            break;
        }
        if n_iter >= max_iter {
            break;
        }
        n_iter += 1;

        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|v| v[k]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let xr = point(&centroid, &worst, -REFLECT);
        let fr = eval(&xr);
        if fr < values[0] {
            let xe = point(&centroid, &worst, -EXPAND);
            let fe = eval(&xe);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[n] {
            let xc = point(&centroid, &xr, CONTRACT);
            let fc = eval(&xc);
            (xc, fc)
        } else {
            let xc = point(&centroid, &worst, CONTRACT);
            let fc = eval(&xc);
            (xc, fc)
        };
        if fc < values[n].min(fr) {
            simplex[n] = xc;
            values[n] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=n {
            simplex[i] = point(&best, &simplex[i], SHRINK);
            values[i] = eval(&simplex[i]);
        }
    }

    OptimOutcome {
        x: simplex[0].clone(),
        f: values[0],
        n_eval,
        n_iter,
        reason,
        history,
    }
}
