//! Limited-memory BFGS with a strong-Wolfe line search and projected-gradient
//! handling of box bounds.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::fitting::nelder_mead::{on_bound, project};
use crate::fitting::results::{OptimOutcome, Termination};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsOptions {
    pub memory: usize,
    pub c1: f64,
    pub c2: f64,
    pub gtol: f64,
    pub max_iter: usize,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self {
            memory: 10,
            c1: 1e-4,
            c2: 0.9,
            gtol: 1e-8,
            max_iter: 1000,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gradient with components that push against an active bound zeroed.
fn projected_gradient(x: &[f64], g: &[f64], bounds: &[(f64, f64)]) -> Vec<f64> {
    x.iter()
        .zip(g)
        .zip(bounds)
        .map(|((&v, &gi), &(lo, hi))| {
            if (v <= lo && gi > 0.0) || (v >= hi && gi < 0.0) {
                0.0
            } else {
                gi
            }
        })
        .collect()
}

struct Point {
    x: Vec<f64>,
    f: f64,
    g: Vec<f64>,
}

struct LineSearch<'a, F> {
    fg: &'a mut F,
    n_eval: &'a mut usize,
    x: &'a [f64],
    d: &'a [f64],
    f0: f64,
    dg0: f64,
    c1: f64,
    c2: f64,
}

impl<F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>> LineSearch<'_, F> {
    fn at(&mut self, alpha: f64) -> Option<(Point, f64)> {
        let x: Vec<f64> = self.x.iter().zip(self.d).map(|(a, b)| a + alpha * b).collect();
        *self.n_eval += 1;
        match (self.fg)(&x) {
            Ok((f, g)) if f.is_finite() && g.iter().all(|v| v.is_finite()) => {
                let dg = dot(&g, self.d);
                Some((Point { x, f, g }, dg))
            }
            _ => None,
        }
    }

    fn armijo(&self, alpha: f64, f: f64) -> bool {
        f <= self.f0 + self.c1 * alpha * self.dg0
    }

    fn curvature(&self, dg: f64) -> bool {
        dg.abs() <= self.c2 * self.dg0.abs()
    }

    /// Tries the minimizer of the cubic through `(0, f0, dg0)` and the
    /// accepted point; keeps it if it is lower and satisfies sufficient
    /// decrease. Exact on quadratics.
    fn refine(&mut self, alpha: f64, pt: Point, dg: f64, alpha_max: f64) -> Point {
        let (f0, d0) = (self.f0, self.dg0);
        let d1_ = d0 + dg - 3.0 * (f0 - pt.f) / (0.0 - alpha);
        let disc = d1_ * d1_ - d0 * dg;
        if !(disc >= 0.0) {
            return pt;
        }
        let d2 = disc.sqrt();
        let a = alpha - alpha * (dg + d2 - d1_) / (dg - d0 + 2.0 * d2);
        if !(a > 0.0 && a <= alpha_max) || (a - alpha).abs() <= 1e-3 * alpha {
            return pt;
        }
        match self.at(a) {
            Some((cand, _)) if cand.f < pt.f && self.armijo(a, cand.f) => cand,
            _ => pt,
        }
    }

    /// Strong-Wolfe search on `(0, alpha_max]`; a step that reaches
    /// `alpha_max` (a bound) only needs sufficient decrease.
    fn search(&mut self, alpha_init: f64, alpha_max: f64) -> Option<Point> {
        let mut prev = (0.0, self.f0, self.dg0);
        let mut alpha = alpha_init.min(alpha_max);
        for i in 0..30 {
            let (pt, dg) = match self.at(alpha) {
                Some(v) => v,
                None => {
                    // outside the model's domain: back off
                    alpha = 0.5 * (prev.0 + alpha);
                    if alpha - prev.0 < 1e-16 {
                        return None;
                    }
                    continue;
                }
            };
            if !self.armijo(alpha, pt.f) || (i > 0 && pt.f >= prev.1) {
                return self.zoom(prev, (alpha, pt.f, dg));
            }
            if self.curvature(dg) {
                return Some(self.refine(alpha, pt, dg, alpha_max));
            }
            if dg >= 0.0 {
                return self.zoom((alpha, pt.f, dg), prev);
            }
            if alpha >= alpha_max {
                return Some(pt);
            }
            prev = (alpha, pt.f, dg);
            alpha = (2.0 * alpha).min(alpha_max);
        }
        None
    }

    fn zoom(&mut self, mut lo: (f64, f64, f64), mut hi: (f64, f64, f64)) -> Option<Point> {
        let mut best: Option<Point> = None;
        for _ in 0..40 {
            // cubic interpolation, safeguarded towards bisection
            let (a0, f0, d0) = lo;
            let (a1, f1, d1) = hi;
            let d1_ = d0 + d1 - 3.0 * (f0 - f1) / (a0 - a1);
            let disc = d1_ * d1_ - d0 * d1;
            let mut alpha = if disc >= 0.0 {
                let d2 = (a1 - a0).signum() * disc.sqrt();
                a1 - (a1 - a0) * (d1 + d2 - d1_) / (d1 - d0 + 2.0 * d2)
            } else {
                f64::NAN
            };
            let (l, h) = (a0.min(a1), a0.max(a1));
            let margin = 0.1 * (h - l);
            if !(alpha > l + margin && alpha < h - margin) {
                alpha = 0.5 * (a0 + a1);
            }
            if (h - l) < 1e-16 * h.max(1.0) {
                return best;
            }
            let Some((pt, dg)) = self.at(alpha) else {
                hi = (alpha, f64::INFINITY, 0.0);
                continue;
            };
            if !self.armijo(alpha, pt.f) || pt.f >= lo.1 {
                hi = (alpha, pt.f, dg);
            } else {
                if self.curvature(dg) {
                    return Some(pt);
                }
                if dg * (hi.0 - lo.0) >= 0.0 {
                    hi = lo;
                }
                lo = (alpha, pt.f, dg);
                if best.as_ref().is_none_or(|b| pt.f < b.f) {
                    best = Some(pt);
                }
            }
        }
        best
    }
}

/// Minimizes a function given value and gradient. Components leave a bound
/// only when the gradient points inwards; steps are capped at the boundary.
pub fn lbfgs<F>(mut fg: F, x0: &[f64], bounds: &[(f64, f64)], opts: &LbfgsOptions) -> Result<OptimOutcome>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let n = x0.len();
    assert_eq!(bounds.len(), n, "one bound pair per component");
    let mut x = x0.to_vec();
    project(&mut x, bounds);
    let (mut f, mut g) = fg(&x)?;
    let mut n_eval = 1;
    if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidFit(format!(
            "objective or gradient not finite at the start point (f = {f})"
        )));
    }
    let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut history = vec![f];
    let mut reason = Termination::MaxIter;
    let mut n_iter = 0;

    loop {
        let pg = projected_gradient(&x, &g, bounds);
        if pg.iter().fold(0.0f64, |m, v| m.max(v.abs())) < opts.gtol {
            reason = if on_bound(&x, bounds) {
                Termination::BoundActive
            } else {
                Termination::Converged
            };
            break;
        }
        if n_iter >= opts.max_iter {
            break;
        }
        n_iter += 1;

        let free: Vec<bool> = pg.iter().map(|&v| v != 0.0).collect();
        let restrict = |v: &mut Vec<f64>| {
            for (vi, &fr) in v.iter_mut().zip(&free) {
                if !fr {
                    *vi = 0.0;
                }
            }
        };

        // two-loop recursion on the free subspace
        let mut q = pg.clone();
        let mut alphas = Vec::with_capacity(memory.len());
        for (s, y, rho) in memory.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        let gamma = memory
            .back()
            .map_or(1.0, |(s, y, _)| dot(s, y) / dot(y, y));
        q.iter_mut().for_each(|v| *v *= gamma);
        for ((s, y, rho), a) in memory.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        let mut d: Vec<f64> = q.iter().map(|v| -v).collect();
        restrict(&mut d);
        for ((di, &xi), &(lo, hi)) in d.iter_mut().zip(&x).zip(bounds) {
            if (xi <= lo && *di < 0.0) || (xi >= hi && *di > 0.0) {
                *di = 0.0;
            }
        }
        if !(dot(&d, &pg) < 0.0) {
            memory.clear();
            d = pg.iter().map(|v| -v).collect();
        }

        let alpha_max = x
            .iter()
            .zip(&d)
            .zip(bounds)
            .map(|((&xi, &di), &(lo, hi))| {
                if di > 0.0 {
                    (hi - xi) / di
                } else if di < 0.0 {
                    (lo - xi) / di
                } else {
                    f64::INFINITY
                }
            })
            .fold(f64::INFINITY, f64::min);
        let alpha_init = if memory.is_empty() {
            (1.0 / pg.iter().map(|v| v.abs()).sum::<f64>()).min(1.0)
        } else {
            1.0
        };
        let dg0 = dot(&g, &d);
        let mut ls = LineSearch {
            fg: &mut fg,
            n_eval: &mut n_eval,
            x: &x,
            d: &d,
            f0: f,
            dg0,
            c1: opts.c1,
            c2: opts.c2,
        };
        let Some(mut pt) = ls.search(alpha_init, alpha_max) else {
            reason = Termination::LineSearch;
            break;
        };
        project(&mut pt.x, bounds);
        let s: Vec<f64> = pt.x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = pt.g.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() && sy > 0.0 {
            if memory.len() == opts.memory {
                memory.pop_front();
            }
            memory.push_back((s, y, 1.0 / sy));
        }
        x = pt.x;
        f = pt.f;
        g = pt.g;
        history.push(f);
    }

    Ok(OptimOutcome {
        x,
        f,
        n_eval,
        n_iter,
        reason,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const FREE: (f64, f64) = (f64::NEG_INFINITY, f64::INFINITY);

    fn rosen(x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (a, b) = (x[0], x[1]);
        Ok((
            100.0 * (b - a * a).powi(2) + (1.0 - a).powi(2),
            vec![-400.0 * a * (b - a * a) - 2.0 * (1.0 - a), 200.0 * (b - a * a)],
        ))
    }

    #[test]
    fn rosenbrock_from_standard_start() {
        let r = lbfgs(rosen, &[-1.2, 1.0], &[FREE; 2], &Default::default()).unwrap();
        assert_eq!(r.reason, Termination::Converged);
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6, "{:?}", r.x);
    }

    #[test]
    fn quadratic_terminates_quickly() {
        let w = [1.0, 4.0, 9.0];
        let q = |x: &[f64]| -> Result<(f64, Vec<f64>)> {
            Ok((
                x.iter().zip(&w).map(|(v, w)| 0.5 * w * (v - 1.0).powi(2)).sum(),
                x.iter().zip(&w).map(|(v, w)| w * (v - 1.0)).collect(),
            ))
        };
        let r = lbfgs(q, &[0.0, 0.0, 0.0], &[FREE; 3], &Default::default()).unwrap();
        assert!(r.reason.is_converged());
        assert!(r.n_iter <= 3 + 2 + 3, "{} iterations", r.n_iter);
    }

    #[test]
    fn bound_constrained_minimum() {
        let q = |x: &[f64]| -> Result<(f64, Vec<f64>)> {
            Ok(((x[0] - 3.0).powi(2) + (x[1] + 1.0).powi(2), vec![2.0 * (x[0] - 3.0), 2.0 * (x[1] + 1.0)]))
        };
        let r = lbfgs(q, &[0.5, 0.5], &[(0.0, 1.0), FREE], &Default::default()).unwrap();
        assert_eq!(r.reason, Termination::BoundActive);
        assert_eq!(r.x[0], 1.0);
        assert!((r.x[1] + 1.0).abs() < 1e-8);
    }

    #[test]
    fn accepted_steps_decrease() {
        let r = lbfgs(rosen, &[-1.2, 1.0], &[FREE; 2], &Default::default()).unwrap();
        assert!(r.history.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn non_finite_start_rejected() {
        let bad = |_: &[f64]| -> Result<(f64, Vec<f64>)> { Ok((f64::NAN, vec![0.0])) };
        assert!(lbfgs(bad, &[0.0], &[FREE], &Default::default()).is_err());
    }
}
