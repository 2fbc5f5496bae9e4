//! Forward-mode differentiation of model outputs with respect to free
//! parameters and frequency.
//!
//! Every derivative is taken with respect to *raw* values; divide by the
//! parameter scale for physical-unit derivatives.

pub mod dual;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::models::{EvalCtx, Model, Seed};
use crate::netcore::{ABCDMatrixArray, Frequency, SMatrixArray, DEFAULT_Z0};
use crate::params::Parameter;
pub use dual::{CDual, Dual, Real, Scalar};

/// A single matrix entry selected from a model response. Indices are
/// zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Output {
    S(usize, usize),
    A(usize, usize),
}

fn select(model: &Model, ctx: &EvalCtx, out: Output) -> Result<Vec<CDual>> {
    match out {
        Output::S(i, j) => {
            let s = model.s_dual(ctx, 0)?;
            if i >= s.ports() || j >= s.ports() {
                return Err(Error::PortMismatch {
                    expected: i.max(j) + 1,
                    got: s.ports(),
                });
            }
            Ok((0..s.len()).map(|k| s.get(k, i, j)).collect())
        }
        Output::A(i, j) => {
            if i > 1 || j > 1 {
                return Err(Error::InvalidModel(format!("no ABCD entry ({i}, {j})")));
            }
            let a = model.a_dual(ctx, 0)?;
            Ok(a.data().iter().map(|m| m[i][j]).collect())
        }
    }
}

/// Tangent of `output` with the free raw component at `path` seeded.
pub fn derivative_wrt_param(
    model: &Model,
    path: &str,
    freq: &Frequency,
    output: Output,
) -> Result<Vec<Complex64>> {
    let idx = model.free_index(path)?;
    let ctx = EvalCtx::new(freq, Seed::Raw(idx), DEFAULT_Z0)?;
    Ok(select(model, &ctx, output)?.iter().map(|x| x.d).collect())
}

/// Derivative of `output` with respect to frequency in Hz at each grid point.
pub fn derivative_wrt_freq(model: &Model, freq: &Frequency, output: Output) -> Result<Vec<Complex64>> {
    let ctx = EvalCtx::new(freq, Seed::Frequency, DEFAULT_Z0)?;
    Ok(select(model, &ctx, output)?.iter().map(|x| x.d).collect())
}

/// What a scalar function sees during one forward pass: the model, the grid,
/// and the currently seeded direction.
pub struct Probe<'a> {
    model: &'a Model,
    freq: &'a Frequency,
    ctx: EvalCtx,
}

impl<'a> Probe<'a> {
    pub fn new(model: &'a Model, freq: &'a Frequency, seed: Seed) -> Result<Self> {
        Ok(Self {
            model,
            freq,
            ctx: EvalCtx::new(freq, seed, DEFAULT_Z0)?,
        })
    }

    pub fn model(&self) -> &Model {
        self.model
    }

    pub fn freq(&self) -> &Frequency {
        self.freq
    }

    pub fn eval_s(&self) -> Result<SMatrixArray<CDual>> {
        self.model.s_dual(&self.ctx, 0)
    }

    pub fn eval_a(&self) -> Result<ABCDMatrixArray<CDual>> {
        self.model.a_dual(&self.ctx, 0)
    }

    fn leaf(&self, path: &str) -> Result<(&Parameter, Option<usize>)> {
        let p = self
            .model
            .param(path)
            .ok_or_else(|| Error::UnknownPath(path.to_string()))?;
        let seeded = match (self.ctx.seed(), p.is_free()) {
            (Seed::Raw(k), true) => {
                let first = if p.len() == 1 {
                    path.to_string()
                } else {
                    format!("{path}[0]")
                };
                let base = self.model.free_index(&first)?;
                (k >= base && k < base + p.len()).then(|| k - base)
            }
            _ => None,
        };
        Ok((p, seeded))
    }

    /// Raw values of a parameter; the seeded component carries tangent 1.
    pub fn raw(&self, path: &str) -> Result<Vec<Dual>> {
        let (p, seeded) = self.leaf(path)?;
        Ok(p.raw()
            .iter()
            .enumerate()
            .map(|(c, &r)| Dual::new(r, if seeded == Some(c) { 1.0 } else { 0.0 }))
            .collect())
    }

    /// Physical values (raw × scale) with matching tangents.
    pub fn param(&self, path: &str) -> Result<Vec<Dual>> {
        let scale = self.leaf(path)?.0.scale_factor();
        Ok(self.raw(path)?.into_iter().map(|x| x * scale).collect())
    }
}

/// A tree mirroring a model whose parameter raw values hold
/// `∂(scalar)/∂(raw)`. Fixed parameters hold zeros.
#[derive(Debug, Clone)]
pub struct GradientModel {
    tree: Model,
    value: f64,
}

impl GradientModel {
    /// Gradient entries of a parameter leaf by dotted path.
    pub fn get(&self, path: &str) -> Option<&[f64]> {
        self.tree.param(path).map(|p| p.raw())
    }

    /// The mirrored tree itself.
    pub fn tree(&self) -> &Model {
        &self.tree
    }

    /// Value of the scalar function at the evaluation point.
    pub fn value(&self) -> f64 {
        self.value
    }

    /// Gradient components in `flatten_free` order.
    pub fn flat(&self) -> Vec<f64> {
        self.tree.free_values()
    }
}

/// Value and raw-value gradient of a scalar function, one forward pass per
/// free component.
pub fn value_and_grad<F>(model: &Model, scalar_fn: &F, freq: &Frequency) -> Result<(f64, Vec<f64>)>
where
    F: Fn(&Probe<'_>) -> Result<Dual> + ?Sized,
{
    let n = model.n_free();
    if n == 0 {
        let v = scalar_fn(&Probe::new(model, freq, Seed::None)?)?;
        return Ok((v.v, Vec::new()));
    }
    let mut value = f64::NAN;
    let mut grad = Vec::with_capacity(n);
    for k in 0..n {
        let out = scalar_fn(&Probe::new(model, freq, Seed::Raw(k))?)?;
        if k == 0 {
            value = out.v;
        }
        grad.push(out.d);
    }
    Ok((value, grad))
}

/// Gradient of a scalar function of the model, as a mirrored tree.
pub fn gradient_model<F>(model: &Model, scalar_fn: &F, freq: &Frequency) -> Result<GradientModel>
where
    F: Fn(&Probe<'_>) -> Result<Dual> + ?Sized,
{
    let (value, grad) = value_and_grad(model, scalar_fn, freq)?;
    let mut it = grad.into_iter();
    let tree = model.map_params(&mut |p| {
        let g = if p.is_free() {
            it.by_ref().take(p.len()).collect()
        } else {
            vec![0.0; p.len()]
        };
        p.gradient_leaf(g)
    });
    Ok(GradientModel { tree, value })
}

/// Worst relative disagreement between the forward-mode gradient and central
/// finite differences with step `rel_step·|raw|` (or `rel_step` at zero).
/// The denominator is `max(|analytic|, 1e-12)`.
pub fn finite_diff_check<F>(model: &Model, scalar_fn: &F, freq: &Frequency, rel_step: f64) -> Result<f64>
where
    F: Fn(&Probe<'_>) -> Result<Dual> + ?Sized,
{
    let (_, grad) = value_and_grad(model, scalar_fn, freq)?;
    let x0 = model.free_values();
    let eval = |x: &[f64]| -> Result<f64> {
        let m = model.with_params(x)?;
        Ok(scalar_fn(&Probe::new(&m, freq, Seed::None)?)?.v)
    };
    let mut worst = 0.0f64;
    for (k, &g) in grad.iter().enumerate() {
        let h = if x0[k] == 0.0 { rel_step } else { rel_step * x0[k].abs() };
        let mut xp = x0.clone();
        let mut xm = x0.clone();
        xp[k] += h;
        xm[k] -= h;
        let fd = (eval(&xp)? - eval(&xm)?) / (xp[k] - xm[k]);
        worst = worst.max((fd - g).abs() / g.abs().max(1e-12));
    }
    Ok(worst)
}
