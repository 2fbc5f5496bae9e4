//! Cost pipelines: stages applied left to right to the residual matrix.

use std::fmt;
use std::str::FromStr;

use crate::autodiff::dual::Real;
use crate::error::{Error, Result};
use crate::netcore::mag_2_db;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// `(F × K) → (K)`: `sqrt(Σ_f r²)` per column; a vector reduces to a scalar.
    L2NormAx0,
    Mean,
    Sum,
    Abs,
    Square,
    Mag2Db,
}

impl Stage {
    pub const NAMES: [&'static str; 6] = ["l2_norm_ax0", "mean", "sum", "abs", "square", "mag_2_db"];

    pub fn name(self) -> &'static str {
        match self {
            Stage::L2NormAx0 => "l2_norm_ax0",
            Stage::Mean => "mean",
            Stage::Sum => "sum",
            Stage::Abs => "abs",
            Stage::Square => "square",
            Stage::Mag2Db => "mag_2_db",
        }
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "l2_norm_ax0" => Stage::L2NormAx0,
            "mean" => Stage::Mean,
            "sum" => Stage::Sum,
            "abs" => Stage::Abs,
            "square" => Stage::Square,
            "mag_2_db" => Stage::Mag2Db,
            _ => return Err(Error::unknown_name("cost stage", s, &Self::NAMES)),
        })
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Intermediate pipeline value.
#[derive(Debug, Clone, PartialEq)]
pub enum Tensor<R> {
    Matrix { rows: usize, cols: usize, data: Vec<R> },
    Vector(Vec<R>),
    Scalar(R),
}

impl<R: Real> Tensor<R> {
    fn map(self, f: impl Fn(R) -> R) -> Self {
        match self {
            Tensor::Matrix { rows, cols, data } => Tensor::Matrix {
                rows,
                cols,
                data: data.into_iter().map(f).collect(),
            },
            Tensor::Vector(v) => Tensor::Vector(v.into_iter().map(f).collect()),
            Tensor::Scalar(x) => Tensor::Scalar(f(x)),
        }
    }

    fn elements(&self) -> &[R] {
        match self {
            Tensor::Matrix { data, .. } => data,
            Tensor::Vector(v) => v,
            Tensor::Scalar(x) => std::slice::from_ref(x),
        }
    }

    fn total(&self) -> R {
        self.elements()
            .iter()
            .fold(R::from(0.0), |acc, &x| acc + x)
    }

    fn apply(self, stage: Stage) -> Self {
        match stage {
            Stage::Abs => self.map(|x| x.abs()),
            Stage::Square => self.map(|x| x * x),
            Stage::Mag2Db => self.map(mag_2_db),
            Stage::Sum => Tensor::Scalar(self.total()),
            Stage::Mean => {
                let n = self.elements().len() as f64;
                Tensor::Scalar(self.total() / n)
            }
            Stage::L2NormAx0 => match self {
                Tensor::Matrix { rows, cols, data } => Tensor::Vector(
                    (0..cols)
                        .map(|c| {
                            (0..rows)
                                .map(|r| data[r * cols + c] * data[r * cols + c])
                                .fold(R::from(0.0), |a, b| a + b)
                                .sqrt()
                        })
                        .collect(),
                ),
                Tensor::Vector(v) => Tensor::Scalar(
                    v.iter().map(|&x| x * x).fold(R::from(0.0), |a, b| a + b).sqrt(),
                ),
                Tensor::Scalar(x) => Tensor::Scalar(x.abs()),
            },
        }
    }
}

/// An ordered list of stages that reduces a residual matrix to a scalar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostPipeline(Vec<Stage>);

impl CostPipeline {
    /// Validated by a dry run on a matrix of zeros.
    pub fn new(stages: Vec<Stage>) -> Result<Self> {
        let p = CostPipeline(stages);
        match p.run(Tensor::Matrix {
            rows: 2,
            cols: 2,
            data: vec![0.0f64; 4],
        }) {
            Tensor::Scalar(_) => Ok(p),
            other => Err(Error::Config(format!(
                "cost pipeline [{}] does not reduce to a scalar (ends as {})",
                p,
                match other {
                    Tensor::Matrix { .. } => "a matrix",
                    _ => "a vector",
                }
            ))),
        }
    }

    pub fn parse<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let stages = names
            .iter()
            .map(|s| s.as_ref().parse())
            .collect::<Result<Vec<_>>>()?;
        Self::new(stages)
    }

    pub fn stages(&self) -> &[Stage] {
        &self.0
    }

    fn run<R: Real>(&self, t: Tensor<R>) -> Tensor<R> {
        self.0.iter().fold(t, |acc, &s| acc.apply(s))
    }

    /// Applies the pipeline to a row-major `rows × cols` matrix.
    pub fn apply<R: Real>(&self, data: Vec<R>, rows: usize, cols: usize) -> R {
        debug_assert_eq!(data.len(), rows * cols);
        match self.run(Tensor::Matrix { rows, cols, data }) {
            Tensor::Scalar(x) => x,
            _ => unreachable!("validated at construction"),
        }
    }
}

impl fmt::Display for CostPipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.0.iter().map(|s| s.name()).collect();
        f.write_str(&names.join(", "))
    }
}
