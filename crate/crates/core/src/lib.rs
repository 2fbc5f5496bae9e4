//! Parametric, differentiable two-port RF network models and fitting.

pub mod autodiff;
pub mod cli;
pub mod error;
pub mod fitting;
pub mod io;
pub mod models;
pub mod netcore;
pub mod params;

pub use error::{Error, Result};
