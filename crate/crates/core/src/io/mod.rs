//! File formats: Touchstone data, fit configuration and result export.

pub mod config;
pub mod export;
pub mod touchstone;

pub use config::{FitConfig, FitSetup, Method, ModelOverrides, Overrides, ParamOverride};
pub use export::{export_results, RunInfo};
pub use touchstone::{
    format_touchstone, parse_touchstone, read_touchstone, write_touchstone, DataFormat,
    MeasuredNetwork,
};
