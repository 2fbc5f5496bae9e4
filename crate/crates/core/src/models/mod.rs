//! Composable, immutable circuit models.

pub mod amplifier;
pub mod catalogue;
pub mod coax;
pub mod composite;
pub mod elements;
pub mod node;

pub use amplifier::TerminatedAmplifier;
pub use catalogue::{default_model, MODEL_NAMES};
pub use coax::{bernstein_eval, coax_rlgc, Dispersion, LineConstants, PhysicalCoaxial, EPS_0, MU_0};
pub use composite::{cascade, cascade_all, smodel, smodel_constant, terminated, through};
pub use elements::{pi_clc, series_inductor, series_resistor, shunt_capacitor};
pub use node::{EvalCtx, Field, FreeEntry, Model, ParamPath, Repr, Response, Scope, Seed, StaticValue};
