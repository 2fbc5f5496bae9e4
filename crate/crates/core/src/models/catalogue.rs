//! Named model types with default parameters, for configuration files and
//! the command line.

use crate::error::{Error, Result};
use crate::models::amplifier::TerminatedAmplifier;
use crate::models::coax::PhysicalCoaxial;
use crate::models::elements::{pi_clc, series_inductor, series_resistor, shunt_capacitor};
use crate::models::node::Model;

pub const MODEL_NAMES: [&str; 6] = [
    "SeriesResistor",
    "SeriesInductor",
    "ShuntCapacitor",
    "PiCLC",
    "PhysicalCoaxial",
    "TerminatedAmplifier",
];

/// A model of the named type with its default parameters.
pub fn default_model(name: &str) -> Result<Model> {
    match name {
        "SeriesResistor" => Ok(series_resistor(50.0)),
        "SeriesInductor" => Ok(series_inductor(1e-9)),
        "ShuntCapacitor" => Ok(shunt_capacitor(1e-12)),
        "PiCLC" => Ok(pi_clc(0.05e-12, 0.1e-9, 0.1e-12)),
        "PhysicalCoaxial" => PhysicalCoaxial::default().build(),
        "TerminatedAmplifier" => TerminatedAmplifier::default().build(),
        _ => Err(Error::unknown_name("model", name, &MODEL_NAMES)),
    }
}
