//! Unilateral amplifier behind a parasitic pi network and a series
//! resistor, closed by a short.

use crate::autodiff::dual::{CDual, Real, Scalar};
use crate::error::{Error, Result};
use crate::models::elements::{pi_clc, series_resistor};
use crate::models::node::{c_real, Field, Model, Repr, Response, Scope};
use crate::netcore::{cascade_s, db_2_mag, terminate_load, Load, SMatrixArray};
use crate::params::Parameter;

#[derive(Debug)]
struct AmplifierRule;

impl Response for AmplifierRule {
    fn type_name(&self) -> &str {
        "TerminatedAmplifier"
    }

    fn native(&self) -> Repr {
        Repr::S
    }

    fn ports(&self, _fields: &[(String, Field)]) -> usize {
        1
    }

    fn validate(&self, fields: &[(String, Field)]) -> Result<()> {
        for name in ["resistor", "parasitics"] {
            match fields.iter().find(|(n, _)| n == name) {
                Some((_, Field::Model(m))) if m.ports() == 2 => {}
                _ => {
                    return Err(Error::InvalidModel(format!(
                        "TerminatedAmplifier needs a 2-port `{name}`"
                    )))
                }
            }
        }
        Ok(())
    }

    fn s(&self, scope: &Scope<'_>) -> Result<SMatrixArray<CDual>> {
        let gain = scope.scalar("gain")?;
        if !(gain.v >= 0.0) {
            return Err(Error::InvalidModel(format!(
                "amplifier power gain must be non-negative, got {}",
                gain.v
            )));
        }
        let s21 = c_real(gain.sqrt());
        let zero = CDual::zero();
        let amp = SMatrixArray::from_two_port(vec![[[zero, zero], [s21, zero]]; scope.len()], scope.z0())?;
        // composed in S so the unilateral zeros (S11, S12) stay exact
        let chain = cascade_s(&amp, &scope.child_s("parasitics")?)?;
        let chain = cascade_s(&chain, &scope.child_s("resistor")?)?;
        terminate_load(&chain, Load::Short)
    }
}

/// Builder for the terminated amplifier model.
#[derive(Debug, Clone)]
pub struct TerminatedAmplifier {
    /// Linear power gain, `|S21|²`.
    pub gain: Parameter,
    pub resistor: Model,
    pub parasitics: Model,
}

impl Default for TerminatedAmplifier {
    /// 10–15 dB gain prior, fixed 1 kΩ resistor, free pi parasitics.
    fn default() -> Self {
        Self {
            gain: Parameter::uniform(db_2_mag(10.0), db_2_mag(15.0)).expect("valid bounds"),
            resistor: series_resistor(
                Parameter::fixed(1.0).scale(1e3).expect("positive scale"),
            ),
            parasitics: pi_clc(0.05e-12, 0.1e-9, 0.1e-12),
        }
    }
}

impl TerminatedAmplifier {
    pub fn build(self) -> Result<Model> {
        Model::new(
            AmplifierRule,
            vec![
                ("gain".into(), Field::Param(self.gain)),
                ("resistor".into(), Field::Model(self.resistor)),
                ("parasitics".into(), Field::Model(self.parasitics)),
            ],
        )
    }
}
