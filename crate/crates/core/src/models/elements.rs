//! Lumped series and shunt elements.

use crate::autodiff::dual::{CDual, Scalar};
use crate::error::Result;
use crate::models::node::{c_real, Field, Model, Repr, Response, Scope};
use crate::netcore::network::mat_mul;
use crate::netcore::{ABCDMatrixArray, Mat2};
use crate::params::Parameter;

pub(crate) fn series<T: Scalar>(z: T) -> Mat2<T> {
    [[T::one(), z], [T::zero(), T::one()]]
}

pub(crate) fn shunt<T: Scalar>(y: T) -> Mat2<T> {
    [[T::one(), T::zero()], [y, T::one()]]
}

#[derive(Debug)]
struct SeriesResistor;

impl Response for SeriesResistor {
    fn type_name(&self) -> &str {
        "SeriesResistor"
    }

    fn native(&self) -> Repr {
        Repr::Abcd
    }

    fn abcd(&self, scope: &Scope<'_>) -> Result<ABCDMatrixArray<CDual>> {
        let r = c_real(scope.scalar("R")?);
        ABCDMatrixArray::new(vec![series(r); scope.len()])
    }
}

#[derive(Debug)]
struct SeriesInductor;

impl Response for SeriesInductor {
    fn type_name(&self) -> &str {
        "SeriesInductor"
    }

    fn native(&self) -> Repr {
        Repr::Abcd
    }

    fn abcd(&self, scope: &Scope<'_>) -> Result<ABCDMatrixArray<CDual>> {
        let l = scope.scalar("L")?;
        let data = scope
            .w()
            .iter()
            .map(|&w| series(CDual::j() * c_real(w * l)))
            .collect();
        ABCDMatrixArray::new(data)
    }
}

#[derive(Debug)]
struct ShuntCapacitor;

impl Response for ShuntCapacitor {
    fn type_name(&self) -> &str {
        "ShuntCapacitor"
    }

    fn native(&self) -> Repr {
        Repr::Abcd
    }

    fn abcd(&self, scope: &Scope<'_>) -> Result<ABCDMatrixArray<CDual>> {
        let c = scope.scalar("C")?;
        let data = scope
            .w()
            .iter()
            .map(|&w| shunt(CDual::j() * c_real(w * c)))
            .collect();
        ABCDMatrixArray::new(data)
    }
}

/// Shunt C1, series L, shunt C2.
#[derive(Debug)]
struct PiClc;

impl Response for PiClc {
    fn type_name(&self) -> &str {
        "PiCLC"
    }

    fn native(&self) -> Repr {
        Repr::Abcd
    }

    fn abcd(&self, scope: &Scope<'_>) -> Result<ABCDMatrixArray<CDual>> {
        let c1 = scope.scalar("C1")?;
        let l = scope.scalar("L")?;
        let c2 = scope.scalar("C2")?;
        let j = CDual::j();
        let data = scope
            .w()
            .iter()
            .map(|&w| {
                let left = mat_mul(&shunt(j * c_real(w * c1)), &series(j * c_real(w * l)));
                mat_mul(&left, &shunt(j * c_real(w * c2)))
            })
            .collect();
        ABCDMatrixArray::new(data)
    }
}

fn one_field(rule: impl Response + 'static, name: &str, p: Parameter) -> Model {
    Model::new(rule, vec![(name.to_string(), Field::Param(p))])
        .expect("single-parameter element is always valid")
}

/// Series resistor, field `R` in ohms.
pub fn series_resistor(r: impl Into<Parameter>) -> Model {
    one_field(SeriesResistor, "R", r.into())
}

/// Series inductor, field `L` in henries.
pub fn series_inductor(l: impl Into<Parameter>) -> Model {
    one_field(SeriesInductor, "L", l.into())
}

/// Shunt capacitor, field `C` in farads.
pub fn shunt_capacitor(c: impl Into<Parameter>) -> Model {
    one_field(ShuntCapacitor, "C", c.into())
}

/// Pi network: shunt `C1`, series `L`, shunt `C2`.
pub fn pi_clc(
    c1: impl Into<Parameter>,
    l: impl Into<Parameter>,
    c2: impl Into<Parameter>,
) -> Model {
    Model::new(
        PiClc,
        vec![
            ("C1".into(), Field::Param(c1.into())),
            ("L".into(), Field::Param(l.into())),
            ("C2".into(), Field::Param(c2.into())),
        ],
    )
    .expect("PiCLC fields are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcore::{cascade_abcd, Frequency};
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn resistor_abcd() {
        let f = Frequency::new(1.0, 3.0, 3, "GHz").unwrap();
        let a = series_resistor(Parameter::fixed(1000.0)).eval_a(&f).unwrap();
        for k in 0..3 {
            assert_eq!(*a.get(k), [[c(1., 0.), c(1000., 0.)], [c(0., 0.), c(1., 0.)]]);
        }
    }

    #[test]
    fn reactive_elements_vanish_at_dc() {
        let f = Frequency::new(0.0, 0.0, 1, "Hz").unwrap();
        let id = [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(1., 0.)]];
        assert_eq!(*series_inductor(1e-9).eval_a(&f).unwrap().get(0), id);
        assert_eq!(*shunt_capacitor(1e-12).eval_a(&f).unwrap().get(0), id);
    }

    #[test]
    fn pi_network_is_three_element_cascade() {
        let f = Frequency::new(0.5, 5.0, 7, "GHz").unwrap();
        let pi = pi_clc(0.05e-12, 0.1e-9, 0.1e-12).eval_a(&f).unwrap();
        let manual = cascade_abcd(
            &cascade_abcd(
                &shunt_capacitor(0.05e-12).eval_a(&f).unwrap(),
                &series_inductor(0.1e-9).eval_a(&f).unwrap(),
            )
            .unwrap(),
            &shunt_capacitor(0.1e-12).eval_a(&f).unwrap(),
        )
        .unwrap();
        assert_eq!(pi, manual);
    }
}
