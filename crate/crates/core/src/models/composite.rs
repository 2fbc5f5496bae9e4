//! Compound models: cascade, termination and tabulated S data.

use num_complex::Complex64;

use crate::autodiff::dual::{CDual, Dual};
use crate::error::{Error, Result};
use crate::models::node::{Field, Model, Repr, Response, Scope, StaticValue};
use crate::netcore::{
    cascade_abcd, terminate_load, ABCDMatrixArray, Frequency, Load, Mat2, SMatrixArray,
};

fn child_ports(fields: &[(String, Field)], name: &str) -> Option<usize> {
    fields.iter().find_map(|(n, f)| match f {
        Field::Model(m) if n == name => Some(m.ports()),
        _ => None,
    })
}

#[derive(Debug)]
struct Cascade;

impl Response for Cascade {
    fn type_name(&self) -> &str {
        "Cascade"
    }

    fn native(&self) -> Repr {
        Repr::Abcd
    }

    fn validate(&self, fields: &[(String, Field)]) -> Result<()> {
        for side in ["left", "right"] {
            match child_ports(fields, side) {
                Some(2) => {}
                Some(p) => return Err(Error::PortMismatch { expected: 2, got: p }),
                None => {
                    return Err(Error::InvalidModel(format!(
                        "Cascade needs a `{side}` sub-model"
                    )))
                }
            }
        }
        Ok(())
    }

    fn abcd(&self, scope: &Scope<'_>) -> Result<ABCDMatrixArray<CDual>> {
        cascade_abcd(&scope.child_a("left")?, &scope.child_a("right")?)
    }
}

#[derive(Debug)]
struct Terminated;

fn load_of(v: &StaticValue) -> Result<Load> {
    match v {
        StaticValue::Text(s) => Load::parse(s),
        other => Err(Error::InvalidModel(format!("load must be text, got `{other}`"))),
    }
}

impl Response for Terminated {
    fn type_name(&self) -> &str {
        "Terminated"
    }

    fn native(&self) -> Repr {
        Repr::S
    }

    fn ports(&self, _fields: &[(String, Field)]) -> usize {
        1
    }

    fn validate(&self, fields: &[(String, Field)]) -> Result<()> {
        match child_ports(fields, "inner") {
            Some(2) => {}
            Some(p) => return Err(Error::PortMismatch { expected: 2, got: p }),
            None => return Err(Error::InvalidModel("Terminated needs an `inner` sub-model".into())),
        }
        match fields.iter().find(|(n, _)| n == "load") {
            Some((_, Field::Static(v))) => load_of(v).map(|_| ()),
            _ => Err(Error::InvalidModel("Terminated needs a static `load`".into())),
        }
    }

    fn s(&self, scope: &Scope<'_>) -> Result<SMatrixArray<CDual>> {
        let load = load_of(scope.static_value("load")?)?;
        terminate_load(&scope.child_s("inner")?, load)
    }
}

/// Source-to-load cascade of two 2-port models.
pub fn cascade(left: &Model, right: &Model) -> Result<Model> {
    Model::new(
        Cascade,
        vec![
            ("left".into(), Field::Model(left.clone())),
            ("right".into(), Field::Model(right.clone())),
        ],
    )
}

/// Left-associative cascade of a chain of models.
pub fn cascade_all(models: &[Model]) -> Result<Model> {
    let (first, rest) = models
        .split_first()
        .ok_or_else(|| Error::InvalidModel("empty cascade".into()))?;
    rest.iter().try_fold(first.clone(), |acc, m| cascade(&acc, m))
}

/// Closes port 2 of a 2-port model.
pub fn terminated(inner: &Model, load: Load) -> Result<Model> {
    let name = match load {
        Load::Short => "short",
        Load::Open => "open",
        Load::Match => "match",
    };
    Model::new(
        Terminated,
        vec![
            ("inner".into(), Field::Model(inner.clone())),
            ("load".into(), Field::Static(StaticValue::Text(name.into()))),
        ],
    )
}

#[derive(Debug)]
enum Table {
    /// Same matrix at every frequency.
    Constant(SMatrixArray),
    Tabulated { f: Vec<f64>, s: SMatrixArray },
}

/// Fixed S data as a model. Tabulated data evaluated on another grid is
/// interpolated linearly (real and imaginary parts independently) and is
/// rejected outside the tabulated span.
#[derive(Debug)]
struct SModel {
    table: Table,
}

impl SModel {
    fn data(&self) -> &SMatrixArray {
        match &self.table {
            Table::Constant(s) | Table::Tabulated { s, .. } => s,
        }
    }
}

fn row(s: &SMatrixArray, k: usize) -> &[Complex64] {
    let n = s.ports() * s.ports();
    &s.data()[k * n..(k + 1) * n]
}

impl Response for SModel {
    fn type_name(&self) -> &str {
        "SModel"
    }

    fn native(&self) -> Repr {
        Repr::S
    }

    fn ports(&self, _fields: &[(String, Field)]) -> usize {
        self.data().ports()
    }

    fn s(&self, scope: &Scope<'_>) -> Result<SMatrixArray<CDual>> {
        let data = self.data();
        if data.z0() != scope.z0() {
            return Err(Error::InvalidModel(format!(
                "SModel is referenced to {} Ω, evaluation asked for {} Ω",
                data.z0(),
                scope.z0()
            )));
        }
        let ports = data.ports();
        let out: Vec<CDual> = match &self.table {
            Table::Constant(s) => (0..scope.len())
                .flat_map(|_| row(s, 0).iter().map(|&x| CDual::constant(x)))
                .collect(),
            Table::Tabulated { f, s } if f.as_slice() == scope.f_plain() => {
                s.data().iter().map(|&x| CDual::constant(x)).collect()
            }
            Table::Tabulated { f, s } => {
                let (lo, hi) = (f[0], f[f.len() - 1]);
                let mut out = Vec::with_capacity(scope.len() * ports * ports);
                for &fq in scope.f() {
                    if !(fq.v >= lo && fq.v <= hi) {
                        return Err(Error::OutsideSpan { freq: fq.v, lo, hi });
                    }
                    if f.len() == 1 {
                        out.extend(row(s, 0).iter().map(|&x| CDual::constant(x)));
                        continue;
                    }
                    let j = f.partition_point(|&x| x <= fq.v).clamp(1, f.len() - 1) - 1;
                    let t: Dual = (fq - f[j]) / (f[j + 1] - f[j]);
                    let one_minus_t = -t + 1.0;
                    for (&a, &b) in row(s, j).iter().zip(row(s, j + 1)) {
                        let a = CDual::constant(a);
                        let b = CDual::constant(b);
                        out.push(a * one_minus_t + b * t);
                    }
                }
                out
            }
        };
        SMatrixArray::new(ports, out, data.z0())
    }
}

/// Tabulated S data on an explicit grid.
pub fn smodel(s: SMatrixArray, freq: &Frequency) -> Result<Model> {
    if s.len() != freq.len() {
        return Err(Error::LengthMismatch {
            left: s.len(),
            right: freq.len(),
        });
    }
    Model::new(
        SModel {
            table: Table::Tabulated {
                f: freq.f().to_vec(),
                s,
            },
        },
        vec![],
    )
}

/// A frequency-independent 2-port S matrix.
pub fn smodel_constant(m: Mat2<Complex64>, z0: f64) -> Result<Model> {
    let s = SMatrixArray::from_two_port(vec![m], z0)?;
    Model::new(
        SModel {
            table: Table::Constant(s),
        },
        vec![],
    )
}

/// The ideal through connection at 50 Ω.
pub fn through() -> Model {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    smodel_constant([[zero, one], [one, zero]], crate::netcore::DEFAULT_Z0)
        .expect("through matrix is finite")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::elements::{series_inductor, series_resistor, shunt_capacitor};
    use crate::params::Parameter;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn grid() -> Frequency {
        Frequency::new(1.0, 10.0, 9, "GHz").unwrap()
    }

    #[test]
    fn cascade_structure_and_free_set() {
        let r = series_resistor(Parameter::fixed(1000.0));
        let l = series_inductor(Parameter::uniform(1.0, 100.0).unwrap().scale(1e-9).unwrap());
        let cap = shunt_capacitor(Parameter::uniform(1.0, 100.0).unwrap().scale(1e-12).unwrap());
        let rlc = r.cascade(&l).unwrap().cascade(&cap).unwrap();
        assert_eq!(rlc.type_name(), "Cascade");
        assert_eq!(rlc.child("left").unwrap().type_name(), "Cascade");
        assert_eq!(rlc.child("right").unwrap().type_name(), "ShuntCapacitor");
        let paths: Vec<String> = rlc.flatten_free().into_iter().map(|e| e.path.0).collect();
        assert_eq!(paths, vec!["left.right.L", "right.C"]);
    }

    #[test]
    fn cascade_matches_matrix_product() {
        let f = grid();
        let a = series_inductor(2e-9);
        let b = shunt_capacitor(1e-12);
        let ab = a.cascade(&b).unwrap();
        let want = cascade_abcd(&a.eval_a(&f).unwrap(), &b.eval_a(&f).unwrap()).unwrap();
        assert_eq!(ab.eval_a(&f).unwrap(), want);
    }

    #[test]
    fn through_is_identity_for_cascade() {
        let f = grid();
        let m = series_inductor(2e-9).cascade(&shunt_capacitor(1e-12)).unwrap();
        let s = m.eval_s(&f).unwrap();
        let s2 = m.cascade(&through()).unwrap().eval_s(&f).unwrap();
        let s3 = through().cascade(&m).unwrap().eval_s(&f).unwrap();
        for (x, (y, z)) in s.data().iter().zip(s2.data().iter().zip(s3.data())) {
            assert!((x - y).norm() < 1e-12);
            assert!((x - z).norm() < 1e-12);
        }
    }

    #[test]
    fn terminations() {
        let f = grid();
        let t = through().terminated(Load::Short).unwrap();
        assert_eq!(t.ports(), 1);
        let s = t.eval_s(&f).unwrap();
        assert!(s.data().iter().all(|&x| x == c(-1.0, 0.0)));

        let m = series_inductor(2e-9).cascade(&shunt_capacitor(1e-12)).unwrap();
        let matched = m.terminated(Load::Match).unwrap().eval_s(&f).unwrap();
        let full = m.eval_s(&f).unwrap();
        for k in 0..f.len() {
            assert_eq!(matched.get(k, 0, 0), full.get(k, 0, 0));
        }

        assert!(matches!(t.terminated(Load::Short), Err(Error::PortMismatch { .. })));
        assert!(matches!(t.cascade(&m), Err(Error::PortMismatch { .. })));
        assert!(t.eval_a(&f).is_err());
    }

    #[test]
    fn tabulated_passthrough_and_interpolation() {
        let f = Frequency::new(1.0, 3.0, 3, "GHz").unwrap();
        let data = SMatrixArray::from_two_port(
            vec![
                [[c(0.1, 0.0), c(0.9, 0.0)], [c(0.9, 0.0), c(0.1, 0.0)]],
                [[c(0.2, 0.2), c(0.8, 0.0)], [c(0.8, 0.0), c(0.2, 0.0)]],
                [[c(0.3, 0.0), c(0.7, 0.0)], [c(0.7, 0.0), c(0.3, 0.0)]],
            ],
            50.0,
        )
        .unwrap();
        let m = smodel(data.clone(), &f).unwrap();
        assert_eq!(m.eval_s(&f).unwrap(), data);

        let mid = Frequency::new(1.5, 2.5, 3, "GHz").unwrap();
        let s = m.eval_s(&mid).unwrap();
        assert!((s.get(0, 0, 0) - c(0.15, 0.1)).norm() < 1e-15);
        assert!((s.get(1, 0, 0) - c(0.2, 0.2)).norm() < 1e-15);
        assert!((s.get(2, 1, 0) - c(0.75, 0.0)).norm() < 1e-15);

        let outside = Frequency::new(0.5, 2.0, 2, "GHz").unwrap();
        assert!(matches!(m.eval_s(&outside), Err(Error::OutsideSpan { .. })));
        assert!(m.eval_s_z0(&f, 75.0).is_err());
    }
}
