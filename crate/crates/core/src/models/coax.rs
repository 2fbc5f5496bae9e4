//! Physical coaxial transmission line.
//!
//! Per-unit-length constants follow from the conductor diameters, the
//! dielectric permittivity and loss tangent, and the conductor resistivity
//! (skin effect). Permittivity and loss tangent may vary over the band as a
//! Bernstein polynomial in band-normalised frequency.

use std::f64::consts::PI;

use crate::autodiff::dual::{CDual, Dual, Real, Scalar};
use crate::error::{Error, Result};
use crate::models::node::{c_real, EvalCtx, Field, Model, Repr, Response, Scope, Seed, StaticValue};
use crate::netcore::{ABCDMatrixArray, Frequency, DEFAULT_Z0};
use crate::params::Parameter;

/// Vacuum permeability, H/m.
pub const MU_0: f64 = 1.256_637_062_12e-6;
/// Vacuum permittivity, F/m.
pub const EPS_0: f64 = 8.854_187_812_8e-12;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `Σ c[k]·C(n−1,k)·x^k·(1−x)^(n−1−k)` for `n = coeffs.len() ≥ 1`.
pub fn bernstein_eval<R: Real>(coeffs: &[R], x: R) -> R {
    let n = coeffs.len();
    assert!(n >= 1, "Bernstein polynomial needs at least one coefficient");
    let deg = n - 1;
    let one_minus = -x + 1.0;
    coeffs
        .iter()
        .enumerate()
        .map(|(k, &c)| c * x.powi(k as i32) * one_minus.powi((deg - k) as i32) * binomial(deg, k))
        .fold(R::from(0.0), |acc, t| acc + t)
}

/// How a vector-valued material property varies over the band.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dispersion {
    /// Single coefficient, frequency independent.
    Constant,
    /// Bernstein polynomial over band-normalised frequency.
    Bpoly,
}

impl Dispersion {
    pub const NAMES: [&'static str; 2] = ["const", "bpoly"];

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "const" | "constant" => Ok(Dispersion::Constant),
            "bpoly" => Ok(Dispersion::Bpoly),
            _ => Err(Error::unknown_name("dispersion model", s, &Self::NAMES)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Dispersion::Constant => "const",
            Dispersion::Bpoly => "bpoly",
        }
    }
}

/// Declarative description of a coaxial line; [`PhysicalCoaxial::build`]
/// turns it into a [`Model`].
///
/// Units (physical): diameters in m, resistivity in Ω·m, length in m.
#[derive(Debug, Clone)]
pub struct PhysicalCoaxial {
    pub din: Parameter,
    pub dout: Parameter,
    pub epr: Parameter,
    pub rho: Parameter,
    pub tand: Parameter,
    pub mur: Parameter,
    pub length: Parameter,
    pub epr_model: Dispersion,
    pub tand_model: Dispersion,
}

impl Default for PhysicalCoaxial {
    /// A 10 m cable: 1.12 mm / 3.2 mm conductors, εr 1.45 and loss tangent
    /// as band-edge Bernstein coefficients, copper-like resistivity.
    fn default() -> Self {
        let pn = |m: f64, s: f64| {
            Parameter::percent_normal(m, 5.0)
                .and_then(|p| p.scale(s))
                .expect("valid constant")
        };
        Self {
            din: pn(1.12, 1e-3),
            dout: pn(3.2, 1e-3),
            epr: pn(1.45, 1.0).n(2).expect("n > 0"),
            rho: pn(1.6, 1e-8),
            tand: Parameter::uniform(0.0, 0.01)
                .and_then(|p| p.value(0.0))
                .and_then(|p| p.scale(0.01))
                .and_then(|p| p.n(2))
                .expect("valid constant"),
            mur: Parameter::fixed(1.0),
            length: pn(10.0, 1.0),
            epr_model: Dispersion::Bpoly,
            tand_model: Dispersion::Bpoly,
        }
    }
}

impl PhysicalCoaxial {
    pub fn build(self) -> Result<Model> {
        Model::new(
            CoaxRule,
            vec![
                ("din".into(), Field::Param(self.din)),
                ("dout".into(), Field::Param(self.dout)),
                ("epr".into(), Field::Param(self.epr)),
                ("rho".into(), Field::Param(self.rho)),
                ("tand".into(), Field::Param(self.tand)),
                ("mur".into(), Field::Param(self.mur)),
                ("length".into(), Field::Param(self.length)),
                (
                    "epr_model".into(),
                    Field::Static(StaticValue::Text(self.epr_model.name().into())),
                ),
                (
                    "tand_model".into(),
                    Field::Static(StaticValue::Text(self.tand_model.name().into())),
                ),
            ],
        )
    }
}

#[derive(Debug)]
struct CoaxRule;

const SCALAR_FIELDS: [&str; 5] = ["din", "dout", "rho", "mur", "length"];

fn dispersion(fields: &[(String, Field)], name: &str) -> Result<Dispersion> {
    match fields.iter().find(|(n, _)| n == name) {
        Some((_, Field::Static(StaticValue::Text(s)))) => Dispersion::parse(s),
        _ => Err(Error::InvalidModel(format!(
            "PhysicalCoaxial needs a text `{name}` setting"
        ))),
    }
}

fn param<'a>(fields: &'a [(String, Field)], name: &str) -> Result<&'a Parameter> {
    match fields.iter().find(|(n, _)| n == name) {
        Some((_, Field::Param(p))) => Ok(p),
        _ => Err(Error::InvalidModel(format!(
            "PhysicalCoaxial needs a `{name}` parameter"
        ))),
    }
}

impl Response for CoaxRule {
    fn type_name(&self) -> &str {
        "PhysicalCoaxial"
    }

    fn native(&self) -> Repr {
        Repr::Abcd
    }

    fn validate(&self, fields: &[(String, Field)]) -> Result<()> {
        for name in SCALAR_FIELDS {
            if param(fields, name)?.len() != 1 {
                return Err(Error::InvalidModel(format!(
                    "PhysicalCoaxial `{name}` must be scalar"
                )));
            }
        }
        for (name, model) in [("epr", "epr_model"), ("tand", "tand_model")] {
            let p = param(fields, name)?;
            if dispersion(fields, model)? == Dispersion::Constant && p.len() != 1 {
                return Err(Error::InvalidModel(format!(
                    "`{name}` with a constant model must be scalar, has {} components",
                    p.len()
                )));
            }
        }
        Ok(())
    }

    fn abcd(&self, scope: &Scope<'_>) -> Result<ABCDMatrixArray<CDual>> {
        let length = scope.scalar("length")?;
        if !(length.v >= 0.0) {
            return Err(Error::InvalidModel(format!(
                "PhysicalCoaxial length must be non-negative, got {}",
                length.v
            )));
        }
        let data = rlgc(scope)?
            .into_iter()
            .zip(scope.w())
            .map(|(line, &w)| {
                let (gamma, z0) = line.propagation(w);
                let gl = gamma * c_real(length);
                let ch = gl.cosh();
                let sh = gl.sinh();
                [[ch, z0 * sh], [sh / z0, ch]]
            })
            .collect();
        ABCDMatrixArray::new(data)
    }
}

/// Per-unit-length line constants at one frequency.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Rlgc<R> {
    pub r: R,
    pub l: R,
    pub g: R,
    pub c: R,
    dc: bool,
}

impl Rlgc<Dual> {
    /// Propagation constant and characteristic impedance.
    fn propagation(&self, w: Dual) -> (CDual, CDual) {
        let j = CDual::j();
        if self.dc {
            // skin resistance vanishes at DC; use the lossless limit
            let gamma = j * c_real(w * (self.l * self.c).sqrt());
            let z0 = c_real((self.l / self.c).sqrt());
            return (gamma, z0);
        }
        let z = c_real(self.r) + j * c_real(w * self.l);
        let y = c_real(self.g) + j * c_real(w * self.c);
        ((z * y).sqrt(), (z / y).sqrt())
    }
}

fn rlgc(scope: &Scope<'_>) -> Result<Vec<Rlgc<Dual>>> {
    let din = scope.scalar("din")?;
    let dout = scope.scalar("dout")?;
    let rho = scope.scalar("rho")?;
    let mur = scope.scalar("mur")?;
    let epr = scope.param("epr")?;
    let tand = scope.param("tand")?;
    if !(din.v > 0.0 && dout.v > din.v) {
        return Err(Error::InvalidModel(format!(
            "PhysicalCoaxial needs dout > din > 0, got din={}, dout={}",
            din.v, dout.v
        )));
    }
    if rho.v < 0.0 || mur.v <= 0.0 {
        return Err(Error::InvalidModel(format!(
            "PhysicalCoaxial needs rho >= 0 and mur > 0, got rho={}, mur={}",
            rho.v, mur.v
        )));
    }
    let fp = scope.f_plain();
    let (f_min, f_max) = (fp[0], fp[fp.len() - 1]);
    let band = f_max - f_min;
    let k = (dout / din).ln();
    let l = k * mur * (MU_0 / (2.0 * PI));
    let surface = (Dual::from(1.0) / din + Dual::from(1.0) / dout) / PI;
    let mut out = Vec::with_capacity(scope.len());
    for (&f, &w) in scope.f().iter().zip(scope.w()) {
        let x = if band > 0.0 {
            (f - f_min) / band
        } else {
            Dual::from(0.0)
        };
        let er = bernstein_eval(&epr, x);
        let td = bernstein_eval(&tand, x);
        if !(er.v >= 1.0) {
            return Err(Error::InvalidModel(format!(
                "relative permittivity must be at least 1, got {} at {} Hz",
                er.v, f.v
            )));
        }
        if !(td.v >= 0.0) {
            return Err(Error::InvalidModel(format!(
                "loss tangent must be non-negative, got {} at {} Hz",
                td.v, f.v
            )));
        }
        let c = er * (2.0 * PI * EPS_0) / k;
        let rs = (f * mur * rho * (PI * MU_0)).sqrt();
        out.push(Rlgc {
            r: rs * surface,
            l,
            g: w * c * td,
            c,
            dc: f.v == 0.0,
        });
    }
    Ok(out)
}

/// Per-unit-length line constants of a coaxial model over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LineConstants {
    /// Ω/m
    pub r: Vec<f64>,
    /// H/m
    pub l: Vec<f64>,
    /// S/m
    pub g: Vec<f64>,
    /// F/m
    pub c: Vec<f64>,
}

/// R', L', G', C' of a `PhysicalCoaxial` model at each grid point.
pub fn coax_rlgc(model: &Model, freq: &Frequency) -> Result<LineConstants> {
    if model.type_name() != "PhysicalCoaxial" {
        return Err(Error::InvalidModel(format!(
            "expected PhysicalCoaxial, got {}",
            model.type_name()
        )));
    }
    let ctx = EvalCtx::new(freq, Seed::None, DEFAULT_Z0)?;
    let lines = rlgc(&Scope::root(model, &ctx))?;
    Ok(LineConstants {
        r: lines.iter().map(|x| x.r.v).collect(),
        l: lines.iter().map(|x| x.l.v).collect(),
        g: lines.iter().map(|x| x.g.v).collect(),
        c: lines.iter().map(|x| x.c.v).collect(),
    })
}
