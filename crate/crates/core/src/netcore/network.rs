//! S and ABCD matrix arrays and the two-port algebra between them.

use num_complex::Complex64;

use crate::autodiff::dual::Scalar;
use crate::error::{Error, Result};

pub type Mat2<T> = [[T; 2]; 2];

/// Default reference impedance in ohms.
pub const DEFAULT_Z0: f64 = 50.0;

/// Per-frequency S matrices, shape (F, P, P) with P in {1, 2}.
#[derive(Debug, Clone, PartialEq)]
pub struct SMatrixArray<T = Complex64> {
    ports: usize,
    data: Vec<T>,
    z0: f64,
}

/// Per-frequency ABCD matrices, shape (F, 2, 2).
#[derive(Debug, Clone, PartialEq)]
pub struct ABCDMatrixArray<T = Complex64> {
    data: Vec<Mat2<T>>,
}

fn check_z0(z0: f64) -> Result<()> {
    if z0 > 0.0 && z0.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidZ0(z0))
    }
}

impl<T: Scalar> SMatrixArray<T> {
    /// Flat row-major data of length F·P·P.
    pub fn new(ports: usize, data: Vec<T>, z0: f64) -> Result<Self> {
        check_z0(z0)?;
        if ports != 1 && ports != 2 {
            return Err(Error::PortMismatch {
                expected: 2,
                got: ports,
            });
        }
        if data.len() % (ports * ports) != 0 {
            return Err(Error::InvalidModel(format!(
                "S data length {} is not a multiple of {}",
                data.len(),
                ports * ports
            )));
        }
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::Singular {
                index: i / (ports * ports),
                what: "non-finite S entry",
            });
        }
        Ok(Self { ports, data, z0 })
    }

    pub fn from_two_port(m: Vec<Mat2<T>>, z0: f64) -> Result<Self> {
        let data = m
            .into_iter()
            .flat_map(|x| [x[0][0], x[0][1], x[1][0], x[1][1]])
            .collect();
        Self::new(2, data, z0)
    }

    pub fn from_one_port(g: Vec<T>, z0: f64) -> Result<Self> {
        Self::new(1, g, z0)
    }

    pub fn ports(&self) -> usize {
        self.ports
    }

    pub fn z0(&self) -> f64 {
        self.z0
    }

    pub fn len(&self) -> usize {
        self.data.len() / (self.ports * self.ports)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Entry (i, j) at frequency index k, zero-based ports.
    pub fn get(&self, k: usize, i: usize, j: usize) -> T {
        self.data[k * self.ports * self.ports + i * self.ports + j]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    /// The 2×2 matrix at frequency index k. Panics on a 1-port array.
    pub fn mat(&self, k: usize) -> Mat2<T> {
        assert_eq!(self.ports, 2, "mat() needs a 2-port array");
        let b = 4 * k;
        [
            [self.data[b], self.data[b + 1]],
            [self.data[b + 2], self.data[b + 3]],
        ]
    }

    /// Plain complex values, dropping any tangent.
    pub fn values(&self) -> SMatrixArray<Complex64> {
        SMatrixArray {
            ports: self.ports,
            data: self.data.iter().map(|x| x.value()).collect(),
            z0: self.z0,
        }
    }

    /// Tangent part of every entry.
    pub fn tangents(&self) -> SMatrixArray<Complex64> {
        SMatrixArray {
            ports: self.ports,
            data: self.data.iter().map(|x| x.tangent()).collect(),
            z0: self.z0,
        }
    }
}

impl<T: Scalar> ABCDMatrixArray<T> {
    pub fn new(data: Vec<Mat2<T>>) -> Result<Self> {
        if let Some(i) = data
            .iter()
            .position(|m| m.iter().flatten().any(|x| !x.is_finite()))
        {
            return Err(Error::Singular {
                index: i,
                what: "non-finite ABCD entry",
            });
        }
        Ok(Self { data })
    }

    /// `n` copies of the identity (through connection).
    pub fn identity(n: usize) -> Self {
        Self {
            data: vec![[[T::one(), T::zero()], [T::zero(), T::one()]]; n],
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, k: usize) -> &Mat2<T> {
        &self.data[k]
    }

    pub fn data(&self) -> &[Mat2<T>] {
        &self.data
    }

    pub fn values(&self) -> ABCDMatrixArray<Complex64> {
        ABCDMatrixArray {
            data: self
                .data
                .iter()
                .map(|m| {
                    [
                        [m[0][0].value(), m[0][1].value()],
                        [m[1][0].value(), m[1][1].value()],
                    ]
                })
                .collect(),
        }
    }
}

/// Termination applied to port 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Load {
    #[default]
    Short,
    Open,
    Match,
}

impl Load {
    pub const NAMES: [&'static str; 3] = ["short", "open", "match"];

    pub fn gamma(self) -> Complex64 {
        match self {
            Load::Short => Complex64::new(-1.0, 0.0),
            Load::Open => Complex64::new(1.0, 0.0),
            Load::Match => Complex64::new(0.0, 0.0),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "short" => Ok(Load::Short),
            "open" => Ok(Load::Open),
            "match" => Ok(Load::Match),
            _ => Err(Error::unknown_name("load", s, &Load::NAMES)),
        }
    }
}

fn is_zero<T: Scalar>(x: T) -> bool {
    x.value() == Complex64::new(0.0, 0.0)
}

/// ABCD to S at real reference impedance `z0`.
pub fn abcd_to_s<T: Scalar>(a: &ABCDMatrixArray<T>, z0: f64) -> Result<SMatrixArray<T>> {
    check_z0(z0)?;
    let mut out = Vec::with_capacity(a.len());
    for (k, m) in a.data.iter().enumerate() {
        let [[aa, bb], [cc, dd]] = *m;
        let bz = bb / z0;
        let cz = cc * z0;
        let den = aa + bz + cz + dd;
        if is_zero(den) {
            return Err(Error::Singular {
                index: k,
                what: "A + B/z0 + C·z0 + D = 0",
            });
        }
        let s11 = (aa + bz - cz - dd) / den;
        let s12 = (aa * dd - bb * cc) * 2.0 / den;
        let s21 = T::from_real(2.0.into()) / den;
        let s22 = (-aa + bz - cz + dd) / den;
        out.push([[s11, s12], [s21, s22]]);
    }
    SMatrixArray::from_two_port(out, z0)
}

/// S (2-port) to ABCD at the array's own reference impedance.
pub fn s_to_abcd<T: Scalar>(s: &SMatrixArray<T>) -> Result<ABCDMatrixArray<T>> {
    if s.ports != 2 {
        return Err(Error::PortMismatch {
            expected: 2,
            got: s.ports,
        });
    }
    let z0 = s.z0;
    let one = T::one();
    let mut out = Vec::with_capacity(s.len());
    for k in 0..s.len() {
        let [[s11, s12], [s21, s22]] = s.mat(k);
        if is_zero(s21) {
            return Err(Error::Singular {
                index: k,
                what: "S21 = 0 (no ABCD form)",
            });
        }
        let x = s12 * s21;
        let den = s21 * 2.0;
        let a = ((one + s11) * (one - s22) + x) / den;
        let b = ((one + s11) * (one + s22) - x) * z0 / den;
        let c = ((one - s11) * (one - s22) - x) / (den * z0);
        let d = ((one - s11) * (one + s22) + x) / den;
        out.push([[a, b], [c, d]]);
    }
    ABCDMatrixArray::new(out)
}

pub(crate) fn mat_mul<T: Scalar>(x: &Mat2<T>, y: &Mat2<T>) -> Mat2<T> {
    [
        [
            x[0][0] * y[0][0] + x[0][1] * y[1][0],
            x[0][0] * y[0][1] + x[0][1] * y[1][1],
        ],
        [
            x[1][0] * y[0][0] + x[1][1] * y[1][0],
            x[1][0] * y[0][1] + x[1][1] * y[1][1],
        ],
    ]
}

/// Source-to-load cascade: `a1[i] · a2[i]` at every frequency.
pub fn cascade_abcd<T: Scalar>(
    a1: &ABCDMatrixArray<T>,
    a2: &ABCDMatrixArray<T>,
) -> Result<ABCDMatrixArray<T>> {
    if a1.len() != a2.len() {
        return Err(Error::LengthMismatch {
            left: a1.len(),
            right: a2.len(),
        });
    }
    let data = a1
        .data
        .iter()
        .zip(&a2.data)
        .map(|(x, y)| mat_mul(x, y))
        .collect();
    Ok(ABCDMatrixArray { data })
}

/// Source-to-load cascade in the scattering domain (star product).
/// Agrees with [`cascade_abcd`] wherever both exist, and keeps exact zeros
/// of unilateral networks exact.
pub fn cascade_s<T: Scalar>(s1: &SMatrixArray<T>, s2: &SMatrixArray<T>) -> Result<SMatrixArray<T>> {
    for s in [s1, s2] {
        if s.ports != 2 {
            return Err(Error::PortMismatch {
                expected: 2,
                got: s.ports,
            });
        }
    }
    if s1.len() != s2.len() {
        return Err(Error::LengthMismatch {
            left: s1.len(),
            right: s2.len(),
        });
    }
    if s1.z0 != s2.z0 {
        return Err(Error::InvalidZ0(s2.z0));
    }
    let mut out = Vec::with_capacity(s1.len());
    for k in 0..s1.len() {
        let [[a11, a12], [a21, a22]] = s1.mat(k);
        let [[b11, b12], [b21, b22]] = s2.mat(k);
        let den = T::one() - a22 * b11;
        if is_zero(den) {
            return Err(Error::Singular {
                index: k,
                what: "1 - S22·S11' = 0",
            });
        }
        out.push([
            [a11 + a12 * b11 * a21 / den, a12 * b12 / den],
            [b21 * a21 / den, b22 + b21 * a22 * b12 / den],
        ]);
    }
    SMatrixArray::from_two_port(out, s1.z0)
}

/// Closes port 2 with `gamma_load`, returning the 1-port input reflection.
pub fn terminate_s<T: Scalar>(s: &SMatrixArray<T>, gamma_load: &[T]) -> Result<SMatrixArray<T>> {
    if s.ports != 2 {
        return Err(Error::PortMismatch {
            expected: 2,
            got: s.ports,
        });
    }
    if gamma_load.len() != s.len() {
        return Err(Error::LengthMismatch {
            left: s.len(),
            right: gamma_load.len(),
        });
    }
    let mut out = Vec::with_capacity(s.len());
    for (k, &gl) in gamma_load.iter().enumerate() {
        let [[s11, s12], [s21, s22]] = s.mat(k);
        let den = T::one() - s22 * gl;
        if is_zero(den) {
            return Err(Error::Singular {
                index: k,
                what: "1 - S22·ΓL = 0",
            });
        }
        out.push(s11 + s12 * s21 * gl / den);
    }
    SMatrixArray::from_one_port(out, s.z0)
}

/// Terminates with one of the standard loads at every frequency.
pub fn terminate_load<T: Scalar>(s: &SMatrixArray<T>, load: Load) -> Result<SMatrixArray<T>> {
    let g = vec![T::from(load.gamma()); s.len()];
    terminate_s(s, &g)
}
