//! Real-valued quantities derived from complex responses.

use std::fmt;
use std::str::FromStr;

use crate::autodiff::dual::{Real, Scalar};
use crate::error::{Error, Result};
use crate::netcore::network::SMatrixArray;

/// Smallest modulus passed to the dB conversion.
pub const DB_FLOOR: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantity {
    Re,
    Im,
    Mag,
    Db,
    Deg,
}

impl Quantity {
    pub const NAMES: [&'static str; 5] = ["re", "im", "mag", "db", "deg"];

    pub fn apply<T: Scalar>(self, x: T) -> T::Real {
        match self {
            Quantity::Re => x.re(),
            Quantity::Im => x.im(),
            Quantity::Mag => x.norm(),
            Quantity::Db => mag_2_db(x.norm()),
            Quantity::Deg => x.arg() * (180.0 / std::f64::consts::PI),
        }
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "re" => Ok(Quantity::Re),
            "im" => Ok(Quantity::Im),
            "mag" => Ok(Quantity::Mag),
            "db" => Ok(Quantity::Db),
            "deg" => Ok(Quantity::Deg),
            _ => Err(Error::UnknownQuantity(s.to_string())),
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(Quantity::NAMES[*self as usize])
    }
}

/// `20·log10(x)`, with `x` floored at [`DB_FLOOR`]. The tangent below the
/// floor is 0.
pub fn mag_2_db<R: Real>(x: R) -> R {
    if x.value() <= DB_FLOOR {
        R::from(20.0 * DB_FLOOR.log10())
    } else {
        x.log10() * 20.0
    }
}

/// `10^(x/20)`.
pub fn db_2_mag<R: Real>(x: R) -> R {
    (x * (std::f64::consts::LN_10 / 20.0)).exp()
}

/// Real array of shape (F, P, P).
#[derive(Debug, Clone, PartialEq)]
pub struct RealArray<R = f64> {
    ports: usize,
    data: Vec<R>,
}

impl<R: Copy> RealArray<R> {
    pub fn ports(&self) -> usize {
        self.ports
    }

    pub fn len(&self) -> usize {
        self.data.len() / (self.ports * self.ports)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> R {
        self.data[k * self.ports * self.ports + i * self.ports + j]
    }

    pub fn data(&self) -> &[R] {
        &self.data
    }
}

/// Elementwise derived quantity of an S array.
pub fn derived_quantity<T: Scalar>(s: &SMatrixArray<T>, kind: Quantity) -> RealArray<T::Real> {
    RealArray {
        ports: s.ports(),
        data: s.data().iter().map(|&x| kind.apply(x)).collect(),
    }
}

/// [`derived_quantity`] with the kind given by name.
pub fn derived_quantity_named<T: Scalar>(
    s: &SMatrixArray<T>,
    kind: &str,
) -> Result<RealArray<T::Real>> {
    Ok(derived_quantity(s, kind.parse()?))
}
