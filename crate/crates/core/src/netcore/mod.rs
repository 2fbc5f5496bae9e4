//! Frequency grids, two-port matrix algebra and derived quantities.

pub mod derived;
pub mod frequency;
pub mod network;

pub use derived::{db_2_mag, derived_quantity, mag_2_db, Quantity, RealArray, DB_FLOOR};
pub use frequency::{FreqUnit, Frequency};
pub use network::{
    abcd_to_s, cascade_abcd, cascade_s, s_to_abcd, terminate_load, terminate_s, ABCDMatrixArray, Load, Mat2,
    SMatrixArray, DEFAULT_Z0,
};
