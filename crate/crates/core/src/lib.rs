//! Tomography of a bosonic mode from displaced excitation counting.
//!
//! The kernels are generic over the real scalar ([`Real`], implemented for
//! `f32` and `f64`); design, reconstruction and verification layers work in
//! `f64`.

pub mod asymptotics;
pub mod benchmark;
pub mod design;
pub mod error;
pub mod fisher;
pub mod io;
pub mod numerics;
pub mod reconstruct;
pub mod scan;
pub mod scalar;
pub mod sensing;
pub mod statesim;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Real;
pub use sensing::{BasisSpec, ConditionReport, MeasurementSetting, Mode};

pub type C64 = num_complex::Complex<f64>;
pub type SensingMatrix64 = sensing::SensingMatrix<f64>;
pub type Setting64 = sensing::MeasurementSetting<f64>;
