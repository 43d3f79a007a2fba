//! Sensing matrices and their conditioning.

mod basis;
mod cat;
mod condition;
mod covariance;
mod homodyne;
mod matrix;

pub use basis::{default_ncut, BasisSpec, MeasurementSetting, MIN_ALPHA_SEPARATION};
pub use cat::{cat_ic_diagnostics, cn_estimate_cat, CatDiagnosticOptions, CatDiagnostics};
pub use condition::{
    condition_from_covariance, condition_number, covariance_kappa, hermitian_eigenvalues, matrix_singular_values,
    ConditionReport, RANK_TOLERANCE,
};
pub use covariance::{
    covariance, covariance_of_settings, fock_block_index, pinch, setting_covariance, CovarianceBlocks,
};
pub use homodyne::homodyne_row;
pub use matrix::{amplitude_table, build_sensing, setting_block, unvectorize, vectorize, Mode, SensingMatrix};
