//! Measurement-setting design: ring families, gradient descent on the
//! condition number, greedy selection and multi-ring comparison.

mod gradient;
mod greedy;
mod mfrc;
mod optimize;
mod ring;

pub use gradient::{cn_directional_derivative, cn_gradient, covariance_condition, DEGENERACY_GAP};
pub use greedy::{greedy_select, GreedyOptions};
pub use mfrc::{mfrc_compare, MfrcComparison};
pub use optimize::{optimize_multistart, optimize_settings, random_betas, settings_for, DesignReport, OptimizeOptions};
pub use ring::{
    fock_condition, golden_section, linspace_step, minimize_radius, optimal_radius, radius_scan, radius_scan_csv,
    ring_phases, ring_settings, ring_settings_cut, RadiusPoint, RingConfig, RingFamily, RADIUS_SEARCH,
    RING_SCAN_CUTOFF,
};
