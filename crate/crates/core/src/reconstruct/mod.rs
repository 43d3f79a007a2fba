//! Density-matrix estimation from count records.

mod frame;
mod imle;
mod linear;
mod metrics;
mod trilateration;

use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

pub use frame::Frame;
pub use imle::{imle, ImleOutcome, PROBABILITY_FLOOR};
pub use linear::{
    fit_physical, least_squares, project_physical, project_physical_in, project_psd_unit_trace, residual,
    simplex_projection, FitOutcome,
};
pub use metrics::{error_bound, fidelity, fidelity_matrices, trace_distance, trace_distance_matrices};
pub use trilateration::{
    cat_pipeline, data_cutoff, husimi, husimi_estimate, trilaterate_alphas, CatEstimate, HusimiMap,
    TrilaterationOptions,
};

use crate::error::{Error, Result};
use crate::sensing::{build_sensing, condition_number, Mode};
use crate::statesim::{exact_qn, DensityMatrix, MeasurementRecord};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Ls,
    Fit,
    Imle,
    CatPipeline,
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ls" => Ok(Method::Ls),
            "fit" => Ok(Method::Fit),
            "imle" => Ok(Method::Imle),
            "cat-pipeline" => Ok(Method::CatPipeline),
            _ => Err(Error::Config(format!("unknown method {s:?} (ls, fit, imle, cat-pipeline)"))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReconstructOptions {
    pub max_iters: usize,
    pub tol: f64,
    /// Number of components for the cat pipeline.
    pub p_max: usize,
    pub trilateration: TrilaterationOptions,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        ReconstructOptions { max_iters: 20_000, tol: 1e-12, p_max: 4, trilateration: Default::default() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReconstructionResult {
    pub schema_version: u32,
    pub method: Method,
    /// Unconstrained least-squares estimate (`ls` only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_ls: Option<DensityMatrix>,
    pub rho_phys: DensityMatrix,
    /// `‖A·vec(ρ_phys) − b‖₂`.
    pub residual: f64,
    /// Predicted fidelity lower bound.
    pub bound: f64,
    /// Relative data error the bound was evaluated at.
    pub rel_noise: f64,
    pub kappa: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<C64>>,
}

/// Shot-noise estimate of `‖δb‖₂/‖b‖₂` from the multinomial variances.
pub fn shot_noise_estimate(record: &MeasurementRecord) -> f64 {
    let b = record.stacked_frequencies();
    let var: f64 = record
        .settings
        .iter()
        .filter(|s| s.n_rep > 0)
        .flat_map(|s| s.frequencies().into_iter().map(move |f| f * (1.0 - f) / s.n_rep as f64))
        .sum();
    var.sqrt() / b.norm()
}

fn exact_frequencies(record: &MeasurementRecord, truth: &DensityMatrix) -> DVector<f64> {
    DVector::from_iterator(
        record.settings.iter().map(|s| s.n_c + 1).sum(),
        record.settings.iter().flat_map(|s| exact_qn(truth, &s.setting())[..=s.n_c].to_vec()),
    )
}

/// Runs `method` on `record`; `truth` (same basis) adds the achieved
/// fidelity and evaluates the bound at the true data error.
pub fn reconstruct_record(
    record: &MeasurementRecord,
    method: Method,
    truth: Option<&DensityMatrix>,
    opts: &ReconstructOptions,
) -> Result<ReconstructionResult> {
    record.validate()?;
    let b = record.stacked_frequencies();
    let rel_noise = match truth {
        Some(t) => {
            let exact = exact_frequencies(record, t);
            (&b - &exact).norm() / exact.norm()
        }
        None => shot_noise_estimate(record),
    };
    let (rho_ls, rho_phys, iterations, converged, alphas) = match method {
        Method::Ls => {
            let a = build_sensing(&record.measurement_settings(), &record.basis, Mode::Qn)?;
            let raw = least_squares(&a, &b)?;
            let phys = project_physical_in(&Frame::new(&record.basis), &raw);
            let ls = DensityMatrix { basis: record.basis.clone(), entries: raw };
            (Some(ls), DensityMatrix { basis: record.basis.clone(), entries: phys }, 0, true, None)
        }
        Method::Fit => {
            let a = build_sensing(&record.measurement_settings(), &record.basis, Mode::Qn)?;
            let fit = fit_physical(&a, &b, opts.max_iters, opts.tol)?;
            let rho = DensityMatrix { basis: record.basis.clone(), entries: fit.rho };
            (None, rho, fit.iterations, fit.converged, None)
        }
        Method::Imle => {
            let out = imle(record, &record.basis, opts.max_iters, opts.tol)?;
            let rho = DensityMatrix { basis: record.basis.clone(), entries: out.rho };
            (None, rho, out.iterations, out.converged, None)
        }
        Method::CatPipeline => {
            let est = cat_pipeline(record, opts.p_max, opts.trilateration)?;
            (None, est.rho, 0, true, Some(est.alphas))
        }
    };
    let a = build_sensing(&record.measurement_settings(), &rho_phys.basis, Mode::Qn)?;
    let cond = condition_number(&a);
    let kappa = cond.kappa.is_finite().then_some(cond.kappa);
    let res = residual(&a, &rho_phys.entries, &b);
    let norm_f = rho_phys.orthonormal_form().norm();
    let bound = kappa.map_or(0.0, |k| error_bound(k, rho_phys.dim(), norm_f, rel_noise));
    Ok(ReconstructionResult {
        schema_version: 1,
        method,
        rho_ls,
        fidelity: truth.map(|t| fidelity(t, &rho_phys)),
        rho_phys,
        residual: res,
        bound,
        rel_noise,
        kappa,
        iterations,
        converged,
        alphas,
    })
}
