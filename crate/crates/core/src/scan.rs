//! Single-displacement maps over the phase plane for a cat basis: numeric κ,
//! the distance-based estimate, rank-deficient cells and optionally the
//! Fisher determinant.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fisher::{fisher_det_map, square_grid, FisherMap};
use crate::sensing::{build_sensing, cn_estimate_cat, condition_number, BasisSpec, MeasurementSetting, Mode};
use crate::statesim::{cat_density, cat_pure};
use crate::stats::spearman;
use crate::C64;

pub const SCAN_SCHEMA_VERSION: u32 = 1;

/// State used for the optional Fisher map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FisherState {
    /// Equal mixture of the coherent components.
    Mixed,
    /// Equal-weight superposition.
    Pure,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ScanOptions {
    pub half_width: f64,
    pub grid: usize,
    /// κ above this is flagged as off-scale.
    pub display_cap: f64,
    pub fisher: Option<FisherState>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { half_width: 4.0, grid: 41, display_cap: 100.0, fisher: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanCell {
    pub beta: C64,
    /// `+∞` where the single-setting map is rank deficient.
    pub kappa: f64,
    pub estimate: f64,
    pub rank_deficient: bool,
    pub capped: bool,
    /// Distance to the nearest bisector or line through two centres.
    pub locus_distance: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanReport {
    pub schema_version: u32,
    pub alphas: Vec<C64>,
    pub options: ScanOptions,
    pub cells: Vec<ScanCell>,
    /// Rank correlation of the finite κ values with the estimate.
    pub spearman: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fisher: Option<FisherMap>,
}

/// Distance from `beta` to the nearest perpendicular bisector of, or line
/// through, a pair of centres.
pub fn locus_distance(alphas: &[C64], beta: C64) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..alphas.len() {
        for j in i + 1..alphas.len() {
            let u = (alphas[j] - alphas[i]) / (alphas[j] - alphas[i]).norm();
            let mid = (alphas[i] + alphas[j]) / 2.0;
            // components of β − mid along and across the pair axis
            let w = (beta - mid) * u.conj();
            best = best.min(w.re.abs()).min(w.im.abs());
        }
    }
    best
}

impl ScanReport {
    pub fn spacing(&self) -> f64 {
        2.0 * self.options.half_width / (self.options.grid.max(2) - 1) as f64
    }

    pub fn to_csv(&self) -> String {
        crate::io::csv_string(
            &["beta_re", "beta_im", "kappa", "estimate", "rank_deficient", "capped"],
            self.cells.iter().map(|c| {
                vec![
                    c.beta.re.to_string(),
                    c.beta.im.to_string(),
                    c.kappa.to_string(),
                    c.estimate.to_string(),
                    u8::from(c.rank_deficient).to_string(),
                    u8::from(c.capped).to_string(),
                ]
            }),
        )
    }

    /// `(cells on a locus that are not flagged, flagged cells farther than
    /// one grid cell from every locus)`.
    pub fn locus_mismatches(&self) -> (usize, usize) {
        let h = self.spacing() * (1.0 + 1e-9);
        let missed = self.cells.iter().filter(|c| c.locus_distance < 1e-9 && !c.rank_deficient).count();
        let stray = self.cells.iter().filter(|c| c.rank_deficient && c.locus_distance > h).count();
        (missed, stray)
    }

    /// The κ map as rows of the grid (`x` outer), for maxima counting.
    pub fn kappa_grid(&self) -> Vec<Vec<f64>> {
        self.cells.chunks(self.options.grid).map(|r| r.iter().map(|c| c.kappa).collect()).collect()
    }
}

pub fn scan_cat(alphas: &[C64], opts: ScanOptions) -> Result<ScanReport> {
    if alphas.len() < 2 {
        return Err(Error::Config("a cat scan needs at least two coherent components".into()));
    }
    if opts.grid < 2 || !(opts.half_width > 0.0) {
        return Err(Error::Config("scan grid needs ≥ 2 points per axis and a positive half-width".into()));
    }
    let basis = BasisSpec::coherent(alphas.to_vec())?;
    let grid = square_grid(opts.half_width, opts.grid);
    let cells: Vec<ScanCell> = grid
        .par_iter()
        .map(|&beta| {
            let a = build_sensing(&[MeasurementSetting::for_basis(beta, &basis)], &basis, Mode::Qn)?;
            let cond = condition_number(&a);
            let rank_deficient = !cond.is_full_rank();
            let kappa = if rank_deficient { f64::INFINITY } else { cond.kappa };
            Ok(ScanCell {
                beta,
                kappa,
                estimate: cn_estimate_cat(alphas, beta),
                rank_deficient,
                capped: kappa > opts.display_cap,
                locus_distance: locus_distance(alphas, beta),
            })
        })
        .collect::<Result<_>>()?;
    let k: Vec<f64> = cells.iter().map(|c| c.kappa).collect();
    let e: Vec<f64> = cells.iter().map(|c| c.estimate).collect();
    let fisher = match opts.fisher {
        None => None,
        Some(state) => {
            let p = alphas.len();
            let rho = match state {
                FisherState::Mixed => cat_density(alphas, &DMatrix::identity(p, p))?,
                FisherState::Pure => cat_pure(alphas, &vec![C64::new(1.0, 0.0); p])?,
            };
            Some(fisher_det_map(&rho.entries, alphas, &grid)?)
        }
    };
    Ok(ScanReport { schema_version: SCAN_SCHEMA_VERSION, alphas: alphas.to_vec(), options: opts, cells, spearman: spearman(&k, &e), fisher })
}
