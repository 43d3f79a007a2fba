use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sensing::{condition_from_covariance, covariance_of_settings, BasisSpec, ConditionReport, MeasurementSetting};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RingFamily {
    /// `2m_c + 1` displacements evenly spread over the full circle.
    Frc,
    /// `m_c + 1` displacements evenly spread over half the circle.
    Hrc,
    /// Several concentric full rings.
    Mfrc,
}

impl std::str::FromStr for RingFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "frc" => Ok(RingFamily::Frc),
            "hrc" => Ok(RingFamily::Hrc),
            "mfrc" => Ok(RingFamily::Mfrc),
            other => Err(Error::Config(format!("unknown ring family {other:?} (expected frc, hrc or mfrc)"))),
        }
    }
}

/// Excitation-count resolution used for the ring radius scans. With the count
/// cap fixed, displacing too far pushes population past the detector and κ
/// rises again, giving the scans an interior optimum.
pub const RING_SCAN_CUTOFF: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RingConfig {
    pub family: RingFamily,
    pub radii: Vec<f64>,
    pub m_c: usize,
    pub phases: Vec<f64>,
    /// Fixed `n_c` for every setting; `None` follows the truncation rule.
    #[serde(default)]
    pub n_cut: Option<usize>,
}

impl RingConfig {
    pub fn new(family: RingFamily, m_c: usize, radii: Vec<f64>) -> Result<Self> {
        if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
            return Err(Error::Config(format!("ring radii must be positive, got {radii:?}")));
        }
        if family != RingFamily::Mfrc && radii.len() != 1 {
            return Err(Error::Config("FRC and HRC take exactly one radius".into()));
        }
        Ok(RingConfig { family, phases: ring_phases(family, m_c), radii, m_c, n_cut: None })
    }

    pub fn with_cutoff(mut self, n_cut: Option<usize>) -> Self {
        self.n_cut = n_cut;
        self
    }

    pub fn settings(&self) -> Vec<MeasurementSetting<f64>> {
        let basis = BasisSpec::fock(self.m_c);
        self.radii
            .iter()
            .flat_map(|&r| self.phases.iter().map(move |&phi| C64::from_polar(r, phi)))
            .map(|b| match self.n_cut {
                Some(n) => MeasurementSetting::new(b, n),
                None => MeasurementSetting::for_basis(b, &basis),
            })
            .collect()
    }
}

/// Angles of one ring; MFRC rings use the FRC angles.
pub fn ring_phases(family: RingFamily, m_c: usize) -> Vec<f64> {
    match family {
        RingFamily::Frc | RingFamily::Mfrc => {
            let n = 2 * m_c + 1;
            (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect()
        }
        RingFamily::Hrc => (0..=m_c).map(|j| PI * j as f64 / (m_c + 1) as f64).collect(),
    }
}

pub fn ring_settings(family: RingFamily, m_c: usize, radius: f64) -> Result<Vec<MeasurementSetting<f64>>> {
    ring_settings_cut(family, m_c, radius, None)
}

/// [`ring_settings`] with an optional fixed excitation-count cap.
pub fn ring_settings_cut(
    family: RingFamily,
    m_c: usize,
    radius: f64,
    n_cut: Option<usize>,
) -> Result<Vec<MeasurementSetting<f64>>> {
    Ok(RingConfig::new(family, m_c, vec![radius])?.with_cutoff(n_cut).settings())
}

/// Fock-basis condition report of a setting list, via the covariance matrix.
pub fn fock_condition(settings: &[MeasurementSetting<f64>], m_c: usize) -> ConditionReport {
    let basis = BasisSpec::fock(m_c);
    condition_from_covariance(&covariance_of_settings(settings, &basis).c, settings.len())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusPoint {
    pub radius: f64,
    pub kappa: f64,
    pub merit: f64,
}

pub fn radius_scan(family: RingFamily, m_c: usize, radii: &[f64], n_cut: Option<usize>) -> Result<Vec<RadiusPoint>> {
    if radii.is_empty() {
        return Err(Error::Config("radius grid is empty".into()));
    }
    radii
        .par_iter()
        .map(|&r| {
            let s = ring_settings_cut(family, m_c, r, n_cut)?;
            let c = fock_condition(&s, m_c);
            Ok(RadiusPoint { radius: r, kappa: c.kappa, merit: c.figure_of_merit })
        })
        .collect()
}

pub fn radius_scan_csv(points: &[RadiusPoint]) -> String {
    let mut out = String::from("radius,kappa,merit\n");
    for p in points {
        writeln!(out, "{},{},{}", p.radius, p.kappa, p.merit).unwrap();
    }
    out
}

/// Evenly spaced grid `start, start+step, …, ≤ stop`.
pub fn linspace_step(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start + i as f64 * step).collect()
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
pub fn golden_section(mut a: f64, mut b: f64, tol: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Coarse scan over `[lo, hi]` followed by golden-section refinement around
/// the best grid point; returns `(radius, κ)` minimizing `objective`.
pub fn minimize_radius(lo: f64, hi: f64, coarse_step: f64, objective: impl Fn(f64) -> f64 + Sync) -> (f64, f64) {
    let grid = linspace_step(lo, hi, coarse_step);
    let vals: Vec<f64> = grid.par_iter().map(|&r| objective(r)).collect();
    let (i, _) = vals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty grid");
    let a = grid[i.saturating_sub(1)];
    let b = grid[(i + 1).min(grid.len() - 1)];
    let (r, v) = golden_section(a, b, 1e-6, &objective);
    if v <= vals[i] {
        (r, v)
    } else {
        (grid[i], vals[i])
    }
}

pub const RADIUS_SEARCH: (f64, f64) = (0.5, 12.0);

/// Ring radius in `[0.5, 12]` minimizing κ.
pub fn optimal_radius(family: RingFamily, m_c: usize, n_cut: Option<usize>) -> Result<(f64, ConditionReport)> {
    let (r, _) = minimize_radius(RADIUS_SEARCH.0, RADIUS_SEARCH.1, 0.25, |r| {
        fock_condition(&ring_settings_cut(family, m_c, r, n_cut).expect("positive radius"), m_c).kappa
    });
    let report = fock_condition(&ring_settings_cut(family, m_c, r, n_cut)?, m_c);
    Ok((r, report))
}
