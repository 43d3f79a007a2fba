use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ring::{golden_section, ring_settings_cut, RingFamily};
use crate::error::{Error, Result};
use crate::sensing::{covariance_kappa, covariance_of_settings, BasisSpec};
use crate::C64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MfrcComparison {
    pub m_c: usize,
    pub single_radius: f64,
    /// `κ(A)` of the best single full ring.
    pub best_single: f64,
    pub double_radii: (f64, f64),
    /// `κ(A)` of the best pair of concentric full rings.
    pub best_double: f64,
    /// `1 − κ_double/κ_single`.
    pub improvement_kappa: f64,
    /// `1 − κ²_double/κ²_single`.
    pub improvement_kappa2: f64,
}

fn ring_cov(m_c: usize, r: f64, n_cut: Option<usize>) -> DMatrix<C64> {
    let basis = BasisSpec::fock(m_c);
    covariance_of_settings(&ring_settings_cut(RingFamily::Frc, m_c, r, n_cut).expect("positive radius"), &basis).c
}

/// Compares `min_r κ(C_r)` with `min_{r1,r2} κ(C_{r1} + C_{r2})` over a
/// radius grid, refining the best grid points by golden-section search.
pub fn mfrc_compare(m_c: usize, radii: &[f64], n_cut: Option<usize>) -> Result<MfrcComparison> {
    if m_c == 0 {
        return Err(Error::Config("multi-ring comparison needs m_c ≥ 1".into()));
    }
    if radii.len() < 2 || radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] <= 0.0 {
        return Err(Error::Config("radius grid must be positive, increasing, with ≥ 2 points".into()));
    }
    let cs: Vec<DMatrix<C64>> = radii.par_iter().map(|&r| ring_cov(m_c, r, n_cut)).collect();
    let k1: Vec<f64> = cs.iter().map(covariance_kappa).collect();
    let i = argmin(&k1);
    let bracket = |i: usize| (radii[i.saturating_sub(1)], radii[(i + 1).min(radii.len() - 1)]);
    let (a, b) = bracket(i);
    let (mut r_single, mut k_single) = golden_section(a, b, 1e-7, |r| covariance_kappa(&ring_cov(m_c, r, n_cut)));
    if k1[i] < k_single {
        r_single = radii[i];
        k_single = k1[i];
    }

    let pairs: Vec<(usize, usize, f64)> = (0..radii.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let cs = &cs;
            (i..radii.len()).map(move |j| (i, j, covariance_kappa(&(&cs[i] + &cs[j]))))
        })
        .collect();
    let &(pi, pj, pk) = pairs.iter().min_by(|x, y| x.2.total_cmp(&y.2)).expect("non-empty grid");
    // Alternating golden-section refinement of each radius within its cell.
    let (mut r1, mut r2, mut kd) = (radii[pi], radii[pj], pk);
    let (b1, b2) = (bracket(pi), bracket(pj));
    for _ in 0..4 {
        let c2 = ring_cov(m_c, r2, n_cut);
        let (x, v) = golden_section(b1.0, b1.1, 1e-7, |r| covariance_kappa(&(ring_cov(m_c, r, n_cut) + &c2)));
        if v < kd {
            r1 = x;
            kd = v;
        }
        let c1 = ring_cov(m_c, r1, n_cut);
        let (x, v) = golden_section(b2.0, b2.1, 1e-7, |r| covariance_kappa(&(ring_cov(m_c, r, n_cut) + &c1)));
        if v < kd {
            r2 = x;
            kd = v;
        }
    }
    // Two copies of the best single ring are a valid double ring.
    if k_single < kd {
        kd = k_single;
        r1 = r_single;
        r2 = r_single;
    }
    let (ks, kdd) = (k_single.sqrt(), kd.sqrt());
    Ok(MfrcComparison {
        m_c,
        single_radius: r_single,
        best_single: ks,
        double_radii: (r1.min(r2), r1.max(r2)),
        best_double: kdd,
        improvement_kappa: 1.0 - kdd / ks,
        improvement_kappa2: 1.0 - kd / k_single,
    })
}

fn argmin(v: &[f64]) -> usize {
    v.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap_or(0)
}
