//! Locating the coherent components of a cat-like state from a few
//! displaced counting settings: iMLE in a truncated Fock space, Husimi map,
//! isolated peaks.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::imle::imle;
use super::linear::fit_physical;
use crate::error::{Error, Result};
use crate::sensing::{build_sensing, BasisSpec, Mode};
use crate::statesim::{DensityMatrix, MeasurementRecord};
use crate::C64;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TrilaterationOptions {
    /// Peaks below this fraction of the global maximum are ignored.
    pub threshold: f64,
    pub grid: usize,
    /// Map half-width is `max|β| + margin`.
    pub margin: f64,
    pub imle_iters: usize,
    pub imle_tol: f64,
    /// A component must have both principal curvatures of `ln Q` below this
    /// (a coherent state has −2 in every direction).
    pub max_curvature: f64,
}

impl Default for TrilaterationOptions {
    fn default() -> Self {
        TrilaterationOptions {
            threshold: 0.1,
            grid: 81,
            margin: 4.0,
            imle_iters: 500,
            imle_tol: 1e-10,
            max_curvature: -1.0,
        }
    }
}

/// Fock cutoff from the data: `√⟨n⟩ ≤ √n̄_j + |β_j|` for every setting, so
/// the smallest right-hand side bounds the state's extent.
pub fn data_cutoff(record: &MeasurementRecord) -> usize {
    let r = record
        .settings
        .iter()
        .map(|s| {
            let f = s.frequencies();
            let nbar: f64 =
                f.iter().enumerate().map(|(n, p)| n as f64 * p).sum::<f64>() + (s.n_c + 1) as f64 * s.overflow_frequency();
            nbar.sqrt() + s.beta.norm()
        })
        .fold(f64::INFINITY, f64::min);
    let mu = r * r;
    (mu + 6.0 * mu.sqrt() + 10.0).ceil() as usize
}

/// `Q(γ) = ⟨γ|ρ|γ⟩/π` for a Fock-basis density matrix.
pub fn husimi(rho: &DMatrix<C64>, gamma: C64) -> f64 {
    let d = rho.nrows();
    let mut c = DVector::<C64>::zeros(d);
    c[0] = C64::new((-0.5 * gamma.norm_sqr()).exp(), 0.0);
    for n in 1..d {
        c[n] = c[n - 1] * gamma / (n as f64).sqrt();
    }
    (c.dotc(&(rho * &c))).re / std::f64::consts::PI
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HusimiMap {
    pub half_width: f64,
    pub grid: usize,
    /// `values[i][j]` at `γ = (x_i, y_j)`.
    pub values: Vec<Vec<f64>>,
}

impl HusimiMap {
    pub fn new(rho: &DMatrix<C64>, half_width: f64, grid: usize) -> Self {
        let values = (0..grid).into_par_iter().map(|i| (0..grid).map(|j| husimi(rho, Self::at(half_width, grid, i, j))).collect()).collect();
        HusimiMap { half_width, grid, values }
    }

    fn at(half_width: f64, grid: usize, i: usize, j: usize) -> C64 {
        let h = 2.0 * half_width / (grid - 1) as f64;
        C64::new(-half_width + i as f64 * h, -half_width + j as f64 * h)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.grid - 1) as f64
    }

    /// Local maxima `(γ, height, isolated)` above `threshold · max`, refined by a
    /// quadratic fit of `ln Q` on the surrounding 3×3 cells, highest first.
    pub fn peaks(&self, threshold: f64, max_curvature: f64) -> Vec<(C64, f64, bool)> {
        let q = &self.values;
        let n = self.grid;
        let top = q.iter().flatten().cloned().fold(0.0, f64::max);
        let h = self.spacing();
        let mut out = Vec::new();
        for i in 1..n - 1 {
            for j in 1..n - 1 {
                let v = q[i][j];
                if v < threshold * top || v <= 0.0 {
                    continue;
                }
                let neighbours = (i - 1..=i + 1).flat_map(|a| (j - 1..=j + 1).map(move |b| (a, b)));
                if neighbours.clone().any(|(a, b)| (a, b) != (i, j) && q[a][b] > v) {
                    continue;
                }
                // plateaus: keep only the first cell
                if neighbours.clone().any(|(a, b)| (a, b) < (i, j) && q[a][b] == v) {
                    continue;
                }
                let l = |a: usize, b: usize| q[a][b].max(1e-300).ln();
                let gx = (l(i + 1, j) - l(i - 1, j)) / (2.0 * h);
                let gy = (l(i, j + 1) - l(i, j - 1)) / (2.0 * h);
                let hxx = (l(i + 1, j) - 2.0 * l(i, j) + l(i - 1, j)) / (h * h);
                let hyy = (l(i, j + 1) - 2.0 * l(i, j) + l(i, j - 1)) / (h * h);
                let hxy = (l(i + 1, j + 1) - l(i + 1, j - 1) - l(i - 1, j + 1) + l(i - 1, j - 1)) / (4.0 * h * h);
                let hess = Matrix2::new(hxx, hxy, hxy, hyy);
                let eig = hess.symmetric_eigenvalues();
                let isolated = eig.max() < max_curvature;
                let mut gamma = Self::at(self.half_width, n, i, j);
                if isolated {
                    if let Some(inv) = hess.try_inverse() {
                        let d = -(inv * Vector2::new(gx, gy));
                        if d.norm() <= h {
                            gamma += C64::new(d.x, d.y);
                        }
                    }
                }
                out.push((gamma, v, isolated));
            }
        }
        out.sort_by(|a, b| b.1.total_cmp(&a.1));
        out
    }
}

/// Estimated component locations, at most `p_max`.
pub fn trilaterate_alphas(record: &MeasurementRecord, p_max: usize, opts: TrilaterationOptions) -> Result<Vec<C64>> {
    if record.settings.len() < 3 {
        return Err(Error::InsufficientSettings { needed: 3, got: record.settings.len() });
    }
    let (_, map) = husimi_estimate(record, opts)?;
    let peaks = map.peaks(opts.threshold, opts.max_curvature);
    let isolated: Vec<C64> = peaks.iter().filter(|p| p.2).map(|p| p.0).take(p_max).collect();
    if isolated.is_empty() {
        return Err(Error::NotACat(format!(
            "{} local maxima in the Husimi map, none an isolated coherent-like peak",
            peaks.len()
        )));
    }
    Ok(isolated)
}

/// iMLE state in the data-driven Fock cutoff and its Husimi map.
pub fn husimi_estimate(record: &MeasurementRecord, opts: TrilaterationOptions) -> Result<(DMatrix<C64>, HusimiMap)> {
    let fock = BasisSpec::fock(data_cutoff(record));
    let rho = imle(record, &fock, opts.imle_iters, opts.imle_tol)?.rho;
    let half = record.settings.iter().map(|s| s.beta.norm()).fold(0.0, f64::max) + opts.margin;
    let map = HusimiMap::new(&rho, half, opts.grid.max(3));
    Ok((rho, map))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CatEstimate {
    pub alphas: Vec<C64>,
    pub rho: DensityMatrix,
    pub residual: f64,
}

/// Component locations by trilateration, then a physical fit of the
/// coefficient matrix over the estimated coherent basis.
pub fn cat_pipeline(record: &MeasurementRecord, p_max: usize, opts: TrilaterationOptions) -> Result<CatEstimate> {
    let alphas = trilaterate_alphas(record, p_max, opts)?;
    let basis = BasisSpec::coherent(alphas.clone())?;
    let a = build_sensing(&record.measurement_settings(), &basis, Mode::Qn)?;
    let b = record.stacked_frequencies();
    let fit = fit_physical(&a, &b, 20_000, 1e-12)?;
    Ok(CatEstimate { alphas, rho: DensityMatrix { basis, entries: fit.rho }, residual: fit.objective.sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::MeasurementSetting;
    use crate::statesim::{cat_pure, simulate_record};

    #[test]
    fn coherent_state_peak() {
        let alpha = C64::new(1.7, -1.1);
        let rho = cat_pure(&[alpha], &[C64::new(1.0, 0.0)]).unwrap();
        let settings: Vec<_> = [C64::new(0.5, 0.5), C64::new(-1.0, 0.2), C64::new(0.3, -1.4)]
            .iter()
            .map(|&b| MeasurementSetting::for_basis(b, &rho.basis))
            .collect();
        let rec = simulate_record(&rho, &settings, 0, 0).unwrap();
        let est = trilaterate_alphas(&rec, 2, Default::default()).unwrap();
        assert_eq!(est.len(), 1);
        assert!((est[0] - alpha).norm() < 0.05, "{:?}", est);
    }

    #[test]
    fn fock_state_is_not_a_cat() {
        let mut rho = DMatrix::<C64>::zeros(4, 4);
        rho[(3, 3)] = C64::new(1.0, 0.0);
        let rho = DensityMatrix::fock(rho);
        let settings: Vec<_> = [C64::new(0.5, 0.5), C64::new(-1.0, 0.2), C64::new(0.3, -1.4), C64::new(1.2, 0.0)]
            .iter()
            .map(|&b| MeasurementSetting::for_basis(b, &rho.basis))
            .collect();
        let rec = simulate_record(&rho, &settings, 0, 0).unwrap();
        assert!(matches!(trilaterate_alphas(&rec, 4, Default::default()), Err(Error::NotACat(_))));
    }

    #[test]
    fn needs_three_settings() {
        let rho = cat_pure(&[C64::new(1.0, 0.0)], &[C64::new(1.0, 0.0)]).unwrap();
        let s = MeasurementSetting::for_basis(C64::new(0.5, 0.0), &rho.basis);
        let rec = simulate_record(&rho, &[s, s], 0, 0).unwrap();
        assert!(matches!(
            trilaterate_alphas(&rec, 1, Default::default()),
            Err(Error::InsufficientSettings { needed: 3, got: 2 })
        ));
    }
}
