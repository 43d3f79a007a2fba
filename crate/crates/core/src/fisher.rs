//! Fisher information of a single displaced counting setting for cat-state
//! coefficients, in the real chart `{ρ_ii, Re ρ_{i<j}, Im ρ_{i<j}}`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sensing::{amplitude_table, condition_number, default_ncut, build_sensing, BasisSpec, MeasurementSetting, Mode};
use crate::C64;

/// Bins with `f(n)` below this carry no usable information and are skipped.
pub const MIN_BIN_PROBABILITY: f64 = 1e-14;

/// Chart coordinate labels, in the order used by [`fisher_matrix`].
pub fn chart(p: usize) -> Vec<(usize, usize, bool)> {
    let mut out: Vec<(usize, usize, bool)> = (0..p).map(|i| (i, i, false)).collect();
    for i in 0..p {
        for j in i + 1..p {
            out.push((i, j, false));
        }
    }
    for i in 0..p {
        for j in i + 1..p {
            out.push((i, j, true));
        }
    }
    out
}

/// `f(n)` and `∂f(n)/∂x_k` for `n ≤ n_max`.
pub fn outcome_derivatives(
    rho: &DMatrix<C64>,
    alphas: &[C64],
    beta: C64,
    n_max: usize,
) -> (Vec<f64>, Vec<Vec<f64>>) {
    let kets: Vec<(C64, usize)> = alphas.iter().map(|&a| (a, 0)).collect();
    let u = amplitude_table(beta, &kets, n_max + 1);
    let coords = chart(alphas.len());
    (0..=n_max)
        .map(|n| {
            let z = |i: usize, j: usize| u[(n, i)] * u[(n, j)].conj();
            let f: f64 = (0..alphas.len())
                .flat_map(|i| (0..alphas.len()).map(move |j| (i, j)))
                .map(|(i, j)| (rho[(i, j)] * z(i, j)).re)
                .sum();
            let g = coords
                .iter()
                .map(|&(i, j, imag)| match (i == j, imag) {
                    (true, _) => z(i, i).re,
                    (false, false) => 2.0 * z(i, j).re,
                    (false, true) => -2.0 * z(i, j).im,
                })
                .collect();
            (f, g)
        })
        .unzip()
}

/// `I = Σ_n (1/f(n)) ∇f(n) ∇f(n)ᵀ`, `p² × p²`.
pub fn fisher_matrix(rho: &DMatrix<C64>, alphas: &[C64], beta: C64, n_max: usize) -> DMatrix<f64> {
    let d = alphas.len() * alphas.len();
    let (f, g) = outcome_derivatives(rho, alphas, beta, n_max);
    let mut info = DMatrix::<f64>::zeros(d, d);
    for (fn_, gn) in f.iter().zip(&g) {
        if *fn_ < MIN_BIN_PROBABILITY {
            continue;
        }
        for a in 0..d {
            for b in 0..d {
                info[(a, b)] += gn[a] * gn[b] / fn_;
            }
        }
    }
    info
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FisherMap {
    pub alphas: Vec<C64>,
    #[serde(with = "crate::io::complex_matrix")]
    pub state: DMatrix<C64>,
    pub grid: Vec<C64>,
    pub det_values: Vec<f64>,
}

impl FisherMap {
    pub fn to_csv(&self) -> String {
        crate::io::csv_string(
            &["beta_re", "beta_im", "det_fisher"],
            self.grid.iter().zip(&self.det_values).map(|(b, d)| vec![b.re, b.im, *d]),
        )
    }
}

/// `det I(β)` over `grid`, with `n_max` from the truncation rule at each β.
pub fn fisher_det_map(rho: &DMatrix<C64>, alphas: &[C64], grid: &[C64]) -> Result<FisherMap> {
    if grid.is_empty() {
        return Err(Error::Config("Fisher map needs a non-empty grid".into()));
    }
    let basis = BasisSpec::coherent(alphas.to_vec())?;
    let det_values = grid
        .par_iter()
        .map(|&beta| fisher_matrix(rho, alphas, beta, default_ncut(beta, &basis)).determinant())
        .collect();
    Ok(FisherMap { alphas: alphas.to_vec(), state: rho.clone(), grid: grid.to_vec(), det_values })
}

/// `κ` of the single-setting cat sensing map at each grid point.
pub fn single_setting_kappa_map(alphas: &[C64], grid: &[C64]) -> Result<Vec<f64>> {
    let basis = BasisSpec::coherent(alphas.to_vec())?;
    grid.par_iter()
        .map(|&beta| {
            let a = build_sensing(&[MeasurementSetting::for_basis(beta, &basis)], &basis, Mode::Qn)?;
            Ok(condition_number(&a).kappa)
        })
        .collect()
}

/// Square grid of `n × n` points over `[-h, h]²`, `x` outer.
pub fn square_grid(half_width: f64, n: usize) -> Vec<C64> {
    let step = 2.0 * half_width / (n.max(2) - 1) as f64;
    (0..n)
        .flat_map(|i| (0..n).map(move |j| C64::new(-half_width + i as f64 * step, -half_width + j as f64 * step)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statesim::cat_density;

    fn mixed_cat() -> (Vec<C64>, DMatrix<C64>) {
        let alphas = vec![C64::new(1.5, 0.0), C64::new(-1.5, 0.0)];
        let rho = cat_density(&alphas, &DMatrix::identity(2, 2)).unwrap();
        (alphas, rho.entries)
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let (alphas, rho) = mixed_cat();
        let beta = C64::new(0.4, 0.9);
        let (_, g) = outcome_derivatives(&rho, &alphas, beta, 20);
        let h = 1e-6;
        for (k, &(i, j, imag)) in chart(2).iter().enumerate() {
            let bump = |s: f64| {
                let mut r = rho.clone();
                let d = if imag { C64::new(0.0, s) } else { C64::new(s, 0.0) };
                r[(i, j)] += d;
                if i != j {
                    r[(j, i)] += d.conj();
                }
                outcome_derivatives(&r, &alphas, beta, 20).0
            };
            let (fp, fm) = (bump(h), bump(-h));
            for n in 0..=20 {
                let fd = (fp[n] - fm[n]) / (2.0 * h);
                assert!((fd - g[n][k]).abs() <= 1e-6 * g[n][k].abs().max(1e-8), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn psd_and_mirror_symmetric() {
        let (alphas, rho) = mixed_cat();
        for beta in [C64::new(0.3, 0.7), C64::new(-1.1, 0.2), C64::new(2.0, -1.4)] {
            let i = fisher_matrix(&rho, &alphas, beta, 40);
            assert!(i.clone().symmetric_eigenvalues().min() >= -1e-10);
            // the α's lie on the real axis: mirror β → β*
            let j = fisher_matrix(&rho, &alphas, beta.conj(), 40);
            let (a, b) = (i.determinant(), j.determinant());
            assert!((a - b).abs() <= 1e-8 * a.abs().max(1e-300));
        }
    }

    #[test]
    fn map_and_csv() {
        let (alphas, rho) = mixed_cat();
        let m = fisher_det_map(&rho, &alphas, &square_grid(2.0, 5)).unwrap();
        assert!(m.det_values.iter().all(|&d| d >= -1e-12));
        assert!(m.to_csv().starts_with("beta_re,beta_im,det_fisher\n"));
        assert!(fisher_det_map(&rho, &alphas, &[]).is_err());
    }
}
