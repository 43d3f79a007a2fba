//! Single-displacement diagnostics for cat-state bases.
//!
//! With one displacement β the coherent-basis sensing matrix is a Vandermonde
//! matrix in the nodes `z_ij = (α_i − β)(α_j − β)*`; it has full column rank
//! exactly when all `p²` nodes are distinct.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

/// `Σ_ij exp[(d_i − d_j)²/2]` with `d_i = |α_i − β|`.
pub fn cn_estimate_cat(alphas: &[Complex<f64>], beta: Complex<f64>) -> f64 {
    let d: Vec<f64> = alphas.iter().map(|a| (a - beta).norm()).collect();
    d.iter().flat_map(|di| d.iter().map(move |dj| ((di - dj).powi(2) / 2.0).exp())).sum()
}

#[derive(Clone, Copy, Debug)]
pub struct CatDiagnosticOptions {
    /// Relative tolerance for node coincidences.
    pub tol: f64,
    /// Flag (iv) fires when `max (d_i − d_j)²/2` exceeds this.
    pub suppression_threshold: f64,
}

impl Default for CatDiagnosticOptions {
    fn default() -> Self {
        Self { tol: 1e-9, suppression_threshold: 8.0 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CatDiagnostics {
    /// (i) β equidistant from two centres: `z_ii = z_jj`.
    pub on_bisector: bool,
    /// (ii) β collinear with two centres: `z_ij` real, so `z_ij = z_ji`.
    pub collinear: bool,
    /// (iii) any other coincidence `z_ij = z_kl`.
    pub coincidence: bool,
    /// (iv) some off-diagonal term is damped by more than `e^{−threshold}`.
    pub suppressed: bool,
    pub max_suppression_exponent: f64,
}

impl CatDiagnostics {
    /// True when one of the exact conditions (i)–(iii) makes the single-β
    /// map rank deficient.
    pub fn incomplete(&self) -> bool {
        self.on_bisector || self.collinear || self.coincidence
    }
}

pub fn cat_ic_diagnostics(alphas: &[Complex<f64>], beta: Complex<f64>, opts: CatDiagnosticOptions) -> CatDiagnostics {
    let p = alphas.len();
    let g: Vec<Complex<f64>> = alphas.iter().map(|a| a - beta).collect();
    let z: Vec<(usize, usize, Complex<f64>)> =
        (0..p).flat_map(|i| (0..p).map(move |j| (i, j))).map(|(i, j)| (i, j, g[i] * g[j].conj())).collect();
    let scale = z.iter().map(|t| t.2.norm()).fold(1.0, f64::max);
    let mut out = CatDiagnostics::default();
    for (x, &(i, j, zij)) in z.iter().enumerate() {
        for &(k, l, zkl) in &z[x + 1..] {
            if (zij - zkl).norm() > opts.tol * scale {
                continue;
            }
            if i == j && k == l {
                out.on_bisector = true;
            } else if i == l && j == k {
                out.collinear = true;
            } else {
                out.coincidence = true;
            }
        }
    }
    // β coinciding with a centre makes the whole row of nodes vanish; the
    // loop above already reports it as a coincidence.
    let d: Vec<f64> = g.iter().map(|x| x.norm()).collect();
    let mut worst = 0.0f64;
    for i in 0..p {
        for j in 0..p {
            worst = worst.max((d[i] - d[j]).powi(2) / 2.0);
        }
    }
    out.max_suppression_exponent = worst;
    out.suppressed = worst > opts.suppression_threshold;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::{build_sensing, condition_number, default_ncut, BasisSpec, MeasurementSetting, Mode};

    type C = Complex<f64>;

    fn single_beta_report(alphas: &[C], beta: C) -> crate::sensing::ConditionReport {
        let basis = BasisSpec::coherent(alphas.to_vec()).unwrap();
        let s = MeasurementSetting::new(beta, default_ncut(beta, &basis));
        condition_number(&build_sensing(&[s], &basis, Mode::Qn).unwrap())
    }

    #[test]
    fn equidistant_estimate_is_p_squared() {
        let alphas: Vec<C> = (0..3).map(|j| C::from_polar(2.0, 2.0 * std::f64::consts::PI * j as f64 / 3.0)).collect();
        assert!((cn_estimate_cat(&alphas, C::new(0.0, 0.0)) - 9.0).abs() < 1e-12);
    }

    #[test]
    fn two_component_estimate() {
        // d1 = 3, d2 = 1
        let alphas = [C::new(3.0, 0.0), C::new(0.0, 1.0)];
        let v = cn_estimate_cat(&alphas, C::new(0.0, 0.0));
        assert!((v - (2.0 + 2.0 * 2f64.exp())).abs() < 1e-12);
        assert!((v - 16.778).abs() < 1e-3);
    }

    #[test]
    fn bisector_is_rank_deficient() {
        let alphas = [C::new(2.0, 0.0), C::new(-2.0, 0.0)];
        let beta = C::new(0.0, 0.7);
        let d = cat_ic_diagnostics(&alphas, beta, Default::default());
        assert!(d.on_bisector && !d.collinear);
        let r = single_beta_report(&alphas, beta);
        assert!(r.sigma_min < 1e-10 * r.sigma_max);
    }

    #[test]
    fn collinear_flag() {
        let alphas = [C::new(2.0, 0.0), C::new(-2.0, 0.0)];
        let d = cat_ic_diagnostics(&alphas, C::new(0.5, 0.0), Default::default());
        assert!(d.collinear && !d.on_bisector);
    }

    #[test]
    fn generic_beta_is_complete() {
        let alphas = [C::new(2.0, 0.0), C::new(-2.0, 0.0)];
        let beta = C::new(0.4, 0.6);
        let d = cat_ic_diagnostics(&alphas, beta, Default::default());
        assert!(!d.incomplete() && !d.suppressed);
        assert_eq!(single_beta_report(&alphas, beta).rank, 4);
    }

    #[test]
    fn suppression_threshold() {
        let alphas = [C::new(5.0, 0.0), C::new(-5.0, 0.0)];
        let d = cat_ic_diagnostics(&alphas, C::new(4.5, 0.3), Default::default());
        assert!(d.suppressed);
        assert!(d.max_suppression_exponent > 8.0);
    }
}
