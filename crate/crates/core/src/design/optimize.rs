use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gradient::{assemble, cluster_gradient, Spectrum, DEGENERACY_GAP};
use crate::error::{Error, Result};
use crate::sensing::{condition_from_covariance, BasisSpec, ConditionReport, MeasurementSetting};
use crate::C64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub settings: Vec<MeasurementSetting<f64>>,
    pub condition: ConditionReport,
    pub basis: BasisSpec,
    /// `(iteration, κ(A))` after every accepted step.
    pub history: Vec<(usize, f64)>,
}

impl DesignReport {
    pub fn evaluate(settings: Vec<MeasurementSetting<f64>>, basis: &BasisSpec, history: Vec<(usize, f64)>) -> Self {
        let (_, c) = assemble(&settings, basis);
        let condition = condition_from_covariance(&c, settings.len());
        DesignReport { settings, condition, basis: basis.clone(), history }
    }

    pub fn betas(&self) -> Vec<C64> {
        self.settings.iter().map(|s| s.beta).collect()
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct OptimizeOptions {
    pub max_iters: usize,
    /// Stop once the relative κ improvement of an accepted step drops below this.
    pub tol: f64,
    pub armijo: f64,
    pub shrink: f64,
    /// Seed of the jitter applied when the extreme eigenvalues are degenerate.
    pub seed: u64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions { max_iters: 500, tol: 1e-6, armijo: 1e-4, shrink: 0.5, seed: 0 }
    }
}

/// Settings with `n_c` following the truncation rule.
pub fn settings_for(betas: &[C64], basis: &BasisSpec) -> Vec<MeasurementSetting<f64>> {
    betas.iter().map(|&b| MeasurementSetting::for_basis(b, basis)).collect()
}

fn kappa_c(betas: &[C64], basis: &BasisSpec) -> f64 {
    let (_, c) = assemble(&settings_for(betas, basis), basis);
    Spectrum::of(&c).kappa()
}

/// Descent direction at `betas`: the exact gradient of κ(C), or at a
/// degenerate spectrum the gradient after a small jitter, or failing that the
/// cluster-averaged sub-gradient.
fn descent_gradient(betas: &[C64], basis: &BasisSpec, rng: &mut ChaCha8Rng) -> Vec<C64> {
    let grad_at = |b: &[C64]| {
        let settings = settings_for(b, basis);
        let (tables, c) = assemble(&settings, basis);
        let spec = Spectrum::of(&c);
        let (top, bottom) = spec.extreme_gaps();
        let simple = top >= DEGENERACY_GAP && bottom >= DEGENERACY_GAP;
        (simple, cluster_gradient(&tables, &spec))
    };
    let to_c = |g: Vec<(f64, f64)>| g.into_iter().map(|(r, i)| C64::new(r, i)).collect();
    let (simple, g) = grad_at(betas);
    if simple {
        return to_c(g);
    }
    let jittered: Vec<C64> = betas
        .iter()
        .map(|b| b + C64::new(rng.random_range(-1e-7..1e-7), rng.random_range(-1e-7..1e-7)))
        .collect();
    let (simple_j, gj) = grad_at(&jittered);
    if simple_j {
        to_c(gj)
    } else {
        to_c(g)
    }
}

/// Steepest descent on `κ(C)` with Armijo backtracking.
pub fn optimize_settings(initial: &[C64], basis: &BasisSpec, opts: OptimizeOptions) -> Result<DesignReport> {
    if initial.is_empty() {
        return Err(Error::Config("optimizer needs at least one initial displacement".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x = initial.to_vec();
    let mut f = kappa_c(&x, basis);
    if !f.is_finite() {
        return Err(Error::Optimizer("initial configuration is informationally incomplete".into()));
    }
    let mut history = vec![(0, f.sqrt())];
    let scale = x.iter().map(|b| b.norm()).fold(1.0, f64::max);
    let mut step: Option<f64> = None;
    for it in 1..=opts.max_iters {
        let g = descent_gradient(&x, basis, &mut rng);
        let gnorm2: f64 = g.iter().map(|z| z.norm_sqr()).sum();
        if gnorm2 == 0.0 || !gnorm2.is_finite() {
            break;
        }
        let mut t = step.map_or(0.05 * scale / gnorm2.sqrt(), |s| 2.0 * s);
        let mut accepted = None;
        while t * gnorm2.sqrt() > 1e-13 * scale {
            let trial: Vec<C64> = x.iter().zip(&g).map(|(b, d)| b - d * t).collect();
            let ft = kappa_c(&trial, basis);
            if ft <= f - opts.armijo * t * gnorm2 {
                accepted = Some((trial, ft));
                break;
            }
            t *= opts.shrink;
        }
        let Some((xn, fnew)) = accepted else { break };
        let rel = (f - fnew) / f;
        x = xn;
        f = fnew;
        step = Some(t);
        history.push((it, f.sqrt()));
        if rel < opts.tol {
            break;
        }
    }
    Ok(DesignReport::evaluate(settings_for(&x, basis), basis, history))
}

/// `n` random displacements with modulus in `[r_lo, r_hi]` and uniform phase.
pub fn random_betas(n: usize, r_lo: f64, r_hi: f64, rng: &mut impl Rng) -> Vec<C64> {
    (0..n)
        .map(|_| C64::from_polar(rng.random_range(r_lo..=r_hi), rng.random_range(0.0..std::f64::consts::TAU)))
        .collect()
}

/// Best of `starts` optimizations from random initializations.
pub fn optimize_multistart(
    n_settings: usize,
    basis: &BasisSpec,
    starts: usize,
    seed: u64,
    opts: OptimizeOptions,
) -> Result<DesignReport> {
    let runs: Vec<Result<DesignReport>> = (0..starts)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let init = random_betas(n_settings, 1.0, 3.0, &mut rng);
            optimize_settings(&init, basis, OptimizeOptions { seed: seed ^ k as u64, ..opts })
        })
        .collect();
    runs.into_iter()
        .filter_map(|r| r.ok())
        .min_by(|a, b| a.condition.kappa.total_cmp(&b.condition.kappa))
        .ok_or_else(|| Error::Optimizer("no initialization reached a finite condition number".into()))
}
