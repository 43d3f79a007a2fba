//! Incremental displacement selection for coherent / displaced-Fock bases:
//! add the κ-minimizing displacement, raise the cutoff once κ drops below a
//! threshold, and repeat until the target cutoff is reached.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gradient::{assemble, cluster_gradient, Spectrum};
use super::optimize::{settings_for, DesignReport};
use crate::error::{Error, Result};
use crate::sensing::{covariance_kappa, setting_covariance, BasisSpec, MeasurementSetting};
use crate::C64;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GreedyOptions {
    pub kappa_threshold: f64,
    /// Candidate grid points per axis.
    pub grid: usize,
    /// Extra half-width added to `max|α|` for the candidate square.
    pub margin: f64,
    pub refine_steps: usize,
    /// Maximum number of displacements before giving up.
    pub budget: usize,
}

impl Default for GreedyOptions {
    fn default() -> Self {
        GreedyOptions { kappa_threshold: 50.0, grid: 61, margin: 3.0, refine_steps: 20, budget: 40 }
    }
}

/// `κ(A)` (not `κ(C)`) for the current settings, `+∞` if incomplete.
fn kappa_a(c: &DMatrix<C64>) -> f64 {
    covariance_kappa(c).sqrt()
}

fn candidate_grid(alphas: &[C64], opts: &GreedyOptions) -> Vec<C64> {
    let half = alphas.iter().map(|a| a.norm()).fold(0.0, f64::max) + opts.margin;
    let n = opts.grid.max(2);
    let h = 2.0 * half / (n - 1) as f64;
    (0..n)
        .flat_map(|i| (0..n).map(move |j| C64::new(-half + i as f64 * h, -half + j as f64 * h)))
        .collect()
}

/// Gradient steps on the last displacement only, others fixed.
fn refine_last(betas: &mut Vec<C64>, basis: &BasisSpec, steps: usize) -> f64 {
    let eval = |b: &[C64]| {
        let (_, c) = assemble(&settings_for(b, basis), basis);
        Spectrum::of(&c).kappa()
    };
    let mut f = eval(betas);
    let mut t = 0.05;
    for _ in 0..steps {
        if !f.is_finite() {
            break;
        }
        let (tables, c) = assemble(&settings_for(betas, basis), basis);
        let g = *cluster_gradient(&tables, &Spectrum::of(&c)).last().unwrap();
        let g = C64::new(g.0, g.1);
        let gn = g.norm();
        if gn == 0.0 || !gn.is_finite() {
            break;
        }
        let mut step = t / gn * 4.0;
        let last = betas.len() - 1;
        let mut accepted = false;
        while step * gn > 1e-10 {
            let mut trial = betas.clone();
            trial[last] -= g * step;
            let ft = eval(&trial);
            if ft <= f - 1e-4 * step * gn * gn {
                *betas = trial;
                f = ft;
                t = step * gn;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    f.sqrt()
}

pub fn greedy_select(basis: &BasisSpec, m_c_target: usize, opts: GreedyOptions) -> Result<DesignReport> {
    let alphas = basis
        .alphas()
        .ok_or_else(|| Error::Config("greedy selection needs a coherent or displaced-Fock basis".into()))?
        .to_vec();
    basis.validate()?;
    if !(opts.kappa_threshold > 1.0) {
        return Err(Error::Config("kappa_threshold must exceed 1".into()));
    }
    let candidates = candidate_grid(&alphas, &opts);
    let mut m = 0;
    let mut betas: Vec<C64> = Vec::new();
    let mut history = Vec::new();
    loop {
        let b = basis.with_m_c(m);
        let settings = settings_for(&betas, &b);
        let d = b.dimension();
        let c_now = settings
            .par_iter()
            .map(|s| setting_covariance(s, &b))
            .reduce(|| DMatrix::zeros(d, d), |x, y| x + y);
        let k_now = if betas.is_empty() { f64::INFINITY } else { kappa_a(&c_now) };
        if k_now < opts.kappa_threshold {
            if m == m_c_target {
                return Ok(DesignReport::evaluate(settings, &b, history));
            }
            m += 1;
            continue;
        }
        let partial = |history: Vec<(usize, f64)>| Box::new(DesignReport::evaluate(settings_for(&betas, &b), &b, history));
        if betas.len() >= opts.budget {
            return Err(Error::BudgetExceeded { budget: opts.budget, reached_mc: m, partial: partial(history) });
        }
        let scored: Vec<(C64, f64)> = candidates
            .par_iter()
            .map(|&beta| {
                let s = MeasurementSetting::for_basis(beta, &b);
                (beta, kappa_a(&(&c_now + setting_covariance(&s, &b))))
            })
            .collect();
        let (best, k_best) = scored.into_iter().min_by(|x, y| x.1.total_cmp(&y.1)).unwrap();
        let mut trial = betas.clone();
        trial.push(best);
        let k_ref = if k_best.is_finite() { refine_last(&mut trial, &b, opts.refine_steps) } else { k_best };
        let k_new = k_ref.min(k_best);
        if k_ref > k_best {
            *trial.last_mut().unwrap() = best;
        }
        // Never accept a displacement that makes a finite κ worse.
        if k_now.is_finite() && k_new >= k_now {
            return Err(Error::BudgetExceeded { budget: opts.budget, reached_mc: m, partial: partial(history) });
        }
        betas = trial;
        history.push((betas.len(), k_new));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::{build_sensing, condition_number, Mode};

    fn cat2() -> BasisSpec {
        BasisSpec::coherent(vec![C64::new(2.0, 0.0), C64::new(-2.0, 0.0)]).unwrap()
    }

    #[test]
    fn one_displacement_suffices_at_m0() {
        let opts = GreedyOptions { grid: 21, ..Default::default() };
        let r = greedy_select(&cat2(), 0, opts).unwrap();
        assert_eq!(r.settings.len(), 1);
        assert!(r.condition.kappa.is_finite());
    }

    #[test]
    fn reaches_target_with_full_rank() {
        let opts = GreedyOptions { grid: 21, refine_steps: 5, ..Default::default() };
        let r = greedy_select(&cat2(), 1, opts).unwrap();
        assert_eq!(r.basis.m_c(), 1);
        let a = build_sensing(&r.settings, &r.basis, Mode::Qn).unwrap();
        assert_eq!(condition_number(&a).rank, r.basis.dimension());
        assert!(r.condition.kappa < 50.0);
    }

    #[test]
    fn fock_basis_rejected() {
        assert!(matches!(greedy_select(&BasisSpec::fock(1), 1, Default::default()), Err(Error::Config(_))));
    }
}
