use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::frame::Frame;
use crate::error::{Error, Result};
use crate::sensing::{amplitude_table, BasisSpec};
use crate::statesim::{hermitize, MeasurementRecord};
use crate::C64;

/// Predicted probabilities below this are floored before dividing.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ImleOutcome {
    /// Coefficient matrix over the reconstruction basis.
    #[serde(with = "crate::io::complex_matrix")]
    pub rho: DMatrix<C64>,
    pub iterations: usize,
    pub converged: bool,
    pub log_likelihood: Vec<f64>,
    /// `false` if the log-likelihood ever dropped by more than 1e−12.
    pub monotone: bool,
}

struct SettingPovm {
    weight: f64,
    /// Columns `v_n` with `Π_n = v_n v_n†` in the orthonormal frame.
    v: DMatrix<C64>,
    freqs: Vec<f64>,
    overflow: f64,
}

fn povms(record: &MeasurementRecord, basis: &BasisSpec, frame: &Frame) -> Vec<SettingPovm> {
    let kets = basis.kets::<f64>();
    let exact = record.settings.iter().any(|s| s.n_rep == 0);
    let total: f64 = record.settings.iter().map(|s| s.n_rep as f64).sum();
    record
        .settings
        .iter()
        .map(|s| {
            let w = amplitude_table(s.beta, &kets, s.n_c + 1);
            let v = frame.from_orthonormal_half(&w.transpose().map(|z| z.conj()));
            let weight = if exact { 1.0 / record.settings.len() as f64 } else { s.n_rep as f64 / total };
            SettingPovm { weight, v, freqs: s.frequencies(), overflow: s.overflow_frequency() }
        })
        .collect()
}

fn probabilities(p: &SettingPovm, sigma: &DMatrix<C64>) -> (Vec<f64>, f64) {
    let sv = sigma * &p.v;
    let probs: Vec<f64> = (0..p.v.ncols()).map(|n| p.v.column(n).dotc(&sv.column(n)).re).collect();
    let over = 1.0 - probs.iter().sum::<f64>();
    (probs, over)
}

fn log_likelihood(ps: &[SettingPovm], sigma: &DMatrix<C64>) -> f64 {
    ps.iter()
        .map(|p| {
            let (probs, over) = probabilities(p, sigma);
            let mut ll: f64 = p
                .freqs
                .iter()
                .zip(&probs)
                .filter(|(f, _)| **f > 0.0)
                .map(|(f, q)| f * q.max(PROBABILITY_FLOOR).ln())
                .sum();
            if p.overflow > 0.0 {
                ll += p.overflow * over.max(PROBABILITY_FLOOR).ln();
            }
            p.weight * ll
        })
        .sum()
}

/// `R(σ) = Σ_j w_j [Σ_n (f_jn/p_jn) Π_jn + (f_j,over/p_j,over)(1 − Σ_n Π_jn)]`.
fn r_operator(ps: &[SettingPovm], sigma: &DMatrix<C64>) -> DMatrix<C64> {
    let k = sigma.nrows();
    let eye = DMatrix::<C64>::identity(k, k);
    let mut r = DMatrix::<C64>::zeros(k, k);
    for p in ps {
        let (probs, over) = probabilities(p, sigma);
        let mut vs = p.v.clone();
        for (n, (f, q)) in p.freqs.iter().zip(&probs).enumerate() {
            vs.column_mut(n).scale_mut(f / q.max(PROBABILITY_FLOOR));
        }
        let c_over = p.overflow / over.max(PROBABILITY_FLOOR);
        let vv = &p.v * p.v.adjoint();
        r += (&vs * p.v.adjoint() + (&eye - vv) * C64::new(c_over, 0.0)) * C64::new(p.weight, 0.0);
    }
    r
}

/// Iterative maximum likelihood (`ρ ← N[R ρ R]`) over `basis`. Each setting
/// contributes its `n_c + 1` projectors plus the complementary overflow
/// element, so `R = 1` at a state reproducing the data exactly.
pub fn imle(record: &MeasurementRecord, basis: &BasisSpec, max_iters: usize, tol: f64) -> Result<ImleOutcome> {
    if record.settings.is_empty() {
        return Err(Error::InsufficientSettings { needed: 1, got: 0 });
    }
    let frame = Frame::new(basis);
    let ps = povms(record, basis, &frame);
    let k = basis.ket_count();
    let mut sigma = DMatrix::<C64>::identity(k, k) / C64::new(k as f64, 0.0);
    let mut ll = log_likelihood(&ps, &sigma);
    let mut history = vec![ll];
    let mut monotone = true;
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=max_iters {
        iterations = it;
        let r = r_operator(&ps, &sigma);
        let next = hermitize(&(&r * &sigma * &r));
        let tr = next.trace().re;
        sigma = next / C64::new(tr, 0.0);
        let ll_new = log_likelihood(&ps, &sigma);
        if ll_new < ll - 1e-12 {
            monotone = false;
        }
        let gain = ll_new - ll;
        ll = ll_new;
        history.push(ll);
        if gain.abs() < tol {
            converged = true;
            break;
        }
    }
    Ok(ImleOutcome { rho: frame.from_orthonormal(&sigma), iterations, converged, log_likelihood: history, monotone })
}
