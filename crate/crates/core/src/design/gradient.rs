//! Gradient of `κ(C) = λ_max/λ_min` with respect to the displacements.
//!
//! First-order perturbation theory gives `∂λ_k = v_k†(B†A + A†B)v_k
//! = 2 Re⟨A v_k, B v_k⟩` with `B = ∂A/∂(Re β_i)` or `∂A/∂(Im β_i)`; only the
//! rows of setting `i` depend on `β_i`.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{amplitude_gradient, composition_phase, displacement_element};
use crate::sensing::{unvectorize, BasisSpec, MeasurementSetting};
use crate::C64;

/// Relative gap below which an extreme eigenvalue counts as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-8;
/// Relative spread used to collect an eigenvalue cluster.
const CLUSTER_TOL: f64 = 1e-6;

/// Amplitudes `u[(n, a)] = ⟨n|D(−β)|ket_a⟩` and their `Re β`, `Im β`
/// derivatives for one setting.
pub(crate) struct SettingTables {
    pub u: DMatrix<C64>,
    pub du_re: DMatrix<C64>,
    pub du_im: DMatrix<C64>,
}

pub(crate) fn setting_tables(s: &MeasurementSetting<f64>, basis: &BasisSpec) -> SettingTables {
    let kets = basis.kets::<f64>();
    let rows = s.n_c + 1;
    let mut u = DMatrix::zeros(rows, kets.len());
    let mut du_re = DMatrix::zeros(rows, kets.len());
    let mut du_im = DMatrix::zeros(rows, kets.len());
    for (a, &(alpha, m)) in kets.iter().enumerate() {
        let gamma = alpha - s.beta;
        let d: Vec<C64> = (0..=rows).map(|n| displacement_element(n, m, gamma)).collect();
        let phase = composition_phase(s.beta, alpha);
        for n in 0..rows {
            u[(n, a)] = phase * d[n];
            let prev = if n == 0 { C64::new(0.0, 0.0) } else { d[n - 1] };
            let (gr, gi) = amplitude_gradient(n, s.beta, alpha, prev, d[n], d[n + 1]);
            du_re[(n, a)] = gr;
            du_im[(n, a)] = gi;
        }
    }
    SettingTables { u, du_re, du_im }
}

/// Gram matrix `A_β†A_β` from the amplitude table.
pub(crate) fn tables_covariance(t: &SettingTables) -> DMatrix<C64> {
    let k = t.u.ncols();
    let mut c = DMatrix::zeros(k * k, k * k);
    for n in 0..t.u.nrows() {
        let row = DMatrix::from_fn(1, k * k, |_, col| t.u[(n, col / k)] * t.u[(n, col % k)].conj());
        c += row.ad_mul(&row);
    }
    c
}

/// `(A v)_n` and `(∂A v)_n` for one setting, with `v` reshaped to `V`.
fn apply_pair(u: &DMatrix<C64>, du: &DMatrix<C64>, v: &DMatrix<C64>) -> (Vec<C64>, Vec<C64>) {
    let m = u * v;
    let dm = du * v;
    let rows = u.nrows();
    let mut av = vec![C64::new(0.0, 0.0); rows];
    let mut bv = vec![C64::new(0.0, 0.0); rows];
    for n in 0..rows {
        for b in 0..u.ncols() {
            av[n] += m[(n, b)] * u[(n, b)].conj();
            bv[n] += dm[(n, b)] * u[(n, b)].conj() + m[(n, b)] * du[(n, b)].conj();
        }
    }
    (av, bv)
}

/// `v_p† ∂C v_q` restricted to one setting's rows, for direction table `du`.
fn projected_derivative(u: &DMatrix<C64>, du: &DMatrix<C64>, vecs: &[DMatrix<C64>]) -> DMatrix<C64> {
    let pairs: Vec<_> = vecs.iter().map(|v| apply_pair(u, du, v)).collect();
    let q = vecs.len();
    DMatrix::from_fn(q, q, |p, r| {
        let (ap, bp) = &pairs[p];
        let (ar, br) = &pairs[r];
        (0..ap.len()).map(|n| ap[n].conj() * br[n] + bp[n].conj() * ar[n]).sum()
    })
}

/// Eigen-decomposition of `C` sorted ascending.
pub(crate) struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: Vec<DMatrix<C64>>,
}

impl Spectrum {
    pub fn of(c: &DMatrix<C64>) -> Spectrum {
        let eig = SymmetricEigen::new(c.clone());
        let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = idx.iter().map(|&i| unvectorize(&eig.eigenvectors.column(i).into_owned())).collect();
        Spectrum { values, vectors }
    }

    pub fn kappa(&self) -> f64 {
        let lo = self.values[0];
        let hi = *self.values.last().unwrap();
        if lo <= 1e-20 * hi {
            f64::INFINITY
        } else {
            hi / lo
        }
    }

    /// Relative gaps `(λ_max − λ_{max−1})/λ_max` and `(λ_{min+1} − λ_min)/λ_min`.
    pub fn extreme_gaps(&self) -> (f64, f64) {
        let n = self.values.len();
        if n < 2 {
            return (f64::INFINITY, f64::INFINITY);
        }
        let top = (self.values[n - 1] - self.values[n - 2]) / self.values[n - 1].abs();
        let bottom = (self.values[1] - self.values[0]) / self.values[0].abs();
        (top, bottom)
    }

    fn bottom_cluster(&self) -> Vec<usize> {
        let l0 = self.values[0];
        (0..self.values.len()).take_while(|&i| self.values[i] - l0 <= CLUSTER_TOL * l0.abs()).collect()
    }

    fn top_cluster(&self) -> Vec<usize> {
        let n = self.values.len();
        let l = self.values[n - 1];
        (0..n).rev().take_while(|&i| l - self.values[i] <= CLUSTER_TOL * l.abs()).collect()
    }
}

/// `C = Σ A_j†A_j` and per-setting tables.
pub(crate) fn assemble(settings: &[MeasurementSetting<f64>], basis: &BasisSpec) -> (Vec<SettingTables>, DMatrix<C64>) {
    let tables: Vec<SettingTables> = settings.par_iter().map(|s| setting_tables(s, basis)).collect();
    let d = basis.dimension();
    let c = tables
        .par_iter()
        .map(tables_covariance)
        .reduce(|| DMatrix::zeros(d, d), |a, b| a + b);
    (tables, c)
}

fn kappa_derivative(lmax: f64, lmin: f64, dmax: f64, dmin: f64) -> f64 {
    (dmax * lmin - lmax * dmin) / (lmin * lmin)
}

/// Gradient `(∂κ/∂Re β_i, ∂κ/∂Im β_i)` of `κ(C)`, with every `n_c` held
/// fixed at the value carried by its setting.
pub fn cn_gradient(settings: &[MeasurementSetting<f64>], basis: &BasisSpec) -> Result<Vec<(f64, f64)>> {
    let (tables, c) = assemble(settings, basis);
    let spec = Spectrum::of(&c);
    let (top, bottom) = spec.extreme_gaps();
    if top < DEGENERACY_GAP || bottom < DEGENERACY_GAP {
        return Err(Error::DegenerateSpectrum { gap: top.min(bottom) });
    }
    Ok(gradient_from(&tables, &spec, &[0], &[spec.values.len() - 1]))
}

/// Gradient of `mean(top cluster)/mean(bottom cluster)`: the exact gradient
/// when the extremes are simple, and a sub-gradient surrogate when they are
/// not.
pub(crate) fn cluster_gradient(tables: &[SettingTables], spec: &Spectrum) -> Vec<(f64, f64)> {
    gradient_from(tables, spec, &spec.bottom_cluster(), &spec.top_cluster())
}

fn gradient_from(tables: &[SettingTables], spec: &Spectrum, bottom: &[usize], top: &[usize]) -> Vec<(f64, f64)> {
    let mean = |ix: &[usize]| ix.iter().map(|&i| spec.values[i]).sum::<f64>() / ix.len() as f64;
    let (lmin, lmax) = (mean(bottom), mean(top));
    let vb: Vec<_> = bottom.iter().map(|&i| spec.vectors[i].clone()).collect();
    let vt: Vec<_> = top.iter().map(|&i| spec.vectors[i].clone()).collect();
    let tr = |m: DMatrix<C64>| m.trace().re / m.nrows() as f64;
    tables
        .par_iter()
        .map(|t| {
            let d_re = kappa_derivative(
                lmax,
                lmin,
                tr(projected_derivative(&t.u, &t.du_re, &vt)),
                tr(projected_derivative(&t.u, &t.du_re, &vb)),
            );
            let d_im = kappa_derivative(
                lmax,
                lmin,
                tr(projected_derivative(&t.u, &t.du_im, &vt)),
                tr(projected_derivative(&t.u, &t.du_im, &vb)),
            );
            (d_re, d_im)
        })
        .collect()
}

/// One-sided directional derivative of `κ(C)` along `direction` (one complex
/// step per setting). Valid at degenerate extremes: the derivative of the
/// largest (smallest) eigenvalue of a cluster is the largest (smallest)
/// eigenvalue of `∂C` projected onto the cluster.
pub fn cn_directional_derivative(
    settings: &[MeasurementSetting<f64>],
    basis: &BasisSpec,
    direction: &[C64],
) -> Result<f64> {
    if direction.len() != settings.len() {
        return Err(Error::Config("direction needs one entry per setting".into()));
    }
    let (tables, c) = assemble(settings, basis);
    let spec = Spectrum::of(&c);
    let vb: Vec<_> = spec.bottom_cluster().iter().map(|&i| spec.vectors[i].clone()).collect();
    let vt: Vec<_> = spec.top_cluster().iter().map(|&i| spec.vectors[i].clone()).collect();
    let mut pt = DMatrix::<C64>::zeros(vt.len(), vt.len());
    let mut pb = DMatrix::<C64>::zeros(vb.len(), vb.len());
    for (t, dir) in tables.iter().zip(direction) {
        let du = &t.du_re * C64::new(dir.re, 0.0) + &t.du_im * C64::new(dir.im, 0.0);
        pt += projected_derivative(&t.u, &du, &vt);
        pb += projected_derivative(&t.u, &du, &vb);
    }
    let dmax = pt.symmetric_eigenvalues().max();
    let dmin = pb.symmetric_eigenvalues().min();
    let lmin = spec.values[0];
    let lmax = *spec.values.last().unwrap();
    Ok(kappa_derivative(lmax, lmin, dmax, dmin))
}

/// `κ(C)` of a setting list.
pub fn covariance_condition(settings: &[MeasurementSetting<f64>], basis: &BasisSpec) -> f64 {
    let (_, c) = assemble(settings, basis);
    Spectrum::of(&c).kappa()
}
