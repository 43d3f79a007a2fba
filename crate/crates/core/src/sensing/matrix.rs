use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis::{BasisSpec, MeasurementSetting};
use crate::error::{Error, Result};
use crate::numerics::displaced_amplitude;
use crate::scalar::{complex_to_f64, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Full excitation-count histogram, `n_c + 1` rows per setting.
    Qn,
    /// `Q_0` only.
    Husimi,
    /// Parity `Σ (−1)^n Q_n`, one row per setting.
    Wigner,
    /// Quadrature densities; only available through [`super::homodyne_row`].
    Homodyne,
}

impl Mode {
    pub fn rows_per_setting(self, n_c: usize) -> usize {
        match self {
            Mode::Qn => n_c + 1,
            Mode::Husimi | Mode::Wigner => 1,
            Mode::Homodyne => 0,
        }
    }
}

/// Linear map from the vectorized coefficient matrix ρ to stacked expected
/// measurement outcomes.
#[derive(Clone, Debug)]
pub struct SensingMatrix<T: Real> {
    pub entries: DMatrix<Complex<T>>,
    pub settings: Vec<MeasurementSetting<T>>,
    pub basis: BasisSpec,
    pub mode: Mode,
}

/// `amps[(n, a)] = ⟨n|D(−β)|ket_a⟩` for `n < rows`.
pub fn amplitude_table<T: Real>(beta: Complex<T>, kets: &[(Complex<T>, usize)], rows: usize) -> DMatrix<Complex<T>> {
    DMatrix::from_fn(rows, kets.len(), |n, a| {
        let (alpha, m) = kets[a];
        displaced_amplitude(n, beta, alpha, m)
    })
}

/// Rows contributed by a single setting.
pub fn setting_block<T: Real>(setting: &MeasurementSetting<T>, basis: &BasisSpec, mode: Mode) -> DMatrix<Complex<T>> {
    let kets = basis.kets::<T>();
    let k = kets.len();
    let amps = amplitude_table(setting.beta, &kets, setting.n_c + 1);
    let qn = DMatrix::from_fn(setting.n_c + 1, k * k, |n, col| {
        let (a, b) = (col / k, col % k);
        amps[(n, a)] * amps[(n, b)].conj()
    });
    match mode {
        Mode::Qn => qn,
        Mode::Husimi => qn.rows(0, 1).into_owned(),
        Mode::Wigner => {
            let mut row = DMatrix::zeros(1, k * k);
            for n in 0..=setting.n_c {
                let s = if n % 2 == 0 { T::one() } else { -T::one() };
                for c in 0..k * k {
                    row[(0, c)] += qn[(n, c)] * s;
                }
            }
            row
        }
        Mode::Homodyne => unreachable!("homodyne rows are built by homodyne_row"),
    }
}

pub fn build_sensing<T: Real>(
    settings: &[MeasurementSetting<T>],
    basis: &BasisSpec,
    mode: Mode,
) -> Result<SensingMatrix<T>> {
    if settings.is_empty() {
        return Err(Error::Config("at least one measurement setting is required".into()));
    }
    if mode == Mode::Homodyne {
        return Err(Error::Config("homodyne rows are not a sensing mode; use homodyne_row".into()));
    }
    basis.validate()?;
    let blocks: Vec<_> = settings.par_iter().map(|s| setting_block(s, basis, mode)).collect();
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let dim = basis.dimension();
    let mut entries = DMatrix::zeros(rows, dim);
    let mut r = 0;
    for b in &blocks {
        entries.view_mut((r, 0), (b.nrows(), dim)).copy_from(b);
        r += b.nrows();
    }
    Ok(SensingMatrix { entries, settings: settings.to_vec(), basis: basis.clone(), mode })
}

impl<T: Real> SensingMatrix<T> {
    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn dimension(&self) -> usize {
        self.entries.ncols()
    }

    /// Row range belonging to setting `j`.
    pub fn setting_rows(&self, j: usize) -> Range<usize> {
        let start: usize = self.settings[..j].iter().map(|s| self.mode.rows_per_setting(s.n_c)).sum();
        start..start + self.mode.rows_per_setting(self.settings[j].n_c)
    }

    /// Expected outcomes `A · vec(ρ)`.
    pub fn apply(&self, rho: &DMatrix<Complex<T>>) -> DVector<Complex<T>> {
        &self.entries * vectorize(rho)
    }

    /// JSON artifact: basis, settings, mode and row-major `[re, im]` entries.
    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<[f64; 2]> = (0..self.nrows())
            .flat_map(|i| (0..self.dimension()).map(move |j| (i, j)))
            .map(|(i, j)| {
                let z = complex_to_f64(self.entries[(i, j)]);
                [z.re, z.im]
            })
            .collect();
        let settings: Vec<MeasurementSetting<f64>> = self
            .settings
            .iter()
            .map(|s| MeasurementSetting::new(complex_to_f64(s.beta), s.n_c))
            .collect();
        serde_json::json!({
            "schema_version": 1,
            "basis": self.basis,
            "settings": settings,
            "mode": self.mode,
            "rows": self.nrows(),
            "cols": self.dimension(),
            "entries": entries,
        })
    }
}

/// `vec(ρ)[a·K + b] = ρ[(a, b)]`.
pub fn vectorize<T: Real>(rho: &DMatrix<Complex<T>>) -> DVector<Complex<T>> {
    let k = rho.nrows();
    DVector::from_fn(k * k, |c, _| rho[(c / k, c % k)])
}

pub fn unvectorize<T: Real>(v: &DVector<Complex<T>>) -> DMatrix<Complex<T>> {
    let k = (v.len() as f64).sqrt().round() as usize;
    assert_eq!(k * k, v.len(), "vector length is not a perfect square");
    DMatrix::from_fn(k, k, |a, b| v[a * k + b])
}
