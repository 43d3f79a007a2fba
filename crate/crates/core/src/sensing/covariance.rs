use nalgebra::DMatrix;
use num_complex::Complex;
use rayon::prelude::*;

use super::basis::{BasisSpec, MeasurementSetting};
use super::matrix::{setting_block, Mode, SensingMatrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// `C = A†A` together with the Fock block label `k = m1 − m2` of each column.
#[derive(Clone, Debug)]
pub struct CovarianceBlocks<T: Real> {
    pub c: DMatrix<Complex<T>>,
    pub block_index: Option<Vec<i64>>,
}

pub fn fock_block_index(m_c: usize) -> Vec<i64> {
    let k = m_c + 1;
    (0..k * k).map(|c| (c / k) as i64 - (c % k) as i64).collect()
}

fn blocks_for(basis: &BasisSpec, c: DMatrix<Complex<f64>>) -> CovarianceBlocks<f64> {
    let block_index = match basis {
        BasisSpec::Fock { m_c } => Some(fock_block_index(*m_c)),
        _ => None,
    };
    CovarianceBlocks { c, block_index }
}

pub fn covariance<T: Real>(a: &SensingMatrix<T>) -> CovarianceBlocks<T> {
    let c = a.entries.ad_mul(&a.entries);
    let block_index = match a.basis {
        BasisSpec::Fock { m_c } => Some(fock_block_index(m_c)),
        _ => None,
    };
    CovarianceBlocks { c, block_index }
}

/// `A_β†A_β` for one setting, without assembling the stacked matrix.
pub fn setting_covariance(setting: &MeasurementSetting<f64>, basis: &BasisSpec) -> DMatrix<Complex<f64>> {
    let b = setting_block(setting, basis, Mode::Qn);
    b.ad_mul(&b)
}

/// `C = Σ_j A_{β_j}†A_{β_j}` for Q_n measurements, summed in parallel.
pub fn covariance_of_settings(settings: &[MeasurementSetting<f64>], basis: &BasisSpec) -> CovarianceBlocks<f64> {
    let d = basis.dimension();
    let c = settings
        .par_iter()
        .map(|s| setting_covariance(s, basis))
        .reduce(|| DMatrix::zeros(d, d), |a, b| a + b);
    blocks_for(basis, c)
}

/// Zeroes every entry whose row and column lie in different `k` blocks.
pub fn pinch<T: Real>(cb: &CovarianceBlocks<T>) -> Result<CovarianceBlocks<T>> {
    let idx = cb.block_index.as_ref().ok_or(Error::UnsupportedBasis("without Fock labels"))?;
    let mut c = cb.c.clone();
    for i in 0..c.nrows() {
        for j in 0..c.ncols() {
            if idx[i] != idx[j] {
                c[(i, j)] = Complex::new(T::zero(), T::zero());
            }
        }
    }
    Ok(CovarianceBlocks { c, block_index: cb.block_index.clone() })
}

impl<T: Real> CovarianceBlocks<T> {
    /// Largest entry modulus over the `(k1, k2)` block.
    pub fn block_max(&self, k1: i64, k2: i64) -> Option<f64> {
        let idx = self.block_index.as_ref()?;
        let mut m = 0.0f64;
        for i in 0..self.c.nrows() {
            for j in 0..self.c.ncols() {
                if idx[i] == k1 && idx[j] == k2 {
                    let z = self.c[(i, j)];
                    m = m.max(z.re.to_f64().hypot(z.im.to_f64()));
                }
            }
        }
        Some(m)
    }

    /// Largest modulus over all entries in off-diagonal blocks whose label
    /// difference satisfies `filter`, relative to the largest diagonal-block
    /// entry.
    pub fn off_block_ratio(&self, filter: impl Fn(i64) -> bool) -> Option<f64> {
        let idx = self.block_index.as_ref()?;
        let (mut off, mut diag) = (0.0f64, 0.0f64);
        for i in 0..self.c.nrows() {
            for j in 0..self.c.ncols() {
                let z = self.c[(i, j)];
                let v = z.re.to_f64().hypot(z.im.to_f64());
                if idx[i] == idx[j] {
                    diag = diag.max(v);
                } else if filter(idx[i] - idx[j]) {
                    off = off.max(v);
                }
            }
        }
        Some(off / diag)
    }
}
