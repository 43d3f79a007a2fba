use nalgebra::DMatrix;
use num_complex::Complex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::matrix::SensingMatrix;
use crate::scalar::Real;

/// Singular values below `RANK_TOLERANCE · σ_max` count as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    /// `σ_max/σ_min`; `+∞` when the map is rank deficient (serialized as `null`).
    #[serde(serialize_with = "ser_inf", deserialize_with = "de_inf")]
    pub kappa: f64,
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub rank: usize,
    /// `κ · √N_β`.
    #[serde(serialize_with = "ser_inf", deserialize_with = "de_inf")]
    pub figure_of_merit: f64,
}

fn ser_inf<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_none()
    }
}

fn de_inf<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

impl ConditionReport {
    pub fn is_full_rank(&self) -> bool {
        self.kappa.is_finite()
    }

    /// Report from (unsorted) singular values of a map with `dimension` columns.
    pub fn from_singular_values(sv: &[f64], dimension: usize, n_settings: usize) -> Self {
        let sigma_max = sv.iter().cloned().fold(0.0, f64::max);
        let sigma_min = if sv.len() < dimension { 0.0 } else { sv.iter().cloned().fold(f64::INFINITY, f64::min) };
        let rank = sv.iter().filter(|&&s| s > RANK_TOLERANCE * sigma_max).count();
        let kappa = if rank == dimension && sigma_max > 0.0 { sigma_max / sigma_min } else { f64::INFINITY };
        ConditionReport {
            kappa,
            sigma_max,
            sigma_min,
            rank,
            figure_of_merit: kappa * (n_settings as f64).sqrt(),
        }
    }
}

/// Two-norm condition number of the sensing map from its SVD.
pub fn condition_number<T: Real>(a: &SensingMatrix<T>) -> ConditionReport {
    let sv = matrix_singular_values(&a.entries);
    ConditionReport::from_singular_values(&sv, a.dimension(), a.settings.len())
}

pub fn matrix_singular_values<T: Real>(m: &DMatrix<Complex<T>>) -> Vec<f64> {
    m.singular_values().iter().map(|s| s.to_f64()).collect()
}

/// Condition report computed from the covariance `C = A†A` via its
/// eigenvalues: `σ_i = √λ_i`. Cheaper than an SVD of `A` when `A` is tall.
pub fn condition_from_covariance<T: Real>(c: &DMatrix<Complex<T>>, n_settings: usize) -> ConditionReport {
    let sv: Vec<f64> = hermitian_eigenvalues(c).iter().map(|&l| l.max(0.0).sqrt()).collect();
    ConditionReport::from_singular_values(&sv, c.ncols(), n_settings)
}

/// `κ(C) = λ_max/λ_min`, `+∞` when `C` is singular at the rank tolerance.
pub fn covariance_kappa<T: Real>(c: &DMatrix<Complex<T>>) -> f64 {
    let r = condition_from_covariance(c, 1);
    r.kappa * r.kappa
}

pub fn hermitian_eigenvalues<T: Real>(c: &DMatrix<Complex<T>>) -> Vec<f64> {
    c.clone().symmetric_eigenvalues().iter().map(|l| l.to_f64()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::{build_sensing, covariance, BasisSpec, MeasurementSetting, Mode};

    type C = Complex<f64>;

    fn wrap(entries: DMatrix<C>) -> SensingMatrix<f64> {
        let n = entries.ncols();
        let m_c = (n as f64).sqrt() as usize - 1;
        SensingMatrix {
            entries,
            settings: vec![MeasurementSetting::new(C::new(0.0, 0.0), 0)],
            basis: BasisSpec::fock(m_c),
            mode: Mode::Qn,
        }
    }

    #[test]
    fn isometry_has_unit_kappa() {
        let q = DMatrix::from_fn(6, 4, |i, j| C::new(if i == j { 1.0 } else { 0.0 }, 0.0));
        let r = condition_number(&wrap(q));
        assert!((r.kappa - 1.0).abs() < 1e-14);
        assert_eq!(r.rank, 4);
    }

    #[test]
    fn diagonal_kappa() {
        let mut d = DMatrix::zeros(4, 4);
        for (i, s) in [3.0, 1.0, 2.0, 1.5].iter().enumerate() {
            d[(i, i)] = C::new(*s, 0.0);
        }
        let r = condition_number(&wrap(d));
        assert!((r.kappa - 3.0).abs() < 1e-14);
        assert_eq!((r.sigma_max, r.sigma_min), (3.0, 1.0));
    }

    #[test]
    fn rank_deficient_sentinel() {
        let mut d = DMatrix::zeros(4, 4);
        d[(0, 0)] = C::new(1.0, 0.0);
        d[(1, 1)] = C::new(1.0, 0.0);
        let r = condition_number(&wrap(d));
        assert!(r.kappa.is_infinite());
        assert_eq!(r.rank, 2);
        let s = serde_json::to_value(r).unwrap();
        assert!(s["kappa"].is_null());
        let back: ConditionReport = serde_json::from_value(s).unwrap();
        assert!(back.kappa.is_infinite());
    }

    #[test]
    fn svd_and_covariance_paths_agree() {
        let basis = BasisSpec::fock(2);
        let settings: Vec<_> = (0..5)
            .map(|j| {
                let phi = 2.0 * std::f64::consts::PI * j as f64 / 5.0;
                MeasurementSetting::for_basis(C::from_polar(1.6, phi), &basis)
            })
            .collect();
        let a = build_sensing(&settings, &basis, Mode::Qn).unwrap();
        let r = condition_number(&a);
        let cov = covariance(&a);
        let kc = covariance_kappa(&cov.c);
        assert!((kc.sqrt() / r.kappa - 1.0).abs() < 1e-8, "{} vs {}", kc.sqrt(), r.kappa);
        assert!((r.figure_of_merit - r.kappa * 5f64.sqrt()).abs() < 1e-12);
    }
}
