use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::sensing::{amplitude_table, BasisSpec, MeasurementSetting};
use crate::C64;

pub const RECORD_SCHEMA_VERSION: u32 = 1;

/// Outcome probabilities `Q_0 … Q_{n_c}` followed by the overflow mass
/// `1 − Σ`.
pub fn exact_qn(rho: &DensityMatrix, setting: &MeasurementSetting<f64>) -> Vec<f64> {
    let kets = rho.basis.kets::<f64>();
    let u = amplitude_table(setting.beta, &kets, setting.n_c + 1);
    let m = &u * &rho.entries;
    let mut p: Vec<f64> = (0..=setting.n_c)
        .map(|n| {
            let v: C64 = (0..kets.len()).map(|b| m[(n, b)] * u[(n, b)].conj()).sum();
            v.re.max(0.0)
        })
        .collect();
    let total: f64 = p.iter().sum();
    p.push((1.0 - total).max(0.0));
    p
}

/// One multinomial draw of `n_rep` trials (sequential binomials).
pub fn sample_counts(probs: &[f64], n_rep: u64, rng: &mut impl Rng) -> Result<Vec<u64>> {
    if let Some(p) = probs.iter().find(|p| **p < -1e-12 || !p.is_finite()) {
        return Err(Error::InvalidDistribution(format!("probability {p} is negative or not finite")));
    }
    let total: f64 = probs.iter().map(|p| p.max(0.0)).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
    }
    let mut counts = vec![0u64; probs.len()];
    let mut left = n_rep;
    let mut mass = total;
    for (i, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        let p = p.max(0.0);
        if i == probs.len() - 1 || mass <= 0.0 {
            counts[i] = left;
            break;
        }
        let q = (p / mass).clamp(0.0, 1.0);
        let k = Binomial::new(left, q).expect("valid binomial").sample(rng);
        counts[i] = k;
        left -= k;
        mass -= p;
    }
    Ok(counts)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SettingRecord {
    pub beta: C64,
    pub n_c: usize,
    pub n_rep: u64,
    /// Histogram over `n = 0..=n_c`.
    pub counts: Vec<u64>,
    /// Events with `n > n_c`.
    pub overflow: u64,
    /// Exact probabilities (`n_rep = 0` records only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<Vec<f64>>,
}

impl SettingRecord {
    pub fn setting(&self) -> MeasurementSetting<f64> {
        MeasurementSetting::new(self.beta, self.n_c)
    }

    /// Observed frequencies over `n = 0..=n_c` (overflow dropped).
    pub fn frequencies(&self) -> Vec<f64> {
        match &self.exact {
            Some(p) => p[..=self.n_c].to_vec(),
            None => self.counts.iter().map(|&c| c as f64 / self.n_rep.max(1) as f64).collect(),
        }
    }

    pub fn overflow_frequency(&self) -> f64 {
        match &self.exact {
            Some(p) => p.get(self.n_c + 1).copied().unwrap_or(0.0),
            None => self.overflow as f64 / self.n_rep.max(1) as f64,
        }
    }
}

/// Per-setting excitation-count histograms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub schema_version: u32,
    pub basis: BasisSpec,
    pub settings: Vec<SettingRecord>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub metadata: serde_json::Value,
}

impl MeasurementRecord {
    pub fn measurement_settings(&self) -> Vec<MeasurementSetting<f64>> {
        self.settings.iter().map(SettingRecord::setting).collect()
    }

    /// Stacked frequencies `b`, matching the rows of a Q_n sensing matrix.
    pub fn stacked_frequencies(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.settings.iter().map(|s| s.n_c + 1).sum(),
            self.settings.iter().flat_map(|s| s.frequencies()),
        )
    }

    /// Total number of repetitions over all settings.
    pub fn n_tot(&self) -> u64 {
        self.settings.iter().map(|s| s.n_rep).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != RECORD_SCHEMA_VERSION {
            return Err(Error::Config(format!("unsupported record schema version {}", self.schema_version)));
        }
        self.basis.validate()?;
        for (j, s) in self.settings.iter().enumerate() {
            if s.exact.is_none() {
                if s.counts.len() != s.n_c + 1 {
                    return Err(Error::Config(format!("setting {j}: expected {} bins", s.n_c + 1)));
                }
                if s.counts.iter().sum::<u64>() + s.overflow != s.n_rep {
                    return Err(Error::Config(format!("setting {j}: counts do not add up to n_rep")));
                }
            } else if s.n_rep != 0 || s.exact.as_ref().map(|p| p.len()) != Some(s.n_c + 2) {
                return Err(Error::Config(format!("setting {j}: malformed exact-probability entry")));
            }
        }
        Ok(())
    }
}

/// RNG for setting `index`: one ChaCha stream per setting, so results do
/// not depend on scheduling.
pub fn setting_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Simulates a record. `n_rep = 0` stores exact probabilities instead of
/// sampled counts.
pub fn simulate_record(
    rho: &DensityMatrix,
    settings: &[MeasurementSetting<f64>],
    n_rep: u64,
    seed: u64,
) -> Result<MeasurementRecord> {
    if settings.is_empty() {
        return Err(Error::Config("at least one measurement setting is required".into()));
    }
    let records: Result<Vec<SettingRecord>> = settings
        .par_iter()
        .enumerate()
        .map(|(j, s)| {
            let p = exact_qn(rho, s);
            if n_rep == 0 {
                return Ok(SettingRecord {
                    beta: s.beta,
                    n_c: s.n_c,
                    n_rep: 0,
                    counts: vec![0; s.n_c + 1],
                    overflow: 0,
                    exact: Some(p),
                });
            }
            let mut counts = sample_counts(&p, n_rep, &mut setting_rng(seed, j))?;
            let overflow = counts.pop().unwrap();
            Ok(SettingRecord { beta: s.beta, n_c: s.n_c, n_rep, counts, overflow, exact: None })
        })
        .collect();
    Ok(MeasurementRecord {
        schema_version: RECORD_SCHEMA_VERSION,
        basis: rho.basis.clone(),
        settings: records?,
        seed,
        metadata: serde_json::Value::Null,
    })
}

/// Fixed relative bias: `b + ε‖b‖₂ u` with `u` a random unit vector.
pub fn relative_bias(b: &DVector<f64>, eps: f64, rng: &mut impl Rng) -> DVector<f64> {
    let u: DVector<f64> = DVector::from_fn(b.len(), |_, _| StandardNormal.sample(rng));
    let u = &u / u.norm();
    b + u * (eps * b.norm())
}

/// Relative noise `‖b̂ − b‖₂/‖b‖₂` of sampled frequencies against exact ones.
pub fn relative_noise(record: &MeasurementRecord, rho: &DensityMatrix) -> f64 {
    let exact: Vec<f64> = record
        .settings
        .iter()
        .flat_map(|s| exact_qn(rho, &s.setting())[..=s.n_c].to_vec())
        .collect();
    let b = DVector::from_vec(exact);
    (record.stacked_frequencies() - &b).norm() / b.norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::{build_sensing, vectorize, Mode};
    use crate::statesim::random_density;

    #[test]
    fn vacuum_is_poisson() {
        let rho = DensityMatrix::fock(nalgebra::DMatrix::from_fn(3, 3, |i, j| {
            C64::new(if i == 0 && j == 0 { 1.0 } else { 0.0 }, 0.0)
        }));
        let beta = C64::new(-0.8, 1.1);
        let s = MeasurementSetting::for_basis(beta, &rho.basis);
        let p = exact_qn(&rho, &s);
        let x = beta.norm_sqr();
        let mut t = (-x).exp();
        for n in 0..=s.n_c {
            assert!((p[n] - t).abs() < 1e-14);
            t *= x / (n + 1) as f64;
        }
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn matches_sensing_product() {
        let rho = random_density(3, 0.2, 4).unwrap();
        let s = MeasurementSetting::for_basis(C64::new(1.4, -0.3), &rho.basis);
        let a = build_sensing(&[s], &rho.basis, Mode::Qn).unwrap();
        let b = &a.entries * vectorize(&rho.entries);
        let p = exact_qn(&rho, &s);
        for n in 0..=s.n_c {
            assert!((b[n].re - p[n]).abs() < 1e-12);
        }
    }

    #[test]
    fn sampling_totals_and_determinism() {
        let p = [0.1, 0.5, 0.0, 0.4];
        let c1 = sample_counts(&p, 1000, &mut setting_rng(3, 0)).unwrap();
        let c2 = sample_counts(&p, 1000, &mut setting_rng(3, 0)).unwrap();
        assert_eq!(c1, c2);
        assert_eq!(c1.iter().sum::<u64>(), 1000);
        assert_eq!(c1[2], 0);
    }

    #[test]
    fn invalid_distributions() {
        let mut rng = setting_rng(0, 0);
        assert!(matches!(sample_counts(&[0.5, 0.6], 10, &mut rng), Err(Error::InvalidDistribution(_))));
        assert!(matches!(sample_counts(&[1.1, -0.1], 10, &mut rng), Err(Error::InvalidDistribution(_))));
        // tiny negatives are clipped
        assert!(sample_counts(&[1.0, -1e-13], 10, &mut rng).is_ok());
    }

    #[test]
    fn record_round_trip() {
        let rho = random_density(2, 0.5, 1).unwrap();
        let settings: Vec<_> =
            [C64::new(1.0, 0.0), C64::new(0.0, 1.5)].iter().map(|&b| MeasurementSetting::for_basis(b, &rho.basis)).collect();
        let r = simulate_record(&rho, &settings, 10_000, 42).unwrap();
        r.validate().unwrap();
        let json = serde_json::to_string(&r).unwrap();
        let back: MeasurementRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
        assert_eq!(simulate_record(&rho, &settings, 10_000, 42).unwrap(), r);
        let exact = simulate_record(&rho, &settings, 0, 42).unwrap();
        exact.validate().unwrap();
        assert_eq!(exact.settings[0].frequencies(), exact_qn(&rho, &settings[0])[..=settings[0].n_c].to_vec());
    }

    #[test]
    fn bias_has_requested_size() {
        let b = DVector::from_vec(vec![0.2, 0.3, 0.5]);
        let nb = relative_bias(&b, 0.01, &mut setting_rng(1, 1));
        assert!(((&nb - &b).norm() / b.norm() - 0.01).abs() < 1e-14);
    }
}
