//! Shot-noise benchmark: parity (Wigner) sampling on displacement lattices
//! against full excitation counting on an optimized half ring.

use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{minimize_radius, optimal_radius, ring_settings, RingFamily, RING_SCAN_CUTOFF};
use crate::error::{Error, Result};
use crate::reconstruct::{fidelity_matrices, project_psd_unit_trace};
use crate::sensing::{build_sensing, condition_number, unvectorize, BasisSpec, MeasurementSetting, Mode, RANK_TOLERANCE};
use crate::statesim::{exact_qn, hermitize, random_density, sample_counts, DensityMatrix};
use crate::stats::{log_log_fit, median};
use crate::C64;

pub const BENCHMARK_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    WignerLattice,
    WignerOptimized,
    QnOptimized,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::WignerLattice, Scheme::WignerOptimized, Scheme::QnOptimized];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::WignerLattice => "wigner-lattice",
            Scheme::WignerOptimized => "wigner-optimized",
            Scheme::QnOptimized => "qn-optimized",
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scheme {s:?} (wigner-lattice, wigner-optimized, qn-optimized)")))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub m_c: usize,
    pub n_tots: Vec<u64>,
    pub trials: usize,
    pub schemes: Vec<Scheme>,
    pub seed: u64,
    /// Purity knob of the random true states.
    pub purity_knob: f64,
    /// Half-width of the baseline lattice; default `√m_c + 1`.
    pub lattice_half_width: Option<f64>,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            m_c: 5,
            n_tots: (4..=9).map(|k| 10u64.pow(k)).collect(),
            trials: 20,
            schemes: Scheme::ALL.to_vec(),
            seed: 1,
            purity_knob: 0.5,
            lattice_half_width: None,
        }
    }
}

impl BenchmarkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_tots.is_empty() || self.n_tots.contains(&0) {
            return Err(Error::Config("n_tots must be a non-empty list of positive totals".into()));
        }
        if self.trials == 0 || self.schemes.is_empty() {
            return Err(Error::Config("need at least one trial and one scheme".into()));
        }
        if !(0.0..=1.0).contains(&self.purity_knob) {
            return Err(Error::Config("purity_knob must lie in [0, 1]".into()));
        }
        if matches!(self.lattice_half_width, Some(h) if !(h > 0.0)) {
            return Err(Error::Config("lattice half-width must be positive".into()));
        }
        Ok(())
    }
}

/// Settings of one scheme together with the precomputed least-squares map.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SchemeDesign {
    pub scheme: Scheme,
    pub mode: Mode,
    pub settings: Vec<MeasurementSetting<f64>>,
    /// Lattice half-width (Wigner schemes) or ring radius (Q_n).
    pub scale: f64,
    pub kappa: f64,
    #[serde(skip)]
    pinv: Option<DMatrix<C64>>,
    #[serde(skip)]
    exact_rows: Option<DMatrix<C64>>,
}

/// `(2m_c + 1)²` displacements on a square lattice over `[−h, h]²`.
pub fn square_lattice(m_c: usize, half_width: f64) -> Vec<C64> {
    crate::fisher::square_grid(half_width, 2 * m_c + 1)
}

fn lattice_settings(m_c: usize, half_width: f64) -> Vec<MeasurementSetting<f64>> {
    let basis = BasisSpec::fock(m_c);
    square_lattice(m_c, half_width).into_iter().map(|b| MeasurementSetting::for_basis(b, &basis)).collect()
}

fn wigner_kappa(m_c: usize, half_width: f64) -> f64 {
    let basis = BasisSpec::fock(m_c);
    build_sensing(&lattice_settings(m_c, half_width), &basis, Mode::Wigner).map_or(f64::INFINITY, |a| condition_number(&a).kappa)
}

pub fn design_scheme(scheme: Scheme, m_c: usize, lattice_half_width: Option<f64>) -> Result<SchemeDesign> {
    let basis = BasisSpec::fock(m_c);
    let (mode, settings, scale) = match scheme {
        Scheme::WignerLattice => {
            let h = lattice_half_width.unwrap_or((m_c as f64).sqrt() + 1.0);
            (Mode::Wigner, lattice_settings(m_c, h), h)
        }
        Scheme::WignerOptimized => {
            // same lattice shape, pitch chosen to minimize κ
            let hi = 2.0 * ((m_c as f64).sqrt() + 1.0);
            let (h, _) = minimize_radius(0.25, hi, 0.125, |h| wigner_kappa(m_c, h));
            (Mode::Wigner, lattice_settings(m_c, h), h)
        }
        Scheme::QnOptimized => {
            let (r, _) = optimal_radius(RingFamily::Hrc, m_c, Some(RING_SCAN_CUTOFF))?;
            (Mode::Qn, ring_settings(RingFamily::Hrc, m_c, r)?, r)
        }
    };
    let a = build_sensing(&settings, &basis, mode)?;
    let kappa = condition_number(&a).kappa;
    let svd = a.entries.clone().svd(true, true);
    let tol = RANK_TOLERANCE * svd.singular_values.max();
    let pinv = svd.pseudo_inverse(tol).map_err(|e| Error::Config(e.to_string()))?;
    Ok(SchemeDesign { scheme, mode, settings, scale, kappa, pinv: Some(pinv), exact_rows: Some(a.entries) })
}

impl SchemeDesign {
    /// Simulated data vector for `rho` with `n_tot` shots split evenly.
    pub fn sample(&self, rho: &DensityMatrix, n_tot: u64, rng: &mut ChaCha8Rng) -> Result<DVector<f64>> {
        let n_rep = (n_tot / self.settings.len() as u64).max(1);
        match self.mode {
            Mode::Wigner => {
                let w = self.exact_rows.as_ref().expect("designed") * crate::sensing::vectorize(&rho.entries);
                let mut out = Vec::with_capacity(w.len());
                for wj in w.iter() {
                    let p = ((1.0 + wj.re) / 2.0).clamp(0.0, 1.0);
                    let k = Binomial::new(n_rep, p).map_err(|e| Error::InvalidDistribution(e.to_string()))?.sample(rng);
                    out.push(2.0 * k as f64 / n_rep as f64 - 1.0);
                }
                Ok(DVector::from_vec(out))
            }
            _ => {
                let mut out = Vec::new();
                for s in &self.settings {
                    let counts = sample_counts(&exact_qn(rho, s), n_rep, rng)?;
                    out.extend(counts[..=s.n_c].iter().map(|&c| c as f64 / n_rep as f64));
                }
                Ok(DVector::from_vec(out))
            }
        }
    }

    /// Least squares followed by the physical projection.
    pub fn estimate(&self, b: &DVector<f64>) -> DMatrix<C64> {
        let x = self.pinv.as_ref().expect("designed") * b.map(|v| C64::new(v, 0.0));
        project_psd_unit_trace(&hermitize(&unvectorize(&x)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub scheme: Scheme,
    pub n_tot: u64,
    pub trial: usize,
    pub infidelity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeSummary {
    pub scheme: Scheme,
    pub n_tot: u64,
    pub median_infidelity: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub schema_version: u32,
    pub config: BenchmarkConfig,
    pub designs: Vec<SchemeDesign>,
    pub rows: Vec<BenchmarkRow>,
    pub summary: Vec<SchemeSummary>,
    /// Log–log slope of the median infidelity against `N_tot`, per scheme.
    pub slopes: Vec<(Scheme, f64)>,
}

impl BenchmarkReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("scheme,n_tot,trial,infidelity\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{:e}\n", r.scheme.name(), r.n_tot, r.trial, r.infidelity));
        }
        out
    }

    pub fn median(&self, scheme: Scheme, n_tot: u64) -> Option<f64> {
        self.summary.iter().find(|s| s.scheme == scheme && s.n_tot == n_tot).map(|s| s.median_infidelity)
    }

    /// Median-infidelity ratio `scheme / qn-optimized` at the largest `N_tot`.
    pub fn advantage(&self, baseline: Scheme) -> Option<f64> {
        let n = *self.config.n_tots.iter().max()?;
        Some(self.median(baseline, n)? / self.median(Scheme::QnOptimized, n)?)
    }

    /// True when every scheme's median infidelity falls along the sweep.
    pub fn medians_decrease(&self) -> bool {
        let mut n_tots = self.config.n_tots.clone();
        n_tots.sort_unstable();
        self.config.schemes.iter().all(|&s| {
            let m: Vec<f64> = n_tots.iter().filter_map(|&n| self.median(s, n)).collect();
            m.windows(2).all(|w| w[1] < w[0])
        })
    }
}

pub fn run_benchmark(config: &BenchmarkConfig) -> Result<BenchmarkReport> {
    config.validate()?;
    let designs: Vec<SchemeDesign> = config
        .schemes
        .iter()
        .map(|&s| design_scheme(s, config.m_c, config.lattice_half_width))
        .collect::<Result<_>>()?;
    let truths: Vec<DensityMatrix> = (0..config.trials)
        .map(|t| random_density(config.m_c, config.purity_knob, config.seed.wrapping_add(t as u64)))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize, usize)> = (0..designs.len())
        .flat_map(|d| (0..config.n_tots.len()).flat_map(move |n| (0..config.trials).map(move |t| (d, n, t))))
        .collect();
    let rows: Vec<BenchmarkRow> = jobs
        .par_iter()
        .map(|&(d, n, t)| {
            let design = &designs[d];
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(t as u64));
            rng.set_stream(((d as u64) << 32) | n as u64);
            let b = design.sample(&truths[t], config.n_tots[n], &mut rng)?;
            let est = design.estimate(&b);
            let f = fidelity_matrices(&truths[t].entries, &est);
            Ok(BenchmarkRow { scheme: design.scheme, n_tot: config.n_tots[n], trial: t, infidelity: (1.0 - f).max(0.0) })
        })
        .collect::<Result<_>>()?;
    let mut summary = Vec::new();
    let mut slopes = Vec::new();
    for d in &designs {
        let mut pts = Vec::new();
        for &n in &config.n_tots {
            let v: Vec<f64> = rows.iter().filter(|r| r.scheme == d.scheme && r.n_tot == n).map(|r| r.infidelity).collect();
            let m = median(&v);
            summary.push(SchemeSummary { scheme: d.scheme, n_tot: n, median_infidelity: m });
            pts.push((n as f64, m));
        }
        if pts.len() >= 2 && pts.iter().all(|p| p.1 > 0.0) {
            let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            slopes.push((d.scheme, log_log_fit(&x, &y).slope));
        }
    }
    Ok(BenchmarkReport { schema_version: BENCHMARK_SCHEMA_VERSION, config: config.clone(), designs, rows, summary, slopes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_shape() {
        let l = square_lattice(2, 1.0 + 2f64.sqrt());
        assert_eq!(l.len(), 25);
        let h = l.iter().map(|b| b.re.abs().max(b.im.abs())).fold(0.0, f64::max);
        assert!((h - (1.0 + 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
            assert_eq!(serde_json::to_value(s).unwrap(), serde_json::json!(s.name()));
        }
        assert!("homodyne".parse::<Scheme>().is_err());
    }

    #[test]
    fn small_benchmark_is_deterministic() {
        let cfg = BenchmarkConfig { m_c: 1, n_tots: vec![1_000, 100_000], trials: 4, seed: 3, ..Default::default() };
        let a = run_benchmark(&cfg).unwrap();
        let b = run_benchmark(&cfg).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.rows.len(), 3 * 2 * 4);
        assert!(a.to_csv().starts_with("scheme,n_tot,trial,infidelity\n"));
        assert!(a.rows.iter().all(|r| (0.0..=1.0).contains(&r.infidelity)));
    }
}
