//! Large-|β| structure of the Fock-basis covariance: the parity rule for the
//! decay of its entries and the homodyne limit.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{displacement_element, hermite_phys, log_factorial};
use crate::sensing::{default_ncut, BasisSpec};
use crate::stats::log_log_fit;
use crate::C64;

/// `⟨n|D(−β)|m⟩` for `n ≤ n_cap`, `m ≤ m_max`, indexed `[m][n]`.
fn amplitudes(beta: C64, m_max: usize, n_cap: usize) -> Vec<Vec<C64>> {
    (0..=m_max).map(|m| (0..=n_cap).map(|n| displacement_element(n, m, -beta)).collect()).collect()
}

/// `C_{m1m2;m3m4}(β) = Σ_n A*_{n;m1m2} A_{n;m3m4}` for one displacement.
pub fn covariance_entry(beta: C64, m: [usize; 4], n_cap: usize) -> C64 {
    let u = amplitudes(beta, *m.iter().max().unwrap(), n_cap);
    entry_from(&u, m)
}

fn entry_from(u: &[Vec<C64>], [m1, m2, m3, m4]: [usize; 4]) -> C64 {
    (0..u[0].len()).map(|n| (u[m1][n] * u[m2][n].conj()).conj() * (u[m3][n] * u[m4][n].conj())).sum()
}

/// Cutoff used for single-displacement covariance entries.
pub fn entry_cutoff(beta: C64, m_max: usize) -> usize {
    default_ncut(beta, &BasisSpec::fock(m_max))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalingFit {
    pub block: [usize; 4],
    pub parity: Parity,
    pub radii: Vec<f64>,
    /// `|C_{m1m2m3m4}| / |C_{0000}|`.
    pub magnitudes: Vec<f64>,
    /// Log–log slope of `magnitudes`.
    pub fitted_slope: f64,
    /// Log–log slope of the raw `|C_{m1m2m3m4}|`.
    pub absolute_slope: f64,
    /// Of the raw fit; the normalized ratio of an even entry is flat, which
    /// leaves its own r² meaningless.
    pub r_squared: f64,
    /// `r_squared < 0.99`.
    pub unreliable: bool,
}

impl ScalingFit {
    /// Slope predicted by the parity rule for the diagonal-normalized ratio.
    pub fn expected_slope(&self) -> f64 {
        match self.parity {
            Parity::Even => 0.0,
            Parity::Odd => -1.0,
        }
    }
}

/// Every index 4-tuple with entries `≤ m_c`.
pub fn all_blocks(m_c: usize) -> Vec<[usize; 4]> {
    let r = 0..=m_c;
    r.clone()
        .flat_map(|a| {
            let r = r.clone();
            r.clone().flat_map(move |b| {
                let r = r.clone();
                r.clone().flat_map(move |c| r.clone().map(move |d| [a, b, c, d]))
            })
        })
        .collect()
}

/// Log–log fits of `|C_m(β)|/|C_{0000}(β)|` against `|β|`, along a ray of
/// angle `phi`, for every 4-tuple with entries `≤ m_c`.
pub fn parity_scaling_fit(m_c: usize, radii: &[f64], phi: f64) -> Result<Vec<ScalingFit>> {
    if radii.len() < 2 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("radii must be strictly increasing with at least two points".into()));
    }
    if radii[0] < 4.0 || radii[radii.len() - 1] < 3.0 * radii[0] {
        return Err(Error::Config("radii must start at ≥ 4 and span at least a factor of 3".into()));
    }
    let tables: Vec<Vec<Vec<C64>>> = radii
        .par_iter()
        .map(|&r| {
            let beta = C64::from_polar(r, phi);
            amplitudes(beta, m_c, entry_cutoff(beta, m_c))
        })
        .collect();
    let reference: Vec<f64> = tables.iter().map(|u| entry_from(u, [0; 4]).norm()).collect();
    let ref_slope = log_log_fit(radii, &reference).slope;
    Ok(all_blocks(m_c)
        .into_iter()
        .map(|block| {
            let magnitudes: Vec<f64> =
                tables.iter().zip(&reference).map(|(u, c0)| entry_from(u, block).norm() / c0).collect();
            let fit = log_log_fit(radii, &magnitudes);
            let raw: Vec<f64> = magnitudes.iter().zip(&reference).map(|(m, c0)| m * c0).collect();
            let abs_fit = log_log_fit(radii, &raw);
            debug_assert!((abs_fit.slope - fit.slope - ref_slope).abs() < 1e-9);
            let parity = if block.iter().sum::<usize>() % 2 == 0 { Parity::Even } else { Parity::Odd };
            ScalingFit {
                block,
                parity,
                radii: radii.to_vec(),
                magnitudes,
                fitted_slope: fit.slope,
                absolute_slope: abs_fit.slope,
                r_squared: abs_fit.r_squared,
                unreliable: abs_fit.r_squared < 0.99,
            }
        })
        .collect())
}

pub fn scaling_fits_csv(fits: &[ScalingFit]) -> String {
    crate::io::csv_string(
        &["m1", "m2", "m3", "m4", "parity", "slope", "r_squared"],
        fits.iter().map(|f| {
            let [a, b, c, d] = f.block;
            let parity = if f.parity == Parity::Even { "even" } else { "odd" };
            vec![
                a.to_string(),
                b.to_string(),
                c.to_string(),
                d.to_string(),
                parity.to_string(),
                format!("{:.6}", f.fitted_slope),
                format!("{:.6}", f.r_squared),
            ]
        }),
    )
}

/// Gauss–Hermite nodes and weights (weight `e^{−x²}`) by Golub–Welsch.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let jacobi = DMatrix::from_fn(n, n, |i, j| if i.abs_diff(j) == 1 { (i.max(j) as f64 / 2.0).sqrt() } else { 0.0 });
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], std::f64::consts::PI.sqrt() * eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // enforce the exact mirror symmetry so odd integrands cancel
    let mirrored: Vec<(f64, f64)> =
        (0..n).map(|i| ((pairs[i].0 - pairs[n - 1 - i].0) / 2.0, (pairs[i].1 + pairs[n - 1 - i].1) / 2.0)).collect();
    mirrored.into_iter().unzip()
}

/// `∫ e^{−2x²} H_{m1}H_{m2}H_{m3}H_{m4} dx` by Gauss–Hermite quadrature with
/// `2Σm + 16` nodes (exact for the polynomial integrand).
pub fn hermite_quartic_raw(m: [usize; 4]) -> f64 {
    let s: usize = m.iter().sum();
    let (x, w) = gauss_hermite(2 * s + 16);
    // x = y/√2 absorbs e^{−2x²} into the e^{−y²} weight
    x.iter()
        .zip(&w)
        .map(|(&y, &wk)| {
            let t = y / std::f64::consts::SQRT_2;
            wk * m.iter().map(|&mi| hermite_phys(mi as u32, t)).product::<f64>()
        })
        .sum::<f64>()
        / std::f64::consts::SQRT_2
}

/// `∫ ψ_{m1}ψ_{m2}ψ_{m3}ψ_{m4} dx` for Hermite functions `ψ_m`.
pub fn hermite_quartic_integral(m: [usize; 4]) -> f64 {
    let s: usize = m.iter().sum();
    let log_norm = 0.5 * (s as f64 * std::f64::consts::LN_2 + m.iter().map(|&mi| log_factorial::<f64>(mi as u64)).sum::<f64>());
    hermite_quartic_raw(m) / (std::f64::consts::PI * log_norm.exp())
}

/// Homodyne covariance `Σ_θ e^{iθ(m1−m2−m3+m4)} ∫ψψψψ` over the Fock
/// columns `(m1, m2)`, row-major like the Q_n sensing map.
pub fn homodyne_covariance(m_c: usize, thetas: &[f64]) -> Result<DMatrix<C64>> {
    if thetas.is_empty() {
        return Err(Error::Config("need at least one homodyne angle".into()));
    }
    let k = m_c + 1;
    let d = k * k;
    Ok(DMatrix::from_fn(d, d, |r, c| {
        let m = [r / k, r % k, c / k, c % k];
        let integral = hermite_quartic_integral(m);
        let q = m[0] as f64 - m[1] as f64 - m[2] as f64 + m[3] as f64;
        thetas.iter().map(|&t| C64::from_polar(integral, q * t)).sum()
    }))
}

/// Q_n covariance of displacements `r e^{iθ_j}`, same layout as
/// [`homodyne_covariance`].
pub fn qn_ring_covariance(m_c: usize, radius: f64, thetas: &[f64]) -> DMatrix<C64> {
    let k = m_c + 1;
    let d = k * k;
    thetas
        .par_iter()
        .map(|&t| {
            let beta = C64::from_polar(radius, t);
            let u = amplitudes(beta, m_c, entry_cutoff(beta, m_c));
            DMatrix::from_fn(d, d, |r, c| entry_from(&u, [r / k, r % k, c / k, c % k]))
        })
        .reduce(|| DMatrix::zeros(d, d), |a, b| a + b)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Correspondence {
    pub m_c: usize,
    pub radius: f64,
    pub thetas: Vec<f64>,
    /// `s` minimizing `‖s·C_Qn − C_hom‖_F`.
    pub scale: f64,
    /// Max over entries with `|C_hom| > 1e−10` of `|s·C_Qn − C_hom|/|C_hom|`.
    pub max_deviation: f64,
    /// Largest odd-parity entry of each matrix.
    pub odd_homodyne: f64,
    pub odd_qn: f64,
    /// Fitted scale for each angle alone.
    pub per_angle_scale: Vec<f64>,
}

fn fit_scale(q: &DMatrix<C64>, h: &DMatrix<C64>) -> f64 {
    let num: f64 = q.iter().zip(h.iter()).map(|(a, b)| (a.conj() * b).re).sum();
    num / q.norm_squared()
}

fn odd_max(m: &DMatrix<C64>, k: usize) -> f64 {
    let mut best = 0.0f64;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if (r / k + r % k + c / k + c % k) % 2 == 1 {
                best = best.max(m[(r, c)].norm());
            }
        }
    }
    best
}

/// Compares the Q_n covariance of a half ring of `m_c + 1` displacements at
/// `radius` with the homodyne covariance of the matching angles, after one
/// fitted scale factor.
pub fn homodyne_qn_correspondence(m_c: usize, radius: f64) -> Result<Correspondence> {
    let thetas: Vec<f64> = (0..=m_c).map(|j| std::f64::consts::PI * j as f64 / (m_c + 1) as f64).collect();
    let k = m_c + 1;
    // with ⟨n|D(−β)|m⟩ and e^{iθ(m1−m2−m3+m4)}, the homodyne angle equals arg β
    let h = homodyne_covariance(m_c, &thetas)?;
    let q = qn_ring_covariance(m_c, radius, &thetas);
    let scale = fit_scale(&q, &h);
    let mut max_deviation = 0.0f64;
    for (a, b) in q.iter().zip(h.iter()) {
        if b.norm() > 1e-10 {
            max_deviation = max_deviation.max((a * scale - b).norm() / b.norm());
        }
    }
    let per_angle_scale = thetas
        .iter()
        .map(|&t| {
            let q1 = qn_ring_covariance(m_c, radius, &[t]);
            let h1 = homodyne_covariance(m_c, &[t]).expect("non-empty");
            fit_scale(&q1, &h1)
        })
        .collect();
    Ok(Correspondence {
        m_c,
        radius,
        thetas,
        scale,
        max_deviation,
        odd_homodyne: odd_max(&h, k),
        odd_qn: odd_max(&q, k),
        per_angle_scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::{covariance, build_sensing, MeasurementSetting, Mode};

    #[test]
    fn hermitian_pairing_and_vacuum_series() {
        let beta = C64::new(1.3, -0.8);
        let n = entry_cutoff(beta, 2);
        let a = covariance_entry(beta, [2, 1, 0, 1], n);
        let b = covariance_entry(beta, [0, 1, 2, 1], n);
        assert!((a - b.conj()).norm() < 1e-14);
        let x: f64 = beta.norm_sqr();
        let mut p = (-x).exp();
        let mut direct = 0.0;
        for j in 0..=n {
            direct += p * p;
            p *= x / (j + 1) as f64;
        }
        assert!((covariance_entry(beta, [0; 4], n).re - direct).abs() < 1e-12);
    }

    #[test]
    fn matches_sensing_covariance() {
        let beta = C64::new(-0.6, 1.9);
        let basis = BasisSpec::fock(2);
        let s = MeasurementSetting::for_basis(beta, &basis);
        let c = covariance(&build_sensing(&[s], &basis, Mode::Qn).unwrap()).c;
        for (i, m) in all_blocks(2).into_iter().enumerate() {
            let (r, col) = (m[0] * 3 + m[1], m[2] * 3 + m[3]);
            assert!((covariance_entry(beta, m, s.n_c) - c[(r, col)]).norm() < 1e-10, "{i}");
        }
    }

    #[test]
    fn gauss_hermite_integrals() {
        let (x, w) = gauss_hermite(20);
        assert!((w.iter().sum::<f64>() - std::f64::consts::PI.sqrt()).abs() < 1e-13);
        let second: f64 = x.iter().zip(&w).map(|(a, b)| a * a * b).sum();
        assert!((second - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-13);
        assert!((hermite_quartic_raw([0; 4]) - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-13);
        assert!((hermite_quartic_integral([0; 4]) - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-14);
        assert!(hermite_quartic_raw([1, 0, 0, 0]).abs() < 1e-13);
        assert!(hermite_quartic_raw([2, 1, 2, 2]).abs() < 1e-13);
        assert!(hermite_quartic_integral([3, 3, 2, 1]).abs() < 1e-13);
        // ∫ψ_1²ψ_0² = 1/(2√(2π))
        let v = hermite_quartic_integral([1, 1, 0, 0]);
        assert!((v - 0.5 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn phase_law() {
        let r = 2.3;
        let m = [2, 0, 1, 2];
        let n = entry_cutoff(C64::new(r, 0.0), 2);
        let c0 = covariance_entry(C64::new(r, 0.0), m, n);
        for k in 0..10 {
            let phi = 0.61 * k as f64 - 2.0;
            let c = covariance_entry(C64::from_polar(r, phi), m, n);
            // with rows ⟨n|D(−β)|m1⟩⟨n|D(−β)|m2⟩* the exponent is φ(m1+m4−m2−m3)
            let q = (m[0] + m[3]) as f64 - (m[1] + m[2]) as f64;
            assert!((c - c0 * C64::from_polar(1.0, q * phi)).norm() < 1e-12);
        }
    }

    #[test]
    fn homodyne_half_ring_cancels_even_offsets() {
        let m_c = 3;
        let k = m_c + 1;
        let thetas: Vec<f64> = (0..=m_c).map(|j| std::f64::consts::PI * j as f64 / k as f64).collect();
        let h = homodyne_covariance(m_c, &thetas).unwrap();
        for r in 0..k * k {
            for c in 0..k * k {
                let k1 = (r / k) as i64 - (r % k) as i64;
                let k2 = (c / k) as i64 - (c % k) as i64;
                if k1 != k2 {
                    assert!(h[(r, c)].norm() < 1e-12, "{r} {c}");
                }
            }
        }
    }

    #[test]
    fn parity_slopes_small() {
        let radii: Vec<f64> = (0..=8).map(|i| 4.0 + i as f64).collect();
        let fits = parity_scaling_fit(1, &radii, 0.4).unwrap();
        let get = |b: [usize; 4]| fits.iter().find(|f| f.block == b).unwrap();
        assert!((get([1, 0, 0, 0]).fitted_slope + 1.0).abs() < 0.1);
        assert!(get([1, 1, 0, 0]).fitted_slope.abs() < 0.1);
        assert!(get([0; 4]).fitted_slope.abs() < 1e-12);
        assert!(parity_scaling_fit(1, &[4.0, 8.0], 0.0).is_err());
    }

    #[test]
    fn correspondence_improves_with_radius() {
        let a = homodyne_qn_correspondence(2, 10.0).unwrap();
        let b = homodyne_qn_correspondence(2, 14.0).unwrap();
        assert!(a.max_deviation < 0.05 && b.max_deviation < a.max_deviation);
        assert!(a.odd_homodyne < 1e-13 && b.odd_qn < a.odd_qn);
        let s = &a.per_angle_scale;
        assert!(s.iter().all(|&x| x > 0.0 && (x - s[0]).abs() < 0.01 * s[0]));
    }
}
