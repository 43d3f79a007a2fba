use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{complex_from_f64, modulus, Real};

/// Minimum separation between coherent-state centres.
pub const MIN_ALPHA_SEPARATION: f64 = 1e-9;

/// Operator basis in which the density matrix is expanded.
///
/// Each basis is built from a list of kets `|α, m⟩ = D(α)|m⟩`; the operator
/// basis consists of all `|ket_a⟩⟨ket_b|`, vectorized with `b` fastest. For
/// the Fock basis that is column `m1·(m_c+1) + m2` for `|m1⟩⟨m2|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BasisSpec {
    Fock { m_c: usize },
    Coherent { alphas: Vec<Complex<f64>> },
    DisplacedFock { alphas: Vec<Complex<f64>>, m_c: usize },
}

impl BasisSpec {
    pub fn fock(m_c: usize) -> Self {
        BasisSpec::Fock { m_c }
    }

    pub fn coherent(alphas: Vec<Complex<f64>>) -> Result<Self> {
        let b = BasisSpec::Coherent { alphas };
        b.validate()?;
        Ok(b)
    }

    pub fn displaced_fock(alphas: Vec<Complex<f64>>, m_c: usize) -> Result<Self> {
        let b = BasisSpec::DisplacedFock { alphas, m_c };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(alphas) = self.alphas() {
            if alphas.is_empty() {
                return Err(Error::Config("basis needs at least one coherent centre".into()));
            }
            if alphas.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
                return Err(Error::Config("coherent centres must be finite".into()));
            }
            for (i, a) in alphas.iter().enumerate() {
                for b in &alphas[i + 1..] {
                    if (a - b).norm() <= MIN_ALPHA_SEPARATION {
                        return Err(Error::Config(format!("coherent centres {a} and {b} coincide")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            BasisSpec::Fock { .. } => "fock",
            BasisSpec::Coherent { .. } => "coherent",
            BasisSpec::DisplacedFock { .. } => "displaced_fock",
        }
    }

    pub fn alphas(&self) -> Option<&[Complex<f64>]> {
        match self {
            BasisSpec::Fock { .. } => None,
            BasisSpec::Coherent { alphas } | BasisSpec::DisplacedFock { alphas, .. } => Some(alphas),
        }
    }

    /// Per-component Fock cutoff (0 for the coherent basis).
    pub fn m_c(&self) -> usize {
        match self {
            BasisSpec::Fock { m_c } | BasisSpec::DisplacedFock { m_c, .. } => *m_c,
            BasisSpec::Coherent { .. } => 0,
        }
    }

    /// Same basis with a different per-component cutoff. The coherent basis
    /// becomes displaced-Fock when `m_c > 0`.
    pub fn with_m_c(&self, m_c: usize) -> Self {
        match self {
            BasisSpec::Fock { .. } => BasisSpec::Fock { m_c },
            BasisSpec::Coherent { alphas } | BasisSpec::DisplacedFock { alphas, .. } => {
                if m_c == 0 {
                    BasisSpec::Coherent { alphas: alphas.clone() }
                } else {
                    BasisSpec::DisplacedFock { alphas: alphas.clone(), m_c }
                }
            }
        }
    }

    /// The kets `(α, m)` spanning the state space, component-major.
    pub fn kets<T: Real>(&self) -> Vec<(Complex<T>, usize)> {
        let zero = Complex::new(T::zero(), T::zero());
        match self {
            BasisSpec::Fock { m_c } => (0..=*m_c).map(|m| (zero, m)).collect(),
            BasisSpec::Coherent { alphas } => alphas.iter().map(|a| (complex_from_f64(*a), 0)).collect(),
            BasisSpec::DisplacedFock { alphas, m_c } => alphas
                .iter()
                .flat_map(|a| (0..=*m_c).map(move |m| (complex_from_f64(*a), m)))
                .collect(),
        }
    }

    pub fn ket_count(&self) -> usize {
        match self {
            BasisSpec::Fock { m_c } => m_c + 1,
            BasisSpec::Coherent { alphas } => alphas.len(),
            BasisSpec::DisplacedFock { alphas, m_c } => alphas.len() * (m_c + 1),
        }
    }

    /// Number of operator-basis elements (columns of the sensing matrix).
    pub fn dimension(&self) -> usize {
        let k = self.ket_count();
        k * k
    }

    /// Column index of `|ket_a⟩⟨ket_b|`.
    #[inline]
    pub fn column(&self, a: usize, b: usize) -> usize {
        a * self.ket_count() + b
    }

    /// Radius `R` used by [`default_ncut`].
    fn support_radius(&self) -> f64 {
        let sm = (self.m_c() as f64).sqrt();
        match self.alphas() {
            None => sm,
            Some(alphas) => alphas.iter().map(|a| a.norm()).fold(0.0, f64::max) + sm,
        }
    }
}

/// Maximal resolved excitation number for a displacement: `⌈μ + 6√μ + 10⌉`
/// with `μ = (|β| + R)²`, where `R` bounds the phase-space extent of the basis.
pub fn default_ncut<T: Real>(beta: Complex<T>, basis: &BasisSpec) -> usize {
    let r = modulus(beta).to_f64() + basis.support_radius();
    let mu = r * r;
    (mu + 6.0 * mu.sqrt() + 10.0).ceil() as usize
}

/// One displacement with its excitation-count cap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct MeasurementSetting<T> {
    pub beta: Complex<T>,
    pub n_c: usize,
}

impl<T: Real> MeasurementSetting<T> {
    pub fn new(beta: Complex<T>, n_c: usize) -> Self {
        Self { beta, n_c }
    }

    /// Setting whose cap follows [`default_ncut`] for `basis`.
    pub fn for_basis(beta: Complex<T>, basis: &BasisSpec) -> Self {
        Self { beta, n_c: default_ncut(beta, basis) }
    }
}
