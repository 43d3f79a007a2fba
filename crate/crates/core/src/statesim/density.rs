use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::displaced_amplitude;
use crate::sensing::BasisSpec;
use crate::C64;

/// Coefficient matrix `ρ̃` of `ρ = Σ ρ̃_ab |ket_a⟩⟨ket_b|` over the kets of
/// `basis`. For the Fock basis this is the ordinary density matrix; for the
/// (displaced) coherent bases the kets are not orthogonal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    pub basis: BasisSpec,
    #[serde(with = "crate::io::complex_matrix")]
    pub entries: DMatrix<C64>,
}

/// Overlaps `G_ab = ⟨ket_a|ket_b⟩`.
pub fn gram(basis: &BasisSpec) -> DMatrix<C64> {
    let kets = basis.kets::<f64>();
    DMatrix::from_fn(kets.len(), kets.len(), |a, b| {
        let (aa, ma) = kets[a];
        let (ab, mb) = kets[b];
        displaced_amplitude(ma, aa, ab, mb)
    })
}

/// Hermitian square root (and inverse square root) of a PSD matrix.
pub fn psd_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let eig = SymmetricEigen::new(hermitize(m));
    let d = eig.eigenvalues.map(|l| C64::new(l.max(0.0).sqrt(), 0.0));
    &eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.adjoint()
}

pub fn hermitize(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

impl DensityMatrix {
    pub fn new(basis: BasisSpec, entries: DMatrix<C64>) -> Result<Self> {
        let k = basis.ket_count();
        if entries.shape() != (k, k) {
            return Err(Error::Config(format!("density matrix must be {k}×{k}, got {:?}", entries.shape())));
        }
        Ok(DensityMatrix { basis, entries })
    }

    pub fn fock(entries: DMatrix<C64>) -> Self {
        let m_c = entries.nrows() - 1;
        DensityMatrix { basis: BasisSpec::fock(m_c), entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// The operator in an orthonormal basis of the span of the kets:
    /// `G^{1/2} ρ̃ G^{1/2}`. Equal to `entries` for the Fock basis.
    pub fn orthonormal_form(&self) -> DMatrix<C64> {
        match self.basis {
            BasisSpec::Fock { .. } => self.entries.clone(),
            _ => {
                let s = psd_sqrt(&gram(&self.basis));
                &s * &self.entries * &s
            }
        }
    }

    pub fn trace(&self) -> f64 {
        match self.basis {
            BasisSpec::Fock { .. } => self.entries.trace().re,
            _ => (&self.entries * gram(&self.basis)).trace().re,
        }
    }

    pub fn purity(&self) -> f64 {
        let o = self.orthonormal_form();
        (&o * &o).trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitize(&self.orthonormal_form()).symmetric_eigenvalues().min()
    }

    /// Checks the density-matrix invariants (Hermitian, unit trace, PSD).
    pub fn validate(&self, tol: f64) -> Result<()> {
        let herm = (&self.entries - self.entries.adjoint()).camax();
        if herm > tol {
            return Err(Error::Config(format!("density matrix is not Hermitian (deviation {herm:.3e})")));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > tol {
            return Err(Error::Config(format!("density matrix trace is {tr}")));
        }
        let lmin = self.min_eigenvalue();
        if lmin < -tol.max(1e-10) {
            return Err(Error::NotPositiveSemidefinite(lmin));
        }
        Ok(())
    }

    /// `V ρ̃ V†` with `V[n, a] = ⟨n|ket_a⟩`, `n ≤ n_max`.
    pub fn to_fock(&self, n_max: usize) -> DensityMatrix {
        let kets = self.basis.kets::<f64>();
        let v = DMatrix::from_fn(n_max + 1, kets.len(), |n, a| {
            displaced_amplitude(n, C64::new(0.0, 0.0), kets[a].0, kets[a].1)
        });
        DensityMatrix::fock(&v * &self.entries * v.adjoint())
    }
}

/// Random Fock-basis state: `G G†/tr` with complex Gaussian `G`, blended
/// with a random pure state by `purity_knob` (1 gives the pure state).
pub fn random_density(m_c: usize, purity_knob: f64, seed: u64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&purity_knob) {
        return Err(Error::Config(format!("purity_knob must lie in [0, 1], got {purity_knob}")));
    }
    let k = m_c + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = || C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
    let g = DMatrix::from_fn(k, k, |_, _| gauss());
    let psi = DMatrix::from_fn(k, 1, |_, _| gauss());
    let mixed = &g * g.adjoint();
    let mixed = &mixed / C64::new(mixed.trace().re, 0.0);
    let pure = &psi * psi.adjoint();
    let pure = &pure / C64::new(pure.trace().re, 0.0);
    let rho = mixed * C64::new(1.0 - purity_knob, 0.0) + pure * C64::new(purity_knob, 0.0);
    Ok(DensityMatrix::fock(hermitize(&rho)))
}

/// `ρ = Σ c_ij |α_i⟩⟨α_j| / N` for a Hermitian PSD coefficient matrix.
pub fn cat_density(alphas: &[C64], coefficients: &DMatrix<C64>) -> Result<DensityMatrix> {
    let basis = BasisSpec::coherent(alphas.to_vec())?;
    let p = alphas.len();
    if coefficients.shape() != (p, p) {
        return Err(Error::Config(format!("coefficients must be {p}×{p}")));
    }
    if (coefficients - coefficients.adjoint()).camax() > 1e-12 {
        return Err(Error::Config("coefficient matrix is not Hermitian".into()));
    }
    let lmin = hermitize(coefficients).symmetric_eigenvalues().min();
    if lmin < -1e-12 {
        return Err(Error::NotPositiveSemidefinite(lmin));
    }
    let mut rho = DensityMatrix { basis, entries: coefficients.clone() };
    let norm = rho.trace();
    if !(norm > 0.0) {
        return Err(Error::Config("coefficient matrix describes the zero operator".into()));
    }
    rho.entries /= C64::new(norm, 0.0);
    Ok(rho)
}

/// Pure superposition `Σ c_i |α_i⟩`, normalized.
pub fn cat_pure(alphas: &[C64], amplitudes: &[C64]) -> Result<DensityMatrix> {
    let v = DMatrix::from_column_slice(amplitudes.len(), 1, amplitudes);
    cat_density(alphas, &(&v * v.adjoint()))
}
