use nalgebra::{DMatrix, SymmetricEigen};

use crate::sensing::BasisSpec;
use crate::statesim::{gram, hermitize};
use crate::C64;

/// Change of frame between the coefficient matrix `ρ̃` of a (possibly
/// non-orthogonal) basis and the operator `σ = S ρ̃ S` in an orthonormal
/// basis of its span, `S = G^{1/2}`.
#[derive(Clone, Debug)]
pub struct Frame {
    s: Option<(DMatrix<C64>, DMatrix<C64>)>,
}

impl Frame {
    pub fn new(basis: &BasisSpec) -> Self {
        match basis {
            BasisSpec::Fock { .. } => Frame { s: None },
            _ => {
                let eig = SymmetricEigen::new(hermitize(&gram(basis)));
                let v = &eig.eigenvectors;
                let root = |f: fn(f64) -> f64| {
                    let d = eig.eigenvalues.map(|l| C64::new(f(l.max(1e-300)), 0.0));
                    v * DMatrix::from_diagonal(&d) * v.adjoint()
                };
                Frame { s: Some((root(f64::sqrt), root(|l| 1.0 / l.sqrt()))) }
            }
        }
    }

    pub fn is_identity(&self) -> bool {
        self.s.is_none()
    }

    pub fn to_orthonormal(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        match &self.s {
            None => rho.clone(),
            Some((s, _)) => s * rho * s,
        }
    }

    pub fn from_orthonormal(&self, sigma: &DMatrix<C64>) -> DMatrix<C64> {
        match &self.s {
            None => sigma.clone(),
            Some((_, si)) => si * sigma * si,
        }
    }

    /// `S⁻¹ m`.
    pub fn from_orthonormal_half(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        match &self.s {
            None => m.clone(),
            Some((_, si)) => si * m,
        }
    }

    /// Largest singular value of `S⁻¹` squared (1 for Fock).
    pub fn inverse_norm2(&self) -> f64 {
        match &self.s {
            None => 1.0,
            Some((_, si)) => si.singular_values().max().powi(2),
        }
    }
}
