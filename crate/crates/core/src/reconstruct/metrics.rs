use nalgebra::{DMatrix, SymmetricEigen};

use crate::sensing::default_ncut;
use crate::statesim::{hermitize, psd_sqrt, DensityMatrix};
use crate::C64;

/// Uhlmann fidelity `Tr√(√ρ σ √ρ)` of two operators in the same orthonormal
/// basis.
pub fn fidelity_matrices(rho: &DMatrix<C64>, sigma: &DMatrix<C64>) -> f64 {
    let r = psd_sqrt(rho);
    let m = hermitize(&(&r * sigma * &r));
    SymmetricEigen::new(m).eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).sum()
}

pub fn trace_distance_matrices(rho: &DMatrix<C64>, sigma: &DMatrix<C64>) -> f64 {
    0.5 * hermitize(&(rho - sigma)).symmetric_eigenvalues().iter().map(|l| l.abs()).sum::<f64>()
}

/// Both states as operators on a common orthonormal basis: the shared
/// orthonormal frame when the bases agree, a common Fock truncation otherwise.
fn common_frame(rho: &DensityMatrix, sigma: &DensityMatrix) -> (DMatrix<C64>, DMatrix<C64>) {
    if rho.basis == sigma.basis {
        return (rho.orthonormal_form(), sigma.orthonormal_form());
    }
    let zero = C64::new(0.0, 0.0);
    let n = default_ncut(zero, &rho.basis).max(default_ncut(zero, &sigma.basis));
    (rho.to_fock(n).entries, sigma.to_fock(n).entries)
}

pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let (a, b) = common_frame(rho, sigma);
    fidelity_matrices(&a, &b)
}

/// `½‖ρ − σ‖_tr`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let (a, b) = common_frame(rho, sigma);
    trace_distance_matrices(&a, &b)
}

/// Fidelity lower bound `1 − ½ κ √r ‖ρ‖_F ‖δb‖/‖b‖`, floored at 0.
pub fn error_bound(kappa: f64, rank: usize, rho_norm_f: f64, rel_noise: f64) -> f64 {
    (1.0 - 0.5 * kappa * (rank as f64).sqrt() * rho_norm_f * rel_noise).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statesim::random_density;

    fn diag(v: &[f64]) -> DMatrix<C64> {
        DMatrix::from_fn(v.len(), v.len(), |i, j| C64::new(if i == j { v[i] } else { 0.0 }, 0.0))
    }

    #[test]
    fn fidelity_examples() {
        let rho = random_density(3, 0.5, 1).unwrap();
        assert!((fidelity(&rho, &rho) - 1.0).abs() < 1e-10);
        assert!(fidelity_matrices(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0])).abs() < 1e-12);
        assert!((fidelity_matrices(&diag(&[1.0, 0.0]), &diag(&[0.5, 0.5])) - 0.5f64.sqrt()).abs() < 1e-12);
        let sigma = random_density(3, 0.1, 2).unwrap();
        assert!((fidelity(&rho, &sigma) - fidelity(&sigma, &rho)).abs() < 1e-10);
    }

    #[test]
    fn trace_distance_examples() {
        let rho = random_density(2, 0.5, 1).unwrap();
        assert!(trace_distance(&rho, &rho).abs() < 1e-14);
        assert!((trace_distance_matrices(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0])) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn bound_shape() {
        assert_eq!(error_bound(3.0, 4, 0.8, 0.0), 1.0);
        assert!(error_bound(3.0, 4, 0.8, 0.01) > error_bound(3.1, 4, 0.8, 0.01));
        assert_eq!(error_bound(1e6, 4, 0.8, 0.1), 0.0);
    }
}
