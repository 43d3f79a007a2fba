use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::frame::Frame;
use crate::error::{Error, Result};
use crate::sensing::{unvectorize, vectorize, RANK_TOLERANCE};
use crate::statesim::{hermitize, DensityMatrix};
use crate::{SensingMatrix64, C64};

fn complexify(b: &DVector<f64>) -> DVector<C64> {
    b.map(|x| C64::new(x, 0.0))
}

/// `‖A·vec(ρ̃) − b‖₂`.
pub fn residual(a: &SensingMatrix64, rho: &DMatrix<C64>, b: &DVector<f64>) -> f64 {
    (&a.entries * vectorize(rho) - complexify(b)).norm()
}

/// Pseudo-inverse solution `A⁺b`, Hermitian part.
pub fn least_squares(a: &SensingMatrix64, b: &DVector<f64>) -> Result<DMatrix<C64>> {
    if b.len() != a.nrows() {
        return Err(Error::Config(format!("{} frequencies for {} sensing rows", b.len(), a.nrows())));
    }
    let svd = a.entries.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let tol = RANK_TOLERANCE * smax;
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    let d = a.dimension();
    if rank < d {
        return Err(Error::InformationallyIncomplete { rank, dimension: d });
    }
    let x = svd.solve(&complexify(b), tol).map_err(|e| Error::Config(e.to_string()))?;
    Ok(hermitize(&unvectorize(&x)))
}

/// Euclidean projection of `v` onto the probability simplex.
pub fn simplex_projection(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cum += ui;
        let t = (cum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Frobenius-closest unit-trace PSD matrix to the Hermitian part of `m`.
/// The minimizer shares the eigenvectors of `m`, so only the spectrum is
/// projected.
pub fn project_psd_unit_trace(m: &DMatrix<C64>) -> DMatrix<C64> {
    let eig = SymmetricEigen::new(hermitize(m));
    let p = simplex_projection(eig.eigenvalues.as_slice());
    let d = DMatrix::from_diagonal(&DVector::from_iterator(p.len(), p.iter().map(|&x| C64::new(x, 0.0))));
    hermitize(&(&eig.eigenvectors * d * eig.eigenvectors.adjoint()))
}

/// Closest physical state (in the Hilbert–Schmidt norm of the operator) to
/// the coefficient matrix `raw` over `frame`.
pub fn project_physical_in(frame: &Frame, raw: &DMatrix<C64>) -> DMatrix<C64> {
    frame.from_orthonormal(&project_psd_unit_trace(&frame.to_orthonormal(raw)))
}

/// Fock-basis physical projection.
pub fn project_physical(raw: &DMatrix<C64>) -> DensityMatrix {
    DensityMatrix::fock(project_psd_unit_trace(raw))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FitOutcome {
    #[serde(with = "crate::io::complex_matrix")]
    pub rho: DMatrix<C64>,
    /// `‖A·vec(ρ̃) − b‖₂²` of the returned iterate.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective of every accepted iterate.
    pub history: Vec<f64>,
}

/// Accelerated projected gradient on `‖A·vec(ρ̃) − b‖₂²` over physical
/// states, with function-value restarts so accepted iterates never
/// increase the objective.
pub fn fit_physical(a: &SensingMatrix64, b: &DVector<f64>, max_iters: usize, tol: f64) -> Result<FitOutcome> {
    if b.len() != a.nrows() {
        return Err(Error::Config(format!("{} frequencies for {} sensing rows", b.len(), a.nrows())));
    }
    let frame = Frame::new(&a.basis);
    let bc = complexify(b);
    let objective = |sigma: &DMatrix<C64>| (&a.entries * vectorize(&frame.from_orthonormal(sigma)) - &bc).norm_squared();
    let gradient = |sigma: &DMatrix<C64>| {
        let r = &a.entries * vectorize(&frame.from_orthonormal(sigma)) - &bc;
        hermitize(&frame.from_orthonormal(&unvectorize(&(a.entries.adjoint() * r))))
    };
    let smax = a.entries.singular_values().max();
    let step = 1.0 / (smax * smax * frame.inverse_norm2()).max(f64::MIN_POSITIVE);
    let project = |m: &DMatrix<C64>| project_psd_unit_trace(m);
    let k = a.basis.ket_count();

    let mut x = DMatrix::from_diagonal_element(k, k, C64::new(1.0 / k as f64, 0.0));
    let mut fx = objective(&x);
    let mut y = x.clone();
    let mut theta = 1.0f64;
    let mut history = vec![fx];
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=max_iters {
        iterations = it;
        let mut xn = project(&(&y - gradient(&y) * C64::new(step, 0.0)));
        let mut fxn = objective(&xn);
        if fxn > fx {
            // restart from a plain projected-gradient step, which is monotone
            theta = 1.0;
            xn = project(&(&x - gradient(&x) * C64::new(step, 0.0)));
            fxn = objective(&xn);
            if fxn > fx {
                converged = true;
                break;
            }
        }
        let theta_n = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
        let momentum = C64::new((theta - 1.0) / theta_n, 0.0);
        let dx = &xn - &x;
        let change = dx.norm();
        y = &xn + dx * momentum;
        theta = theta_n;
        let drop = fx - fxn;
        x = xn;
        fx = fxn;
        history.push(fx);
        if change < tol && drop <= tol * tol.max(fx) {
            converged = true;
            break;
        }
    }
    Ok(FitOutcome { rho: frame.from_orthonormal(&x), objective: fx, iterations, converged, history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::{build_sensing, MeasurementSetting, Mode};
    use crate::statesim::{exact_qn, random_density};

    fn diag(v: &[f64]) -> DMatrix<C64> {
        DMatrix::from_diagonal(&DVector::from_iterator(v.len(), v.iter().map(|&x| C64::new(x, 0.0))))
    }

    #[test]
    fn simplex_examples() {
        assert_eq!(simplex_projection(&[1.5, -0.5]), vec![1.0, 0.0]);
        let p = simplex_projection(&[0.2, 0.3, 0.5]);
        assert!(p.iter().zip([0.2, 0.3, 0.5]).all(|(a, b)| (a - b).abs() < 1e-15));
        let p = simplex_projection(&[0.5, 0.5, 0.5]);
        assert!(p.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn projection_examples() {
        let t = project_physical(&diag(&[1.5, -0.5]));
        assert!((&t.entries - diag(&[1.0, 0.0])).norm() < 1e-14);
        let rho = random_density(3, 0.3, 2).unwrap();
        assert!((project_physical(&rho.entries).entries - &rho.entries).norm() < 1e-12);
        let twice = project_physical(&project_physical(&diag(&[0.9, 0.4, -0.2])).entries);
        assert!((twice.entries - project_physical(&diag(&[0.9, 0.4, -0.2])).entries).norm() < 1e-12);
    }

    fn fixture(m_c: usize) -> (DensityMatrix, SensingMatrix64, DVector<f64>) {
        let rho = random_density(m_c, 0.3, 17).unwrap();
        let settings: Vec<_> = (0..=m_c)
            .map(|j| {
                let beta = C64::from_polar(1.0 + 0.3 * j as f64, 1.7 * j as f64 + 0.2);
                MeasurementSetting::for_basis(beta, &rho.basis)
            })
            .collect();
        let a = build_sensing(&settings, &rho.basis, Mode::Qn).unwrap();
        let b = DVector::from_iterator(a.nrows(), settings.iter().flat_map(|s| exact_qn(&rho, s)[..=s.n_c].to_vec()));
        (rho, a, b)
    }

    #[test]
    fn least_squares_round_trip() {
        let (rho, a, b) = fixture(3);
        let est = least_squares(&a, &b).unwrap();
        assert!((&est - &rho.entries).norm() < 1e-9);
        let r = &a.entries * vectorize(&est) - complexify(&b);
        assert!((a.entries.adjoint() * r).norm() < 1e-9 * (a.entries.adjoint() * complexify(&b)).norm());
    }

    #[test]
    fn under_determined_is_rejected() {
        let (rho, _, _) = fixture(3);
        let settings: Vec<_> =
            (0..3).map(|j| MeasurementSetting::for_basis(C64::from_polar(1.3, j as f64), &rho.basis)).collect();
        let a = build_sensing(&settings, &rho.basis, Mode::Qn).unwrap();
        let b = DVector::zeros(a.nrows());
        assert!(matches!(least_squares(&a, &b), Err(Error::InformationallyIncomplete { rank: _, dimension: 16 })));
    }

    #[test]
    fn fit_agrees_with_least_squares_when_physical() {
        let (rho, a, b) = fixture(2);
        let fit = fit_physical(&a, &b, 20_000, 1e-13).unwrap();
        assert!(fit.converged);
        assert!((&fit.rho - &rho.entries).norm() < 1e-7);
        assert!(fit.history.windows(2).all(|w| w[1] <= w[0]));
    }
}
