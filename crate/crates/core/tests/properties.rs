use cvtomo::design::{fock_condition, ring_settings};
use cvtomo::fisher::fisher_det_map;
use cvtomo::reconstruct::{fidelity_matrices, project_physical, project_psd_unit_trace, simplex_projection, trace_distance_matrices};
use cvtomo::sensing::{covariance_kappa, covariance_of_settings, pinch, BasisSpec, MeasurementSetting};
use cvtomo::statesim::{cat_density, exact_qn, hermitize, random_density};
use cvtomo::C64;
use cvtomo::design::RingFamily;
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

fn hermitian(d: usize) -> impl Strategy<Value = DMatrix<C64>> {
    prop::collection::vec(-2.0f64..2.0, 2 * d * d).prop_map(move |v| {
        let m = DMatrix::from_fn(d, d, |i, j| C64::new(v[2 * (i * d + j)], v[2 * (i * d + j) + 1]));
        hermitize(&m)
    })
}

fn beta() -> impl Strategy<Value = C64> {
    (0.2f64..3.0, 0.0f64..std::f64::consts::TAU).prop_map(|(r, p)| C64::from_polar(r, p))
}

fn min_eig(m: &DMatrix<C64>) -> f64 {
    SymmetricEigen::new(hermitize(m)).eigenvalues.min()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projection_is_physical_and_idempotent(m in hermitian(4)) {
        let p = project_psd_unit_trace(&m);
        let tr: C64 = p.trace();
        prop_assert!((tr.re - 1.0).abs() < 1e-12 && tr.im.abs() < 1e-12);
        prop_assert!(min_eig(&p) >= -1e-12);
        let pp = project_psd_unit_trace(&p);
        prop_assert!((&pp - &p).norm() < 1e-12);
        prop_assert_eq!(project_physical(&m).entries, p);
    }

    #[test]
    fn simplex_projection_lands_on_simplex(v in prop::collection::vec(-3.0f64..3.0, 1..12)) {
        let p = simplex_projection(&v);
        prop_assert!(p.iter().all(|&x| x >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // no feasible point is closer: compare with the vertices
        let d2 = |q: &[f64]| v.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        for i in 0..v.len() {
            let mut e = vec![0.0; v.len()];
            e[i] = 1.0;
            prop_assert!(d2(&p) <= d2(&e) + 1e-12);
        }
    }

    #[test]
    fn fidelity_symmetric_and_above_one_minus_trace_distance(s1 in 0u64..10_000, s2 in 0u64..10_000, k1 in 0.0f64..1.0, k2 in 0.0f64..1.0) {
        let a = random_density(3, k1, s1).unwrap().entries;
        let b = random_density(3, k2, s2).unwrap().entries;
        let f = fidelity_matrices(&a, &b);
        prop_assert!((f - fidelity_matrices(&b, &a)).abs() < 1e-10);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f));
        prop_assert!(f >= 1.0 - trace_distance_matrices(&a, &b) - 1e-12);
        prop_assert!((fidelity_matrices(&a, &a) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn count_distributions_are_normalized(seed in 0u64..10_000, b in beta()) {
        let rho = random_density(3, 0.5, seed).unwrap();
        let q = exact_qn(&rho, &MeasurementSetting::for_basis(b, &rho.basis));
        prop_assert!(q.iter().all(|&p| p >= 0.0));
        prop_assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // overflow (last entry) is small under the truncation rule
        prop_assert!(*q.last().unwrap() < 1e-10);
    }

    #[test]
    fn kappa_invariant_under_global_rotation(r in 0.5f64..4.0, phi in 0.0f64..6.28, m_c in 1usize..4) {
        let s = ring_settings(RingFamily::Hrc, m_c, r).unwrap();
        let rot: Vec<_> = s.iter().map(|x| MeasurementSetting::new(x.beta * C64::from_polar(1.0, phi), x.n_c)).collect();
        let (k1, k2) = (fock_condition(&s, m_c).kappa, fock_condition(&rot, m_c).kappa);
        prop_assert!((k1 - k2).abs() < 1e-8 * k1);
    }

    #[test]
    fn covariance_additive_and_pinching_never_hurts(bs in prop::collection::vec(beta(), 4..7)) {
        let basis = BasisSpec::fock(2);
        let s: Vec<_> = bs.iter().map(|&b| MeasurementSetting::for_basis(b, &basis)).collect();
        let all = covariance_of_settings(&s, &basis).c;
        let parts = covariance_of_settings(&s[..2], &basis).c + covariance_of_settings(&s[2..], &basis).c;
        prop_assert!((&all - &parts).norm() < 1e-13 * all.norm());
        prop_assert!((&all - all.adjoint()).norm() < 1e-14 * all.norm());
        let cb = covariance_of_settings(&s, &basis);
        let p = pinch(&cb).unwrap();
        prop_assert!((p.c.trace() - cb.c.trace()).norm() < 1e-12 * cb.c.trace().norm());
        prop_assert!(covariance_kappa(&p.c) <= covariance_kappa(&cb.c) * (1.0 + 1e-9));
    }
}

#[test]
fn fisher_determinant_invariant_under_relabeling() {
    let alphas = [C64::new(1.8, 0.2), C64::new(-1.1, 1.4), C64::new(-0.3, -1.9)];
    let w = DMatrix::from_fn(3, 3, |i, j| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.3, 0.1 * (i as f64 - j as f64)) });
    let rho = cat_density(&alphas, &w).unwrap();
    let grid = [C64::new(0.2, 0.3), C64::new(-1.0, 0.0), C64::new(1.5, -1.0)];
    let a = fisher_det_map(&rho.entries, &alphas, &grid).unwrap();
    let perm = [2usize, 0, 1];
    let alphas_p: Vec<C64> = perm.iter().map(|&i| alphas[i]).collect();
    let rho_p = DMatrix::from_fn(3, 3, |i, j| rho.entries[(perm[i], perm[j])]);
    let b = fisher_det_map(&rho_p, &alphas_p, &grid).unwrap();
    for (x, y) in a.det_values.iter().zip(&b.det_values) {
        assert!((x - y).abs() <= 1e-8 * x.abs().max(1e-300), "{x} vs {y}");
    }
}
