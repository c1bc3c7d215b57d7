mod common;

use common::{c, random_matrix, random_realizable, rng};
use proptest::prelude::*;
use qeq_core::linalg::{spectral_norm, CMatrix};
use qeq_core::realizability::{check_paraunitary, check_physical_realizability};
use qeq_core::{lyapunov_solve, FrequencyGrid, StateSpaceModel};

fn realizable() -> impl Strategy<Value = StateSpaceModel> {
    (any::<u64>(), 1usize..=4, 1usize..=3)
        .prop_map(|(seed, n, m)| random_realizable(&mut rng(seed), n, m))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn realizable_models_are_paraunitary(model in realizable()) {
        prop_assert!(check_physical_realizability(&model, 1e-10).passed);
        let grid = FrequencyGrid::linear(-30.0, 30.0, 241).unwrap();
        let report = check_paraunitary(&model.transfer(), &grid, 1e-8).unwrap();
        prop_assert!(report.passed, "residual {}", report.max_residual);
    }

    #[test]
    fn lyapunov_residual_is_small(model in realizable(), seed in any::<u64>()) {
        let n = model.states();
        let q = random_matrix(&mut rng(seed), n, n, 1.0);
        let q = &q * q.adjoint();
        let x = lyapunov_solve(model.a(), &q).unwrap();
        let res = spectral_norm(&(model.a() * &x + &x * model.a().adjoint() + &q));
        let scale = spectral_norm(model.a()) * spectral_norm(&x) + spectral_norm(&q);
        prop_assert!(res <= 1e-10 * scale);
        // Controllability-type Gramians of stable systems are positive semidefinite.
        prop_assert!(qeq_core::linalg::min_hermitian_eigenvalue(&x) >= -1e-10 * spectral_norm(&x));
    }

    #[test]
    fn series_multiplies_transfers(m1 in realizable(), seed in any::<u64>(), w in -5.0f64..5.0) {
        let m2 = random_realizable(&mut rng(seed), 2, m1.outputs());
        let both = m1.series(&m2).unwrap();
        let direct = both.eval_iw(w).unwrap();
        let product = m2.eval_iw(w).unwrap() * m1.eval_iw(w).unwrap();
        prop_assert!((&direct - &product).norm() <= 1e-9 * (1.0 + product.norm()));
        // Series connections of realizable systems stay realizable.
        prop_assert!(check_physical_realizability(&both, 1e-9).passed);
    }

    #[test]
    fn transfer_matches_direct_evaluation(model in realizable(), w in -5.0f64..5.0) {
        let a = model.eval_iw(w).unwrap();
        let b = model.transfer().eval_iw(w).unwrap();
        prop_assert!((&a - &b).norm() <= 1e-8 * (1.0 + a.norm()));
    }
}

#[test]
fn non_hurwitz_lyapunov_rejected() {
    let a = CMatrix::from_element(1, 1, c(0.5, 0.0));
    assert!(matches!(
        lyapunov_solve(&a, &CMatrix::identity(1, 1)),
        Err(qeq_core::QeqError::NotHurwitz { .. })
    ));
}

#[test]
fn direct_sum_is_block_diagonal() {
    let mut r = rng(11);
    let (m1, m2) = (
        random_realizable(&mut r, 2, 1),
        random_realizable(&mut r, 1, 2),
    );
    let sum = m1.direct_sum(&m2);
    let v = sum.eval_iw(0.7).unwrap();
    assert!((v[(0, 0)] - m1.eval_iw(0.7).unwrap()[(0, 0)]).norm() < 1e-12);
    assert!(v[(0, 1)].norm() < 1e-15 && v[(2, 0)].norm() < 1e-15);
}
