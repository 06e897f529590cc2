use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use quasifree::builders;
use quasifree::car::{self, CarIsometry, StatDim};
use quasifree::ccr::{self, CcrIsometry};
use quasifree::dirac::{self, CircleModel};
use quasifree::fock::{FermiFock, ModeFock};
use quasifree::gauge;
use quasifree::linalg::{self, binomial, frobenius, CMatrix, CVector, C64};
use quasifree::selfdual::Half;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn unit_circle_points(n: usize, seed: u64) -> Vec<C64> {
    let mut r = rng(seed);
    let u = linalg::haar_unitary(n.max(1), &mut r);
    linalg::schur_eigenvalues(&u).into_iter().take(n).collect()
}

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + b.norm())
}

fn sym_dimension(n: usize, l: usize) -> u64 {
    match n {
        0 => u64::from(l == 0),
        _ => binomial(n + l - 1, l).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_car_members_follow_the_index_law(n in 1usize..4, steps in 0usize..3, seed in any::<u64>()) {
        let v = builders::random_car_isometry(n, steps, &mut rng(seed));
        let iso = CarIsometry::from_truncation(v.clone()).unwrap();
        let data = car::car_charge_data(&iso, car::TAU).unwrap();
        prop_assert_eq!(data.ind, 2 * steps);
        prop_assert_eq!(data.stat_dim, StatDim::Finite(1 << steps));
        prop_assert_eq!(data.k.dim(), steps);
        prop_assert!(data.checks.idempotent <= 1e-10);
        prop_assert!(data.checks.selfadjoint <= 1e-10);
        prop_assert!(data.checks.conjugate <= 1e-10);
        prop_assert!(data.checks.recovery_h <= car::TAU_RECOVERY);
        prop_assert!(data.checks.recovery_t <= car::TAU_RECOVERY);

        // The new state restricted to the image of V is the old Fock state.
        let pulled = v.entries().adjoint() * data.p.entries() * v.entries();
        prop_assert!(frobenius(&(pulled - v.domain().p1().entries())) <= 1e-9);
    }

    #[test]
    fn car_pairing_is_antisymmetric_and_kills_h(n in 1usize..4, steps in 0usize..3, seed in any::<u64>()) {
        let v = builders::random_car_isometry(n, steps, &mut rng(seed));
        let iso = CarIsometry::from_truncation(v).unwrap();
        let h = car::compute_h(&iso).unwrap();
        let t = car::compute_t_car(&iso, &h, 1e-9).unwrap().block(Half::Two, Half::One);
        prop_assert!(frobenius(&(t.transpose() + &t)) <= 1e-9);
        let nh = t.nrows();
        prop_assert!(frobenius(&(&t * h.frame().rows(0, nh))) <= 1e-9);
    }

    #[test]
    fn random_ccr_members_follow_the_index_law(n in 1usize..4, steps in 0usize..3, seed in any::<u64>()) {
        let v = builders::random_ccr_isometry(n, steps, 0.3, &mut rng(seed));
        let iso = CcrIsometry::new(v).unwrap();
        let data = ccr::ccr_charge_data(&iso, 1e-9).unwrap();
        prop_assert_eq!(data.ind, 2 * steps);
        let expected = if steps == 0 { StatDim::Finite(1) } else { StatDim::Infinite };
        prop_assert_eq!(data.stat_dim, expected);
        prop_assert_eq!(data.k.dim(), steps);
        let c = &data.projection.checks;
        prop_assert!(c.idempotent <= 1e-9);
        prop_assert!(c.kappa_selfadjoint <= 1e-9);
        prop_assert!(c.t_symmetry <= 1e-9);
        prop_assert!(c.t_norm < 1.0);
        prop_assert!(data.k.gram_defect() <= 1e-9);
    }

    #[test]
    fn characters_are_symmetric_functions(n in 1usize..6, l in 0usize..6, seed in any::<u64>()) {
        let eigs = unit_circle_points(n, seed);
        let mut shuffled = eigs.clone();
        shuffled.shuffle(&mut rng(seed ^ 0x5eed));
        prop_assert!(close(gauge::char_sym(&eigs, l), gauge::char_sym(&shuffled, l), 1e-12));
        if l <= n {
            let a = gauge::char_lambda(&eigs, l).unwrap();
            let b = gauge::char_lambda(&shuffled, l).unwrap();
            prop_assert!(close(a, b, 1e-12));
        } else {
            prop_assert!(gauge::char_lambda(&eigs, l).is_err());
        }
    }

    #[test]
    fn characters_at_the_identity_are_dimensions(n in 0usize..7, l in 0usize..7) {
        let ones = vec![linalg::ONE; n];
        prop_assert_eq!(gauge::char_sym(&ones, l), C64::new(sym_dimension(n, l) as f64, 0.0));
        if l <= n {
            prop_assert_eq!(gauge::char_lambda(&ones, l).unwrap(), C64::new(binomial(n, l).unwrap() as f64, 0.0));
        }
    }

    #[test]
    fn exterior_and_symmetric_characters_are_inverse_series(n in 1usize..6, m in 1usize..6, seed in any::<u64>()) {
        let eigs = unit_circle_points(n, seed);
        let mut sum = linalg::ZERO;
        for l in 0..=m.min(n) {
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            sum += gauge::char_lambda(&eigs, l).unwrap() * gauge::char_sym(&eigs, m - l) * sign;
        }
        prop_assert!(sum.norm() <= 1e-10);
    }

    #[test]
    fn level_traces_do_not_depend_on_the_frame(n in 1usize..4, seed in any::<u64>()) {
        let mut r = rng(seed);
        let u = linalg::haar_unitary(n, &mut r);
        let q = linalg::haar_unitary(n, &mut r);
        let rotated = q.adjoint() * &u * &q;
        let det = C64::from_polar(1.0, 0.7);
        for l in 0..=n {
            let labels = linalg::combinations(n, l);
            let a = gauge::lambda_matrix(det, &u, &labels).trace();
            let b = gauge::lambda_matrix(det, &rotated, &labels).trace();
            prop_assert!(close(a, b, 1e-10));
            let eigs = linalg::schur_eigenvalues(&u);
            prop_assert!(close(a, det * gauge::char_lambda(&eigs, l).unwrap(), 1e-10));
        }
        for l in 0..4 {
            let labels = linalg::multisets(n, l);
            let a = gauge::sym_matrix(&u, &labels).trace();
            let b = gauge::sym_matrix(&rotated, &labels).trace();
            prop_assert!(close(a, b, 1e-10));
        }
    }

    #[test]
    fn second_quantization_is_covariant(n in 1usize..5, seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = FermiFock::new(n, 1 << n).unwrap();
        let u = linalg::haar_unitary(n, &mut r);
        let w = linalg::haar_unitary(n, &mut r);
        let x = linalg::random_complex_vector(f.dim(), &mut r);
        let lhs = f.apply_gamma(&(&u * &w), &x);
        let rhs = f.apply_gamma(&u, &f.apply_gamma(&w, &x));
        prop_assert!(linalg::vec_norm(&(lhs - rhs)) <= 1e-10);

        let g = linalg::random_complex_vector(2 * n, &mut r);
        let lifted = gauge::lift_k1(&u);
        let back = f.apply_gamma(&u.adjoint(), &x);
        let lhs = f.apply_gamma(&u, &f.apply_pi(&g, &back));
        let rhs = f.apply_pi(&lifted.apply(&g), &x);
        prop_assert!(linalg::vec_norm(&(lhs - rhs)) <= 1e-10);
    }

    #[test]
    fn fields_satisfy_the_anticommutator(n in 1usize..5, seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = FermiFock::new(n, 1 << n).unwrap();
        let g: CVector = linalg::random_complex_vector(2 * n, &mut r);
        let h: CVector = linalg::random_complex_vector(2 * n, &mut r);
        let pg = f.pi_matrix(&g);
        let ph = f.pi_matrix(&h);
        let anti = &pg.adjoint() * &ph + &ph * pg.adjoint();
        let expected = CMatrix::identity(f.dim(), f.dim()) * linalg::inner(&g, &h);
        prop_assert!(frobenius(&(anti - expected)) <= 1e-10);
    }

    #[test]
    fn circle_rows_are_normalized_within_the_tail(w in 4usize..80) {
        let w = 4 * (w / 4).max(1);
        let model = CircleModel::with_default_range(w).unwrap();
        prop_assert!(model.row_norm_deviation() <= model.tail_bound());
    }

    #[test]
    fn cayley_lands_on_the_circle(x in -1e6f64..1e6) {
        prop_assert!((dirac::cayley(x).norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn overlaps_are_symmetric_under_joint_reflection(m in -20i64..20, n in -40i64..40) {
        let a = dirac::overlap(m, n);
        let b = dirac::overlap(-m, -n);
        prop_assert!((a - b).abs() <= 1e-14);
    }
}
