use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gauge::{phase_free_distance, zxz_nearest};
use super::*;
use crate::error::Error;
use crate::optim::{bfgs, BfgsOptions};
use crate::qcore::{eigenvalues, identity, max_abs, pauli, C64};
use crate::transfer::overlap_density;

fn random_params(rng: &mut ChaCha8Rng, template: Template) -> AnsatzParams {
    let angles = (0..template.n_params())
        .map(|_| rng.random_range(-PI..PI))
        .collect();
    AnsatzParams::new(template, angles).unwrap()
}

fn fidelity(a: &AnsatzParams, b: &AnsatzParams) -> f64 {
    overlap_density(&params_tensor(a), &params_tensor(b)).unwrap()
}

#[test]
fn full15_zero_is_identity() {
    let u = build_unitary(&AnsatzParams::zeros(Template::Full15));
    assert!(max_abs(&(u - identity(4))) < 1e-15);
}

#[test]
fn reduced8_zero_is_the_bare_entangler_pair() {
    // Two exp(−iπ/4 Z⊗Z) layers compose to −i Z⊗Z.
    let u = build_unitary(&AnsatzParams::zeros(Template::Reduced8));
    let zz = kron(&pauli(Axis::Z), &pauli(Axis::Z)) * c(0.0, -1.0);
    assert!(max_abs(&(u - zz)) < 1e-15);
}

#[test]
fn wrong_angle_count_rejected() {
    assert!(AnsatzParams::new(Template::Reduced8, vec![0.0; 7]).is_err());
    assert!(AnsatzParams::new(Template::Full15, vec![0.0; 8]).is_err());
    assert!(AnsatzParams::new(Template::Reduced8, vec![f64::NAN; 8]).is_err());
}

#[test]
fn tensor_of_simple_unitaries() {
    let a = mps_tensor(&identity(4)).unwrap();
    assert!(max_abs(&(a.slice(0) - identity(2))) < 1e-15);
    assert!(max_abs(a.slice(1)) < 1e-15);

    let a = mps_tensor(&kron(&pauli(Axis::X), &identity(2))).unwrap();
    assert!(max_abs(a.slice(0)) < 1e-15);
    assert!(max_abs(&(a.slice(1) - identity(2))) < 1e-15);

    assert!(mps_tensor(&(identity(4) * c(1.1, 0.0))).is_err());
    assert!(mps_tensor(&identity(2)).is_err());
}

#[test]
fn angle_helpers() {
    assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
    assert!((wrap_angle(-PI) - PI).abs() < 1e-12);
    assert!((wrap_angle(0.3 - 4.0 * PI) - 0.3).abs() < 1e-12);
    assert!((nearest_branch(0.1, 6.0) - (0.1 + 2.0 * PI)).abs() < 1e-12);
}

#[test]
fn zxz_decomposition_reconstructs() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..200 {
        let (a, b, g) = (
            rng.random_range(-4.0..4.0),
            rng.random_range(-4.0..4.0),
            rng.random_range(-4.0..4.0),
        );
        let m = rot(Axis::Z, a) * rot(Axis::X, b) * rot(Axis::Z, g);
        let (a2, b2, g2) = zxz_nearest(&m, (a, b, g));
        assert!((a2 - a).abs() < 1e-9 && (b2 - b).abs() < 1e-9 && (g2 - g).abs() < 1e-9);
        let (a3, b3, g3) = zxz_nearest(&m, (0.0, 0.0, 0.0));
        let m3 = rot(Axis::Z, a3) * rot(Axis::X, b3) * rot(Axis::Z, g3);
        assert!(phase_free_distance(&m3, &m) < 1e-10);
    }
    // Degenerate middle angles.
    for b in [0.0, PI] {
        let m = rot(Axis::Z, 0.4) * rot(Axis::X, b) * rot(Axis::Z, -1.1);
        let (a2, b2, g2) = zxz_nearest(&m, (0.4, b, -1.1));
        let m2 = rot(Axis::Z, a2) * rot(Axis::X, b2) * rot(Axis::Z, g2);
        assert!(phase_free_distance(&m2, &m) < 1e-10);
    }
}

#[test]
fn x_gauge_trivial_angles() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = random_params(&mut rng, Template::Reduced8);
    let q = x_gauge_rotate(&p, 0.0).unwrap();
    for (a, b) in p.angles().iter().zip(q.angles()) {
        assert!((a - b).abs() < 1e-12);
    }
    let q = x_gauge_rotate(&p, 2.0 * PI).unwrap();
    assert!((q.angles()[7] - (p.angles()[7] - 2.0 * PI)).abs() < 1e-12);
    for i in [0, 1, 4] {
        assert!((q.angles()[i] - p.angles()[i]).abs() < 1e-9);
    }
    assert!((fidelity(&p, &q) - 1.0).abs() < 1e-10);
}

#[test]
fn x_gauge_conjugates_the_tensor() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let p = random_params(&mut rng, Template::Reduced8);
    let theta = 0.7;
    let q = x_gauge_rotate(&p, theta).unwrap();
    let (a, b) = (params_tensor(&p), params_tensor(&q));
    let g = rot(Axis::X, theta);
    let lhs = CMatrix::from_fn(4, 2, |r, col| b.slice(r / 2)[(r % 2, col)]);
    let rhs = CMatrix::from_fn(4, 2, |r, col| {
        (g.adjoint() * a.slice(r / 2) * &g)[(r % 2, col)]
    });
    assert!(phase_free_distance(&lhs, &rhs) < 1e-12);
    assert!((fidelity(&p, &q) - 1.0).abs() < 1e-10);
}

#[test]
fn gauge_tools_reject_full15() {
    let p = AnsatzParams::zeros(Template::Full15);
    assert!(matches!(
        x_gauge_rotate(&p, 0.1),
        Err(Error::InvalidArgument(_))
    ));
    assert!(matches!(
        reparametrise(&p, 0.1),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn match_gauge_identity_and_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let p = random_params(&mut rng, Template::Reduced8);
        let same = match_gauge(&p, &p).unwrap();
        assert!(phase_free_distance(&same.gauge, &identity(2)) < 1e-9);
        assert!(same.residual.abs() < 1e-10);

        let theta = rng.random_range(-PI..PI);
        let q = x_gauge_rotate(&p, theta).unwrap();
        let m = match_gauge(&p, &q).unwrap();
        assert!(phase_free_distance(&m.gauge, &rot(Axis::X, theta)) < 1e-8);
        assert!(m.residual.abs() < 1e-10);
    }
}

#[test]
fn match_gauge_residual_matches_dense_eigenvalues() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..20 {
        let p = random_params(&mut rng, Template::Full15);
        let q = random_params(&mut rng, Template::Full15);
        let (a, b) = (params_tensor(&p), params_tensor(&q));
        let e = a.slice(0).kronecker(&b.slice(0).conjugate())
            + a.slice(1).kronecker(&b.slice(1).conjugate());
        let lam = eigenvalues(&e).unwrap()[0].norm();
        match match_gauge(&p, &q) {
            Ok(m) => assert!((m.residual - (1.0 - lam)).abs() < 1e-10),
            Err(Error::Ambiguous { .. }) => {}
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn reparametrise_to_same_angle_is_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let p = random_params(&mut rng, Template::Reduced8);
    let r = reparametrise(&p, p.angles()[7]).unwrap();
    assert_eq!(r.iterations, 0);
    assert_eq!(r.params, p);
    assert!(r.defect.abs() < 1e-12);
}

#[test]
fn reparametrise_small_shift_keeps_fidelity_high() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let p = random_params(&mut rng, Template::Reduced8);
    let r = reparametrise_best_effort(&p, p.angles()[7] + 0.01).unwrap();
    assert!((r.params.angles()[7] - p.angles()[7] - 0.01).abs() < 1e-15);
    assert!(r.defect < 1e-3);
}

#[test]
fn alignment_of_a_state_with_itself_is_trivial() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let p = random_params(&mut rng, Template::Reduced8);
    let a = align(&p, &p).unwrap();
    assert_eq!((a.raw, a.after_gauge, a.after_reparam), (0.0, 0.0, 0.0));
    assert_eq!(a.aligned, p);
    assert!(align(&AnsatzParams::zeros(Template::Full15), &p).is_err());
}

#[test]
fn alignment_undoes_a_gauge_rotation() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..5 {
        let p = random_params(&mut rng, Template::Reduced8);
        let theta = rng.random_range(-2.0..2.0);
        let a = align(&p, &x_gauge_rotate(&p, theta).unwrap()).unwrap();
        assert!(a.raw > 0.1, "raw {}", a.raw);
        assert!(a.after_gauge < 1e-6, "after gauge {}", a.after_gauge);
        assert!(a.after_reparam <= a.after_gauge);
        assert!(fidelity(&p, &a.aligned) > 1.0 - 1e-9);
    }
}

#[test]
fn alignment_distances_never_increase() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let p = random_params(&mut rng, Template::Reduced8);
        let q = p
            .with_angles(
                p.angles()
                    .iter()
                    .map(|x| x + rng.random_range(-0.3..0.3))
                    .collect(),
            )
            .unwrap();
        let a = align(&p, &q).unwrap();
        assert!(a.after_gauge <= a.raw && a.after_reparam <= a.after_gauge);
        assert!(a.gauge_component() >= 0.0 && a.reparam_component() >= 0.0);
        assert!(a.reparam_defect <= ALIGN_MAX_DEFECT);
        assert!((angle_distance(&a.aligned, &p) - a.after_reparam).abs() < 1e-12);
    }
}

#[test]
fn reduced8_is_nested_in_full15() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..3 {
        let p = random_params(&mut rng, Template::Reduced8);
        let target = build_unitary(&p);
        let cost = |x: &[f64]| {
            let u = build_unitary(&AnsatzParams::new(Template::Full15, x.to_vec()).unwrap());
            let tr: C64 = u.iter().zip(target.iter()).map(|(a, b)| a.conj() * b).sum();
            1.0 - tr.norm() / 4.0
        };
        let mut best = f64::INFINITY;
        let mut best_x = vec![];
        for _ in 0..8 {
            let x0: Vec<f64> = (0..15).map(|_| rng.random_range(-PI..PI)).collect();
            let m = bfgs(
                cost,
                &x0,
                BfgsOptions {
                    grad_tol: 1e-10,
                    max_iter: 2000,
                    fd_step: 1e-6,
                    max_step: None,
                },
            );
            if m.value < best {
                best = m.value;
                best_x = m.x;
            }
            if best < 1e-12 {
                break;
            }
        }
        let fitted = AnsatzParams::new(Template::Full15, best_x).unwrap();
        assert!((fidelity(&p, &fitted) - 1.0).abs() < 1e-10, "cost {best}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn built_unitaries_are_unitary(seed in any::<u64>(), full in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = if full { Template::Full15 } else { Template::Reduced8 };
        let u = build_unitary(&random_params(&mut rng, t));
        prop_assert!(unitarity_error(&u) < 1e-12);
        prop_assert!(mps_tensor(&u).unwrap().isometry_error() < 1e-12);
    }

    #[test]
    fn x_gauge_is_exact(seed in any::<u64>(), theta in -10.0f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_params(&mut rng, Template::Reduced8);
        let q = x_gauge_rotate(&p, theta).unwrap();
        prop_assert!((fidelity(&p, &q) - 1.0).abs() < 1e-10);
    }
}
