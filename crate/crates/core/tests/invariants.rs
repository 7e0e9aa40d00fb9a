mod common;

use common::*;
use entangle::control::{control_field, f_bound, lyapunov_value, ControlLaw, Sign};
use entangle::dynamics::{integrate, IntegratorConfig};
use entangle::linalg::{commutator, eigh, expm, inner, kron, CMat};
use entangle::metrics::concurrence;
use entangle::model::{bell_state, hamiltonians, Basis, BellState, ModelParams, NamedState, Paradigm};
use num_complex::Complex;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kron_is_associative_and_bilinear(seed: u64) {
        let mut r = rng(seed);
        let a = random_hermitian(&mut r, 2);
        let b = random_unitary(&mut r, 2);
        let c = random_hermitian(&mut r, 2);
        let s = random_complex(&mut r);
        prop_assert!(kron(&kron(&a, &b), &c).distance(&kron(&a, &kron(&b, &c))) < 1e-12);

        let mut sum = a.clone();
        sum += &c;
        let mut split = kron(&a, &b);
        split += &kron(&c, &b);
        prop_assert!(kron(&sum, &b).distance(&split) < 1e-12);
        prop_assert!(kron(&a.scale(s), &b).distance(&kron(&a, &b).scale(s)) < 1e-12);
    }

    #[test]
    fn commutator_is_antisymmetric_and_traceless(seed: u64) {
        let mut r = rng(seed);
        let a = random_hermitian(&mut r, 4);
        let b = random_density(&mut r, 4).into_mat();
        let ab = commutator(&a, &b).unwrap();
        let mut sum = commutator(&b, &a).unwrap();
        sum += &ab;
        prop_assert!(sum.max_abs() < 1e-13);
        prop_assert!(ab.trace().norm() < 1e-13);
    }

    #[test]
    fn expm_of_anti_hermitian_is_unitary(seed: u64, t in 0.0f64..50.0) {
        let mut r = rng(seed);
        let u = expm(&random_hermitian(&mut r, 4).scale(Complex::new(0.0, -t)));
        prop_assert!(u.unitarity_error() < 1e-11, "{}", u.unitarity_error());
    }

    #[test]
    fn eigh_reconstructs(seed: u64) {
        let mut r = rng(seed);
        let a = random_hermitian(&mut r, 4);
        let e = eigh(&a).unwrap();
        prop_assert!(e.reconstruct().distance(&a) < 1e-12);
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(e.vectors.unitarity_error() < 1e-12);
    }

    #[test]
    fn field_never_exceeds_its_bound(seed: u64, kappa in 0.01f64..10.0, minus: bool) {
        let mut r = rng(seed);
        let rho = random_density(&mut r, 4);
        let rho_d = random_ket(&mut r, 4).outer();
        let h1 = random_hermitian(&mut r, 4);
        let sign = if minus { Sign::Minus } else { Sign::Plus };
        let f = control_field(&rho, &rho_d, &h1, kappa, sign).unwrap();
        prop_assert!(f.abs() <= f_bound(&rho, &rho_d, &h1, kappa) * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn pure_state_lyapunov_value_is_infidelity(seed: u64) {
        let mut r = rng(seed);
        let psi = random_ket(&mut r, 4);
        let phi = random_ket(&mut r, 4);
        let overlap = inner(psi.amplitudes(), phi.amplitudes()).norm_sqr();
        let v = lyapunov_value(&psi.outer(), &phi.outer());
        prop_assert!((v - (1.0 - overlap)).abs() < 1e-13);
    }

    #[test]
    fn concurrence_is_local_unitary_invariant(seed: u64) {
        let mut r = rng(seed);
        let rho = if seed % 2 == 0 { random_density(&mut r, 4) } else { random_ket(&mut r, 4).outer() };
        let u = random_local_unitary(&mut r);
        let before = concurrence(&rho).unwrap();
        let after = concurrence(&rho.transformed(&u)).unwrap();
        prop_assert!((before - after).abs() < 1e-10, "{before} vs {after}");
        prop_assert!((0.0..=1.0).contains(&before));
    }
}

fn local_run(target: BellState, tol: f64, t_max: f64) -> entangle::Trajectory {
    let params = ModelParams::new(1.0, 0.1, 1.0).unwrap();
    let h = hamiltonians(&params, Paradigm::LocalControl, Basis::XProduct);
    let law = ControlLaw::lyapunov(1.0, Sign::Plus).unwrap();
    let rho0 = NamedState::X(0).ket::<f64>(Basis::XProduct).outer();
    let rho_d = bell_state::<f64>(target, Basis::XProduct).outer();
    let cfg = IntegratorConfig {
        rel_tol: tol,
        abs_tol: tol * 1e-2,
        ..IntegratorConfig::with_horizon(t_max)
    };
    integrate(&h, &law, &rho0, &rho_d, &cfg).unwrap()
}

#[test]
fn halving_the_tolerance_converges() {
    let coarse = local_run(BellState::PhiPlus, 1e-8, 30.0);
    let mid = local_run(BellState::PhiPlus, 5e-9, 30.0);
    let fine = local_run(BellState::PhiPlus, 1e-12, 30.0);
    let err = |t: &entangle::Trajectory| (t.last().v - fine.last().v).abs() + (t.last().concurrence - fine.last().concurrence).abs();
    assert!(err(&mid) <= err(&coarse) * 1.05 + 1e-12, "{} vs {}", err(&mid), err(&coarse));
    assert!(err(&coarse) < 1e-6);
}

#[test]
fn phi_minus_target_is_reached() {
    let traj = local_run(BellState::PhiMinus, 1e-11, 300.0);
    assert!(traj.last().v < 1e-6, "V = {}", traj.last().v);
}

#[test]
fn random_density_is_valid() {
    let mut r = rng(7);
    let rho = random_density(&mut r, 4);
    assert!(rho.trace_error() < 1e-14);
    assert!(rho.min_eigenvalue().unwrap() > 0.0);
    let _: CMat<f64> = rho.into_mat();
}
