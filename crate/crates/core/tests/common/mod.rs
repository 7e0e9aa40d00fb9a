//! Random states and unitaries shared by the integration tests.
#![allow(dead_code)]

use entangle::linalg::{expm, kron, CMat};
use entangle::state::{Density, Ket};
use num_complex::Complex;
use rand::Rng;

pub fn random_complex(rng: &mut impl Rng) -> Complex<f64> {
    Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_ket(rng: &mut impl Rng, dim: usize) -> Ket<f64> {
    Ket::normalized((0..dim).map(|_| random_complex(rng)).collect()).unwrap()
}

/// `G G† / Tr(G G†)` for a matrix `G` with random entries: full rank, mixed.
pub fn random_density(rng: &mut impl Rng, dim: usize) -> Density<f64> {
    let g = CMat::from_fn(dim, |_, _| random_complex(rng));
    let m = g.matmul(&g.dagger());
    let tr = m.trace().re;
    Density::new(m.scale_re(1.0 / tr)).unwrap()
}

pub fn random_hermitian(rng: &mut impl Rng, dim: usize) -> CMat<f64> {
    let a = CMat::from_fn(dim, |_, _| random_complex(rng));
    (&a + &a.dagger()).scale_re(0.5)
}

pub fn random_unitary(rng: &mut impl Rng, dim: usize) -> CMat<f64> {
    expm(&random_hermitian(rng, dim).scale(Complex::new(0.0, -3.0)))
}

/// `U₁ ⊗ U₂` with independent random single-qubit unitaries.
pub fn random_local_unitary(rng: &mut impl Rng) -> CMat<f64> {
    kron(&random_unitary(rng, 2), &random_unitary(rng, 2))
}
