//! Random inputs shared by the integration tests.

#![allow(dead_code)]

use nalgebra::DMatrix;
use pom_core::ensembles::Ensemble;
use pom_core::linalg::{CMatrix, StateVector};
use pom_core::polarization::PolarizationState;
use pom_core::pom::Pom;
use pom_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_vector(rng: &mut impl Rng, dim: usize) -> StateVector {
    loop {
        let v = StateVector::from_fn(dim, |_, _| complex(rng));
        let n = v.norm();
        if n > 1e-3 {
            return v.unscale(n);
        }
    }
}

pub fn random_state(rng: &mut impl Rng) -> PolarizationState {
    PolarizationState::from_vector(&random_vector(rng, 2)).unwrap()
}

pub fn random_priors(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

pub fn random_ensemble(rng: &mut impl Rng, n: usize, dim: usize) -> Ensemble {
    let states = (0..n).map(|_| random_vector(rng, dim)).collect();
    Ensemble::new("random", states, random_priors(rng, n)).unwrap()
}

/// Rank-one POM with `outcomes` elements, read off the rows of a random
/// isometry from the QR factor of a random square matrix.
pub fn random_pom(rng: &mut impl Rng, outcomes: usize, dim: usize) -> Pom {
    let a = DMatrix::from_fn(outcomes, outcomes, |_, _| complex(rng));
    let q = a.qr().q();
    let matrices = (0..outcomes)
        .map(|j| {
            let row: StateVector = StateVector::from_fn(dim, |i, _| q[(j, i)].conj());
            &row * row.adjoint()
        })
        .collect::<Vec<CMatrix>>();
    Pom::from_matrices(matrices).unwrap()
}
