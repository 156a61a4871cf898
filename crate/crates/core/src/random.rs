//! Seeded random states used by property checks and sampling experiments.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{self, CMatrix, CVector};
use crate::lme::{DensityMatrix, LmeCoeffMatrix, StateVector};

fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state.
pub fn random_pure_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> StateVector {
    let v = CVector::from_fn(1 << n, |_, _| gaussian_complex(rng));
    StateVector::unnormalized(n, v)
        .and_then(StateVector::normalize)
        .expect("gaussian vector is non-zero")
}

/// Full-rank random density matrix `G G† / tr(G G†)` with Ginibre `G`.
pub fn random_density_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DensityMatrix {
    let d = 1 << n;
    let g: CMatrix = DMatrix::from_fn(d, d, |_, _| gaussian_complex(rng));
    let m = &g * g.adjoint();
    let t = linalg::trace(&m).re;
    DensityMatrix::new(n, linalg::hermitize(&m.unscale(t))).expect("G G† is Hermitian")
}

/// Random physical coefficient matrix (a random density matrix read in the
/// LME basis; the basis change is unitary so the ensemble is the same).
pub fn random_lme_coeffs<R: Rng + ?Sized>(n: usize, rng: &mut R) -> LmeCoeffMatrix {
    let rho = random_density_matrix(n, rng);
    LmeCoeffMatrix::new(n, rho.into_matrix()).expect("Hermitian")
}
