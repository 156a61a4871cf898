use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};

const NORM_TOL: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-12;

/// Pure state on `n` qubits in the computational basis; qubit `q` is bit `q - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: CVector,
    normalized: bool,
}

impl StateVector {
    /// Wraps unit-norm amplitudes.
    pub fn new(n: usize, amps: CVector) -> Result<Self> {
        check_len(n, amps.len())?;
        let norm = amps.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParameter {
                what: "state norm",
                value: norm,
                range: "1 ± 1e-12".into(),
            });
        }
        Ok(Self {
            n,
            amps,
            normalized: true,
        })
    }

    pub fn unnormalized(n: usize, amps: CVector) -> Result<Self> {
        check_len(n, amps.len())?;
        Ok(Self {
            n,
            amps,
            normalized: false,
        })
    }

    /// Rescales to unit norm.
    pub fn normalize(self) -> Result<Self> {
        let norm = self.amps.norm();
        if norm < 1e-300 {
            return Err(Error::ZeroProbability("cannot normalize a zero vector".into()));
        }
        Ok(Self {
            n: self.n,
            amps: self.amps.unscale(norm),
            normalized: true,
        })
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        let mut amps = CVector::zeros(1 << n);
        if index >= amps.len() {
            return Err(Error::DimensionMismatch {
                expected: amps.len(),
                actual: index,
            });
        }
        amps[index] = linalg::ONE;
        Self::new(n, amps)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.dotc(&other.amps)
    }

    /// `|<a|b>|` for normalized states; 1 means equal up to global phase.
    pub fn overlap(&self, other: &StateVector) -> f64 {
        self.inner(other).norm() / (self.norm() * other.norm())
    }

    pub fn projector(&self) -> DensityMatrix {
        let data = &self.amps * self.amps.adjoint();
        DensityMatrix {
            n: self.n,
            data: linalg::hermitize(&data),
        }
    }
}

/// Density operator on `n` qubits in the computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    data: CMatrix,
}

impl DensityMatrix {
    /// Wraps a Hermitian matrix (checked to 1e-12). Trace is not enforced, so
    /// unnormalized operators are allowed.
    pub fn new(n: usize, data: CMatrix) -> Result<Self> {
        check_len(n, data.nrows())?;
        check_len(n, data.ncols())?;
        let dev = linalg::hermiticity_deviation(&data);
        if dev > HERMITIAN_TOL {
            return Err(Error::NonHermitian(dev));
        }
        Ok(Self {
            n,
            data: linalg::hermitize(&data),
        })
    }

    /// Hermitizes without checking; for results of Hermiticity-preserving maps.
    pub(crate) fn from_hermitian(n: usize, data: CMatrix) -> Self {
        debug_assert_eq!(data.nrows(), 1 << n);
        Self {
            n,
            data: linalg::hermitize(&data),
        }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let d = 1 << n;
        Self {
            n,
            data: DMatrix::identity(d, d).scale(1.0 / d as f64),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.data).re
    }

    pub fn normalized(&self) -> Result<Self> {
        let t = self.trace();
        if t.abs() < 1e-300 {
            return Err(Error::ZeroTrace);
        }
        Ok(Self {
            n: self.n,
            data: self.data.unscale(t),
        })
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.data)
    }

    /// Trace 1 and PSD within `tol`.
    pub fn is_physical(&self, tol: f64) -> bool {
        (self.trace() - 1.0).abs() <= tol && self.min_eigenvalue() >= -tol
    }

    /// `<psi|rho|psi>`.
    pub fn expectation(&self, psi: &StateVector) -> f64 {
        psi.amps.dotc(&(&self.data * &psi.amps)).re
    }
}

fn check_len(n: usize, len: usize) -> Result<()> {
    let expected = 1usize << n;
    if len != expected {
        return Err(Error::DimensionMismatch {
            expected,
            actual: len,
        });
    }
    Ok(())
}

pub(crate) fn vector_from_real(values: impl IntoIterator<Item = f64>) -> CVector {
    DVector::from_vec(values.into_iter().map(linalg::c).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_hermitian_and_wrong_sizes() {
        let m = CMatrix::from_row_slice(2, 2, &[linalg::ONE, linalg::ONE, linalg::ZERO, linalg::ONE]);
        assert!(matches!(DensityMatrix::new(1, m), Err(Error::NonHermitian(_))));
        assert!(matches!(
            StateVector::unnormalized(2, CVector::zeros(3)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(StateVector::new(1, vector_from_real([1.0, 1.0])).is_err());
    }

    #[test]
    fn projector_of_basis_state() {
        let psi = StateVector::basis(2, 3).unwrap();
        let rho = psi.projector();
        assert!(rho.is_physical(1e-12));
        assert!((rho.expectation(&psi) - 1.0).abs() < 1e-15);
        assert!((DensityMatrix::maximally_mixed(3).trace() - 1.0).abs() < 1e-15);
    }
}
