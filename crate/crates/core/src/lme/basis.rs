use nalgebra::DMatrix;

use super::index::MultiIndex;
use super::spec::LmesSpec;
use super::state::{vector_from_real, DensityMatrix, StateVector};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Dense `2^n × 2^n` operator in the computational basis.
pub type DenseOperator = CMatrix;

/// `U_ph |+>^n`: amplitude of `|x>` is `2^{-n/2} (-1)^{#{S : S ⊆ x}}`.
pub fn build_state(spec: &LmesSpec) -> StateVector {
    lme_basis_vector(spec, MultiIndex::zero(spec.n())).expect("zero index is valid")
}

/// `|Ψ_k> = Z^{k_1} ⊗ ... ⊗ Z^{k_n} |Ψ>`.
pub fn lme_basis_vector(spec: &LmesSpec, k: MultiIndex) -> Result<StateVector> {
    if k.len() != spec.n() {
        return Err(Error::DimensionMismatch {
            expected: spec.n(),
            actual: k.len(),
        });
    }
    let amp = (spec.dim() as f64).sqrt().recip();
    let amps = (0..spec.dim()).map(|x| {
        let parity = spec.gate_parity(x) + (x & k.bits()).count_ones();
        if parity.is_multiple_of(2) {
            amp
        } else {
            -amp
        }
    });
    StateVector::new(spec.n(), vector_from_real(amps))
}

/// Real orthogonal matrix whose column `k` is `|Ψ_k>`.
pub fn basis_matrix(spec: &LmesSpec) -> CMatrix {
    let d = spec.dim();
    let amp = (d as f64).sqrt().recip();
    DMatrix::from_fn(d, d, |x, k| {
        let parity = spec.gate_parity(x) + (x & k).count_ones();
        linalg::c(if parity.is_multiple_of(2) { amp } else { -amp })
    })
}

/// Signs of the diagonal phase gate `U_i` on the neighborhood of `qubit`
/// such that `S_i = X_i ⊗ U_i`: the product of `U_{S \ {i}}` over gates `S ∋ i`.
pub fn neighbor_phase_signs(spec: &LmesSpec, qubit: usize) -> Result<Vec<f64>> {
    let bit = spec.qubit_bit(qubit)?;
    let reduced: Vec<usize> = spec
        .gate_masks()
        .iter()
        .filter(|&&g| g & bit != 0)
        .map(|&g| g & !bit)
        .collect();
    Ok((0..spec.dim())
        .map(|x| {
            let flips = reduced.iter().filter(|&&r| r & x == r).count();
            if flips % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect())
}

/// `S_i = U_ph X_i U_ph†`, as a dense matrix.
pub fn stabilizer_operator(spec: &LmesSpec, qubit: usize) -> Result<DenseOperator> {
    let bit = spec.qubit_bit(qubit)?;
    let signs = neighbor_phase_signs(spec, qubit)?;
    let d = spec.dim();
    let mut s = CMatrix::zeros(d, d);
    // (X_i U_i)|x> = sign(x) |x ^ bit>
    for x in 0..d {
        s[(x ^ bit, x)] = linalg::c(signs[x]);
    }
    Ok(s)
}

/// A density operator expressed in the LME basis: entry `(k, l)` is
/// `λ_k^l = <Ψ_k|ρ|Ψ_l>`.
#[derive(Debug, Clone, PartialEq)]
pub struct LmeCoeffMatrix {
    n: usize,
    data: CMatrix,
}

impl LmeCoeffMatrix {
    pub fn new(n: usize, data: CMatrix) -> Result<Self> {
        let rho = DensityMatrix::new(n, data)?;
        Ok(Self {
            n,
            data: rho.into_matrix(),
        })
    }

    pub(crate) fn from_hermitian(n: usize, data: CMatrix) -> Self {
        Self {
            n,
            data: linalg::hermitize(&data),
        }
    }

    /// LME-diagonal state `Σ_k λ_k |Ψ_k><Ψ_k|`.
    pub fn diagonal(n: usize, weights: &[f64]) -> Result<Self> {
        if weights.len() != 1 << n {
            return Err(Error::DimensionMismatch {
                expected: 1 << n,
                actual: weights.len(),
            });
        }
        let d = weights.len();
        let mut data = CMatrix::zeros(d, d);
        for (k, &w) in weights.iter().enumerate() {
            data[(k, k)] = linalg::c(w);
        }
        Ok(Self { n, data })
    }

    /// The target state `|Ψ_0><Ψ_0|`.
    pub fn target(n: usize) -> Self {
        let mut w = vec![0.0; 1 << n];
        w[0] = 1.0;
        Self::diagonal(n, &w).expect("sized correctly")
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

    pub fn entry(&self, k: usize, l: usize) -> num_complex::Complex64 {
        self.data[(k, l)]
    }

    pub fn diagonal_weights(&self) -> Vec<f64> {
        self.data.diagonal().iter().map(|z| z.re).collect()
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

    /// Largest off-diagonal modulus.
    pub fn off_diagonal_magnitude(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for k in 0..d {
            for l in 0..d {
                if k != l {
                    worst = worst.max(self.data[(k, l)].norm());
                }
            }
        }
        worst
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        self.off_diagonal_magnitude() <= tol
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.data)
    }
}

/// `λ = B† ρ B` with `B` the LME basis matrix.
pub fn to_lme_coeffs(rho: &DensityMatrix, spec: &LmesSpec) -> Result<LmeCoeffMatrix> {
    if rho.n() != spec.n() {
        return Err(Error::DimensionMismatch {
            expected: spec.n(),
            actual: rho.n(),
        });
    }
    let b = basis_matrix(spec);
    // B is real, so B† = B^T.
    let lambda = b.transpose() * rho.matrix() * &b;
    Ok(LmeCoeffMatrix::from_hermitian(spec.n(), lambda))
}

pub fn from_lme_coeffs(lambda: &LmeCoeffMatrix, spec: &LmesSpec) -> Result<DensityMatrix> {
    if lambda.n() != spec.n() {
        return Err(Error::DimensionMismatch {
            expected: spec.n(),
            actual: lambda.n(),
        });
    }
    let b = basis_matrix(spec);
    let rho = &b * lambda.matrix() * b.transpose();
    Ok(DensityMatrix::from_hermitian(spec.n(), rho))
}

/// Fidelity with the target, `λ_0^0`.
pub fn fidelity(lambda: &LmeCoeffMatrix) -> f64 {
    lambda.entry(0, 0).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    fn u123() -> LmesSpec {
        LmesSpec::new(3, vec![vec![1, 2, 3]], vec![vec![1], vec![2], vec![3]]).unwrap()
    }

    #[test]
    fn two_qubit_phase_gate_state() {
        let spec = LmesSpec::new(2, vec![vec![1, 2]], vec![vec![1], vec![2]]).unwrap();
        let psi = build_state(&spec);
        let a = psi.amplitudes();
        for x in 0..3 {
            assert!((a[x].re - 0.5).abs() < 1e-15);
        }
        assert!((a[3].re + 0.5).abs() < 1e-15);
    }

    #[test]
    fn single_qubit_plus_and_minus() {
        let spec = LmesSpec::new(1, vec![], vec![vec![1]]).unwrap();
        let plus = build_state(&spec);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((plus.amplitudes()[0].re - h).abs() < 1e-15);
        assert!((plus.amplitudes()[1].re - h).abs() < 1e-15);
        let minus = lme_basis_vector(&spec, MultiIndex::new(1, 1).unwrap()).unwrap();
        assert!((minus.amplitudes()[1].re + h).abs() < 1e-15);
    }

    #[test]
    fn three_qubit_gate_flips_only_all_ones() {
        let psi = build_state(&u123());
        let amp = 8f64.sqrt().recip();
        for x in 0..8 {
            let expect = if x == 7 { -amp } else { amp };
            assert!((psi.amplitudes()[x].re - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn basis_is_orthonormal_and_zero_index_is_target() {
        let spec = u123();
        let vecs: Vec<StateVector> = MultiIndex::all(3)
            .map(|k| lme_basis_vector(&spec, k).unwrap())
            .collect();
        assert_eq!(vecs[0], build_state(&spec));
        for (i, a) in vecs.iter().enumerate() {
            for (j, b) in vecs.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((a.inner(b).norm() - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn graph_stabilizer_is_x_z() {
        let spec = LmesSpec::new(2, vec![vec![1, 2]], vec![vec![1], vec![2]]).unwrap();
        let s1 = stabilizer_operator(&spec, 1).unwrap();
        // X on qubit 1 (bit 0), Z on qubit 2 (bit 1)
        let mut expect = CMatrix::zeros(4, 4);
        for x in 0..4usize {
            let sign = if x & 2 != 0 { -1.0 } else { 1.0 };
            expect[(x ^ 1, x)] = linalg::c(sign);
        }
        assert!(max_abs_diff(&s1, &expect) < 1e-15);
        assert!(stabilizer_operator(&spec, 3).is_err());
    }

    #[test]
    fn order_three_stabilizer_is_x_times_cz() {
        let spec = u123();
        let s1 = stabilizer_operator(&spec, 1).unwrap();
        let mut expect = CMatrix::zeros(8, 8);
        for x in 0..8usize {
            let sign = if x & 0b110 == 0b110 { -1.0 } else { 1.0 };
            expect[(x ^ 1, x)] = linalg::c(sign);
        }
        assert!(max_abs_diff(&s1, &expect) < 1e-15);
    }

    #[test]
    fn coefficient_examples() {
        let spec = u123();
        let psi = build_state(&spec);
        let lam = to_lme_coeffs(&psi.projector(), &spec).unwrap();
        assert!(max_abs_diff(lam.matrix(), LmeCoeffMatrix::target(3).matrix()) < 1e-12);
        assert!((fidelity(&lam) - 1.0).abs() < 1e-12);

        let mixed = to_lme_coeffs(&DensityMatrix::maximally_mixed(3), &spec).unwrap();
        let expect = LmeCoeffMatrix::diagonal(3, &[0.125; 8]).unwrap();
        assert!(max_abs_diff(mixed.matrix(), expect.matrix()) < 1e-12);
        assert!((fidelity(&mixed) - 0.125).abs() < 1e-12);

        let back = from_lme_coeffs(&lam, &spec).unwrap();
        assert!(max_abs_diff(back.matrix(), psi.projector().matrix()) < 1e-12);
        assert!(to_lme_coeffs(&DensityMatrix::maximally_mixed(2), &spec).is_err());
    }
}
