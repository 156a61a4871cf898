//! Local Pauli channels and global white noise.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::lme::{self, DensityMatrix, LmeCoeffMatrix, LmesSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    LocalDepolarizing,
    LocalDephasing,
    GlobalWhite,
}

impl ChannelKind {
    pub fn label(self) -> &'static str {
        match self {
            ChannelKind::LocalDepolarizing => "local_depolarizing",
            ChannelKind::LocalDephasing => "local_dephasing",
            ChannelKind::GlobalWhite => "global_white",
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A noise model applied to the target state. For the local kinds `parameter`
/// is `p` and `targets` selects the qubits (all when empty); for global white
/// noise it is the fidelity `f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub kind: ChannelKind,
    pub parameter: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub targets: Vec<usize>,
}

impl ChannelSpec {
    pub fn new(kind: ChannelKind, parameter: f64) -> Self {
        Self {
            kind,
            parameter,
            targets: Vec::new(),
        }
    }

    /// The noisy target `E(|Ψ><Ψ|)` in LME coefficients.
    pub fn apply_to_target(&self, spec: &LmesSpec) -> Result<LmeCoeffMatrix> {
        noisy_target(spec, self.kind, self.parameter, &self.targets)
    }
}

/// `E(|Ψ><Ψ|)` for the given channel and parameter.
pub fn noisy_target(
    spec: &LmesSpec,
    kind: ChannelKind,
    parameter: f64,
    targets: &[usize],
) -> Result<LmeCoeffMatrix> {
    if kind == ChannelKind::GlobalWhite {
        return white_noise(spec, parameter);
    }
    let target = lme::build_state(spec).projector();
    let qubits: Vec<usize> = if targets.is_empty() {
        (1..=spec.n()).collect()
    } else {
        targets.to_vec()
    };
    let per_qubit: Vec<(usize, f64)> = qubits.iter().map(|&q| (q, parameter)).collect();
    let noisy = match kind {
        ChannelKind::LocalDepolarizing => depolarize_qubits(&target, &per_qubit)?,
        ChannelKind::LocalDephasing => dephase_qubits(&target, &per_qubit)?,
        ChannelKind::GlobalWhite => unreachable!(),
    };
    lme::to_lme_coeffs(&noisy, spec)
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter {
            what: "channel parameter p",
            value: p,
            range: "[0, 1]".into(),
        });
    }
    Ok(())
}

/// `X_q ρ X_q`.
fn conj_x(m: &CMatrix, bit: usize) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(r ^ bit, c ^ bit)])
}

/// `Z_q ρ Z_q`.
fn conj_z(m: &CMatrix, bit: usize) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| {
        if ((r ^ c) & bit) != 0 {
            -m[(r, c)]
        } else {
            m[(r, c)]
        }
    })
}

fn single_depolarize(m: &CMatrix, bit: usize, p: f64) -> CMatrix {
    let x = conj_x(m, bit);
    let z = conj_z(m, bit);
    // Y ρ Y = Z X ρ X Z
    let y = conj_z(&x, bit);
    let w = (1.0 - p) / 4.0;
    m.scale(p + w) + (x + y + z).scale(w)
}

fn single_dephase(m: &CMatrix, bit: usize, p: f64) -> CMatrix {
    let z = conj_z(m, bit);
    let w = (1.0 - p) / 2.0;
    m.scale(p + w) + z.scale(w)
}

fn apply_local(
    rho: &DensityMatrix,
    per_qubit: &[(usize, f64)],
    single: fn(&CMatrix, usize, f64) -> CMatrix,
) -> Result<DensityMatrix> {
    let mut m = rho.matrix().clone();
    for &(q, p) in per_qubit {
        check_probability(p)?;
        if q == 0 || q > rho.n() {
            return Err(Error::QubitOutOfRange { qubit: q, n: rho.n() });
        }
        m = single(&m, 1 << (q - 1), p);
    }
    DensityMatrix::new(rho.n(), m)
}

/// `E_i(ρ) = pρ + (1-p)/4 (ρ + XρX + YρY + ZρZ)` on every qubit.
pub fn depolarize_local(rho: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    let all: Vec<(usize, f64)> = (1..=rho.n()).map(|q| (q, p)).collect();
    depolarize_qubits(rho, &all)
}

/// Depolarizing with an individual `p` per listed qubit.
pub fn depolarize_qubits(rho: &DensityMatrix, per_qubit: &[(usize, f64)]) -> Result<DensityMatrix> {
    apply_local(rho, per_qubit, single_depolarize)
}

/// `E_i(ρ) = pρ + (1-p)/2 (ρ + ZρZ)` on every qubit.
pub fn dephase_local(rho: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    let all: Vec<(usize, f64)> = (1..=rho.n()).map(|q| (q, p)).collect();
    dephase_qubits(rho, &all)
}

pub fn dephase_qubits(rho: &DensityMatrix, per_qubit: &[(usize, f64)]) -> Result<DensityMatrix> {
    apply_local(rho, per_qubit, single_dephase)
}

/// Global white noise `xρ + (1-x)/2^n` on the target, parameterised by its
/// fidelity `f`: `λ_0 = f`, `λ_k = (1-f)/(2^n-1)` otherwise.
pub fn white_noise(spec: &LmesSpec, f: f64) -> Result<LmeCoeffMatrix> {
    white_noise_n(spec.n(), f)
}

pub fn white_noise_n(n: usize, f: f64) -> Result<LmeCoeffMatrix> {
    let d = 1usize << n;
    let floor = 1.0 / d as f64;
    if !(floor - 1e-15..=1.0 + 1e-15).contains(&f) {
        return Err(Error::InvalidParameter {
            what: "white-noise fidelity f",
            value: f,
            range: format!("[{floor}, 1]"),
        });
    }
    let rest = (1.0 - f) / (d - 1) as f64;
    let mut w = vec![rest; d];
    w[0] = f;
    LmeCoeffMatrix::diagonal(n, &w)
}

/// Mixing weight `x = f - (1-f)/(2^n - 1)` of the white-noise channel.
pub fn white_noise_mixing(n: usize, f: f64) -> f64 {
    f - (1.0 - f) / ((1usize << n) - 1) as f64
}

/// Inverse of [`white_noise_mixing`].
pub fn white_noise_fidelity(n: usize, x: f64) -> f64 {
    x + (1.0 - x) / (1usize << n) as f64
}
