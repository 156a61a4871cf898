use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector, ONE};
use crate::lme::{build_state, DensityMatrix, LmesSpec, StateVector};
use crate::wires::WireState;

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const NORM_FLOOR: f64 = 1e-24;

/// Pure state whose qubits carry names, so that states held by different
/// parties can be connected qubit by qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledState {
    wires: WireState,
}

impl LabeledState {
    /// `labels[i]` names qubit `i + 1` of `state`.
    pub fn new(labels: &[&str], state: &StateVector) -> Result<Self> {
        if labels.len() != state.n() {
            return Err(Error::DimensionMismatch {
                expected: state.n(),
                actual: labels.len(),
            });
        }
        let labels = labels.iter().map(|s| s.to_string()).collect();
        Ok(Self {
            wires: WireState::new(labels, state.amplitudes().clone())?,
        })
    }

    /// The target of `spec` with qubit `q` named `labels[q - 1]`.
    pub fn from_spec(spec: &LmesSpec, labels: &[&str]) -> Result<Self> {
        Self::new(labels, &build_state(spec))
    }

    /// The target of `spec` with qubits named by their numbers.
    pub fn from_spec_numbered(spec: &LmesSpec) -> Self {
        let names: Vec<String> = (1..=spec.n()).map(|q| q.to_string()).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        Self::from_spec(spec, &refs).expect("one label per qubit")
    }

    /// `(|00> + |11>)/√2`.
    pub fn bell(a: &str, b: &str) -> Result<Self> {
        let r = c(std::f64::consts::FRAC_1_SQRT_2);
        let amps = CVector::from_vec(vec![r, c(0.0), c(0.0), r]);
        Ok(Self {
            wires: WireState::new(vec![a.into(), b.into()], amps)?,
        })
    }

    /// `|0...0>` on the given wires.
    pub fn zeros(labels: &[&str]) -> Result<Self> {
        let mut amps = CVector::zeros(1 << labels.len());
        amps[0] = ONE;
        Ok(Self {
            wires: WireState::new(labels.iter().map(|s| s.to_string()).collect(), amps)?,
        })
    }

    pub fn labels(&self) -> &[String] {
        self.wires.labels()
    }

    pub fn n(&self) -> usize {
        self.labels().len()
    }

    pub fn relabel(&mut self, from: &str, to: &str) -> Result<()> {
        self.wires.relabel(from, to)
    }

    pub fn hadamard(&mut self, label: &str) -> Result<()> {
        self.wires.h(label)
    }

    pub fn tensor(&self, other: &LabeledState) -> Result<LabeledState> {
        Ok(Self {
            wires: self.wires.tensor(&other.wires)?,
        })
    }

    /// Amplitudes with qubit `i + 1` taken from wire `order[i]`.
    pub fn to_state_vector(&self, order: &[&str]) -> Result<StateVector> {
        let amps = self.wires.ordered(order)?;
        let n = order.len();
        let norm = amps.norm();
        if (norm - 1.0).abs() > 1e-12 {
            StateVector::unnormalized(n, amps)
        } else {
            StateVector::new(n, amps)
        }
    }

    /// `|<self|other>|^2` after matching labels.
    pub fn overlap(&self, other: &LabeledState) -> Result<f64> {
        let order: Vec<&str> = self.labels().iter().map(String::as_str).collect();
        let b = other.wires.ordered(&order)?;
        Ok(self.wires.amplitudes().dotc(&b).norm_sqr())
    }

    fn normalized(mut self, what: &str) -> Result<Self> {
        let n2 = self.wires.norm_sqr();
        if n2 <= NORM_FLOOR {
            return Err(Error::ZeroProbability(format!("{what} projects onto zero")));
        }
        self.wires.scale(n2.sqrt().recip());
        Ok(self)
    }
}

fn joined(a: &LabeledState, b: &LabeledState) -> Result<WireState> {
    if let Some(l) = a.labels().iter().find(|l| b.wires.has(l)) {
        return Err(Error::Wire(format!("label {l} present in both states")));
    }
    a.wires.tensor(&b.wires)
}

/// `Q_i = p_{ii'} (H ⊗ H)` with `p = √2(|0><++| + |1><++| U_{ii'})`,
/// acting on qubit `i` of `a` and `i'` of `b`. The output qubit keeps the
/// label `i`.
pub fn q_connect(a: &LabeledState, b: &LabeledState, pair: (&str, &str)) -> Result<LabeledState> {
    q_apply(joined(a, b)?, pair)
}

/// [`q_connect`] between two qubits of one (already connected) state.
pub fn q_connect_within(state: &LabeledState, pair: (&str, &str)) -> Result<LabeledState> {
    q_apply(state.wires.clone(), pair)
}

fn q_apply(mut st: WireState, (i, ip): (&str, &str)) -> Result<LabeledState> {
    st.h(i)?;
    st.h(ip)?;
    let plus_plus: [Complex64; 4] = [c(0.5); 4];
    let mut b0 = st.clone();
    b0.contract(&[i, ip], &plus_plus)?;
    let mut b1 = st;
    b1.cz(i, ip)?;
    b1.contract(&[i, ip], &plus_plus)?;
    let mut out = WireState::from_branches(&b0, &b1, i)?;
    out.scale(SQRT_2);
    LabeledState { wires: out }.normalized("Q projector")
}

/// `Π P_i` with `P_i = √2(|0>_i<00|_{ii'} + |1>_i<11|_{ii'})` over the
/// listed pairs; the merged qubit keeps the label from `a`. Output wires are
/// `a`'s followed by `b`'s unmerged ones.
pub fn p_connect(a: &LabeledState, b: &LabeledState, shared: &[(&str, &str)]) -> Result<LabeledState> {
    let mut st = joined(a, b)?;
    for &(i, ip) in shared {
        if !a.wires.has(i) || !b.wires.has(ip) {
            return Err(Error::Wire(format!("pair ({i}, {ip}) not split across the two states")));
        }
        st.merge(i, ip)?;
        st.scale(SQRT_2);
    }
    LabeledState { wires: st }.normalized("P projector")
}

/// `P`-merge a mixed state with a pure one: `ρ → Π (ρ ⊗ |φ><φ|) Π†`,
/// renormalized. Returns the state on `rho_labels` followed by the unmerged
/// wires of `pure`, and the success probability of the merge.
pub fn p_connect_mixed(
    rho: &DensityMatrix,
    rho_labels: &[&str],
    pure: &LabeledState,
    shared: &[(&str, &str)],
) -> Result<(DensityMatrix, Vec<String>, f64)> {
    if rho_labels.len() != rho.n() {
        return Err(Error::DimensionMismatch {
            expected: rho.n(),
            actual: rho_labels.len(),
        });
    }
    let d = rho.dim();
    let mut kraus: Option<CMatrix> = None;
    let mut out_labels = Vec::new();
    for x in 0..d {
        let mut e = CVector::zeros(d);
        e[x] = ONE;
        let basis = WireState::new(rho_labels.iter().map(|s| s.to_string()).collect(), e)?;
        let basis = LabeledState { wires: basis };
        let mut st = joined(&basis, pure)?;
        for &(i, ip) in shared {
            st.merge(i, ip)?;
        }
        if x == 0 {
            out_labels = st.labels().to_vec();
            kraus = Some(CMatrix::zeros(st.amplitudes().len(), d));
        }
        kraus.as_mut().expect("set at x = 0").set_column(x, st.amplitudes());
    }
    let k = kraus.expect("d >= 1");
    let out = &k * rho.matrix() * k.adjoint();
    let p = linalg::trace(&out).re;
    if p <= NORM_FLOOR {
        return Err(Error::ZeroProbability("mixed P projector".into()));
    }
    let n = out_labels.len();
    Ok((DensityMatrix::new(n, linalg::hermitize(&out.unscale(p)))?, out_labels, p))
}
