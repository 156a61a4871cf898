use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::lme::{build_state, DensityMatrix, LmesSpec, MultiIndex};

/// Z-basis outcome, named by the projector it applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZOutcome {
    Zero,
    One,
}

impl ZOutcome {
    pub fn bit(self) -> usize {
        match self {
            ZOutcome::Zero => 0,
            ZOutcome::One => 1,
        }
    }
}

impl fmt::Display for ZOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ZOutcome::Zero => "|0>",
            ZOutcome::One => "|1>",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZMeasurement {
    pub qubit: usize,
    pub outcome: ZOutcome,
}

/// Z measurements on one copy of a state, with the state left behind.
///
/// A gate containing a qubit found in `|0>` disappears; a qubit found in `|1>`
/// is removed from its gates. Reduced gates appearing twice cancel, reduced
/// single-qubit gates are `Z` corrections (`frame`), and unmeasured qubits
/// left without gates factor out as `|+>` and are traced away.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutPlan {
    pub copy: usize,
    pub n: usize,
    pub measurements: Vec<ZMeasurement>,
    /// Original labels of the kept qubits; kept qubit `i + 1` is `survivors[i]`.
    pub survivors: Vec<usize>,
    /// Remaining target, on the relabelled survivors.
    pub residual: LmesSpec,
    /// `Z` corrections on survivors applied after the measurement.
    pub frame: Vec<usize>,
}

impl CutPlan {
    /// Derive survivors and residual target from the measurement list. The
    /// residual coloring is the original one restricted to survivors.
    pub fn new(spec: &LmesSpec, copy: usize, measurements: Vec<ZMeasurement>) -> Result<Self> {
        let n = spec.n();
        let mut measured = 0usize;
        let mut ones = 0usize;
        for m in &measurements {
            let bit = spec.qubit_bit(m.qubit)?;
            if measured & bit != 0 {
                return Err(Error::InvalidSpec(format!("qubit {} measured twice", m.qubit)));
            }
            measured |= bit;
            if m.outcome == ZOutcome::One {
                ones |= bit;
            }
        }
        let zeros = measured & !ones;
        let mut reduced: Vec<usize> = Vec::new();
        for &g in spec.gate_masks() {
            if g & zeros != 0 {
                continue;
            }
            let r = g & !ones;
            if r == 0 {
                // a gate fully on |1> outcomes is a global sign
                continue;
            }
            if let Some(p) = reduced.iter().position(|&x| x == r) {
                reduced.remove(p);
            } else {
                reduced.push(r);
            }
        }
        let frame_mask: usize = reduced.iter().filter(|r| r.count_ones() == 1).fold(0, |a, r| a ^ r);
        reduced.retain(|r| r.count_ones() > 1);
        let support = reduced.iter().fold(0, |a, r| a | r);
        let survivors: Vec<usize> = (1..=n).filter(|q| support >> (q - 1) & 1 == 1).collect();
        let relabel = |q: usize| survivors.iter().position(|&s| s == q).map(|i| i + 1);
        let gates: Vec<Vec<usize>> = reduced
            .iter()
            .map(|&r| (1..=n).filter(|q| r >> (q - 1) & 1 == 1).filter_map(relabel).collect())
            .collect();
        let colors: Vec<Vec<usize>> = spec
            .colors()
            .iter()
            .map(|col| col.iter().filter_map(|&q| relabel(q)).collect::<Vec<_>>())
            .filter(|col: &Vec<usize>| !col.is_empty())
            .collect();
        if survivors.is_empty() {
            return Err(Error::InvalidSpec("cut leaves no entangled qubits".into()));
        }
        let residual = LmesSpec::new(survivors.len(), gates, colors)?;
        let frame = (1..=n)
            .filter(|q| frame_mask >> (q - 1) & 1 == 1)
            .filter(|q| survivors.contains(q))
            .collect();
        Ok(Self {
            copy,
            n,
            measurements,
            survivors,
            residual,
            frame,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("plan holds plain values")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Recomputes the derived fields and checks they agree, so that a plan
    /// read from a file cannot claim a wrong residual.
    pub fn validate(&self, spec: &LmesSpec) -> Result<()> {
        let fresh = Self::new(spec, self.copy, self.measurements.clone())?;
        if fresh.survivors != self.survivors
            || fresh.residual.gates() != self.residual.gates()
            || fresh.frame != self.frame
        {
            return Err(Error::InvalidSpec("cut plan residual does not follow from its measurements".into()));
        }
        Ok(())
    }
}

pub fn measurement(qubit: usize, outcome: ZOutcome) -> ZMeasurement {
    ZMeasurement { qubit, outcome }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutOutcome {
    /// State of the survivors, in plan order, frame-corrected.
    pub state: DensityMatrix,
    pub probability: f64,
}

/// Postselect the plan's outcomes, trace out factored qubits and apply the
/// `Z` frame.
pub fn z_measure_cut(rho: &DensityMatrix, plan: &CutPlan) -> Result<CutOutcome> {
    if rho.n() != plan.n {
        return Err(Error::DimensionMismatch {
            expected: plan.n,
            actual: rho.n(),
        });
    }
    let n = plan.n;
    let mut fixed = 0usize;
    let mut measured = 0usize;
    for m in &plan.measurements {
        measured |= 1 << (m.qubit - 1);
        fixed |= m.outcome.bit() << (m.qubit - 1);
    }
    let keep: Vec<usize> = plan.survivors.iter().map(|q| q - 1).collect();
    let keep_mask: usize = keep.iter().map(|b| 1 << b).sum();
    let traced: Vec<usize> = (0..n).filter(|b| (measured | keep_mask) >> b & 1 == 0).collect();
    let embed = |sub: usize, bits: &[usize]| -> usize {
        bits.iter().enumerate().map(|(i, &b)| (sub >> i & 1) << b).sum()
    };
    let m = keep.len();
    let frame: usize = plan
        .frame
        .iter()
        .map(|q| 1usize << plan.survivors.iter().position(|s| s == q).expect("frame on survivors"))
        .sum();
    let src = rho.matrix();
    let out = CMatrix::from_fn(1 << m, 1 << m, |i, j| {
        let (xi, xj) = (embed(i, &keep) | fixed, embed(j, &keep) | fixed);
        let mut s = linalg::ZERO;
        for t in 0..1usize << traced.len() {
            let e = embed(t, &traced);
            s += src[(xi | e, xj | e)];
        }
        if ((i ^ j) & frame).count_ones() % 2 == 1 {
            -s
        } else {
            s
        }
    });
    let p = linalg::trace(&out).re;
    if p <= 1e-15 {
        return Err(Error::ZeroProbability("Z-measurement outcome".into()));
    }
    Ok(CutOutcome {
        state: DensityMatrix::new(m, linalg::hermitize(&out.unscale(p)))?,
        probability: p,
    })
}

/// Pure-state check of a plan: the cut of the target is the residual target.
pub fn residual_fidelity(spec: &LmesSpec, plan: &CutPlan) -> Result<f64> {
    let out = z_measure_cut(&build_state(spec).projector(), plan)?;
    Ok(out.state.expectation(&build_state(&plan.residual)))
}

/// `k` restricted to survivors, for reading LME indices after a cut.
pub fn survivor_index(plan: &CutPlan, k: MultiIndex) -> Result<MultiIndex> {
    let bits: Vec<u8> = plan.survivors.iter().map(|&q| k.bit(q)).collect();
    MultiIndex::from_bits(&bits)
}
