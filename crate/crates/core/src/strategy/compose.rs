use serde::{Deserialize, Serialize};

use super::connect::{p_connect, p_connect_mixed, LabeledState};
use super::cut::{measurement, z_measure_cut, CutPlan, ZOutcome};
use crate::error::{Error, Result};
use crate::linalg;
use crate::lme::{build_state, from_lme_coeffs, to_lme_coeffs, LmesSpec};
use crate::noise::{white_noise_fidelity, white_noise_n};
use crate::purify::{run_schedule, ScheduleSpec, Verdict};

/// A regular part of a decomposed phase gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularPart {
    /// Original labels of the qubits the part acts on; part qubit `i + 1`
    /// is `qubits[i]`.
    pub qubits: Vec<usize>,
    /// The part as a regular spec on its own qubits.
    pub spec: LmesSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeStep {
    pub part: usize,
    /// Original labels merged with the accumulated state.
    pub shared: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionPlan {
    pub n: usize,
    pub parts: Vec<RegularPart>,
    /// Parts after the first, in merge order.
    pub merges: Vec<MergeStep>,
    /// Qubits not touched by any gate, left in `|+>`.
    pub idle: Vec<usize>,
}

impl CompositionPlan {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("plan holds plain values")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Try to color `gates` (all of order `k`) with `k` colors so that every
/// gate sees each color once. Qubits are colored in increasing order.
fn k_coloring(gates: &[Vec<usize>], k: usize) -> Option<Vec<(usize, usize)>> {
    let mut qubits: Vec<usize> = gates.iter().flatten().copied().collect();
    qubits.sort_unstable();
    qubits.dedup();
    let mut color = vec![usize::MAX; qubits.len()];
    let idx = |q: usize| qubits.binary_search(&q).expect("qubit collected above");
    fn go(
        at: usize,
        qubits: &[usize],
        color: &mut [usize],
        gates: &[Vec<usize>],
        k: usize,
        idx: &dyn Fn(usize) -> usize,
    ) -> bool {
        if at == qubits.len() {
            return true;
        }
        let q = qubits[at];
        for c in 0..k {
            let clash = gates.iter().filter(|g| g.contains(&q)).any(|g| {
                g.iter().any(|&o| o != q && color[idx(o)] == c)
            });
            if !clash {
                color[at] = c;
                if go(at + 1, qubits, color, gates, k, idx) {
                    return true;
                }
                color[at] = usize::MAX;
            }
        }
        false
    }
    if go(0, &qubits, &mut color, gates, k, &idx) {
        Some(qubits.into_iter().zip(color).collect())
    } else {
        None
    }
}

fn part_from(gates: &[Vec<usize>], coloring: &[(usize, usize)], k: usize) -> Result<RegularPart> {
    let qubits: Vec<usize> = coloring.iter().map(|&(q, _)| q).collect();
    let local = |q: usize| qubits.iter().position(|&x| x == q).expect("colored") + 1;
    let local_gates = gates.iter().map(|g| g.iter().map(|&q| local(q)).collect()).collect();
    let mut colors = vec![Vec::new(); k];
    for &(q, c) in coloring {
        colors[c].push(local(q));
    }
    colors.retain(|c: &Vec<usize>| !c.is_empty());
    let spec = LmesSpec::new(qubits.len(), local_gates, colors)?;
    spec.require_regular()?;
    Ok(RegularPart { qubits, spec })
}

/// Decompose into regular parts: gates grouped by order, each group packed
/// greedily (in the given gate order) into subsets that admit a coloring
/// with as many colors as the order. Parts are merged in order over the
/// qubits they share with what has been built so far.
pub fn compose_nonregular(spec: &LmesSpec) -> Result<CompositionPlan> {
    if spec.gates().is_empty() {
        return Err(Error::Decomposition("spec has no phase gates".into()));
    }
    let mut orders: Vec<usize> = spec.gates().iter().map(Vec::len).collect();
    orders.sort_unstable();
    orders.dedup();
    orders.reverse();
    let mut parts = Vec::new();
    for k in orders {
        let mut groups: Vec<Vec<Vec<usize>>> = Vec::new();
        for g in spec.gates().iter().filter(|g| g.len() == k) {
            let slot = groups.iter().position(|grp| {
                let mut trial = grp.clone();
                trial.push(g.clone());
                k_coloring(&trial, k).is_some()
            });
            match slot {
                Some(i) => groups[i].push(g.clone()),
                None => groups.push(vec![g.clone()]),
            }
        }
        for grp in groups {
            let coloring = k_coloring(&grp, k).ok_or_else(|| {
                Error::Decomposition(format!("no {k}-coloring for gates {grp:?}"))
            })?;
            parts.push(part_from(&grp, &coloring, k)?);
        }
    }
    let mut built: Vec<usize> = parts[0].qubits.clone();
    let mut merges = Vec::new();
    for (i, p) in parts.iter().enumerate().skip(1) {
        let shared: Vec<usize> = p.qubits.iter().copied().filter(|q| built.contains(q)).collect();
        built.extend(p.qubits.iter().copied().filter(|q| !shared.contains(q)));
        merges.push(MergeStep { part: i, shared });
    }
    let idle = (1..=spec.n()).filter(|q| !built.contains(q)).collect();
    Ok(CompositionPlan {
        n: spec.n(),
        parts,
        merges,
        idle,
    })
}

fn part_state(part: &RegularPart, mark: &str) -> Result<LabeledState> {
    let names: Vec<String> = part.qubits.iter().map(|q| format!("{q}{mark}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    LabeledState::from_spec(&part.spec, &refs)
}

/// Merge the pure targets of every part; the result is labelled by the
/// original qubit numbers.
pub fn execute_plan(plan: &CompositionPlan) -> Result<LabeledState> {
    let mut acc = part_state(&plan.parts[0], "")?;
    for step in &plan.merges {
        let part = &plan.parts[step.part];
        let next = part_state(part, "'")?;
        let names: Vec<(String, String)> = step.shared.iter().map(|q| (q.to_string(), format!("{q}'"))).collect();
        let pairs: Vec<(&str, &str)> = names.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        acc = p_connect(&acc, &next, &pairs)?;
        for q in part.qubits.iter().filter(|q| !step.shared.contains(q)) {
            acc.relabel(&format!("{q}'"), &q.to_string())?;
        }
    }
    for q in &plan.idle {
        let plus = LabeledState::new(&[&q.to_string()], &build_state(&LmesSpec::new(1, vec![], vec![vec![1]])?))?;
        acc = acc.tensor(&plus)?;
    }
    Ok(acc)
}

/// Checks of the shortcut for `x|Ψ><Ψ| + (1-x)/8` with `Ψ = U123 U23 |+>^3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShortcutScenario {
    pub x: f64,
    /// Step 1: qubit 1 in `|0>` leaves white noise on `U23` with the same `x`.
    pub cut_deviation: f64,
    /// Step 2: the two-qubit state purifies.
    pub pair_verdict: Verdict,
    /// Step 3: merging `ρ` with pure `U23|+>` gives white noise on `U123`, same `x`.
    pub merge_deviation: f64,
    /// Step 4: the three-qubit regular state purifies.
    pub triple_verdict: Verdict,
    /// Step 5: merging the two pure states gives the target.
    pub final_fidelity: f64,
}

pub fn nonregular_shortcut(x: f64) -> Result<ShortcutScenario> {
    let spec = LmesSpec::new(3, vec![vec![1, 2, 3], vec![2, 3]], vec![vec![1], vec![2], vec![3]])?;
    let f = white_noise_fidelity(3, x);
    let rho = from_lme_coeffs(&white_noise_n(3, f)?, &spec)?;

    let plan = CutPlan::new(&spec, 1, vec![measurement(1, ZOutcome::Zero)])?;
    let cut = z_measure_cut(&rho, &plan)?;
    let u23 = plan.residual.clone();
    let want_cut = white_noise_n(2, white_noise_fidelity(2, x))?;
    let cut_deviation = linalg::max_abs_diff(to_lme_coeffs(&cut.state, &u23)?.matrix(), want_cut.matrix());
    let pair = run_schedule(&to_lme_coeffs(&cut.state, &u23)?, &u23, &ScheduleSpec::default_for(&u23)?)?;

    let psi2 = LabeledState::from_spec(&u23, &["2'", "3'"])?;
    let (merged, labels, _) = p_connect_mixed(&rho, &["1", "2", "3"], &psi2, &[("2", "2'"), ("3", "3'")])?;
    if labels != ["1", "2", "3"] {
        return Err(Error::Wire(format!("unexpected wires {labels:?}")));
    }
    let u123 = LmesSpec::new(3, vec![vec![1, 2, 3]], vec![vec![1], vec![2], vec![3]])?;
    let lam = to_lme_coeffs(&merged, &u123)?;
    let merge_deviation = linalg::max_abs_diff(lam.matrix(), white_noise_n(3, f)?.matrix());
    let triple = run_schedule(&lam, &u123, &ScheduleSpec::default_for(&u123)?)?;

    let a = LabeledState::from_spec(&u123, &["1", "2", "3"])?;
    let b = LabeledState::from_spec(&u23, &["2'", "3'"])?;
    let out = p_connect(&a, &b, &[("2", "2'"), ("3", "3'")])?;
    let final_fidelity = out.overlap(&LabeledState::from_spec(&spec, &["1", "2", "3"])?)?;
    Ok(ShortcutScenario {
        x,
        cut_deviation,
        pair_verdict: pair.verdict,
        merge_deviation,
        triple_verdict: triple.verdict,
        final_fidelity,
    })
}
