use serde::{Deserialize, Serialize};

use super::cut::{measurement, CutPlan, ZOutcome};
use crate::error::{Error, Result};
use crate::lme::LmesSpec;
use crate::noise::{white_noise, white_noise_fidelity, white_noise_mixing};
use crate::purify::{find_threshold, ScheduleSpec, ThresholdReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndirectStrategy {
    /// Cut into 3-qubit graph states, purify, reconnect with `Q` and `P`.
    Graph,
    /// Cut into Bell pairs, purify, reconnect.
    Bipartite,
}

/// Cuts of the 6-qubit linear state used by the graph strategy, one per
/// copy. The outcomes reproduce residual states `U13U34`, `U12U24`, `U34U46`
/// and `U35U56`.
pub fn graph_cut_plans(spec: &LmesSpec) -> Result<Vec<CutPlan>> {
    use ZOutcome::{One, Zero};
    Ok(vec![
        CutPlan::new(spec, 1, vec![measurement(2, One), measurement(5, Zero)])?,
        CutPlan::new(spec, 2, vec![measurement(3, One), measurement(5, Zero)])?,
        CutPlan::new(spec, 3, vec![measurement(2, Zero), measurement(5, One)])?,
        CutPlan::new(spec, 4, vec![measurement(2, Zero), measurement(4, One)])?,
    ])
}

/// Four consecutive measurements leaving `U12`.
pub fn bipartite_cut_plan(spec: &LmesSpec) -> Result<CutPlan> {
    use ZOutcome::{One, Zero};
    CutPlan::new(
        spec,
        1,
        vec![measurement(3, One), measurement(4, Zero), measurement(5, Zero), measurement(6, Zero)],
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubStateThreshold {
    pub copy: usize,
    pub residual: String,
    /// Threshold in the sub-state's own white-noise fidelity, best schedule.
    pub report: ThresholdReport,
    /// Fidelity of the uncut state whose cut is at the threshold (the cut
    /// keeps the white-noise mixing weight).
    pub original_fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndirectReport {
    pub strategy: IndirectStrategy,
    /// Largest sub-state threshold, in sub-state fidelity.
    pub bottleneck: f64,
    /// The same threshold expressed as the fidelity of the uncut state.
    pub bottleneck_original_fidelity: f64,
    pub sub_states: Vec<SubStateThreshold>,
}

/// Threshold of every cut sub-state under white noise, each purified with
/// the better of the two rotated schedules (`AB-BA` / `BA-AB`).
pub fn indirect_threshold(
    strategy: IndirectStrategy,
    spec: &LmesSpec,
    bracket: (f64, f64),
    tol: f64,
) -> Result<IndirectReport> {
    let plans = match strategy {
        IndirectStrategy::Graph => graph_cut_plans(spec)?,
        IndirectStrategy::Bipartite => vec![bipartite_cut_plan(spec)?],
    };
    let mut sub_states = Vec::new();
    for plan in &plans {
        let sub = &plan.residual;
        let family = |f: f64| white_noise(sub, f);
        let mut best: Option<ThresholdReport> = None;
        for sched in candidate_schedules(sub)? {
            let rep = find_threshold(&family, sub, &sched, bracket, tol)?;
            if best.as_ref().is_none_or(|b| rep.critical_parameter < b.critical_parameter) {
                best = Some(rep);
            }
        }
        let report = best.ok_or_else(|| Error::Schedule("no schedule".into()))?;
        let x = white_noise_mixing(sub.n(), report.critical_parameter);
        sub_states.push(SubStateThreshold {
            copy: plan.copy,
            residual: sub.to_string(),
            original_fidelity: white_noise_fidelity(spec.n(), x),
            report,
        });
    }
    let worst = sub_states
        .iter()
        .max_by(|a, b| a.report.critical_parameter.total_cmp(&b.report.critical_parameter))
        .ok_or_else(|| Error::InvalidSpec("no sub-states".into()))?;
    Ok(IndirectReport {
        strategy,
        bottleneck: worst.report.critical_parameter,
        bottleneck_original_fidelity: worst.original_fidelity,
        sub_states: sub_states.clone(),
    })
}

fn candidate_schedules(spec: &LmesSpec) -> Result<Vec<ScheduleSpec>> {
    let fwd = ScheduleSpec::default_for(spec)?;
    if spec.num_colors() != 2 {
        return Ok(vec![fwd]);
    }
    Ok(vec![fwd, "BA-AB".parse()?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lme::build_state;
    use crate::strategy::cut::residual_fidelity;

    fn linear6() -> LmesSpec {
        LmesSpec::new(
            6,
            vec![vec![1, 2, 3], vec![2, 3, 4], vec![3, 4, 5], vec![4, 5, 6]],
            vec![vec![1, 4], vec![2, 5], vec![3, 6]],
        )
        .unwrap()
    }

    #[test]
    fn plans_leave_paths_and_a_pair() {
        let spec = linear6();
        let want_survivors = [vec![1, 3, 4], vec![1, 2, 4], vec![3, 4, 6], vec![3, 5, 6]];
        for (plan, surv) in graph_cut_plans(&spec).unwrap().iter().zip(want_survivors) {
            assert_eq!(plan.survivors, surv);
            assert_eq!(plan.residual.gates(), &[vec![1, 2], vec![2, 3]]);
            assert!(plan.residual.is_regular());
            assert!((residual_fidelity(&spec, plan).unwrap() - 1.0).abs() < 1e-12);
        }
        let pair = bipartite_cut_plan(&spec).unwrap();
        assert_eq!(pair.residual.n(), 2);
        let _ = build_state(&pair.residual);
    }

    #[test]
    fn bipartite_threshold_near_half() {
        let rep = indirect_threshold(IndirectStrategy::Bipartite, &linear6(), (0.3, 0.9), 1e-3).unwrap();
        assert!((rep.bottleneck - 0.5).abs() < 0.01, "{}", rep.bottleneck);
        assert!(rep.bottleneck_original_fidelity < rep.bottleneck);
    }
}
