use serde::{Deserialize, Serialize};

use super::schedule::{run_schedule, ScheduleRun, ScheduleSpec, Verdict};
use crate::error::{Error, Result};
use crate::lme::{LmeCoeffMatrix, LmesSpec};

pub const DEFAULT_TOLERANCE: f64 = 5e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub parameter: f64,
    pub verdict: Verdict,
    pub rounds: usize,
    pub final_fidelity: f64,
}

/// Outcome of a bisection on a one-parameter family of noisy states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub schedule: String,
    pub tolerance: f64,
    /// Midpoint of the final bracket.
    pub critical_parameter: f64,
    /// Final bracket `[lo, hi]`, at most `tolerance` wide.
    pub bracket: [f64; 2],
    /// Whether the state converges above (`true`) or below the threshold.
    pub converges_above: bool,
    pub probes: Vec<Probe>,
    /// Per-round fidelity at the two final bracket ends.
    pub lo_round_fidelities: Vec<f64>,
    pub hi_round_fidelities: Vec<f64>,
}

impl ThresholdReport {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("report holds only plain numbers and strings")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

fn probe<F>(family: &F, x: f64, spec: &LmesSpec, schedule: &ScheduleSpec) -> Result<(Probe, ScheduleRun)>
where
    F: Fn(f64) -> Result<LmeCoeffMatrix> + Sync,
{
    let run = run_schedule(&family(x)?, spec, schedule)?;
    Ok((
        Probe {
            parameter: x,
            verdict: run.verdict,
            rounds: run.rounds(),
            final_fidelity: run.final_fidelity(),
        },
        run,
    ))
}

/// Bisect `family` on `[lo, hi]` for the boundary between converging and
/// failing runs. The two ends must have different verdicts.
pub fn find_threshold<F>(
    family: &F,
    spec: &LmesSpec,
    schedule: &ScheduleSpec,
    bracket: (f64, f64),
    tol: f64,
) -> Result<ThresholdReport>
where
    F: Fn(f64) -> Result<LmeCoeffMatrix> + Sync,
{
    let (mut lo, mut hi) = bracket;
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(Error::Bracket {
            lo,
            hi,
            detail: "need finite lo < hi".into(),
        });
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter {
            what: "tolerance",
            value: tol,
            range: "> 0".into(),
        });
    }
    let (a, b) = rayon::join(
        || probe(family, lo, spec, schedule),
        || probe(family, hi, spec, schedule),
    );
    let (lo_probe, mut lo_run) = a?;
    let (hi_probe, mut hi_run) = b?;
    if lo_probe.verdict == hi_probe.verdict {
        return Err(Error::Bracket {
            lo,
            hi,
            detail: format!("both ends {}", lo_probe.verdict),
        });
    }
    let converges_above = hi_probe.verdict == Verdict::Converged;
    let mut probes = vec![lo_probe, hi_probe];
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let (p, run) = probe(family, mid, spec, schedule)?;
        probes.push(p);
        if (p.verdict == Verdict::Converged) == converges_above {
            hi = mid;
            hi_run = run;
        } else {
            lo = mid;
            lo_run = run;
        }
    }
    Ok(ThresholdReport {
        schedule: schedule.to_string(),
        tolerance: tol,
        critical_parameter: 0.5 * (lo + hi),
        bracket: [lo, hi],
        converges_above,
        probes,
        lo_round_fidelities: lo_run.round_fidelities,
        hi_round_fidelities: hi_run.round_fidelities,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::white_noise;

    #[test]
    fn white_noise_u123_threshold() {
        let spec = LmesSpec::new(3, vec![vec![1, 2, 3]], vec![vec![1], vec![2], vec![3]]).unwrap();
        let sched = ScheduleSpec::default_for(&spec).unwrap();
        let fam = |f: f64| white_noise(&spec, f);
        let rep = find_threshold(&fam, &spec, &sched, (0.5, 0.9), 1e-3).unwrap();
        assert!(rep.converges_above);
        assert!(rep.bracket[1] - rep.bracket[0] <= 1e-3);
        assert!((rep.critical_parameter - 0.6507).abs() < 2e-3, "{}", rep.critical_parameter);
        let back = ThresholdReport::from_toml(&rep.to_toml()).unwrap();
        assert_eq!(back, rep);
    }

    #[test]
    fn bracket_errors() {
        let spec = LmesSpec::new(2, vec![vec![1, 2]], vec![vec![1], vec![2]]).unwrap();
        let sched = ScheduleSpec::default_for(&spec).unwrap();
        let fam = |f: f64| white_noise(&spec, f);
        assert!(matches!(
            find_threshold(&fam, &spec, &sched, (0.8, 0.9), 1e-3),
            Err(Error::Bracket { .. })
        ));
        assert!(matches!(
            find_threshold(&fam, &spec, &sched, (0.9, 0.8), 1e-3),
            Err(Error::Bracket { .. })
        ));
    }
}
