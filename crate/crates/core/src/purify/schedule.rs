use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::map::purify_color;
use crate::error::{Error, Result};
use crate::lme::{fidelity, LmeCoeffMatrix, LmesSpec};

pub const DEFAULT_MAX_ROUNDS: usize = 300;
pub const DEFAULT_CONVERGENCE_EPS: f64 = 1e-6;
pub const DEFAULT_DIVERGENCE_WINDOW: usize = 30;

/// Order in which colors are purified, plus the stopping rules. One round is
/// one pass through the whole `sequence`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleDocument", into = "ScheduleDocument")]
pub struct ScheduleSpec {
    sequence: Vec<usize>,
    groups: Vec<usize>,
    pub max_rounds: usize,
    pub convergence_eps: f64,
    pub divergence_window: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleDocument {
    pub sequence: String,
    #[serde(default = "default_rounds")]
    pub max_rounds: usize,
    #[serde(default = "default_eps")]
    pub convergence_eps: f64,
    #[serde(default = "default_window")]
    pub divergence_window: usize,
}

fn default_rounds() -> usize {
    DEFAULT_MAX_ROUNDS
}
fn default_eps() -> f64 {
    DEFAULT_CONVERGENCE_EPS
}
fn default_window() -> usize {
    DEFAULT_DIVERGENCE_WINDOW
}

impl TryFrom<ScheduleDocument> for ScheduleSpec {
    type Error = Error;
    fn try_from(doc: ScheduleDocument) -> Result<Self> {
        let mut s: ScheduleSpec = doc.sequence.parse()?;
        s.max_rounds = doc.max_rounds;
        s.convergence_eps = doc.convergence_eps;
        s.divergence_window = doc.divergence_window;
        s.check_limits()?;
        Ok(s)
    }
}

impl From<ScheduleSpec> for ScheduleDocument {
    fn from(s: ScheduleSpec) -> Self {
        ScheduleDocument {
            sequence: s.to_string(),
            max_rounds: s.max_rounds,
            convergence_eps: s.convergence_eps,
            divergence_window: s.divergence_window,
        }
    }
}

impl ScheduleSpec {
    /// Sequence of color indices, one group only.
    pub fn new(sequence: Vec<usize>) -> Result<Self> {
        let groups = vec![sequence.len()];
        Self::from_parts(sequence, groups)
    }

    fn from_parts(sequence: Vec<usize>, groups: Vec<usize>) -> Result<Self> {
        if sequence.is_empty() {
            return Err(Error::Schedule("empty color sequence".into()));
        }
        if let Some(&c) = sequence.iter().find(|&&c| c >= 26) {
            return Err(Error::Schedule(format!("color index {c} has no letter label")));
        }
        Ok(ScheduleSpec {
            sequence,
            groups,
            max_rounds: DEFAULT_MAX_ROUNDS,
            convergence_eps: DEFAULT_CONVERGENCE_EPS,
            divergence_window: DEFAULT_DIVERGENCE_WINDOW,
        })
    }

    /// Right rotations of `A B C ...` concatenated: `ABC-CAB-BCA` for three
    /// colors, `AB-BA` for two.
    pub fn rotations(num_colors: usize) -> Result<Self> {
        if num_colors == 0 {
            return Err(Error::Schedule("no colors".into()));
        }
        let mut seq = Vec::with_capacity(num_colors * num_colors);
        for r in 0..num_colors {
            seq.extend((0..num_colors).map(|i| (i + num_colors - r) % num_colors));
        }
        Self::from_parts(seq, vec![num_colors; num_colors])
    }

    /// Each color once, in order.
    pub fn simple(num_colors: usize) -> Result<Self> {
        Self::new((0..num_colors).collect())
    }

    pub fn default_for(spec: &LmesSpec) -> Result<Self> {
        Self::rotations(spec.num_colors())
    }

    pub fn with_limits(mut self, max_rounds: usize, eps: f64, window: usize) -> Result<Self> {
        self.max_rounds = max_rounds;
        self.convergence_eps = eps;
        self.divergence_window = window;
        self.check_limits()?;
        Ok(self)
    }

    fn check_limits(&self) -> Result<()> {
        if self.max_rounds == 0 || self.divergence_window == 0 {
            return Err(Error::Schedule("max_rounds and divergence_window must be positive".into()));
        }
        if !(self.convergence_eps > 0.0 && self.convergence_eps < 1.0) {
            return Err(Error::InvalidParameter {
                what: "convergence_eps",
                value: self.convergence_eps,
                range: "(0, 1)".into(),
            });
        }
        Ok(())
    }

    pub fn sequence(&self) -> &[usize] {
        &self.sequence
    }

    /// Every color in the sequence must exist in the spec, and every color of
    /// the spec must appear at least once.
    pub fn validate(&self, spec: &LmesSpec) -> Result<()> {
        let k = spec.num_colors();
        for &c in &self.sequence {
            if c >= k {
                return Err(Error::UnknownColor { color: c, count: k });
            }
        }
        if let Some(missing) = (0..k).find(|c| !self.sequence.contains(c)) {
            return Err(Error::Schedule(format!(
                "color {} never purified",
                LmesSpec::color_label(missing)
            )));
        }
        Ok(())
    }
}

impl fmt::Display for ScheduleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut start = 0;
        for (i, &len) in self.groups.iter().enumerate() {
            if i > 0 {
                f.write_str("-")?;
            }
            for &c in &self.sequence[start..start + len] {
                write!(f, "{}", LmesSpec::color_label(c))?;
            }
            start += len;
        }
        Ok(())
    }
}

impl FromStr for ScheduleSpec {
    type Err = Error;

    /// Letters name colors; `-` only groups for readability.
    fn from_str(s: &str) -> Result<Self> {
        let mut seq = Vec::new();
        let mut groups = Vec::new();
        for part in s.trim().split('-') {
            if part.is_empty() {
                return Err(Error::Schedule(format!("empty group in {s:?}")));
            }
            for ch in part.chars() {
                if !ch.is_ascii_uppercase() {
                    return Err(Error::Schedule(format!("unexpected character {ch:?} in {s:?}")));
                }
                seq.push((ch as u8 - b'A') as usize);
            }
            groups.push(part.len());
        }
        Self::from_parts(seq, groups)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converged,
    Failed,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Converged => "converged",
            Verdict::Failed => "failed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub round: usize,
    pub step: usize,
    pub color: char,
    pub fidelity: f64,
    pub parity_success_prob: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleRun {
    pub steps: Vec<TraceRow>,
    /// Fidelity after each round; entry 0 is the input.
    pub round_fidelities: Vec<f64>,
    pub verdict: Verdict,
    pub final_state: LmeCoeffMatrix,
}

impl ScheduleRun {
    pub fn rounds(&self) -> usize {
        self.round_fidelities.len() - 1
    }

    pub fn final_fidelity(&self) -> f64 {
        *self.round_fidelities.last().expect("input fidelity always recorded")
    }

    /// Tab-separated trace, one line per subprotocol application.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("# round\tstep\tcolor\tfidelity\tparity_success_prob\n");
        out.push_str(&format!("# verdict {}\n", self.verdict));
        out.push_str(&format!("0\t0\t-\t{:.12}\t1\n", self.round_fidelities[0]));
        for r in &self.steps {
            out.push_str(&format!(
                "{}\t{}\t{}\t{:.12}\t{:.12}\n",
                r.round, r.step, r.color, r.fidelity, r.parity_success_prob
            ));
        }
        out
    }
}

/// Run the schedule until the fidelity reaches `1 - eps` (converged), stops
/// improving over `divergence_window` rounds, or `max_rounds` is exhausted
/// (both failed). A fixed point below the threshold is reported as failed.
pub fn run_schedule(
    lambda: &LmeCoeffMatrix,
    spec: &LmesSpec,
    schedule: &ScheduleSpec,
) -> Result<ScheduleRun> {
    spec.require_regular()?;
    schedule.validate(spec)?;
    let mut state = lambda.normalized()?;
    let mut round_fidelities = vec![fidelity(&state)];
    let mut steps = Vec::new();
    let target = 1.0 - schedule.convergence_eps;
    let verdict = if round_fidelities[0] >= target {
        Verdict::Converged
    } else {
        let mut verdict = Verdict::Failed;
        for round in 1..=schedule.max_rounds {
            for (step, &color) in schedule.sequence().iter().enumerate() {
                let out = purify_color(&state, spec, color)?;
                state = out.output;
                steps.push(TraceRow {
                    round,
                    step: step + 1,
                    color: LmesSpec::color_label(color),
                    fidelity: fidelity(&state),
                    parity_success_prob: out.parity_success_prob,
                });
            }
            let f = fidelity(&state);
            round_fidelities.push(f);
            if f >= target {
                verdict = Verdict::Converged;
                break;
            }
            let w = schedule.divergence_window;
            if round >= w && f <= round_fidelities[round - w] {
                break;
            }
        }
        verdict
    };
    Ok(ScheduleRun {
        steps,
        round_fidelities,
        verdict,
        final_state: state,
    })
}
