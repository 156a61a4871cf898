//! Command dispatch. Every command writes its artifacts under the output
//! directory and returns a one-line summary.

use std::path::PathBuf;

use lmes_core::depolarization::{
    map_witness, phi_batch_tsv, psd_range, sample_phi_batch, search_min_phi, spoil_comparison, LinearMapOnStates,
    SpoilComparison,
};
use lmes_core::lme::MultiIndex;
use lmes_core::noise::{noisy_target, white_noise, ChannelKind, ChannelSpec};
use lmes_core::oracle::{self, VerificationReport};
use lmes_core::purify::{find_threshold, run_schedule, ScheduleSpec, ThresholdReport, Verdict, DEFAULT_TOLERANCE};
use lmes_core::strategy::{indirect_threshold, IndirectReport, IndirectStrategy};
use lmes_core::{build_state, LmesSpec};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{CommandKind, ExperimentConfig, Target};
use crate::output::write_atomic;
use crate::status::{CliError, Status};
use crate::table::{emit_threshold_table, ThresholdRow};

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub line: String,
    pub artifacts: Vec<PathBuf>,
    /// Non-zero when artifacts were written but the run is not a success
    /// (non-convergence, partial table, failed oracle check).
    pub status: Status,
    pub warnings: Vec<String>,
}

impl Summary {
    fn ok(line: String, artifacts: Vec<PathBuf>) -> Self {
        Summary {
            line,
            artifacts,
            status: Status::Ok,
            warnings: Vec::new(),
        }
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Summary, CliError> {
    match cfg.command {
        CommandKind::Build => build(cfg),
        CommandKind::Purify => purify(cfg),
        CommandKind::Threshold => threshold(cfg),
        CommandKind::CjCheck => cj_check(cfg),
        CommandKind::PhiBatch => phi_batch(cfg),
        CommandKind::Counterexample => counterexample(cfg),
        CommandKind::Compare => compare(cfg),
        CommandKind::VerifyOracle => verify_oracle(cfg),
    }
}

fn toml_of<T: Serialize>(value: &T) -> Result<String, CliError> {
    toml::to_string(value).map_err(|e| CliError::new(Status::Internal, format!("serializing report: {e}")))
}

fn names(cfg: &ExperimentConfig) -> String {
    cfg.targets.iter().map(|t| t.name.as_str()).collect::<Vec<_>>().join(",")
}

fn single_target(cfg: &ExperimentConfig) -> Result<&Target, CliError> {
    match cfg.targets.as_slice() {
        [t] => Ok(t),
        ts => Err(CliError::new(
            Status::Parse,
            format!("{} takes exactly one target, got {}", cfg.command, ts.len()),
        )),
    }
}

/// Bracket covering the whole physical range: the maximally mixed end
/// never purifies, the noiseless end is the fixed point.
fn default_bracket(kind: ChannelKind, spec: &LmesSpec) -> (f64, f64) {
    match kind {
        ChannelKind::GlobalWhite => (1.0 / spec.dim() as f64, 1.0),
        _ => (0.0, 1.0),
    }
}

fn build(cfg: &ExperimentConfig) -> Result<Summary, CliError> {
    let mut artifacts = Vec::new();
    for t in &cfg.targets {
        let psi = build_state(&t.spec);
        let mut tsv = String::from("# index\tbits\tamplitude\n");
        for (i, a) in psi.amplitudes().iter().enumerate() {
            let bits = MultiIndex::new(t.spec.n(), i)?;
            tsv.push_str(&format!("{i}\t{bits}\t{:+.12}\n", a.re));
        }
        artifacts.push(write_atomic(&cfg.out, &format!("{}.state.tsv", t.name), &tsv)?);
        artifacts.push(write_atomic(&cfg.out, &format!("{}.spec.toml", t.name), &t.spec.to_toml())?);
    }
    Ok(Summary::ok(
        format!("build: {} state(s) [{}] written to {}", cfg.targets.len(), names(cfg), cfg.out.display()),
        artifacts,
    ))
}

fn purify(cfg: &ExperimentConfig) -> Result<Summary, CliError> {
    let channel = cfg
        .channel
        .as_ref()
        .ok_or_else(|| CliError::new(Status::Parse, "purify needs a `channel` table (kind, parameter)"))?;
    let mut artifacts = Vec::new();
    let mut parts = Vec::new();
    let mut status = Status::Ok;
    for t in &cfg.targets {
        let schedule = cfg.schedule_for(&t.spec)?;
        let run = run_schedule(&channel.apply_to_target(&t.spec)?, &t.spec, &schedule)?;
        let file = format!("{}.{}.trace.tsv", t.name, channel.kind);
        artifacts.push(write_atomic(&cfg.out, &file, &run.to_tsv())?);
        if run.verdict == Verdict::Failed {
            status = Status::NonConvergence;
        }
        parts.push(format!(
            "{} {} after {} rounds, fidelity {:.6}",
            t.name,
            run.verdict,
            run.rounds(),
            run.final_fidelity()
        ));
    }
    Ok(Summary {
        line: format!("purify {}={}: {}", channel.kind, channel.parameter, parts.join("; ")),
        artifacts,
        status,
        warnings: Vec::new(),
    })
}

struct Job<'a> {
    target: &'a Target,
    channel: ChannelSpec,
}

fn threshold(cfg: &ExperimentConfig) -> Result<Summary, CliError> {
    let channels: Vec<ChannelSpec> = if !cfg.channels.is_empty() {
        cfg.channels.iter().map(|&k| ChannelSpec::new(k, 0.0)).collect()
    } else if let Some(c) = &cfg.channel {
        vec![c.clone()]
    } else {
        vec![ChannelSpec::new(ChannelKind::GlobalWhite, 0.0)]
    };
    let jobs: Vec<Job> = cfg
        .targets
        .iter()
        .flat_map(|t| channels.iter().map(move |c| Job { target: t, channel: c.clone() }))
        .collect();
    let tol = cfg.tol.unwrap_or(DEFAULT_TOLERANCE);
    let results: Vec<Result<ThresholdReport, CliError>> = jobs
        .par_iter()
        .map(|job| {
            let spec = &job.target.spec;
            let schedule = cfg.schedule_for(spec)?;
            let bracket = cfg.bracket.unwrap_or_else(|| default_bracket(job.channel.kind, spec));
            let family = |x: f64| noisy_target(spec, job.channel.kind, x, &job.channel.targets);
            Ok(find_threshold(&family, spec, &schedule, bracket, tol)?)
        })
        .collect();

    let mut artifacts = Vec::new();
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    let mut status = Status::Ok;
    for (job, res) in jobs.iter().zip(results) {
        let label = format!("{}.{}", job.target.name, job.channel.kind);
        let threshold = match res {
            Ok(report) => {
                artifacts.push(write_atomic(&cfg.out, &format!("{label}.threshold.toml"), &report.to_toml())?);
                Some(report)
            }
            Err(e) => {
                warnings.push(format!("{label}: {e}"));
                status = status.max(e.status);
                None
            }
        };
        rows.push((ThresholdRow {
            state: job.target.name.clone(),
            channel: job.channel.kind,
            threshold: threshold.as_ref().map(|r| r.critical_parameter),
        }, threshold));
    }
    let table_rows: Vec<ThresholdRow> = rows.iter().map(|(r, _)| r.clone()).collect();
    let (table, table_status) = emit_threshold_table(&table_rows);
    artifacts.push(write_atomic(&cfg.out, "thresholds.tsv", &table)?);
    warnings.extend(table_status.duplicates.iter().map(|d| format!("duplicate run {d} dropped")));
    if table_status.is_partial() {
        warnings.push(format!("partial table, missing: {}", table_status.missing.join(", ")));
    }

    let line = match rows.as_slice() {
        [(row, Some(r))] => format!(
            "threshold {} {}: critical {:.6} in [{:.6}, {:.6}], converges {}",
            row.state,
            row.channel,
            r.critical_parameter,
            r.bracket[0],
            r.bracket[1],
            if r.converges_above { "above" } else { "below" }
        ),
        _ => format!(
            "threshold: {}/{} runs complete, table {}",
            rows.iter().filter(|(_, r)| r.is_some()).count(),
            rows.len(),
            cfg.out.join("thresholds.tsv").display()
        ),
    };
    Ok(Summary {
        line,
        artifacts,
        status,
        warnings,
    })
}

#[derive(Serialize)]
struct CjReport {
    spec: String,
    depolarization_trace_norm: f64,
    identity_trace_norm: f64,
}

fn cj_check(cfg: &ExperimentConfig) -> Result<Summary, CliError> {
    let mut artifacts = Vec::new();
    let mut parts = Vec::new();
    for t in &cfg.targets {
        let report = CjReport {
            spec: t.spec.to_string(),
            depolarization_trace_norm: map_witness(&LinearMapOnStates::depolarization(&t.spec))?,
            identity_trace_norm: map_witness(&LinearMapOnStates::identity(&t.spec))?,
        };
        artifacts.push(write_atomic(&cfg.out, &format!("{}.cj.toml", t.name), &toml_of(&report)?)?);
        parts.push(format!(
            "{} depolarization {:.6}, identity {:.6}",
            t.name, report.depolarization_trace_norm, report.identity_trace_norm
        ));
    }
    Ok(Summary::ok(format!("cj-check: {}", parts.join("; ")), artifacts))
}

fn phi_batch(cfg: &ExperimentConfig) -> Result<Summary, CliError> {
    let t = single_target(cfg)?;
    let count = cfg.samples.unwrap_or(1000);
    let batch = sample_phi_batch(&t.spec, count, cfg.seed)?;
    let min = batch.iter().map(|s| s.trace_norm).fold(f64::INFINITY, f64::min);
    let mut artifacts = vec![write_atomic(&cfg.out, &format!("{}.phi_batch.tsv", t.name), &phi_batch_tsv(&batch))?];
    let mut line = format!("phi-batch {}: {count} samples, seed {}, min trace norm {min:.6}", t.name, cfg.seed);
    if let Some(budget) = cfg.budget {
        let search = search_min_phi(&t.spec, budget, cfg.restarts.unwrap_or(10), cfg.seed)?;
        let mut tsv = String::from("# row\tcolumn\tp\n");
        for k in 0..search.best.matrix().nrows() {
            for m in 0..search.best.matrix().ncols() {
                tsv.push_str(&format!("{k}\t{m}\t{:.12}\n", search.best.entry(k, m)));
            }
        }
        artifacts.push(write_atomic(&cfg.out, &format!("{}.phi_search.tsv", t.name), &tsv)?);
        line += &format!(", search min {:.6} after {} evaluations", search.best_norm, search.evaluations);
    }
    Ok(Summary::ok(line, artifacts))
}

#[derive(Serialize)]
struct ComparisonEntry {
    schedule: String,
    raw_threshold: f64,
    twirled_threshold: f64,
    twirl_spoils: bool,
    comparison: SpoilComparison,
}

#[derive(Serialize)]
struct CounterexampleReport {
    psd_range: [f64; 2],
    runs: Vec<ComparisonEntry>,
}

fn counterexample(cfg: &ExperimentConfig) -> Result<Summary, CliError> {
    let schedules: Vec<ScheduleSpec> = match &cfg.schedule {
        Some(s) => vec![s.clone()],
        None => vec!["ABC".parse()?, "ABC-CAB-BCA".parse()?],
    };
    let bracket = cfg.bracket.unwrap_or((0.55, 0.72));
    let tol = cfg.tol.unwrap_or(2e-5);
    let psd = psd_range(1e-6)?;
    let mut runs = Vec::new();
    for s in schedules {
        let s = match cfg.max_rounds {
            Some(r) => s.clone().with_limits(r, s.convergence_eps, s.divergence_window.min(r))?,
            None => s,
        };
        let cmp = spoil_comparison(&s, bracket, tol)?;
        runs.push(ComparisonEntry {
            schedule: s.to_string(),
            raw_threshold: cmp.raw.critical_parameter,
            twirled_threshold: cmp.twirled.critical_parameter,
            twirl_spoils: cmp.spoiled(),
            comparison: cmp,
        });
    }
    let parts: Vec<String> = runs
        .iter()
        .map(|r| format!("{} raw {:.5} twirled {:.5}", r.schedule, r.raw_threshold, r.twirled_threshold))
        .collect();
    let report = CounterexampleReport { psd_range: psd, runs };
    let path = write_atomic(&cfg.out, "counterexample.toml", &toml_of(&report)?)?;
    Ok(Summary::ok(
        format!("counterexample: PSD for f in [{:.4}, {:.4}]; {}", psd[0], psd[1], parts.join("; ")),
        vec![path],
    ))
}

#[derive(Serialize)]
struct CompareReport {
    spec: String,
    direct: ThresholdReport,
    graph: IndirectReport,
    bipartite: IndirectReport,
}

fn compare(cfg: &ExperimentConfig) -> Result<Summary, CliError> {
    let t = single_target(cfg)?;
    let spec = &t.spec;
    let tol = cfg.tol.unwrap_or(DEFAULT_TOLERANCE);
    let family = |f: f64| white_noise(spec, f);
    let schedule = cfg.schedule_for(spec)?;
    let direct_bracket = cfg.bracket.unwrap_or_else(|| default_bracket(ChannelKind::GlobalWhite, spec));
    // white noise on a pair needs f >= 1/4, which also covers the triples
    let sub_bracket = cfg.bracket.unwrap_or((0.25, 1.0));
    let ((direct, graph), bipartite) = rayon::join(
        || {
            rayon::join(
                || find_threshold(&family, spec, &schedule, direct_bracket, tol),
                || indirect_threshold(IndirectStrategy::Graph, spec, sub_bracket, tol),
            )
        },
        || indirect_threshold(IndirectStrategy::Bipartite, spec, sub_bracket, tol),
    );
    let report = CompareReport {
        spec: spec.to_string(),
        direct: direct?,
        graph: graph?,
        bipartite: bipartite?,
    };
    let path = write_atomic(&cfg.out, &format!("{}.compare.toml", t.name), &toml_of(&report)?)?;
    Ok(Summary::ok(
        format!(
            "compare {}: direct {:.4}, graph {:.4} (uncut {:.4}), bipartite {:.4} (uncut {:.4})",
            t.name,
            report.direct.critical_parameter,
            report.graph.bottleneck,
            report.graph.bottleneck_original_fidelity,
            report.bipartite.bottleneck,
            report.bipartite.bottleneck_original_fidelity
        ),
        vec![path],
    ))
}

fn verify_oracle(cfg: &ExperimentConfig) -> Result<Summary, CliError> {
    let specs: Vec<LmesSpec> = cfg.targets.iter().map(|t| t.spec.clone()).collect();
    let samples = cfg.samples.unwrap_or(20);
    let report: VerificationReport = oracle::verify(&specs, samples, cfg.seed, cfg.tol.unwrap_or(1e-10))?;
    let path = write_atomic(&cfg.out, "oracle.toml", &report.to_toml())?;
    let pairs: usize = report.pairs.iter().map(|p| p.pairs).sum();
    let bad: usize = report.pairs.iter().map(|p| p.mismatches).sum::<usize>()
        + report.maps.iter().filter(|m| !m.passed).count();
    Ok(Summary {
        line: format!(
            "verify-oracle [{}]: {pairs} basis pairs, {} map checks x {samples} samples, {}",
            names(cfg),
            report.maps.len(),
            if report.passed { "PASS".to_string() } else { format!("FAIL ({bad} mismatches)") }
        ),
        artifacts: vec![path],
        status: if report.passed { Status::Ok } else { Status::Internal },
        warnings: Vec::new(),
    })
}
