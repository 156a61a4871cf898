//! Experiment configuration: a TOML file, overridden by command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};

use lmes_core::noise::{ChannelKind, ChannelSpec};
use lmes_core::purify::ScheduleSpec;
use lmes_core::scenarios;
use lmes_core::lme::SpecDocument;
use lmes_core::LmesSpec;
use serde::Deserialize;

use crate::status::{CliError, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Build,
    Purify,
    Threshold,
    CjCheck,
    PhiBatch,
    Counterexample,
    Compare,
    VerifyOracle,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Build => "build",
            CommandKind::Purify => "purify",
            CommandKind::Threshold => "threshold",
            CommandKind::CjCheck => "cj-check",
            CommandKind::PhiBatch => "phi-batch",
            CommandKind::Counterexample => "counterexample",
            CommandKind::Compare => "compare",
            CommandKind::VerifyOracle => "verify-oracle",
        }
    }

    /// Target used when neither the file nor the flags name one.
    fn default_scenarios(self) -> &'static [&'static str] {
        match self {
            CommandKind::Compare => &["linear6"],
            CommandKind::VerifyOracle => &["u123", "u123_u234"],
            CommandKind::Counterexample => &[],
            _ => &["u123"],
        }
    }
}

impl fmt::Display for CommandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The file format. Every field is optional; `scenario`, `scenarios`,
/// `spec` and `spec_file` all add targets.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub command: Option<CommandKind>,
    pub scenario: Option<String>,
    #[serde(default)]
    pub scenarios: Vec<String>,
    pub spec: Option<SpecDocument>,
    pub spec_file: Option<PathBuf>,
    pub name: Option<String>,
    pub channel: Option<ChannelSpec>,
    #[serde(default)]
    pub channels: Vec<ChannelKind>,
    pub schedule: Option<String>,
    pub bracket: Option<[f64; 2]>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub max_rounds: Option<usize>,
    pub samples: Option<usize>,
    pub restarts: Option<usize>,
    pub budget: Option<usize>,
}

impl ConfigFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::new(Status::Parse, format!("{origin}: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::new(Status::Parse, format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text, &path.display().to_string())?;
        // spec files are relative to the config that names them
        if let (Some(f), Some(dir)) = (&cfg.spec_file, path.parent()) {
            if f.is_relative() {
                cfg.spec_file = Some(dir.join(f));
            }
        }
        Ok(cfg)
    }
}

/// Command-line flags; set values win over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub command: Option<CommandKind>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub max_rounds: Option<usize>,
    pub scenarios: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Target {
    pub name: String,
    pub spec: LmesSpec,
}

/// A fully resolved, validated run description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub command: CommandKind,
    pub targets: Vec<Target>,
    pub channel: Option<ChannelSpec>,
    pub channels: Vec<ChannelKind>,
    pub schedule: Option<ScheduleSpec>,
    pub bracket: Option<(f64, f64)>,
    pub seed: u64,
    pub out: PathBuf,
    pub tol: Option<f64>,
    pub max_rounds: Option<usize>,
    pub samples: Option<usize>,
    pub restarts: Option<usize>,
    pub budget: Option<usize>,
}

fn parse_err(msg: impl Into<String>) -> CliError {
    CliError::new(Status::Parse, msg)
}

impl ExperimentConfig {
    pub fn resolve(file: ConfigFile, flags: Overrides) -> Result<Self, CliError> {
        let command = match (flags.command, file.command) {
            (Some(a), Some(b)) if a != b => {
                return Err(parse_err(format!("field `command`: config says {b}, command line says {a}")))
            }
            (Some(c), _) | (None, Some(c)) => c,
            (None, None) => return Err(parse_err("no command given (positional argument or `command` field)")),
        };

        let mut targets = Vec::new();
        let names: Vec<String> = if flags.scenarios.is_empty() {
            file.scenario.iter().chain(&file.scenarios).cloned().collect()
        } else {
            flags.scenarios.clone()
        };
        for name in names {
            let spec = scenarios::spec(&name).map_err(|e| parse_err(format!("field `scenario`: {e}")))?;
            push_target(&mut targets, Target { name, spec });
        }
        if flags.scenarios.is_empty() {
            if let Some(path) = &file.spec_file {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| parse_err(format!("field `spec_file`: cannot read {}: {e}", path.display())))?;
                let spec = LmesSpec::from_toml(&text)
                    .map_err(|e| parse_err(format!("field `spec_file` ({}): {e}", path.display())))?;
                let name = file
                    .name
                    .clone()
                    .or_else(|| path.file_stem().map(|s| s.to_string_lossy().into_owned()))
                    .unwrap_or_else(|| "spec".into());
                push_target(&mut targets, Target { name, spec });
            }
            if let Some(doc) = file.spec.clone() {
                let spec = LmesSpec::try_from(doc).map_err(|e| parse_err(format!("field `spec`: {e}")))?;
                let name = file.name.clone().unwrap_or_else(|| "inline".into());
                push_target(&mut targets, Target { name, spec });
            }
        }
        if targets.is_empty() {
            for &name in command.default_scenarios() {
                let spec = scenarios::spec(name).map_err(|e| CliError::new(Status::Internal, e.to_string()))?;
                targets.push(Target { name: name.into(), spec });
            }
        }

        let schedule = file
            .schedule
            .as_deref()
            .map(|s| s.parse::<ScheduleSpec>().map_err(|e| parse_err(format!("field `schedule`: {e}"))))
            .transpose()?;
        let tol = flags.tol.or(file.tol);
        if let Some(t) = tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(parse_err(format!("field `tol`: must be positive, got {t}")));
            }
        }
        let max_rounds = flags.max_rounds.or(file.max_rounds);
        if max_rounds == Some(0) {
            return Err(parse_err("field `max_rounds`: must be positive"));
        }
        let bracket = file.bracket.map(|[lo, hi]| (lo, hi));
        if let Some((lo, hi)) = bracket {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(parse_err(format!("field `bracket`: need lo < hi, got [{lo}, {hi}]")));
            }
        }
        for (field, v) in [("samples", file.samples), ("restarts", file.restarts), ("budget", file.budget)] {
            if v == Some(0) {
                return Err(parse_err(format!("field `{field}`: must be positive")));
            }
        }

        Ok(ExperimentConfig {
            command,
            targets,
            channel: file.channel,
            channels: file.channels,
            schedule,
            bracket,
            seed: flags.seed.or(file.seed).unwrap_or(0),
            out: flags.out.or(file.out).unwrap_or_else(|| PathBuf::from("results")),
            tol,
            max_rounds,
            samples: file.samples,
            restarts: file.restarts,
            budget: file.budget,
        })
    }

    /// Schedule for `spec`: the configured one (checked against the spec) or
    /// the default, with the round cap applied.
    pub fn schedule_for(&self, spec: &LmesSpec) -> lmes_core::Result<ScheduleSpec> {
        let s = match &self.schedule {
            Some(s) => {
                s.validate(spec)?;
                s.clone()
            }
            None => ScheduleSpec::default_for(spec)?,
        };
        match self.max_rounds {
            Some(r) => {
                let (eps, window) = (s.convergence_eps, s.divergence_window.min(r));
                s.with_limits(r, eps, window)
            }
            None => Ok(s),
        }
    }
}

/// Later duplicates of a target name are dropped.
fn push_target(targets: &mut Vec<Target>, t: Target) {
    if targets.iter().any(|x| x.name == t.name) {
        eprintln!("warning: duplicate target {:?} ignored", t.name);
    } else {
        targets.push(t);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(text: &str, flags: Overrides) -> Result<ExperimentConfig, CliError> {
        ExperimentConfig::resolve(ConfigFile::parse(text, "test")?, flags)
    }

    #[test]
    fn flags_override_file() {
        let cfg = resolve(
            "command = \"threshold\"\nscenario = \"bell\"\nseed = 4\ntol = 0.01\n",
            Overrides {
                seed: Some(9),
                scenarios: vec!["u123".into()],
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.tol, Some(0.01));
        assert_eq!(cfg.targets.len(), 1);
        assert_eq!(cfg.targets[0].name, "u123");
    }

    #[test]
    fn inline_spec_and_defaults() {
        let cfg = resolve(
            "command = \"build\"\n[spec]\nn = 2\ngates = [[1, 2]]\ncolors = [[1], [2]]\n",
            Overrides::default(),
        )
        .unwrap();
        assert_eq!(cfg.targets[0].name, "inline");
        assert_eq!(cfg.out, PathBuf::from("results"));
        let cfg = resolve("", Overrides { command: Some(CommandKind::Compare), ..Default::default() }).unwrap();
        assert_eq!(cfg.targets[0].name, "linear6");
    }

    #[test]
    fn parse_errors_name_the_field() {
        let e = resolve("command = \"threshold\"\ntol = -1.0\n", Overrides::default()).unwrap_err();
        assert_eq!(e.status, Status::Parse);
        assert!(e.message.contains("tol"));
        let e = resolve("command = \"threshold\"\nbogus = 1\n", Overrides::default()).unwrap_err();
        assert!(e.message.contains("bogus"), "{}", e.message);
        let e = resolve("command = \"threshold\"\nseed = \"x\"\n", Overrides::default()).unwrap_err();
        assert!(e.message.contains("line 2"), "{}", e.message);
        let e = resolve("command = \"build\"\n", Overrides { command: Some(CommandKind::Purify), ..Default::default() });
        assert!(e.is_err());
        assert!(resolve("scenario = \"nope\"\ncommand = \"build\"\n", Overrides::default()).is_err());
        assert!(resolve("command = \"build\"\nschedule = \"A1B\"\n", Overrides::default()).is_err());
        assert!(resolve("", Overrides::default()).is_err());
    }

    #[test]
    fn max_rounds_caps_the_window() {
        let cfg = resolve("command = \"purify\"\nmax_rounds = 10\n", Overrides::default()).unwrap();
        let s = cfg.schedule_for(&cfg.targets[0].spec).unwrap();
        assert_eq!((s.max_rounds, s.divergence_window), (10, 10));
    }
}
