//! Named specs used by the experiments and the command line.

use crate::error::{Error, Result};
use crate::lme::LmesSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scenario {
    pub name: &'static str,
    pub description: &'static str,
    n: usize,
    gates: &'static [&'static [usize]],
    colors: &'static [&'static [usize]],
}

impl Scenario {
    pub fn spec(&self) -> LmesSpec {
        LmesSpec::new(
            self.n,
            self.gates.iter().map(|g| g.to_vec()).collect(),
            self.colors.iter().map(|c| c.to_vec()).collect(),
        )
        .expect("built-in scenarios are valid")
    }
}

pub const SCENARIOS: &[Scenario] = &[
    Scenario {
        name: "bell",
        description: "two-qubit maximally entangled state U12",
        n: 2,
        gates: &[&[1, 2]],
        colors: &[&[1], &[2]],
    },
    Scenario {
        name: "graph3",
        description: "three-qubit path graph U12 U23, leaves colored first",
        n: 3,
        gates: &[&[1, 2], &[2, 3]],
        colors: &[&[1, 3], &[2]],
    },
    Scenario {
        name: "u123",
        description: "three-qubit state U123",
        n: 3,
        gates: &[&[1, 2, 3]],
        colors: &[&[1], &[2], &[3]],
    },
    Scenario {
        name: "u123_u234",
        description: "four-qubit state U123 U234",
        n: 4,
        gates: &[&[1, 2, 3], &[2, 3, 4]],
        colors: &[&[1, 4], &[2], &[3]],
    },
    Scenario {
        name: "linear5",
        description: "five-qubit linear pattern U123 U234 U345",
        n: 5,
        gates: &[&[1, 2, 3], &[2, 3, 4], &[3, 4, 5]],
        colors: &[&[1, 4], &[2, 5], &[3]],
    },
    Scenario {
        name: "ghz5",
        description: "five-qubit GHZ-like pattern U123 U124 U125",
        n: 5,
        gates: &[&[1, 2, 3], &[1, 2, 4], &[1, 2, 5]],
        colors: &[&[1], &[2], &[3, 4, 5]],
    },
    Scenario {
        name: "linear6",
        description: "six-qubit linear pattern U123 U234 U345 U456",
        n: 6,
        gates: &[&[1, 2, 3], &[2, 3, 4], &[3, 4, 5], &[4, 5, 6]],
        colors: &[&[1, 4], &[2, 5], &[3, 6]],
    },
    Scenario {
        name: "intermediate6",
        description: "six-qubit intermediate pattern U134 U235 U234 U346",
        n: 6,
        gates: &[&[1, 3, 4], &[2, 3, 5], &[2, 3, 4], &[3, 4, 6]],
        colors: &[&[3], &[4, 5], &[1, 2, 6]],
    },
    Scenario {
        name: "ghz6",
        description: "six-qubit GHZ-like pattern U123 U124 U125 U126",
        n: 6,
        gates: &[&[1, 2, 3], &[1, 2, 4], &[1, 2, 5], &[1, 2, 6]],
        colors: &[&[1], &[2], &[3, 4, 5, 6]],
    },
];

/// The seven three-colorable patterns compared under local noise.
pub const LOCAL_NOISE_PATTERNS: &[&str] = &[
    "u123",
    "u123_u234",
    "linear5",
    "ghz5",
    "linear6",
    "intermediate6",
    "ghz6",
];

pub fn find(name: &str) -> Result<&'static Scenario> {
    SCENARIOS.iter().find(|s| s.name == name).ok_or_else(|| {
        let known: Vec<&str> = SCENARIOS.iter().map(|s| s.name).collect();
        Error::Parse(format!("unknown scenario {name:?} (known: {})", known.join(", ")))
    })
}

pub fn spec(name: &str) -> Result<LmesSpec> {
    find(name).map(Scenario::spec)
}
