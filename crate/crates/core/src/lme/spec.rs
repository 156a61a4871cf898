use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of qubits of a target state.
pub const DEFAULT_MAX_QUBITS: usize = 8;

/// On-disk form of an [`LmesSpec`]: qubit count, π-phase gates and coloring,
/// all with 1-based qubit labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecDocument {
    pub n: usize,
    pub gates: Vec<Vec<usize>>,
    pub colors: Vec<Vec<usize>>,
}

/// A π-phase LME state `Π_S U_S |+>^n` together with a user-supplied coloring.
///
/// Qubits are labelled `1..=n`. Internally qubit `q` is bit `q - 1` of every
/// computational-basis and LME-basis index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SpecDocument", into = "SpecDocument")]
pub struct LmesSpec {
    n: usize,
    gates: Vec<Vec<usize>>,
    colors: Vec<Vec<usize>>,
    gate_masks: Vec<usize>,
    color_masks: Vec<usize>,
}

impl LmesSpec {
    pub fn new(n: usize, gates: Vec<Vec<usize>>, colors: Vec<Vec<usize>>) -> Result<Self> {
        Self::with_qubit_limit(n, gates, colors, DEFAULT_MAX_QUBITS)
    }

    pub fn with_qubit_limit(
        n: usize,
        gates: Vec<Vec<usize>>,
        colors: Vec<Vec<usize>>,
        limit: usize,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSpec("at least one qubit is required".into()));
        }
        if n > limit {
            return Err(Error::DimensionCap {
                what: "state specification",
                required: n,
                limit,
            });
        }
        let mask_of = |set: &[usize], what: &str| -> Result<usize> {
            let mut mask = 0usize;
            for &q in set {
                if q == 0 || q > n {
                    return Err(Error::InvalidSpec(format!(
                        "{what} {set:?} references qubit {q} outside 1..={n}"
                    )));
                }
                let bit = 1 << (q - 1);
                if mask & bit != 0 {
                    return Err(Error::InvalidSpec(format!(
                        "{what} {set:?} repeats qubit {q}"
                    )));
                }
                mask |= bit;
            }
            Ok(mask)
        };

        let mut gate_masks = Vec::with_capacity(gates.len());
        for gate in &gates {
            if gate.len() < 2 {
                return Err(Error::InvalidSpec(format!(
                    "gate {gate:?} must act on at least two qubits"
                )));
            }
            let mask = mask_of(gate, "gate")?;
            if gate_masks.contains(&mask) {
                return Err(Error::InvalidSpec(format!("gate {gate:?} listed twice")));
            }
            gate_masks.push(mask);
        }

        let mut color_masks = Vec::with_capacity(colors.len());
        let mut covered = 0usize;
        for color in &colors {
            if color.is_empty() {
                return Err(Error::InvalidSpec("empty color class".into()));
            }
            let mask = mask_of(color, "color")?;
            if covered & mask != 0 {
                return Err(Error::InvalidSpec(format!(
                    "color {color:?} overlaps another color"
                )));
            }
            covered |= mask;
            color_masks.push(mask);
        }
        if covered != full_mask(n) {
            let missing: Vec<usize> = (1..=n).filter(|q| covered & (1 << (q - 1)) == 0).collect();
            return Err(Error::InvalidSpec(format!(
                "coloring does not cover qubits {missing:?}"
            )));
        }

        for (gate, &gm) in gates.iter().zip(&gate_masks) {
            for (color, &cm) in colors.iter().zip(&color_masks) {
                if (gm & cm).count_ones() > 1 {
                    return Err(Error::InvalidSpec(format!(
                        "gate {gate:?} contains two qubits of color {color:?}"
                    )));
                }
            }
        }

        Ok(Self {
            n,
            gates,
            colors,
            gate_masks,
            color_masks,
        })
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&SpecDocument::from(self.clone())).expect("spec document serializes")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Hilbert-space dimension `2^n`.
    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn gates(&self) -> &[Vec<usize>] {
        &self.gates
    }

    pub fn colors(&self) -> &[Vec<usize>] {
        &self.colors
    }

    pub fn gate_masks(&self) -> &[usize] {
        &self.gate_masks
    }

    pub fn num_colors(&self) -> usize {
        self.colors.len()
    }

    pub fn color_mask(&self, color: usize) -> Result<usize> {
        self.color_masks
            .get(color)
            .copied()
            .ok_or(Error::UnknownColor {
                color,
                count: self.colors.len(),
            })
    }

    pub fn color_masks(&self) -> &[usize] {
        &self.color_masks
    }

    /// Letter used for a color in schedules and tables (`A`, `B`, ...).
    pub fn color_label(color: usize) -> char {
        (b'A' + color as u8) as char
    }

    /// Number of gates `S` with `S ⊆ x`; the sign of `|x>` in the target state.
    pub fn gate_parity(&self, x: usize) -> u32 {
        self.gate_masks
            .iter()
            .filter(|&&g| g & x == g)
            .count() as u32
    }

    /// Bit mask of all qubits sharing a gate with `qubit` (1-based).
    pub fn neighborhood(&self, qubit: usize) -> Result<usize> {
        let bit = self.qubit_bit(qubit)?;
        Ok(self
            .gate_masks
            .iter()
            .filter(|&&g| g & bit != 0)
            .fold(0, |acc, &g| acc | g)
            & !bit)
    }

    pub(crate) fn qubit_bit(&self, qubit: usize) -> Result<usize> {
        if qubit == 0 || qubit > self.n {
            return Err(Error::QubitOutOfRange { qubit, n: self.n });
        }
        Ok(1 << (qubit - 1))
    }

    /// Every gate has order equal to the number of colors (and hence touches
    /// each color exactly once).
    pub fn is_regular(&self) -> bool {
        self.regularity_violation().is_none()
    }

    pub(crate) fn regularity_violation(&self) -> Option<String> {
        if self.gates.is_empty() {
            return Some("no phase gates".into());
        }
        let k = self.colors.len();
        self.gates
            .iter()
            .find(|g| g.len() != k)
            .map(|g| format!("gate {g:?} has order {} but the coloring has {k} colors", g.len()))
    }

    pub fn require_regular(&self) -> Result<()> {
        match self.regularity_violation() {
            None => Ok(()),
            Some(why) => Err(Error::NonRegular(why)),
        }
    }
}

impl fmt::Display for LmesSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.gates.is_empty() {
            write!(f, "|+>^{}", self.n)?;
        } else {
            for g in &self.gates {
                let labels: Vec<String> = g.iter().map(|q| q.to_string()).collect();
                write!(f, "U{}", labels.join(","))?;
            }
        }
        let colors: Vec<String> = self
            .colors
            .iter()
            .map(|c| {
                let labels: Vec<String> = c.iter().map(|q| q.to_string()).collect();
                labels.join(",")
            })
            .collect();
        write!(f, " [{}]", colors.join("|"))
    }
}

impl TryFrom<SpecDocument> for LmesSpec {
    type Error = Error;
    fn try_from(doc: SpecDocument) -> Result<Self> {
        LmesSpec::new(doc.n, doc.gates, doc.colors)
    }
}

impl From<LmesSpec> for SpecDocument {
    fn from(spec: LmesSpec) -> Self {
        SpecDocument {
            n: spec.n,
            gates: spec.gates,
            colors: spec.colors,
        }
    }
}

pub(crate) fn full_mask(n: usize) -> usize {
    (1usize << n) - 1
}

/// Subsets of `mask`, enumerated so that `subsets[x ^ y] == subsets[x] ^ subsets[y]`.
pub(crate) fn mask_subsets(mask: usize) -> Vec<usize> {
    let bits: Vec<usize> = (0..usize::BITS as usize)
        .filter(|b| mask & (1 << b) != 0)
        .collect();
    (0..1usize << bits.len())
        .map(|x| {
            bits.iter()
                .enumerate()
                .filter(|(i, _)| x & (1 << i) != 0)
                .fold(0, |acc, (_, &b)| acc | (1 << b))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_same_color_gate() {
        let err = LmesSpec::new(3, vec![vec![1, 2], vec![2, 3]], vec![vec![1, 2], vec![3]]);
        assert!(matches!(err, Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn rejects_bad_partitions_and_gates() {
        assert!(LmesSpec::new(3, vec![vec![1, 4]], vec![vec![1], vec![2, 3]]).is_err());
        assert!(LmesSpec::new(3, vec![vec![1, 1]], vec![vec![1], vec![2, 3]]).is_err());
        assert!(LmesSpec::new(3, vec![vec![1]], vec![vec![1], vec![2, 3]]).is_err());
        assert!(LmesSpec::new(3, vec![vec![1, 2]], vec![vec![1], vec![2]]).is_err());
        assert!(LmesSpec::new(3, vec![vec![1, 2]], vec![vec![1, 3], vec![2, 3]]).is_err());
        assert!(LmesSpec::new(2, vec![vec![1, 2], vec![2, 1]], vec![vec![1], vec![2]]).is_err());
        assert!(LmesSpec::new(9, vec![], vec![(1..=9).collect()]).is_err());
        assert!(LmesSpec::with_qubit_limit(9, vec![], vec![(1..=9).collect()], 10).is_ok());
    }

    #[test]
    fn regularity_is_derived() {
        let linear = LmesSpec::new(
            6,
            vec![vec![1, 2, 3], vec![2, 3, 4], vec![3, 4, 5], vec![4, 5, 6]],
            vec![vec![1, 4], vec![2, 5], vec![3, 6]],
        )
        .unwrap();
        assert!(linear.is_regular());
        let mixed = LmesSpec::new(
            3,
            vec![vec![1, 2, 3], vec![2, 3]],
            vec![vec![1], vec![2], vec![3]],
        )
        .unwrap();
        assert!(!mixed.is_regular());
        assert!(matches!(mixed.require_regular(), Err(Error::NonRegular(_))));
    }

    #[test]
    fn neighborhoods() {
        let spec = LmesSpec::new(
            4,
            vec![vec![1, 2, 3], vec![2, 3, 4]],
            vec![vec![1, 4], vec![2], vec![3]],
        )
        .unwrap();
        assert_eq!(spec.neighborhood(1).unwrap(), 0b0110);
        assert_eq!(spec.neighborhood(2).unwrap(), 0b1101);
        assert!(spec.neighborhood(5).is_err());
    }

    #[test]
    fn subset_enumeration_is_xor_linear() {
        let subs = mask_subsets(0b101100);
        assert_eq!(subs.len(), 8);
        for x in 0..8 {
            for y in 0..8 {
                assert_eq!(subs[x ^ y], subs[x] ^ subs[y]);
            }
        }
    }

    #[test]
    fn toml_document_layout() {
        let spec = LmesSpec::new(3, vec![vec![1, 2, 3]], vec![vec![1], vec![2], vec![3]]).unwrap();
        let text = spec.to_toml();
        assert_eq!(text, "n = 3\ngates = [[1, 2, 3]]\ncolors = [[1], [2], [3]]\n");
        assert_eq!(LmesSpec::from_toml(&text).unwrap(), spec);
        assert!(matches!(
            LmesSpec::from_toml("n = 2\ngates = [[1, 2]]\ncolors = [[1, 2]]\n"),
            Err(Error::Parse(_))
        ));
    }
}
