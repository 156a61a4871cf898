use std::fmt;
use std::ops::BitXor;
use std::str::FromStr;

use crate::error::{Error, Result};

/// An n-bit string `k = (k_1, ..., k_n)` labelling LME basis states and
/// stabilizer eigenvalues. `k_q` is stored in bit `q - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    n: usize,
    bits: usize,
}

impl MultiIndex {
    pub fn new(n: usize, bits: usize) -> Result<Self> {
        if n >= usize::BITS as usize || bits >> n != 0 {
            return Err(Error::InvalidParameter {
                what: "multi-index bits",
                value: bits as f64,
                range: format!("[0, 2^{n})"),
            });
        }
        Ok(Self { n, bits })
    }

    pub fn zero(n: usize) -> Self {
        Self { n, bits: 0 }
    }

    /// Build from `(k_1, ..., k_n)`.
    pub fn from_bits(values: &[u8]) -> Result<Self> {
        let mut bits = 0;
        for (i, &v) in values.iter().enumerate() {
            match v {
                0 => {}
                1 => bits |= 1 << i,
                _ => {
                    return Err(Error::InvalidParameter {
                        what: "multi-index digit",
                        value: v as f64,
                        range: "{0, 1}".into(),
                    })
                }
            }
        }
        Ok(Self {
            n: values.len(),
            bits,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    /// `k_q` for a 1-based qubit.
    pub fn bit(&self, qubit: usize) -> u8 {
        ((self.bits >> (qubit - 1)) & 1) as u8
    }

    /// Sub-index on the qubits of `mask` (e.g. `k_A`); other bits cleared.
    pub fn restrict(&self, mask: usize) -> Self {
        Self {
            n: self.n,
            bits: self.bits & mask,
        }
    }

    pub fn all(n: usize) -> impl Iterator<Item = MultiIndex> {
        (0..1usize << n).map(move |bits| MultiIndex { n, bits })
    }
}

impl BitXor for MultiIndex {
    type Output = MultiIndex;
    fn bitxor(self, rhs: Self) -> Self {
        assert_eq!(self.n, rhs.n, "multi-index length mismatch");
        MultiIndex {
            n: self.n,
            bits: self.bits ^ rhs.bits,
        }
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 1..=self.n {
            write!(f, "{}", self.bit(q))?;
        }
        Ok(())
    }
}

impl FromStr for MultiIndex {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let digits: Result<Vec<u8>> = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Parse(format!("bad multi-index digit {other:?}"))),
            })
            .collect();
        MultiIndex::from_bits(&digits?)
    }
}
