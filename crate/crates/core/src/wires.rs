//! Labelled multi-qubit state vectors shared by the circuit simulator and the
//! state-connection strategies. Wire `i` of a state is bit `i` of the index.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CVector, ZERO};

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct WireState {
    labels: Vec<String>,
    amps: CVector,
}

/// Index with bit `b` inserted at position `p`.
fn insert_bit(i: usize, p: usize, b: usize) -> usize {
    let low = i & ((1 << p) - 1);
    ((i >> p) << (p + 1)) | (b << p) | low
}

impl WireState {
    pub fn new(labels: Vec<String>, amps: CVector) -> Result<Self> {
        if amps.len() != 1usize << labels.len() {
            return Err(Error::DimensionMismatch {
                expected: 1 << labels.len(),
                actual: amps.len(),
            });
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::Wire(format!("duplicate wire label {l}")));
            }
        }
        Ok(Self { labels, amps })
    }

    /// Single wire in `a|0> + b|1>`.
    #[cfg(test)]
    pub fn qubit(label: impl Into<String>, a: Complex64, b: Complex64) -> Self {
        Self {
            labels: vec![label.into()],
            amps: CVector::from_vec(vec![a, b]),
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.norm_squared()
    }

    pub fn scale(&mut self, s: f64) {
        self.amps *= Complex64::new(s, 0.0);
    }

    pub fn has(&self, label: &str) -> bool {
        self.labels.iter().any(|l| l == label)
    }

    pub fn pos(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Wire(format!("no wire labelled {label}")))
    }

    /// Tensor product; `other` occupies the new high-order wires.
    pub fn tensor(&self, other: &WireState) -> Result<WireState> {
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        let na = self.amps.len();
        let mut amps = CVector::zeros(na * other.amps.len());
        for (j, b) in other.amps.iter().enumerate() {
            for (i, a) in self.amps.iter().enumerate() {
                amps[i | (j * na)] = a * b;
            }
        }
        WireState::new(labels, amps)
    }

    pub fn relabel(&mut self, from: &str, to: &str) -> Result<()> {
        if from != to && self.has(to) {
            return Err(Error::Wire(format!("label {to} already in use")));
        }
        let p = self.pos(from)?;
        self.labels[p] = to.to_string();
        Ok(())
    }

    /// Apply a 2x2 matrix `[[m00, m01], [m10, m11]]` to one wire.
    pub fn apply_1q(&mut self, label: &str, m: [[Complex64; 2]; 2]) -> Result<()> {
        let p = self.pos(label)?;
        let half = self.amps.len() / 2;
        for i in 0..half {
            let i0 = insert_bit(i, p, 0);
            let i1 = i0 | (1 << p);
            let (a, b) = (self.amps[i0], self.amps[i1]);
            self.amps[i0] = m[0][0] * a + m[0][1] * b;
            self.amps[i1] = m[1][0] * a + m[1][1] * b;
        }
        Ok(())
    }

    pub fn x(&mut self, label: &str) -> Result<()> {
        let (o, l) = (ZERO, Complex64::new(1.0, 0.0));
        self.apply_1q(label, [[o, l], [l, o]])
    }

    pub fn z(&mut self, label: &str) -> Result<()> {
        let (o, l) = (ZERO, Complex64::new(1.0, 0.0));
        self.apply_1q(label, [[l, o], [o, -l]])
    }

    pub fn h(&mut self, label: &str) -> Result<()> {
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        self.apply_1q(label, [[s, s], [s, -s]])
    }

    fn two(&self, a: &str, b: &str) -> Result<(usize, usize)> {
        if a == b {
            return Err(Error::Wire(format!("wire {a} used twice")));
        }
        Ok((self.pos(a)?, self.pos(b)?))
    }

    pub fn cnot(&mut self, control: &str, target: &str) -> Result<()> {
        let (c, t) = self.two(control, target)?;
        for i in 0..self.amps.len() {
            if i >> c & 1 == 1 && i >> t & 1 == 0 {
                self.amps.swap_rows(i, i | (1 << t));
            }
        }
        Ok(())
    }

    pub fn cz(&mut self, a: &str, b: &str) -> Result<()> {
        let (p, q) = self.two(a, b)?;
        let m = (1 << p) | (1 << q);
        for i in 0..self.amps.len() {
            if i & m == m {
                self.amps[i] = -self.amps[i];
            }
        }
        Ok(())
    }

    /// Contract a set of wires with `<phi|`, removing them (unnormalized).
    /// `phi` is indexed by the bits of `wires` in the listed order.
    pub fn contract(&mut self, wires: &[&str], phi: &[Complex64]) -> Result<()> {
        if phi.len() != 1 << wires.len() {
            return Err(Error::DimensionMismatch {
                expected: 1 << wires.len(),
                actual: phi.len(),
            });
        }
        let mut pos = Vec::with_capacity(wires.len());
        for w in wires {
            let p = self.pos(w)?;
            if pos.contains(&p) {
                return Err(Error::Wire(format!("wire {w} used twice")));
            }
            pos.push(p);
        }
        let mask: usize = pos.iter().map(|p| 1 << p).sum();
        let keep: Vec<usize> = (0..self.labels.len()).filter(|p| mask >> p & 1 == 0).collect();
        let mut out = CVector::zeros(1 << keep.len());
        for (i, &a) in self.amps.iter().enumerate() {
            if a == ZERO {
                continue;
            }
            let mut sub = 0;
            for (j, &p) in pos.iter().enumerate() {
                sub |= (i >> p & 1) << j;
            }
            let mut rest = 0;
            for (j, &p) in keep.iter().enumerate() {
                rest |= (i >> p & 1) << j;
            }
            out[rest] += phi[sub].conj() * a;
        }
        self.labels = keep.iter().map(|&p| self.labels[p].clone()).collect();
        self.amps = out;
        Ok(())
    }

    /// Project a wire onto `|bit>` and remove it.
    pub fn project_z(&mut self, label: &str, bit: u8) -> Result<()> {
        let one = Complex64::new(1.0, 0.0);
        let phi = if bit == 0 { [one, ZERO] } else { [ZERO, one] };
        self.contract(&[label], &phi)
    }

    /// Project a wire onto `|+>` (or `|->`) and remove it.
    pub fn project_x(&mut self, label: &str, plus: bool) -> Result<()> {
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        self.contract(&[label], &[s, if plus { s } else { -s }])
    }

    /// `|0><00| + |1><11|` on `(keep, drop)`; `drop` disappears.
    pub fn merge(&mut self, keep: &str, drop: &str) -> Result<()> {
        let (k, d) = self.two(keep, drop)?;
        let half = self.amps.len() / 2;
        let mut out = CVector::zeros(half);
        for (j, slot) in out.iter_mut().enumerate() {
            let i = insert_bit(j, d, 0);
            let b = i >> k & 1;
            *slot = self.amps[i | (b << d)];
        }
        self.labels.remove(d);
        self.amps = out;
        Ok(())
    }

    /// `b0 ⊗ |0>_label + b1 ⊗ |1>_label`; both branches must carry the same wires.
    pub fn from_branches(b0: &WireState, b1: &WireState, label: &str) -> Result<WireState> {
        let order: Vec<&str> = b0.labels.iter().map(String::as_str).collect();
        let second = b1.ordered(&order)?;
        let mut amps = b0.amps.clone();
        amps.extend(second.iter().copied());
        let mut labels = b0.labels.clone();
        labels.push(label.to_string());
        WireState::new(labels, amps)
    }

    /// Amplitudes with wires reordered to `order` (which must list every wire).
    pub fn ordered(&self, order: &[&str]) -> Result<CVector> {
        if order.len() != self.labels.len() {
            return Err(Error::Wire(format!(
                "expected {} wires in ordering, got {}",
                self.labels.len(),
                order.len()
            )));
        }
        let mut perm = Vec::with_capacity(order.len());
        for w in order {
            let p = self.pos(w)?;
            if perm.contains(&p) {
                return Err(Error::Wire(format!("wire {w} listed twice")));
            }
            perm.push(p);
        }
        let mut out = CVector::zeros(self.amps.len());
        for (i, &a) in self.amps.iter().enumerate() {
            let mut j = 0;
            for (new, &old) in perm.iter().enumerate() {
                j |= (i >> old & 1) << new;
            }
            out[j] = a;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn ws(labels: &[&str], amps: &[f64]) -> WireState {
        WireState::new(
            labels.iter().map(|s| s.to_string()).collect(),
            CVector::from_vec(amps.iter().map(|&a| c(a)).collect()),
        )
        .unwrap()
    }

    #[test]
    fn cnot_truth_table() {
        // |10> on (control, target) means control=1
        let mut s = ws(&["c", "t"], &[0.0, 1.0, 0.0, 0.0]);
        s.cnot("c", "t").unwrap();
        assert_eq!(s.amplitudes()[3], c(1.0));
        let mut s = ws(&["c", "t"], &[1.0, 0.0, 0.0, 0.0]);
        s.cnot("c", "t").unwrap();
        assert_eq!(s.amplitudes()[0], c(1.0));
        let r = FRAC_1_SQRT_2;
        let mut s = ws(&["c", "t"], &[r, r, 0.0, 0.0]);
        s.cnot("c", "t").unwrap();
        assert_eq!(s.amplitudes().as_slice(), &[c(r), c(0.0), c(0.0), c(r)]);
        assert!(s.cnot("c", "c").is_err());
    }

    #[test]
    fn merge_is_hadamard_product() {
        let a = WireState::qubit("a", c(0.6), c(0.8));
        let b = WireState::qubit("b", c(0.8), c(0.6));
        let mut s = a.tensor(&b).unwrap();
        s.merge("a", "b").unwrap();
        assert_eq!(s.labels(), &["a".to_string()]);
        assert!((s.amplitudes()[0] - c(0.48)).norm() < 1e-15);
        assert!((s.amplitudes()[1] - c(0.48)).norm() < 1e-15);
    }

    #[test]
    fn reorder_and_contract() {
        let a = WireState::qubit("a", c(1.0), c(0.0));
        let b = WireState::qubit("b", c(0.0), c(1.0));
        let s = a.tensor(&b).unwrap();
        assert_eq!(s.amplitudes()[2], c(1.0));
        assert_eq!(s.ordered(&["b", "a"]).unwrap()[1], c(1.0));
        let mut t = s.clone();
        t.project_z("b", 1).unwrap();
        assert_eq!(t.amplitudes().as_slice(), &[c(1.0), c(0.0)]);
        let mut t = s.clone();
        t.project_x("a", true).unwrap();
        assert!((t.norm_sqr() - 0.5).abs() < 1e-15);
        assert!(s.tensor(&s).is_err());
    }
}
