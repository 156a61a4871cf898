//! Stabilizer twirl, Choi-Jamiolkowski states of maps acting in the LME basis,
//! partial-transpose trace norms, random relaxed depolarization maps and the
//! state whose purification is spoiled by twirling.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, ONE, ZERO};
use crate::lme::{
    basis_matrix, from_lme_coeffs, stabilizer_operator, to_lme_coeffs, DensityMatrix,
    LmeCoeffMatrix, LmesSpec, MultiIndex,
};
use crate::purify::{find_threshold, ScheduleSpec, ThresholdReport};

/// Largest `n` for which CJ states are built (`2n` qubits, dimension 64).
pub const MAX_CJ_QUBITS: usize = 3;

/// Zero every off-diagonal LME coefficient.
pub fn twirl(lambda: &LmeCoeffMatrix) -> LmeCoeffMatrix {
    LmeCoeffMatrix::diagonal(lambda.n(), &lambda.diagonal_weights())
        .expect("diagonal of a Hermitian matrix")
}

/// `E_n ∘ ... ∘ E_1` with `E_i(ρ) = ½(ρ + S_i ρ S_i)`.
pub fn twirl_by_stabilizers(rho: &DensityMatrix, spec: &LmesSpec) -> Result<DensityMatrix> {
    if rho.n() != spec.n() {
        return Err(Error::DimensionMismatch {
            expected: spec.n(),
            actual: rho.n(),
        });
    }
    let mut m = rho.matrix().clone();
    for q in 1..=spec.n() {
        let s = stabilizer_operator(spec, q)?;
        m = (&m + &s * &m * s.adjoint()).scale(0.5);
    }
    DensityMatrix::new(spec.n(), linalg::hermitize(&m))
}

/// Element of the Hermitian operator basis built from the LME basis:
/// `A_k = |Ψ_k><Ψ_k|`, `B_jk = |Ψ_j><Ψ_k| + h.c.`, `C_jk = i|Ψ_j><Ψ_k| + h.c.`
/// for `j < k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HermitianBasis {
    A(usize),
    B(usize, usize),
    C(usize, usize),
}

impl HermitianBasis {
    /// The element in LME coefficients.
    pub fn coefficients(self, d: usize) -> CMatrix {
        let mut m = CMatrix::zeros(d, d);
        let i = num_complex::Complex64::new(0.0, 1.0);
        match self {
            HermitianBasis::A(k) => m[(k, k)] = ONE,
            HermitianBasis::B(j, k) => {
                m[(j, k)] = ONE;
                m[(k, j)] = ONE;
            }
            HermitianBasis::C(j, k) => {
                m[(j, k)] = i;
                m[(k, j)] = -i;
            }
        }
        m
    }
}

/// Linear map on `n`-qubit operators, stored as the images of the matrix
/// units `|Ψ_j><Ψ_k|` in LME coefficients.
#[derive(Debug, Clone)]
pub struct LinearMapOnStates {
    spec: LmesSpec,
    images: Vec<CMatrix>,
}

impl LinearMapOnStates {
    /// From the images of the Hermitian basis elements; the map must be
    /// trace preserving. Hermiticity preservation follows from real
    /// coefficients in this basis and is checked.
    pub fn from_hermitian_images(
        spec: &LmesSpec,
        image: impl Fn(HermitianBasis) -> CMatrix,
    ) -> Result<Self> {
        let d = spec.dim();
        let mut images = vec![CMatrix::zeros(d, d); d * d];
        let half = num_complex::Complex64::new(0.5, 0.0);
        let ihalf = num_complex::Complex64::new(0.0, 0.5);
        for j in 0..d {
            let a = image(HermitianBasis::A(j));
            check_image(&a, d, 1.0)?;
            images[j * d + j] = a;
            for k in j + 1..d {
                let b = image(HermitianBasis::B(j, k));
                let cc = image(HermitianBasis::C(j, k));
                check_image(&b, d, 0.0)?;
                check_image(&cc, d, 0.0)?;
                // |j><k| = (B - iC)/2, |k><j| = (B + iC)/2
                images[j * d + k] = b.map(|z| z * half) - cc.map(|z| z * ihalf);
                images[k * d + j] = b.map(|z| z * half) + cc.map(|z| z * ihalf);
            }
        }
        Ok(Self {
            spec: spec.clone(),
            images,
        })
    }

    pub fn identity(spec: &LmesSpec) -> Self {
        let d = spec.dim();
        Self::from_hermitian_images(spec, |e| e.coefficients(d)).expect("identity is trace preserving")
    }

    /// `A_k → A_k`, `B_jk, C_jk → 0`.
    pub fn depolarization(spec: &LmesSpec) -> Self {
        Self::phi(spec, &StochasticMatrix::identity(spec.n()))
    }

    /// `Φ_P ∘ E_dep`: `A_0 → A_0`, `A_k → Σ_{m≠0} P_km A_m`, off-diagonal
    /// elements annihilated.
    pub fn phi(spec: &LmesSpec, p: &StochasticMatrix) -> Self {
        let d = spec.dim();
        assert_eq!(p.n(), spec.n(), "stochastic matrix dimension");
        Self::from_hermitian_images(spec, |e| match e {
            HermitianBasis::A(0) => HermitianBasis::A(0).coefficients(d),
            HermitianBasis::A(k) => {
                let mut m = CMatrix::zeros(d, d);
                for j in 1..d {
                    m[(j, j)] = c(p.entry(k, j));
                }
                m
            }
            _ => CMatrix::zeros(d, d),
        })
        .expect("stochastic rows preserve the trace")
    }

    pub fn spec(&self) -> &LmesSpec {
        &self.spec
    }

    /// Apply to LME coefficients.
    pub fn apply(&self, lambda: &LmeCoeffMatrix) -> Result<LmeCoeffMatrix> {
        let d = self.spec.dim();
        if lambda.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: lambda.dim(),
            });
        }
        let mut out = CMatrix::zeros(d, d);
        for j in 0..d {
            for k in 0..d {
                let w = lambda.entry(j, k);
                if w != ZERO {
                    out += self.images[j * d + k].map(|z| z * w);
                }
            }
        }
        LmeCoeffMatrix::new(self.spec.n(), linalg::hermitize(&out))
    }
}

fn check_image(m: &CMatrix, d: usize, trace: f64) -> Result<()> {
    if m.nrows() != d || m.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: m.nrows(),
        });
    }
    let dev = linalg::hermiticity_deviation(m);
    if dev > 1e-12 {
        return Err(Error::NonHermitian(dev));
    }
    let t = linalg::trace(m).re;
    if (t - trace).abs() > 1e-12 {
        return Err(Error::InvalidParameter {
            what: "image trace",
            value: t,
            range: format!("{trace}"),
        });
    }
    Ok(())
}

/// `(map ⊗ 1)` applied to `|φ+><φ+|^{⊗n}`, with wires ordered
/// `1a 1b 2a 2b ...` (`a` carries the map output, `b` the reference).
pub fn cj_state(map: &LinearMapOnStates) -> Result<DensityMatrix> {
    let spec = &map.spec;
    let n = spec.n();
    if n > MAX_CJ_QUBITS {
        return Err(Error::DimensionCap {
            what: "CJ state",
            required: n,
            limit: MAX_CJ_QUBITS,
        });
    }
    let d = spec.dim();
    let b = basis_matrix(spec);
    // Σ_{xy} |x><y| ⊗ |x><y| = Σ_{jk} |Ψ_j><Ψ_k| ⊗ |Ψ_j><Ψ_k| for a real basis.
    let mut big = CMatrix::zeros(d * d, d * d);
    for j in 0..d {
        for k in 0..d {
            let img = &map.images[j * d + k];
            if img.iter().all(|z| *z == ZERO) {
                continue;
            }
            let out = &b * img * b.transpose();
            let reference = b.column(j) * b.column(k).transpose();
            // reference on the high bits, map output on the low bits
            big += linalg::kron(&reference, &out);
        }
    }
    big.unscale_mut(d as f64);
    let perm: Vec<usize> = (0..d * d).map(|i| interleave(i, n)).collect();
    let mut m = CMatrix::zeros(d * d, d * d);
    for i in 0..d * d {
        for j in 0..d * d {
            m[(perm[i], perm[j])] = big[(i, j)];
        }
    }
    DensityMatrix::new(2 * n, linalg::hermitize(&m))
}

/// Output bit `q` → wire `2q`, reference bit `q` → wire `2q + 1`.
fn interleave(i: usize, n: usize) -> usize {
    let (out, reference) = (i & ((1 << n) - 1), i >> n);
    (0..n)
        .map(|q| ((out >> q & 1) << (2 * q)) | ((reference >> q & 1) << (2 * q + 1)))
        .sum()
}

/// Grouping of wires into parties, with one party's wires transposed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartyPartition {
    pub wires: usize,
    pub blocks: Vec<Vec<usize>>,
    pub transposed: usize,
}

impl PartyPartition {
    /// Parties `{1a,1b} | {2a,2b} | ...` of a CJ state; wires are 0-based.
    pub fn paired(n: usize) -> Self {
        Self {
            wires: 2 * n,
            blocks: (0..n).map(|q| vec![2 * q, 2 * q + 1]).collect(),
            transposed: 0,
        }
    }

    pub fn transposing(mut self, block: usize) -> Self {
        self.transposed = block;
        self
    }

    fn mask(&self) -> Result<usize> {
        let block = self.blocks.get(self.transposed).ok_or_else(|| {
            Error::InvalidSpec(format!("no party {} in partition", self.transposed))
        })?;
        let mut mask = 0;
        for &w in block {
            if w >= self.wires {
                return Err(Error::QubitOutOfRange {
                    qubit: w + 1,
                    n: self.wires,
                });
            }
            mask |= 1 << w;
        }
        Ok(mask)
    }
}

pub fn partial_transpose(m: &CMatrix, partition: &PartyPartition) -> Result<CMatrix> {
    if m.nrows() != 1 << partition.wires || m.ncols() != m.nrows() {
        return Err(Error::DimensionMismatch {
            expected: 1 << partition.wires,
            actual: m.nrows(),
        });
    }
    let mask = partition.mask()?;
    Ok(CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        let swap = (i ^ j) & mask;
        m[(i ^ swap, j ^ swap)]
    }))
}

/// `||ρ^Γ||_tr`; equals 1 for PPT states.
pub fn pt_trace_norm(m: &CMatrix, partition: &PartyPartition) -> Result<f64> {
    let dev = linalg::hermiticity_deviation(m);
    if dev > 1e-10 {
        return Err(Error::NonHermitian(dev));
    }
    Ok(linalg::hermitian_trace_norm(&partial_transpose(m, partition)?))
}

/// CJ witness of a map: trace norm of the partial transpose on party 1.
pub fn map_witness(map: &LinearMapOnStates) -> Result<f64> {
    let cj = cj_state(map)?;
    pt_trace_norm(cj.matrix(), &PartyPartition::paired(map.spec.n()))
}

/// Right-stochastic `(2^n - 1) × (2^n - 1)` matrix indexed by `k ≠ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    n: usize,
    p: DMatrix<f64>,
}

impl StochasticMatrix {
    pub fn new(n: usize, p: DMatrix<f64>) -> Result<Self> {
        let m = (1usize << n) - 1;
        if p.nrows() != m || p.ncols() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: p.nrows(),
            });
        }
        for (r, row) in p.row_iter().enumerate() {
            if let Some(v) = row.iter().find(|v| v.is_nan() || **v < 0.0) {
                return Err(Error::NotStochastic(format!("row {r} has entry {v}")));
            }
            let s = row.sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(Error::NotStochastic(format!("row {r} sums to {s}")));
            }
        }
        Ok(Self { n, p })
    }

    pub fn identity(n: usize) -> Self {
        let m = (1usize << n) - 1;
        Self {
            n,
            p: DMatrix::identity(m, m),
        }
    }

    pub fn uniform(n: usize) -> Self {
        let m = (1usize << n) - 1;
        Self {
            n,
            p: DMatrix::from_element(m, m, 1.0 / m as f64),
        }
    }

    /// Each row independent uniform(0,1) entries, normalized.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let m = (1usize << n) - 1;
        let mut p = DMatrix::from_fn(m, m, |_, _| rng.random::<f64>());
        normalize_rows(&mut p);
        Self { n, p }
    }

    /// Rows rescaled to sum 1; all entries must be non-negative and every
    /// row non-zero.
    pub fn from_weights(n: usize, mut w: DMatrix<f64>) -> Result<Self> {
        if w.iter().any(|v| v.is_nan() || *v < 0.0) {
            return Err(Error::NotStochastic("negative weight".into()));
        }
        if w.row_iter().any(|r| r.sum() <= 0.0) {
            return Err(Error::NotStochastic("zero row".into()));
        }
        normalize_rows(&mut w);
        Self::new(n, w)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    /// `P_km` for `k, m ≠ 0`.
    pub fn entry(&self, k: usize, m: usize) -> f64 {
        self.p[(k - 1, m - 1)]
    }
}

fn normalize_rows(p: &mut DMatrix<f64>) {
    for mut row in p.row_iter_mut() {
        let s = row.sum();
        row /= s;
    }
}

pub fn random_phi_map(spec: &LmesSpec, p: &StochasticMatrix) -> LinearMapOnStates {
    LinearMapOnStates::phi(spec, p)
}

/// Witness of `Φ_P ∘ E_dep` evaluated directly from
/// `CJ = 2^{-n} Σ_k Φ_P(A_k) ⊗ A_k`.
pub fn phi_witness(spec: &LmesSpec, p: &StochasticMatrix) -> Result<f64> {
    map_witness(&LinearMapOnStates::phi(spec, p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiSample {
    pub index: usize,
    pub trace_norm: f64,
}

/// Sample `i` draws its matrix from a ChaCha stream `i` of `seed`, so the
/// batch is independent of scheduling.
pub fn sample_phi_batch(spec: &LmesSpec, count: usize, seed: u64) -> Result<Vec<PhiSample>> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let p = StochasticMatrix::random(spec.n(), &mut rng);
            Ok(PhiSample {
                index: i,
                trace_norm: phi_witness(spec, &p)?,
            })
        })
        .collect()
}

pub fn phi_batch_tsv(samples: &[PhiSample]) -> String {
    let mut out = String::from("# sample\ttrace_norm\n");
    for s in samples {
        out.push_str(&format!("{}\t{:.12}\n", s.index, s.trace_norm));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhiSearch {
    pub best_norm: f64,
    pub best: StochasticMatrix,
    pub evaluations: usize,
}

/// Random restarts with multiplicative coordinate moves on the row weights,
/// minimizing the CJ witness within `budget` evaluations.
pub fn search_min_phi(spec: &LmesSpec, budget: usize, restarts: usize, seed: u64) -> Result<PhiSearch> {
    let n = spec.n();
    let m = (1usize << n) - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let restarts = restarts.max(1);
    let per_restart = (budget / restarts).max(1);
    let mut evaluations = 0;
    let mut best: Option<(f64, StochasticMatrix)> = None;
    for r in 0..restarts {
        let mut w = if r == 0 {
            DMatrix::from_element(m, m, 1.0)
        } else {
            DMatrix::from_fn(m, m, |_, _| rng.random::<f64>() + 1e-3)
        };
        let mut current = phi_witness(spec, &StochasticMatrix::from_weights(n, w.clone())?)?;
        evaluations += 1;
        let mut step = 1.0;
        for _ in 1..per_restart {
            if evaluations >= budget {
                break;
            }
            let (i, j) = (rng.random_range(0..m), rng.random_range(0..m));
            let factor = (step * (2.0 * rng.random::<f64>() - 1.0)).exp();
            let old = w[(i, j)];
            w[(i, j)] = (old * factor).max(1e-9);
            let cand = phi_witness(spec, &StochasticMatrix::from_weights(n, w.clone())?)?;
            evaluations += 1;
            if cand < current {
                current = cand;
            } else {
                w[(i, j)] = old;
                step = (step * 0.995).max(0.05);
            }
        }
        let p = StochasticMatrix::from_weights(n, w)?;
        if best.as_ref().is_none_or(|(b, _)| current < *b) {
            best = Some((current, p));
        }
    }
    let (best_norm, best) = best.expect("at least one restart");
    Ok(PhiSearch {
        best_norm,
        best,
        evaluations,
    })
}

/// Off-diagonal magnitude of the counterexample state.
pub const COUNTEREXAMPLE_COHERENCE: f64 = 0.02;

/// The three-qubit spec `U_123` with one qubit per color.
pub fn counterexample_spec() -> LmesSpec {
    LmesSpec::new(3, vec![vec![1, 2, 3]], vec![vec![1], vec![2], vec![3]]).expect("valid")
}

/// `λ_0 = f`, `λ_kk = (1-f)/7`, and the six listed coherences of size 0.02.
pub fn counterexample_state(f: f64) -> Result<LmeCoeffMatrix> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::InvalidParameter {
            what: "fidelity f",
            value: f,
            range: "[0, 1]".into(),
        });
    }
    let mut m = CMatrix::zeros(8, 8);
    m[(0, 0)] = c(f);
    for k in 1..8 {
        m[(k, k)] = c((1.0 - f) / 7.0);
    }
    let e = COUNTEREXAMPLE_COHERENCE;
    let entries = [
        ("000", "011", e),
        ("001", "010", -e),
        ("000", "101", e),
        ("001", "100", -e),
        ("000", "110", e),
        ("010", "100", -e),
    ];
    for (a, b, v) in entries {
        let i = a.parse::<MultiIndex>()?.bits();
        let j = b.parse::<MultiIndex>()?.bits();
        m[(i, j)] = c(v);
        m[(j, i)] = c(v);
    }
    LmeCoeffMatrix::new(3, m)
}

fn counterexample_min_eig(f: f64) -> f64 {
    counterexample_state(f).expect("f in [0, 1]").min_eigenvalue()
}

/// Interval of `f` on which the counterexample state is PSD, by bisection
/// on the smallest eigenvalue to `tol`.
pub fn psd_range(tol: f64) -> Result<[f64; 2]> {
    // interior point: the maximum of the min eigenvalue on a coarse grid
    let inside = (1..100)
        .map(|i| i as f64 / 100.0)
        .max_by(|a, b| counterexample_min_eig(*a).total_cmp(&counterexample_min_eig(*b)))
        .expect("non-empty grid");
    if counterexample_min_eig(inside) < 0.0 {
        return Err(Error::Bracket {
            lo: 0.0,
            hi: 1.0,
            detail: "no PSD point".into(),
        });
    }
    let edge = |mut good: f64, mut bad: f64| {
        while (good - bad).abs() > tol {
            let mid = 0.5 * (good + bad);
            if counterexample_min_eig(mid) >= 0.0 {
                good = mid;
            } else {
                bad = mid;
            }
        }
        good
    };
    Ok([edge(inside, 0.0), edge(inside, 1.0)])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpoilComparison {
    pub raw: ThresholdReport,
    pub twirled: ThresholdReport,
}

impl SpoilComparison {
    pub fn spoiled(&self) -> bool {
        self.raw.bracket[1] < self.twirled.bracket[0]
    }
}

/// White-noise-like thresholds of the counterexample state with and without
/// twirling first.
pub fn spoil_comparison(schedule: &ScheduleSpec, bracket: (f64, f64), tol: f64) -> Result<SpoilComparison> {
    let spec = counterexample_spec();
    let raw = |f: f64| counterexample_state(f);
    let twirled = |f: f64| counterexample_state(f).map(|l| twirl(&l));
    let (a, b) = rayon::join(
        || find_threshold(&raw, &spec, schedule, bracket, tol),
        || find_threshold(&twirled, &spec, schedule, bracket, tol),
    );
    Ok(SpoilComparison { raw: a?, twirled: b? })
}

/// Fidelity after one application of `color` to the state and to its twirl.
pub fn one_step_fidelities(lambda: &LmeCoeffMatrix, spec: &LmesSpec, color: usize) -> Result<(f64, f64)> {
    let raw = crate::purify::purify_color(lambda, spec, color)?;
    let tw = crate::purify::purify_color(&twirl(lambda), spec, color)?;
    Ok((crate::fidelity(&raw.output), crate::fidelity(&tw.output)))
}

/// Convert density matrix → coefficients → density matrix through the map.
pub fn apply_to_density(map: &LinearMapOnStates, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let lam = to_lme_coeffs(rho, &map.spec)?;
    from_lme_coeffs(&map.apply(&lam)?, &map.spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density_matrix, random_lme_coeffs};

    fn u123() -> LmesSpec {
        counterexample_spec()
    }

    #[test]
    fn twirl_examples() {
        let w = [0.3, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1];
        let diag = LmeCoeffMatrix::diagonal(3, &w).unwrap();
        assert_eq!(twirl(&diag), diag);
        let t = twirl(&counterexample_state(0.66).unwrap());
        assert!((t.entry(0, 0).re - 0.66).abs() < 1e-15);
        for k in 1..8 {
            assert!((t.entry(k, k).re - 0.34 / 7.0).abs() < 1e-15);
        }
        assert!(t.is_diagonal(0.0));
    }

    #[test]
    fn twirl_matches_stabilizer_composition_and_is_idempotent() {
        let spec = LmesSpec::new(4, vec![vec![1, 2, 3], vec![2, 3, 4]], vec![vec![1, 4], vec![2], vec![3]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = random_density_matrix(4, &mut rng);
        let via = twirl_by_stabilizers(&rho, &spec).unwrap();
        let lam = to_lme_coeffs(&rho, &spec).unwrap();
        let direct = from_lme_coeffs(&twirl(&lam), &spec).unwrap();
        assert!(linalg::max_abs_diff(via.matrix(), direct.matrix()) < 1e-12);
        assert_eq!(twirl(&twirl(&lam)), twirl(&lam));
        assert!((crate::fidelity(&twirl(&lam)) - crate::fidelity(&lam)).abs() < 1e-15);
    }

    #[test]
    fn depolarization_kills_off_diagonal_basis() {
        let spec = u123();
        let dep = LinearMapOnStates::depolarization(&spec);
        let b = LmeCoeffMatrix::new(3, HermitianBasis::B(1, 4).coefficients(8)).unwrap();
        assert!(dep.apply(&b).unwrap().matrix().iter().all(|z| z.norm() < 1e-15));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let lam = random_lme_coeffs(3, &mut rng);
        assert_eq!(dep.apply(&lam).unwrap(), twirl(&lam));
        let id = LinearMapOnStates::identity(&spec);
        assert!(linalg::max_abs_diff(id.apply(&lam).unwrap().matrix(), lam.matrix()) < 1e-15);
    }

    #[test]
    fn identity_cj_is_bell_pairs() {
        let spec = u123();
        let cj = cj_state(&LinearMapOnStates::identity(&spec)).unwrap();
        // |φ+>^{⊗3} on pairs (2q, 2q+1)
        let mut v = vec![0.0; 64];
        for x in 0..8usize {
            let idx: usize = (0..3).map(|q| ((x >> q & 1) * 3) << (2 * q)).sum();
            v[idx] = 1.0 / 8f64.sqrt();
        }
        let want = CMatrix::from_fn(64, 64, |i, j| c(v[i] * v[j]));
        assert!(linalg::max_abs_diff(cj.matrix(), &want) < 1e-12);
        let norm = pt_trace_norm(cj.matrix(), &PartyPartition::paired(3)).unwrap();
        // a maximally entangled pair inside one party is PPT across parties
        assert!((norm - 1.0).abs() < 1e-9);
    }

    #[test]
    fn depolarization_witness_value() {
        let spec = u123();
        let dep = LinearMapOnStates::depolarization(&spec);
        let cj = cj_state(&dep).unwrap();
        assert!(cj.is_physical(1e-12));
        for party in 0..3 {
            let norm = pt_trace_norm(cj.matrix(), &PartyPartition::paired(3).transposing(party)).unwrap();
            assert!((norm - 1.75).abs() < 1e-9, "party {party}: {norm}");
        }
    }

    #[test]
    fn product_state_is_ppt() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = random_density_matrix(2, &mut rng);
        let b = random_density_matrix(4, &mut rng);
        let prod = linalg::kron(b.matrix(), a.matrix());
        let norm = pt_trace_norm(&prod, &PartyPartition::paired(3)).unwrap();
        assert!((norm - 1.0).abs() < 1e-9);
        let mut bad = prod.clone();
        bad[(0, 1)] += c(0.1);
        assert!(matches!(
            pt_trace_norm(&bad, &PartyPartition::paired(3)),
            Err(Error::NonHermitian(_))
        ));
    }

    #[test]
    fn stochastic_validation() {
        assert!(StochasticMatrix::new(2, DMatrix::from_element(3, 3, 0.5)).is_err());
        let mut p = DMatrix::identity(3, 3);
        p[(0, 0)] = 1.5;
        p[(0, 1)] = -0.5;
        assert!(matches!(StochasticMatrix::new(2, p), Err(Error::NotStochastic(_))));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = StochasticMatrix::random(3, &mut rng);
        assert!(StochasticMatrix::new(3, r.matrix().clone()).is_ok());
    }

    #[test]
    fn phi_maps_are_cp_and_entangling() {
        let spec = u123();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let p = StochasticMatrix::random(3, &mut rng);
            let cj = cj_state(&random_phi_map(&spec, &p)).unwrap();
            assert!(cj.min_eigenvalue() > -1e-12);
            assert!(phi_witness(&spec, &p).unwrap() > 1.0);
        }
        let uniform = phi_witness(&spec, &StochasticMatrix::uniform(3)).unwrap();
        assert!(uniform > 1.0 && uniform < 1.75, "{uniform}");
        assert!((phi_witness(&spec, &StochasticMatrix::identity(3)).unwrap() - 1.75).abs() < 1e-9);
    }

    #[test]
    fn batch_is_deterministic() {
        let spec = u123();
        let a = sample_phi_batch(&spec, 16, 42).unwrap();
        let b = sample_phi_batch(&spec, 16, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_phi_batch(&spec, 16, 43).unwrap());
        assert!(a.iter().all(|s| s.trace_norm > 1.0 + 1e-6));
        assert_eq!(phi_batch_tsv(&a).lines().count(), 17);
    }

    #[test]
    fn small_search_stays_above_one() {
        let spec = u123();
        let s = search_min_phi(&spec, 400, 2, 7).unwrap();
        assert!(s.evaluations <= 400);
        assert!(s.best_norm > 1.0 && s.best_norm <= phi_witness(&spec, &StochasticMatrix::uniform(3)).unwrap());
    }

    #[test]
    fn counterexample_structure() {
        let lam = counterexample_state(0.66).unwrap();
        assert!((lam.entry(1, 2).re + 0.02).abs() < 1e-15);
        assert!((lam.entry(2, 1).re + 0.02).abs() < 1e-15);
        assert!((lam.trace() - 1.0).abs() < 1e-15);
        let [lo, hi] = psd_range(1e-4).unwrap();
        assert!((lo - 0.01).abs() < 0.01, "{lo}");
        assert!((hi - 0.72).abs() < 0.01, "{hi}");
        assert!(counterexample_min_eig(hi - 1e-3) >= 0.0);
        assert!(counterexample_min_eig(hi + 1e-3) < 0.0);
    }

    #[test]
    fn coherences_only_help_one_step() {
        let spec = u123();
        for i in 0..20 {
            let f = 0.3 + 0.02 * i as f64;
            let lam = counterexample_state(f).unwrap();
            for color in 0..3 {
                let (raw, tw) = one_step_fidelities(&lam, &spec, color).unwrap();
                assert!(raw >= tw - 1e-15, "f={f} color={color}: {raw} < {tw}");
            }
        }
    }
}
