//! State-vector simulation of the physical subprotocol: CNOTs between the
//! copies, GHZ merges on the remaining qubits and X-basis postselection.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector, ONE, ZERO};
use crate::lme::{
    from_lme_coeffs, full_mask, lme_basis_vector, neighbor_phase_signs, to_lme_coeffs,
    DensityMatrix, LmeCoeffMatrix, LmesSpec, MultiIndex, StateVector,
};
use crate::purify::purify_color;
use crate::random::random_lme_coeffs;
use crate::wires::WireState;

/// Largest `n` for two-copy density simulation.
pub const MAX_DENSITY_QUBITS: usize = 4;
/// Largest `n` for two-copy state-vector runs.
pub const MAX_PAIR_QUBITS: usize = 6;

const KEEP_TOL: f64 = 1e-20;
const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GhzMode {
    /// Apply `|0><00| + |1><11|` directly.
    #[default]
    Reduced,
    /// Bell ancilla, GHZ-basis measurement of three qubits, Pauli correction.
    Literal,
}

/// Two copies of an `n`-qubit state plus any attached ancillas.
#[derive(Debug, Clone)]
pub struct TwoCopyState {
    n: usize,
    wires: WireState,
    normalized: bool,
    ancillas: usize,
}

impl TwoCopyState {
    /// Wire label of a system qubit; `copy` is 1 or 2.
    pub fn wire(copy: u8, qubit: usize) -> String {
        format!("{qubit}.{copy}")
    }

    pub fn new(first: &StateVector, second: &StateVector) -> Result<Self> {
        if first.n() != second.n() {
            return Err(Error::DimensionMismatch {
                expected: first.n(),
                actual: second.n(),
            });
        }
        let amps = second.amplitudes().kronecker(first.amplitudes());
        let mut s = Self::from_amplitudes(first.n(), amps)?;
        s.normalized = first.is_normalized() && second.is_normalized();
        Ok(s)
    }

    /// Copy-1 qubits on the low `n` bits, copy-2 on the high bits. The state
    /// is kept unnormalized: every operation is applied linearly.
    pub fn from_amplitudes(n: usize, amps: CVector) -> Result<Self> {
        if n > MAX_PAIR_QUBITS {
            return Err(Error::DimensionCap {
                what: "two-copy state",
                required: n,
                limit: MAX_PAIR_QUBITS,
            });
        }
        let labels = (1..=2u8)
            .flat_map(|copy| (1..=n).map(move |q| Self::wire(copy, q)))
            .collect();
        Ok(Self {
            n,
            wires: WireState::new(labels, amps)?,
            normalized: false,
            ancillas: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn labels(&self) -> &[String] {
        self.wires.labels()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.wires.norm_sqr()
    }

    /// Runs a norm-reducing step, returns the branch probability and
    /// rescales when the state is normalized.
    fn branch(&mut self, what: &str, f: impl FnOnce(&mut Self) -> Result<()>) -> Result<f64> {
        let before = self.wires.norm_sqr();
        f(self)?;
        let after = self.wires.norm_sqr();
        let p = if before > 0.0 { after / before } else { 0.0 };
        if self.normalized {
            if after <= KEEP_TOL {
                return Err(Error::ZeroProbability(what.to_string()));
            }
            self.wires.scale(after.sqrt().recip());
        }
        Ok(p)
    }

    pub fn apply_cnot(&mut self, control: &str, target: &str) -> Result<()> {
        self.wires.cnot(control, target)
    }

    /// Merge `w2` into `w1`; the merged wire keeps `w1`'s label. Returns the
    /// kept-branch probability.
    pub fn ghz_merge(&mut self, w1: &str, w2: &str, mode: GhzMode) -> Result<f64> {
        match mode {
            GhzMode::Reduced => self.branch("GHZ merge", |s| s.wires.merge(w1, w2)),
            GhzMode::Literal => self.branch("GHZ merge", |s| s.literal_merge(w1, w2)),
        }
    }

    /// Ancilla pair `|Φ+>_{x'x''}`, GHZ-basis measurement of `(w1, w2, x')`.
    /// The four outcomes `1⊗1⊗W|GHZ>` are corrected by `W†` on `x''` and all
    /// yield `½ P ψ`; their total weight is reproduced by a factor 2.
    fn literal_merge(&mut self, w1: &str, w2: &str) -> Result<()> {
        if w1 == w2 {
            return Err(Error::Wire(format!("wire {w1} used twice")));
        }
        self.wires.pos(w1)?;
        self.wires.pos(w2)?;
        self.ancillas += 1;
        let xa = format!("anc{}a", self.ancillas);
        let xb = format!("anc{}b", self.ancillas);
        let r = c(FRAC_1_SQRT_2);
        let bell = WireState::new(
            vec![xa.clone(), xb.clone()],
            CVector::from_vec(vec![r, ZERO, ZERO, r]),
        )?;
        let joined = self.wires.tensor(&bell)?;
        // GHZ vectors indexed by bits (w1, w2, x'), w1 lowest.
        let ghz = |lo: usize, hi: usize, sign: f64| {
            let mut v = vec![ZERO; 8];
            v[lo] = r;
            v[hi] = c(sign * FRAC_1_SQRT_2);
            v
        };
        let outcomes: [(Vec<Complex64>, &[char]); 4] = [
            (ghz(0, 7, 1.0), &[]),
            (ghz(4, 3, 1.0), &['X']),
            (ghz(0, 7, -1.0), &['Z']),
            (ghz(4, 3, -1.0), &['X', 'Z']),
        ];
        let mut branches = Vec::with_capacity(4);
        for (phi, correction) in outcomes {
            let mut b = joined.clone();
            b.contract(&[w1, w2, &xa], &phi)?;
            // W† = Z X for W = X Z, so apply X first.
            for &p in correction {
                match p {
                    'X' => b.x(&xb)?,
                    _ => b.z(&xb)?,
                }
            }
            b.relabel(&xb, w1)?;
            branches.push(b);
        }
        let first = branches[0].amplitudes().clone();
        for b in &branches[1..] {
            let order: Vec<&str> = branches[0].labels().iter().map(String::as_str).collect();
            let dev = (b.ordered(&order)? - &first).norm();
            if dev > 1e-12 * (1.0 + first.norm()) {
                return Err(Error::Wire(format!("GHZ branches disagree by {dev:.3e}")));
            }
        }
        let mut kept = branches.swap_remove(0);
        kept.scale(2.0);
        self.wires = kept;
        Ok(())
    }

    /// Project onto `|+>` and drop the wire; returns the branch probability.
    pub fn x_postselect(&mut self, wire: &str) -> Result<f64> {
        self.branch("X postselection", |s| s.wires.project_x(wire, true))
    }

    /// Remaining copy-1 system qubits as an `n`-qubit state.
    pub fn into_copy_one(self) -> Result<StateVector> {
        let order: Vec<String> = (1..=self.n).map(|q| Self::wire(1, q)).collect();
        let refs: Vec<&str> = order.iter().map(String::as_str).collect();
        let amps = self.wires.ordered(&refs)?;
        if self.normalized {
            StateVector::new(self.n, amps)
        } else {
            StateVector::unnormalized(self.n, amps)
        }
    }
}

fn qubits_of(mask: usize, n: usize) -> Vec<usize> {
    (1..=n).filter(|q| mask >> (q - 1) & 1 == 1).collect()
}

/// The three steps of the color subprotocol applied to `state`. Returns the
/// product of the branch probabilities.
pub fn run_subprotocol(
    state: &mut TwoCopyState,
    spec: &LmesSpec,
    color: usize,
    mode: GhzMode,
) -> Result<f64> {
    spec.require_regular()?;
    if state.n() != spec.n() {
        return Err(Error::DimensionMismatch {
            expected: spec.n(),
            actual: state.n(),
        });
    }
    let a = spec.color_mask(color)?;
    let n = spec.n();
    let w = TwoCopyState::wire;
    let mut prob = 1.0;
    for q in qubits_of(a, n) {
        state.apply_cnot(&w(2, q), &w(1, q))?;
    }
    for q in qubits_of(full_mask(n) & !a, n) {
        prob *= state.ghz_merge(&w(1, q), &w(2, q), mode)?;
    }
    for q in qubits_of(a, n) {
        prob *= state.x_postselect(&w(2, q))?;
    }
    Ok(prob)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairOutcome {
    pub kept: bool,
    /// Normalized output on the kept branch.
    pub output: Option<StateVector>,
    /// Squared norm of the unnormalized output.
    pub weight: f64,
}

pub fn run_subprotocol_on_basis_pair(
    spec: &LmesSpec,
    color: usize,
    k: MultiIndex,
    l: MultiIndex,
) -> Result<PairOutcome> {
    run_subprotocol_on_basis_pair_with(spec, color, k, l, GhzMode::Reduced)
}

pub fn run_subprotocol_on_basis_pair_with(
    spec: &LmesSpec,
    color: usize,
    k: MultiIndex,
    l: MultiIndex,
    mode: GhzMode,
) -> Result<PairOutcome> {
    let a = lme_basis_vector(spec, k)?;
    let b = lme_basis_vector(spec, l)?;
    let amps = b.amplitudes().kronecker(a.amplitudes());
    let mut state = TwoCopyState::from_amplitudes(spec.n(), amps)?;
    run_subprotocol(&mut state, spec, color, mode)?;
    let out = state.into_copy_one()?;
    let weight = out.norm().powi(2);
    if weight <= KEEP_TOL {
        return Ok(PairOutcome {
            kept: false,
            output: None,
            weight,
        });
    }
    Ok(PairOutcome {
        kept: true,
        output: Some(out.normalize()?),
        weight,
    })
}

/// Kraus operator `K` of the kept branch, `2^n × 4^n`, acting on
/// copy-1 ⊗ copy-2 with copy 1 on the low bits.
pub fn subprotocol_kraus(spec: &LmesSpec, color: usize, mode: GhzMode) -> Result<CMatrix> {
    let n = spec.n();
    if n > MAX_DENSITY_QUBITS {
        return Err(Error::DimensionCap {
            what: "two-copy density simulation",
            required: n,
            limit: MAX_DENSITY_QUBITS,
        });
    }
    let d = 1 << n;
    let mut k = CMatrix::zeros(d, d * d);
    for j in 0..d * d {
        let mut e = CVector::zeros(d * d);
        e[j] = ONE;
        let mut state = TwoCopyState::from_amplitudes(n, e)?;
        run_subprotocol(&mut state, spec, color, mode)?;
        let out = state.into_copy_one()?;
        k.set_column(j, out.amplitudes());
    }
    Ok(k)
}

/// `ρ ⊗ ρ → K (ρ ⊗ ρ) K†`, renormalized, with the full success probability
/// (GHZ and X-postselection factors included).
pub fn induced_density_map(spec: &LmesSpec, color: usize, rho: &DensityMatrix) -> Result<(DensityMatrix, f64)> {
    if rho.n() != spec.n() {
        return Err(Error::DimensionMismatch {
            expected: spec.n(),
            actual: rho.n(),
        });
    }
    let k = subprotocol_kraus(spec, color, GhzMode::Reduced)?;
    let two = linalg::kron(rho.matrix(), rho.matrix());
    let out = &k * two * k.adjoint();
    let p = linalg::trace(&out).re;
    if p <= KEEP_TOL {
        return Err(Error::ZeroProbability("subprotocol never succeeds on this input".into()));
    }
    Ok((DensityMatrix::new(spec.n(), linalg::hermitize(&out.unscale(p)))?, p))
}

/// [`induced_density_map`] expressed on LME coefficients.
pub fn induced_coefficient_map(spec: &LmesSpec, color: usize, lambda: &LmeCoeffMatrix) -> Result<(LmeCoeffMatrix, f64)> {
    let rho = from_lme_coeffs(lambda, spec)?;
    let (out, p) = induced_density_map(spec, color, &rho)?;
    Ok((to_lme_coeffs(&out, spec)?, p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilizerRoute {
    /// Merge the neighbours with `U_i|+>^m`, then `X_i`.
    Resource,
    /// Merge with the controlled resource `Σ_c |c> U_i^c |+>^m`, CNOT onto
    /// `i`, keep the control branch `|1>`.
    Controlled,
}

struct ResourceRun {
    kraus: Vec<CMatrix>,
}

fn resource_kraus(spec: &LmesSpec, qubit: usize, route: StabilizerRoute) -> Result<ResourceRun> {
    spec.require_regular()?;
    let n = spec.n();
    let nbrs = qubits_of(spec.neighborhood(qubit)?, n);
    let signs = neighbor_phase_signs(spec, qubit)?;
    let m = nbrs.len();
    let amp = ((1usize << m) as f64).sqrt().recip();
    // U_i|+>^m on wires r<j>; its sign depends only on the neighbour bits.
    let phi: Vec<Complex64> = (0..1usize << m)
        .map(|s| {
            let x: usize = nbrs
                .iter()
                .enumerate()
                .map(|(b, q)| (s >> b & 1) << (q - 1))
                .sum();
            c(amp * signs[x])
        })
        .collect();
    let mut res_labels: Vec<String> = nbrs.iter().map(|q| format!("r{q}")).collect();
    let resource = match route {
        StabilizerRoute::Resource => WireState::new(res_labels.clone(), CVector::from_vec(phi))?,
        StabilizerRoute::Controlled => {
            res_labels.push("ctl".into());
            let half = 1usize << m;
            let mut v = vec![c(amp); 2 * half];
            for (s, p) in phi.iter().enumerate() {
                v[half + s] = *p;
            }
            let mut w = WireState::new(res_labels.clone(), CVector::from_vec(v))?;
            w.scale(FRAC_1_SQRT_2);
            w
        }
    };
    let sys: Vec<String> = (1..=n).map(|q| q.to_string()).collect();
    let order: Vec<&str> = sys.iter().map(String::as_str).collect();
    let d = 1 << n;
    let branches: &[u8] = match route {
        StabilizerRoute::Resource => &[0],
        StabilizerRoute::Controlled => &[0, 1],
    };
    let mut kraus = vec![CMatrix::zeros(d, d); branches.len()];
    for x in 0..d {
        let mut e = CVector::zeros(d);
        e[x] = ONE;
        let basis = WireState::new(sys.clone(), e)?;
        let mut st = basis.tensor(&resource)?;
        for q in &nbrs {
            st.merge(&q.to_string(), &format!("r{q}"))?;
        }
        let target = qubit.to_string();
        match route {
            StabilizerRoute::Resource => {
                st.x(&target)?;
                kraus[0].set_column(x, &st.ordered(&order)?);
            }
            StabilizerRoute::Controlled => {
                st.cnot("ctl", &target)?;
                for &b in branches {
                    let mut br = st.clone();
                    br.project_z("ctl", b)?;
                    kraus[b as usize].set_column(x, &br.ordered(&order)?);
                }
            }
        }
    }
    Ok(ResourceRun { kraus })
}

fn apply_kraus(rho: &DensityMatrix, kraus: &[CMatrix]) -> Result<DensityMatrix> {
    let mut out = CMatrix::zeros(rho.dim(), rho.dim());
    for k in kraus {
        out += k * rho.matrix() * k.adjoint();
    }
    let t = linalg::trace(&out).re;
    if t <= KEEP_TOL {
        return Err(Error::ZeroProbability("resource branch".into()));
    }
    DensityMatrix::new(rho.n(), linalg::hermitize(&out.unscale(t)))
}

/// Implements `ρ → S_i ρ S_i` using only merges with an auxiliary resource
/// state and Pauli operations.
pub fn apply_stabilizer_via_resource(
    rho: &DensityMatrix,
    spec: &LmesSpec,
    qubit: usize,
    route: StabilizerRoute,
) -> Result<DensityMatrix> {
    if rho.n() != spec.n() {
        return Err(Error::DimensionMismatch {
            expected: spec.n(),
            actual: rho.n(),
        });
    }
    let run = resource_kraus(spec, qubit, route)?;
    let kept = match route {
        StabilizerRoute::Resource => &run.kraus[..1],
        StabilizerRoute::Controlled => &run.kraus[1..],
    };
    apply_kraus(rho, kept)
}

/// The controlled route with the control traced out: `½(ρ + S_i ρ S_i)`.
pub fn stabilizer_average_via_resource(rho: &DensityMatrix, spec: &LmesSpec, qubit: usize) -> Result<DensityMatrix> {
    if rho.n() != spec.n() {
        return Err(Error::DimensionMismatch {
            expected: spec.n(),
            actual: rho.n(),
        });
    }
    let run = resource_kraus(spec, qubit, StabilizerRoute::Controlled)?;
    apply_kraus(rho, &run.kraus)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCheck {
    pub spec: String,
    pub color: char,
    pub pairs: usize,
    pub mismatches: usize,
    /// Largest `1 - |<expected|output>|` over kept pairs.
    pub max_deviation: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapCheck {
    pub spec: String,
    pub color: char,
    pub samples: usize,
    /// Largest entry-wise difference between normalized outputs.
    pub max_deviation: f64,
    /// Largest `|full / parity - 2^{-|Ā|}|`.
    pub max_success_ratio_error: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub tolerance: f64,
    pub seed: u64,
    pub pairs: Vec<PairCheck>,
    pub maps: Vec<MapCheck>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("report holds only plain values")
    }
}

/// Exhaustive basis-pair check of the two-copy mapping for every color.
pub fn check_pairs(spec: &LmesSpec, tol: f64) -> Result<Vec<PairCheck>> {
    let n = spec.n();
    let mut checks = Vec::new();
    for color in 0..spec.num_colors() {
        let a = spec.color_mask(color)?;
        let (mut pairs, mut mismatches, mut worst) = (0, 0, 0.0f64);
        for k in MultiIndex::all(n) {
            for l in MultiIndex::all(n) {
                pairs += 1;
                let out = run_subprotocol_on_basis_pair(spec, color, k, l)?;
                let expect_kept = k.restrict(a) == l.restrict(a);
                if out.kept != expect_kept {
                    mismatches += 1;
                    continue;
                }
                if let Some(psi) = out.output {
                    let want = MultiIndex::new(n, k.bits() ^ (l.bits() & !a))?;
                    let dev = 1.0 - psi.overlap(&lme_basis_vector(spec, want)?).sqrt();
                    worst = worst.max(dev);
                    if dev > tol {
                        mismatches += 1;
                    }
                }
            }
        }
        checks.push(PairCheck {
            spec: spec.to_string(),
            color: LmesSpec::color_label(color),
            pairs,
            mismatches,
            max_deviation: worst,
            passed: mismatches == 0,
        });
    }
    Ok(checks)
}

/// Compare the coefficient recurrence with the simulated circuit on random
/// physical inputs.
pub fn check_map(spec: &LmesSpec, samples: usize, rng: &mut ChaCha8Rng, tol: f64) -> Result<Vec<MapCheck>> {
    let mut checks = Vec::new();
    let inputs: Vec<LmeCoeffMatrix> = (0..samples).map(|_| random_lme_coeffs(spec.n(), rng)).collect();
    for color in 0..spec.num_colors() {
        let rest = (full_mask(spec.n()) & !spec.color_mask(color)?).count_ones();
        let ratio = 0.5f64.powi(rest as i32);
        let (mut worst, mut worst_ratio) = (0.0f64, 0.0f64);
        for lam in &inputs {
            let engine = purify_color(lam, spec, color)?;
            let (sim, full) = induced_coefficient_map(spec, color, lam)?;
            worst = worst.max(linalg::max_abs_diff(engine.output.matrix(), sim.matrix()));
            worst_ratio = worst_ratio.max((full / engine.parity_success_prob - ratio).abs());
        }
        checks.push(MapCheck {
            spec: spec.to_string(),
            color: LmesSpec::color_label(color),
            samples,
            max_deviation: worst,
            max_success_ratio_error: worst_ratio,
            passed: worst <= tol && worst_ratio <= tol,
        });
    }
    Ok(checks)
}

/// Pair checks for every spec, map checks for those within the density cap.
pub fn verify(specs: &[LmesSpec], samples: usize, seed: u64, tol: f64) -> Result<VerificationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    let mut maps = Vec::new();
    for spec in specs {
        pairs.extend(check_pairs(spec, tol)?);
        if spec.n() <= MAX_DENSITY_QUBITS {
            maps.extend(check_map(spec, samples, &mut rng, tol)?);
        }
    }
    let passed = pairs.iter().all(|p| p.passed) && maps.iter().all(|m| m.passed);
    Ok(VerificationReport {
        tolerance: tol,
        seed,
        pairs,
        maps,
        passed,
    })
}
