//! Insecurity constructions and their checker.
//!
//! Two families of counterexamples certify the protocol's assumptions:
//!
//! - A relay that identifies a single Bell state is insecure for
//!   uncharacterized sources: a degenerate source emitting only two
//!   orthogonal states reproduces the honest statistics exactly while the
//!   relay operator reads every key bit ([`orthogonal_source_scenario`],
//!   [`single_bell_merge`], [`orthogonal_mimic_table`]).
//! - The qubit (dimension-2) restriction is essential: a four-dimensional
//!   joint source with an explicit relay strategy reproduces the honest
//!   two-Bell table while leaking the whole basis-0 key
//!   ([`four_dim_counterexample`]).
//!
//! [`verify_strategy`] checks any claimed relay strategy against the model:
//! unit ancilla states, probability normalization, inner-product
//! preservation on the input span (the unitarity restriction), and
//! consistency with a target announcement table.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
// Float supplies f64 math under no_std. In test builds dev-dependency
// feature unification links std, whose inherent methods shadow the trait
// and leave this import "unused".
#[allow(unused_imports)]
use num_traits::Float;

use crate::qstate::{bell_vector, tensor, BellLabel, EncodingSet, QubitState, TwoQubitState};
use crate::tables::{ideal_bb84_table, OutcomeTable, SenderPair};

/// Tolerance for the constructed states' relations and the checker.
pub const ATTACK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum AttackError {
    /// Gram completion produced an eigenvalue significantly below zero.
    NotPositiveSemidefinite { eigenvalue: f64 },
    /// Gram rank exceeds the target embedding dimension.
    RankExceeded { rank: usize, max: usize },
    /// A gamma vector's dimension disagrees with the strategy's ancilla
    /// dimension.
    DimensionMismatch { expected: usize, got: usize },
}

impl core::fmt::Display for AttackError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            AttackError::NotPositiveSemidefinite { eigenvalue } => {
                write!(f, "gram matrix not positive semidefinite (eigenvalue {eigenvalue})")
            }
            AttackError::RankExceeded { rank, max } => {
                write!(f, "gram rank {rank} exceeds embedding dimension {max}")
            }
            AttackError::DimensionMismatch { expected, got } => {
                write!(f, "gamma dimension {got}, strategy ancilla dimension {expected}")
            }
        }
    }
}

impl core::error::Error for AttackError {}

// ---------------------------------------------------------------------------
// Small symmetric eigenproblem for the Gram embedding
// ---------------------------------------------------------------------------

/// Eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations.
/// Returns (eigenvalues, eigenvectors); column k of the returned matrix
/// (i.e. `vecs[i][k]` over i) is the unit eigenvector for `vals[k]`.
fn jacobi_eigen<const N: usize>(mut a: [[f64; N]; N]) -> ([f64; N], [[f64; N]; N]) {
    let mut v = [[0.0; N]; N];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..N {
            for q in (p + 1)..N {
                off += a[p][q] * a[p][q];
            }
        }
        if off < 1e-26 {
            break;
        }
        for p in 0..N - 1 {
            for q in (p + 1)..N {
                if a[p][q].abs() < 1e-30 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..N {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..N {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut vals = [0.0; N];
    for i in 0..N {
        vals[i] = a[i][i];
    }
    (vals, v)
}

/// Coordinates realizing a prescribed Gram matrix: projects onto the PSD
/// cone by clipping negative eigenvalues, requires rank ≤ `max_rank`, and
/// factors G = V·diag(λ)·Vᵀ into one row vector of length `max_rank` per
/// state.
fn gram_embed<const N: usize>(
    gram: [[f64; N]; N],
    max_rank: usize,
) -> Result<Vec<Vec<f64>>, AttackError> {
    let (vals, vecs) = jacobi_eigen(gram);
    let mut order: Vec<usize> = (0..N).collect();
    order.sort_by(|&i, &j| vals[j].partial_cmp(&vals[i]).unwrap());
    if vals[order[N - 1]] < -1e-9 {
        return Err(AttackError::NotPositiveSemidefinite {
            eigenvalue: vals[order[N - 1]],
        });
    }
    let rank = order.iter().filter(|&&k| vals[k] > 1e-9).count();
    if rank > max_rank {
        return Err(AttackError::RankExceeded { rank, max: max_rank });
    }
    let mut coords = vec![vec![0.0; max_rank]; N];
    for (slot, &k) in order.iter().take(max_rank).enumerate() {
        let root = vals[k].max(0.0).sqrt();
        for (i, coord) in coords.iter_mut().enumerate() {
            coord[slot] = root * vecs[i][k];
        }
    }
    Ok(coords)
}

// ---------------------------------------------------------------------------
// Relay strategies
// ---------------------------------------------------------------------------

/// A collective relay attack: per sender pair and announcement, the
/// probability of announcing it and the normalized state the relay keeps.
/// Probabilities are stored raw; [`verify_strategy`] is what checks them.
#[derive(Debug, Clone, PartialEq)]
pub struct EveStrategy {
    ancilla_dim: usize,
    gamma: BTreeMap<(u8, u8, u8), Vec<Complex64>>,
    probs: [[f64; 3]; 8],
}

impl EveStrategy {
    pub fn new(ancilla_dim: usize, probs: [[f64; 3]; 8]) -> Self {
        Self {
            ancilla_dim,
            gamma: BTreeMap::new(),
            probs,
        }
    }

    pub fn from_table(ancilla_dim: usize, table: &OutcomeTable) -> Self {
        Self::new(ancilla_dim, table.columns())
    }

    pub fn ancilla_dim(&self) -> usize {
        self.ancilla_dim
    }

    pub fn prob(&self, pair: SenderPair, z: u8) -> f64 {
        self.probs[pair.column_index()][z as usize]
    }

    pub fn set_prob(&mut self, pair: SenderPair, z: u8, p: f64) {
        self.probs[pair.column_index()][z as usize] = p;
    }

    /// The announcement table this strategy produces, validated.
    pub fn table(&self) -> Result<OutcomeTable, crate::tables::TableError> {
        OutcomeTable::from_columns(self.probs)
    }

    pub fn set_gamma(
        &mut self,
        pair: SenderPair,
        z: u8,
        state: Vec<Complex64>,
    ) -> Result<(), AttackError> {
        if state.len() != self.ancilla_dim {
            return Err(AttackError::DimensionMismatch {
                expected: self.ancilla_dim,
                got: state.len(),
            });
        }
        self.gamma.insert((pair.x(), pair.y(), z), state);
        Ok(())
    }

    pub fn gamma(&self, pair: SenderPair, z: u8) -> Option<&[Complex64]> {
        self.gamma
            .get(&(pair.x(), pair.y(), z))
            .map(|v| v.as_slice())
    }

    /// Mutable access for perturbation experiments.
    pub fn gamma_mut(&mut self, pair: SenderPair, z: u8) -> Option<&mut Vec<Complex64>> {
        self.gamma.get_mut(&(pair.x(), pair.y(), z))
    }

    /// ⟨Γ(pair_i, z)|Γ(pair_j, z)⟩ weighted by √(p_i(z)·p_j(z)), summed over
    /// z — the inner product of the post-attack joint states.
    fn output_overlap(&self, i: SenderPair, j: SenderPair) -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        for z in 0u8..3 {
            let pi = self.prob(i, z);
            let pj = self.prob(j, z);
            if pi <= 0.0 || pj <= 0.0 {
                continue;
            }
            if let (Some(gi), Some(gj)) = (self.gamma(i, z), self.gamma(j, z)) {
                let dot: Complex64 = gi.iter().zip(gj.iter()).map(|(x, y)| x.conj() * y).sum();
                sum += (pi * pj).sqrt() * dot;
            }
        }
        sum
    }
}

/// One checker finding.
#[derive(Debug, Clone, PartialEq)]
pub enum StrategyViolation {
    /// A kept state with nonzero announcement probability is missing.
    MissingGamma { x: u8, y: u8, z: u8 },
    /// A kept state is not unit norm.
    GammaNorm { x: u8, y: u8, z: u8, norm_sq: f64 },
    /// Announcement probabilities for a pair do not sum to 1.
    ProbabilitySum { x: u8, y: u8, sum: f64 },
    /// ⟨in_i|in_j⟩ differs from the output overlap: no unitary extension.
    Preservation {
        i: (u8, u8),
        j: (u8, u8),
        expected: Complex64,
        got: Complex64,
    },
    /// Announced probability differs from the target table.
    TableMismatch { x: u8, y: u8, z: u8, expected: f64, got: f64 },
}

impl core::fmt::Display for StrategyViolation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            StrategyViolation::MissingGamma { x, y, z } => {
                write!(f, "missing kept state for (x={x},y={y},z={z})")
            }
            StrategyViolation::GammaNorm { x, y, z, norm_sq } => {
                write!(f, "kept state (x={x},y={y},z={z}) has squared norm {norm_sq}")
            }
            StrategyViolation::ProbabilitySum { x, y, sum } => {
                write!(f, "announcement probabilities for ({x},{y}) sum to {sum}")
            }
            StrategyViolation::Preservation { i, j, expected, got } => write!(
                f,
                "inner product for ({},{})x({},{}): input {expected}, output {got}",
                i.0, i.1, j.0, j.1
            ),
            StrategyViolation::TableMismatch { x, y, z, expected, got } => {
                write!(f, "p({z}|{x},{y}) = {got}, target {expected}")
            }
        }
    }
}

/// Checker outcome; empty violations iff the strategy is a valid collective
/// attack consistent with the inputs (and the target table, when given).
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyReport {
    pub violations: Vec<StrategyViolation>,
}

impl StrategyReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn describe(&self) -> String {
        if self.is_clean() {
            return String::from("clean");
        }
        let mut out = String::new();
        for v in &self.violations {
            out += &format!("{v}\n");
        }
        out
    }
}

/// The eight same-basis joint input states for a pair of independent qubit
/// sources.
pub fn product_inputs(a: &EncodingSet, b: &EncodingSet) -> Vec<(SenderPair, Vec<Complex64>)> {
    SenderPair::ALL
        .iter()
        .map(|&pair| {
            let joint = tensor(a.state(pair.x() as usize), b.state(pair.y() as usize));
            (pair, joint.amps().to_vec())
        })
        .collect()
}

/// Checks a strategy against a set of joint input states: unit kept states,
/// probability normalization, inner-product preservation on all input
/// pairs, and (optionally) agreement with a target announcement table.
pub fn verify_strategy(
    s: &EveStrategy,
    inputs: &[(SenderPair, Vec<Complex64>)],
    target: Option<&OutcomeTable>,
) -> StrategyReport {
    let mut violations = Vec::new();
    for &(pair, _) in inputs {
        let (x, y) = (pair.x(), pair.y());
        let mut sum = 0.0;
        for z in 0u8..3 {
            let p = s.prob(pair, z);
            sum += p;
            if p > 0.0 {
                match s.gamma(pair, z) {
                    None => violations.push(StrategyViolation::MissingGamma { x, y, z }),
                    Some(g) => {
                        let norm_sq: f64 = g.iter().map(|c| c.norm_sqr()).sum();
                        if (norm_sq - 1.0).abs() > ATTACK_TOL {
                            violations.push(StrategyViolation::GammaNorm { x, y, z, norm_sq });
                        }
                    }
                }
            }
        }
        if (sum - 1.0).abs() > ATTACK_TOL {
            violations.push(StrategyViolation::ProbabilitySum { x, y, sum });
        }
        if let Some(t) = target {
            for z in 0u8..3 {
                let expected = t.p_idx(z as usize, x, y);
                let got = s.prob(pair, z);
                if (expected - got).abs() > ATTACK_TOL {
                    violations.push(StrategyViolation::TableMismatch { x, y, z, expected, got });
                }
            }
        }
    }
    for (ii, (pi, vi)) in inputs.iter().enumerate() {
        for (pj, vj) in inputs.iter().skip(ii) {
            let expected: Complex64 = vi.iter().zip(vj.iter()).map(|(x, y)| x.conj() * y).sum();
            let got = s.output_overlap(*pi, *pj);
            if (expected - got).norm() > ATTACK_TOL {
                violations.push(StrategyViolation::Preservation {
                    i: (pi.x(), pi.y()),
                    j: (pj.x(), pj.y()),
                    expected,
                    got,
                });
            }
        }
    }
    StrategyReport { violations }
}

/// Born probability of projecting onto a Bell state, computed through the
/// unnormalized ±1 pattern so that dyadic input amplitudes (all ideal-BB84
/// joint states) give exact dyadic probabilities.
fn bell_prob(label: BellLabel, state: &TwoQubitState) -> f64 {
    let a = state.amps();
    let amp = match label {
        BellLabel::PhiPlus => a[0] + a[3],
        BellLabel::PhiMinus => a[0] - a[3],
        BellLabel::PsiPlus => a[1] + a[2],
        BellLabel::PsiMinus => a[1] - a[2],
    };
    amp.norm_sqr() / 2.0
}

/// The honest lossless relay as a collective strategy: project each joint
/// input onto the two announced Bell states; the kept state is the
/// collapsed photon pair (ancilla dimension 4).
pub fn honest_bsm_strategy(a: &EncodingSet, b: &EncodingSet) -> EveStrategy {
    let phi = bell_vector(BellLabel::PhiPlus);
    let psi = bell_vector(BellLabel::PsiPlus);
    let mut cols = [[0.0; 3]; 8];
    let mut gammas: Vec<(SenderPair, u8, Vec<Complex64>)> = Vec::new();
    for pair in SenderPair::ALL {
        let joint = tensor(a.state(pair.x() as usize), b.state(pair.y() as usize));
        let c1 = phi.dot(&joint);
        let c2 = psi.dot(&joint);
        let mut residual = *joint.amps();
        for (amp, (p, q)) in residual
            .iter_mut()
            .zip(phi.amps().iter().zip(psi.amps().iter()))
        {
            *amp -= c1 * p + c2 * q;
        }
        let p1 = bell_prob(BellLabel::PhiPlus, &joint);
        let p2 = bell_prob(BellLabel::PsiPlus, &joint);
        let mut p0 = 1.0 - p1 - p2;
        if p0 < 1e-12 {
            p0 = 0.0;
        }
        cols[pair.column_index()] = [p0, p1, p2];
        // The kept state is the collapsed (phase-carrying) projection.
        if p1 > 0.0 {
            let phase = c1 / c1.norm();
            gammas.push((pair, 1, phi.amps().iter().map(|a| a * phase).collect()));
        }
        if p2 > 0.0 {
            let phase = c2 / c2.norm();
            gammas.push((pair, 2, psi.amps().iter().map(|a| a * phase).collect()));
        }
        let res_norm_sq: f64 = residual.iter().map(|c| c.norm_sqr()).sum();
        if p0 > 0.0 && res_norm_sq > 1e-20 {
            let norm = res_norm_sq.sqrt();
            gammas.push((pair, 0, residual.iter().map(|c| c / norm).collect()));
        }
    }
    let mut strategy = EveStrategy::new(4, cols);
    for (pair, z, g) in gammas {
        strategy.set_gamma(pair, z, g).expect("dimension 4");
    }
    strategy
}

// ---------------------------------------------------------------------------
// Single-Bell-state insecurity
// ---------------------------------------------------------------------------

/// Folds the second announcement into failure: the statistics visible when
/// the relay identifies only one Bell state.
pub fn single_bell_merge(t: &OutcomeTable) -> OutcomeTable {
    let mut cols = t.columns();
    for col in &mut cols {
        col[0] += col[2];
        col[2] = 0.0;
    }
    OutcomeTable::from_columns(cols).expect("merge preserves column sums")
}

/// The single-Bell-state insecurity scenario: both senders emit one of two
/// orthogonal states regardless of basis, the relay operator measures them
/// outright, and the announced statistics reproduce the honest BB84 ones.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalSourceScenario {
    pub alice: EncodingSet,
    pub bob: EncodingSet,
    /// Announcement table of the dishonest relay (z = 2 never announced).
    pub observed: OutcomeTable,
}

impl OrthogonalSourceScenario {
    /// Probability that a projective measurement on one emitted qubit
    /// identifies the sender's key bit (Helstrom bound; 1 for orthogonal
    /// source states).
    pub fn eve_bit_recovery_prob(&self) -> f64 {
        let overlap = self
            .alice
            .state(0)
            .overlap_mag(self.alice.state(1));
        0.5 * (1.0 + (1.0 - overlap * overlap).sqrt())
    }
}

pub fn orthogonal_source_scenario() -> OrthogonalSourceScenario {
    let degenerate = EncodingSet::new([
        QubitState::ket0(),
        QubitState::ket1(),
        QubitState::ket0(),
        QubitState::ket1(),
    ]);
    let mut cols = [[0.0; 3]; 8];
    for pair in SenderPair::ALL {
        let joint = tensor(
            degenerate.state(pair.x() as usize),
            degenerate.state(pair.y() as usize),
        );
        // The relay operator measures both qubits, then announces z = 1
        // with the Born probability of the single identified Bell state.
        let p1 = bell_prob(BellLabel::PhiPlus, &joint);
        cols[pair.column_index()] = [1.0 - p1, p1, 0.0];
    }
    OrthogonalSourceScenario {
        alice: degenerate,
        bob: degenerate,
        observed: OutcomeTable::from_columns(cols).expect("valid scenario table"),
    }
}

/// Degenerate-source mimicry for a relay announcing two Bell states: both
/// senders emit |0⟩/|1⟩ regardless of basis, with an optional swap of the
/// basis-1 assignments per sender. Returns the mimicking table and the
/// swap flags when some assignment reproduces the honest ideal-BB84 table
/// for the announced pair on every same-basis column; `None` when no
/// assignment works (which is what makes an announced pair usable).
pub fn orthogonal_mimic_table(
    z1: BellLabel,
    z2: BellLabel,
) -> Option<(OutcomeTable, bool, bool)> {
    let honest = honest_pair_table(z1, z2);
    for swap_a in [false, true] {
        for swap_b in [false, true] {
            let assign = |setting: u8, swap: bool| -> QubitState {
                let bit = setting % 2 == 1;
                let bit = if setting >= 2 && swap { !bit } else { bit };
                if bit {
                    QubitState::ket1()
                } else {
                    QubitState::ket0()
                }
            };
            let mut cols = [[0.0; 3]; 8];
            for pair in SenderPair::ALL {
                let joint = tensor(&assign(pair.x(), swap_a), &assign(pair.y(), swap_b));
                let p1 = bell_prob(z1, &joint);
                let p2 = bell_prob(z2, &joint);
                cols[pair.column_index()] = [1.0 - p1 - p2, p1, p2];
            }
            let mimic = OutcomeTable::from_columns(cols).expect("valid mimic table");
            if mimic.max_abs_diff(&honest) <= 1e-12 {
                return Some((mimic, swap_a, swap_b));
            }
        }
    }
    None
}

/// The honest lossless table when the relay announces the Bell pair
/// (z=1 ↦ `z1`, z=2 ↦ `z2`) and both senders use ideal BB84 states.
pub fn honest_pair_table(z1: BellLabel, z2: BellLabel) -> OutcomeTable {
    let enc = EncodingSet::ideal_bb84();
    let mut cols = [[0.0; 3]; 8];
    for pair in SenderPair::ALL {
        let joint = tensor(enc.state(pair.x() as usize), enc.state(pair.y() as usize));
        let p1 = bell_prob(z1, &joint);
        let p2 = bell_prob(z2, &joint);
        cols[pair.column_index()] = [1.0 - p1 - p2, p1, p2];
    }
    OutcomeTable::from_columns(cols).expect("valid honest table")
}

// ---------------------------------------------------------------------------
// Four-dimensional joint-source counterexample
// ---------------------------------------------------------------------------

/// Joint (possibly entangled) source states for the same-basis setting
/// pairs, living in the four-dimensional relay input space.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSourceStates {
    states: BTreeMap<(u8, u8), TwoQubitState>,
}

impl JointSourceStates {
    pub fn state(&self, pair: SenderPair) -> &TwoQubitState {
        &self.states[&(pair.x(), pair.y())]
    }

    /// Checks every defining relation of the construction; returns one line
    /// per violation, empty when all hold within [`ATTACK_TOL`].
    pub fn verify_relations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let get = |x: u8, y: u8| self.states[&(x, y)];
        let ip = |a: &TwoQubitState, b: &TwoQubitState| a.dot(b);
        let mut check = |name: &str, got: Complex64, want: f64| {
            if (got - Complex64::new(want, 0.0)).norm() > ATTACK_TOL {
                out.push(format!("{name}: got {got}, want {want}"));
            }
        };
        check("<00|11>", ip(&get(0, 0), &get(1, 1)), 0.0);
        check("<00|01>", ip(&get(0, 0), &get(0, 1)), -0.5);
        check("<01|10>", ip(&get(0, 1), &get(1, 0)), 1.0);
        check("<22|33>", ip(&get(2, 2), &get(3, 3)), 1.0);
        check("<23|32>", ip(&get(2, 3), &get(3, 2)), 1.0);
        for (x, y) in [(0, 0), (1, 1), (0, 1), (2, 2)] {
            check(
                &format!("<23|{x}{y}>"),
                ip(&get(2, 3), &get(x, y)),
                0.0,
            );
        }
        // φ22 = φ00 + φ01 componentwise (exactly normalized since the
        // overlap is −1/2).
        let sum: Vec<Complex64> = get(0, 0)
            .amps()
            .iter()
            .zip(get(0, 1).amps().iter())
            .map(|(a, b)| a + b)
            .collect();
        let diff: f64 = sum
            .iter()
            .zip(get(2, 2).amps().iter())
            .map(|(s, t)| (s - t).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if diff > ATTACK_TOL {
            out.push(format!("phi22 != phi00 + phi01 (residual {diff})"));
        }
        out
    }
}

/// Joint input vectors for the checker.
pub fn joint_inputs(j: &JointSourceStates) -> Vec<(SenderPair, Vec<Complex64>)> {
    SenderPair::ALL
        .iter()
        .map(|&pair| (pair, j.state(pair).amps().to_vec()))
        .collect()
}

/// The four-dimensional joint-source counterexample: explicit coordinates
/// for the source states (via Gram completion of the prescribed inner
/// products) and the relay strategy whose announced table equals the honest
/// two-Bell table while ⟨Γ001|Γ111⟩ = 0 leaks every basis-0 key bit.
pub fn four_dim_counterexample() -> Result<(JointSourceStates, EveStrategy), AttackError> {
    // Distinct states in order: φ00, φ01(=φ10), φ11, φ22(=φ33), φ23(=φ32).
    // Prescribed inner products: ⟨φ00|φ01⟩ = −1/2, ⟨φ00|φ11⟩ = 0,
    // φ22 = φ00 + φ01 (rows follow by linearity), φ23 orthogonal to all.
    // ⟨φ01|φ11⟩ is free; 0 keeps the core rank 3.
    let g01: f64 = -0.5;
    let g0_22 = 1.0 + g01;
    let g1_22 = g01 + 1.0;
    let gram: [[f64; 5]; 5] = [
        [1.0, g01, 0.0, g0_22, 0.0],
        [g01, 1.0, 0.0, g1_22, 0.0],
        [0.0, 0.0, 1.0, 0.0, 0.0],
        [g0_22, g1_22, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 1.0],
    ];
    let coords = gram_embed(gram, 4)?;
    let as_state = |row: &[f64]| {
        let mut amps = [Complex64::new(0.0, 0.0); 4];
        for (a, &x) in amps.iter_mut().zip(row.iter()) {
            *a = Complex64::new(x, 0.0);
        }
        TwoQubitState::new(amps).expect("gram rows are unit vectors")
    };
    let phi00 = as_state(&coords[0]);
    let phi01 = as_state(&coords[1]);
    let phi11 = as_state(&coords[2]);
    let phi22 = as_state(&coords[3]);
    let phi23 = as_state(&coords[4]);
    let mut states = BTreeMap::new();
    states.insert((0, 0), phi00);
    states.insert((0, 1), phi01);
    states.insert((1, 0), phi01);
    states.insert((1, 1), phi11);
    states.insert((2, 2), phi22);
    states.insert((3, 3), phi22);
    states.insert((2, 3), phi23);
    states.insert((3, 2), phi23);
    let joint = JointSourceStates { states };

    // Relay states in an 8-dimensional ancilla space; e(k) is the k-th
    // basis vector. The only relations that matter: Γ000 = −Γ010,
    // Γ001 ⊥ Γ111, Γ110 ⊥ Γ000, Γ230 orthogonal to the other failure
    // states, and the (2,2) images following by linearity.
    let dim = 8usize;
    let e = |k: usize| {
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[k] = Complex64::new(1.0, 0.0);
        v
    };
    let neg = |v: Vec<Complex64>| v.into_iter().map(|c| -c).collect::<Vec<_>>();
    let mut strategy = EveStrategy::from_table(dim, &ideal_bb84_table());
    let pair = |x: u8, y: u8| SenderPair::new(x, y).expect("same basis");
    strategy.set_gamma(pair(0, 0), 0, e(2))?;
    strategy.set_gamma(pair(0, 0), 1, e(0))?;
    strategy.set_gamma(pair(0, 1), 0, neg(e(2)))?;
    strategy.set_gamma(pair(0, 1), 2, e(3))?;
    strategy.set_gamma(pair(1, 0), 0, neg(e(2)))?;
    strategy.set_gamma(pair(1, 0), 2, e(3))?;
    strategy.set_gamma(pair(1, 1), 0, e(4))?;
    strategy.set_gamma(pair(1, 1), 1, e(1))?;
    strategy.set_gamma(pair(2, 2), 1, e(0))?;
    strategy.set_gamma(pair(2, 2), 2, e(3))?;
    strategy.set_gamma(pair(3, 3), 1, e(0))?;
    strategy.set_gamma(pair(3, 3), 2, e(3))?;
    strategy.set_gamma(pair(2, 3), 0, e(5))?;
    strategy.set_gamma(pair(3, 2), 0, e(5))?;
    Ok((joint, strategy))
}

/// |⟨Γ001|Γ111⟩| for a strategy — 0 means the relay operator can read every
/// basis-0 key bit from the kept states of z = 1 rounds.
pub fn key_leak_overlap(s: &EveStrategy) -> Option<f64> {
    let g001 = s.gamma(SenderPair::new(0, 0).unwrap(), 1)?;
    let g111 = s.gamma(SenderPair::new(1, 1).unwrap(), 1)?;
    let dot: Complex64 = g001.iter().zip(g111.iter()).map(|(x, y)| x.conj() * y).sum();
    Some(dot.norm())
}
