//! The security-bound engine.
//!
//! Input: one announcement table p(z|x,y). Output: an upper bound on the
//! phase-error rate of the basis-0 key and the resulting secret-key rate,
//! valid for *any* pair of qubit sources consistent with the table.
//!
//! The source freedom is parametrized by four nonnegative expansion
//! coefficients (c30, c31) and (cp20, cp21) that write each sender's
//! basis-1 states in terms of its basis-0 states, together with the real
//! parts r, rp of the basis-0 state overlaps. Normalization pins
//!
//! ```text
//! c30² + c31² + 2·c30·c31·r = 1,      |r|  ≤ χ,
//! cp20² + cp21² + 2·cp20·cp21·rp = 1, |rp| ≤ χ′,
//! ```
//!
//! where χ, χ′ are overlap bounds computed from the table alone. Over the
//! feasible set, two rational objectives are maximized on a refined grid;
//! the smaller of the two maxima is the adversary envelope ε that feeds the
//! phase-error bound. A coarse grid can only under-cover a maximum, so the
//! reported ε is additionally padded by a configurable safety factor before
//! it enters the rate.
//!
//! [`adversary_sampling`] is the independent soundness oracle: it builds
//! explicit finite-dimensional adversary strategies consistent with the
//! constraints and checks that none of them beats ε.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
// Float supplies f64 math under no_std. In test builds dev-dependency
// feature unification links std, whose inherent methods shadow the trait
// and leave this import "unused".
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::tables::OutcomeTable;

/// Grid resolution and tolerances for the ε search.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundConfig {
    /// Steps for the two angle parameters (u, u′).
    pub grid_u: usize,
    /// Steps for the two overlap parameters (r, rp).
    pub grid_r: usize,
    /// Local refinement passes around each branch maximum; every pass
    /// shrinks the search window tenfold and reuses the full step counts.
    pub refine_rounds: usize,
    /// Minimum admissible squared denominator for a branch objective.
    pub denom_floor: f64,
    /// Slack allowed when testing the feasibility constraints.
    pub feas_tol: f64,
    /// Safety padding applied to ε before it enters the phase-error bound:
    /// ε_safe = ε·(1 + grid_pad). Compensates the anti-conservative
    /// direction of grid under-coverage.
    pub grid_pad: f64,
}

impl Default for BoundConfig {
    fn default() -> Self {
        Self {
            grid_u: 181,
            grid_r: 41,
            refine_rounds: 2,
            denom_floor: 1e-12,
            feas_tol: 1e-9,
            grid_pad: 0.05,
        }
    }
}

impl BoundConfig {
    pub fn validate(&self) -> Result<(), BoundError> {
        if self.grid_u < 2 || self.grid_r < 1 {
            return Err(BoundError::InvalidConfig("grid too small"));
        }
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.denom_floor) || !positive(self.feas_tol) {
            return Err(BoundError::InvalidConfig("tolerances must be positive"));
        }
        if !self.grid_pad.is_finite() || self.grid_pad <= -1.0 {
            return Err(BoundError::InvalidConfig("pad must exceed -1"));
        }
        Ok(())
    }
}

/// One candidate source decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffPoint {
    pub c30: f64,
    pub c31: f64,
    pub cp20: f64,
    pub cp21: f64,
    /// Re(e^{iθ}⟨φ0|φ1⟩) for the first sender; |r| ≤ χ.
    pub r: f64,
    /// Re(⟨φ′0|φ′1⟩) for the second sender; |rp| ≤ χ′.
    pub rp: f64,
}

impl CoeffPoint {
    /// Residuals of the two normalization identities (zero when satisfied).
    pub fn normalization_residuals(&self) -> (f64, f64) {
        let n1 = self.c30 * self.c30 + self.c31 * self.c31 + 2.0 * self.c30 * self.c31 * self.r;
        let n2 =
            self.cp20 * self.cp20 + self.cp21 * self.cp21 + 2.0 * self.cp20 * self.cp21 * self.rp;
        ((n1 - 1.0).abs(), (n2 - 1.0).abs())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundError {
    /// No grid point satisfies the constraints: the observed table is
    /// inconsistent with every qubit-source model at this resolution.
    InfeasibleStatistics,
    /// No conclusive basis-0 announcements; error rates are undefined.
    ZeroGain,
    /// Argument outside the entropy domain \[0,1\].
    EntropyDomain(f64),
    InvalidConfig(&'static str),
}

impl core::fmt::Display for BoundError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            BoundError::InfeasibleStatistics => {
                write!(f, "statistics admit no qubit-source model at this grid resolution")
            }
            BoundError::ZeroGain => write!(f, "no conclusive basis-0 announcements"),
            BoundError::EntropyDomain(x) => write!(f, "entropy argument {x} outside [0,1]"),
            BoundError::InvalidConfig(msg) => write!(f, "invalid bound config: {msg}"),
        }
    }
}

impl core::error::Error for BoundError {}

/// Full output of the bound pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundResult {
    /// Overlap bound for the first sender's basis-0 states.
    pub chi: f64,
    /// Overlap bound for the second sender's basis-0 states.
    pub chi_p: f64,
    /// Bit error rate of the basis-0 key.
    pub e_b: f64,
    /// Raw adversary envelope from the grid search (∞ when no branch has an
    /// admissible denominator).
    pub epsilon: f64,
    /// ε·(1 + grid_pad); the value that enters the phase-error bound.
    pub epsilon_safe: f64,
    /// Upper bound on the phase error rate, clamped to \[0, 1/2\].
    pub e_p: f64,
    /// Secret-key rate per sifted basis-0 bit, clamped to [0, 1].
    pub rate: f64,
    /// The statistics admit a source with both coefficient products at
    /// zero; the phase error is then unbounded and the key rate is zero.
    pub degenerate: bool,
    /// The grid point attaining ε.
    pub argmax: CoeffPoint,
}

/// Square roots of the table entries the bound consumes.
struct Roots {
    s100: f64,
    s111: f64,
    s101: f64,
    s110: f64,
    s132: f64,
    s232: f64,
    s200: f64,
    s211: f64,
    s201: f64,
    s210: f64,
}

impl Roots {
    fn new(t: &OutcomeTable) -> Self {
        Self {
            s100: t.p_idx(1, 0, 0).sqrt(),
            s111: t.p_idx(1, 1, 1).sqrt(),
            s101: t.p_idx(1, 0, 1).sqrt(),
            s110: t.p_idx(1, 1, 0).sqrt(),
            s132: t.p_idx(1, 3, 2).sqrt(),
            s232: t.p_idx(2, 3, 2).sqrt(),
            s200: t.p_idx(2, 0, 0).sqrt(),
            s211: t.p_idx(2, 1, 1).sqrt(),
            s201: t.p_idx(2, 0, 1).sqrt(),
            s210: t.p_idx(2, 1, 0).sqrt(),
        }
    }
}

/// Upper bounds (χ, χ′) on |Re(e^{iθ}⟨φ0|φ1⟩)| and |Re(⟨φ′0|φ′1⟩)|,
/// each capped at 1.
pub fn chi_bounds(t: &OutcomeTable) -> (f64, f64) {
    let term = |za: f64, zb: f64| (za * zb).sqrt();
    let chi = term(t.p_idx(0, 1, 0), t.p_idx(0, 0, 0))
        + term(t.p_idx(1, 1, 0), t.p_idx(1, 0, 0))
        + term(t.p_idx(2, 1, 0), t.p_idx(2, 0, 0));
    let chi_p = term(t.p_idx(0, 0, 1), t.p_idx(0, 0, 0))
        + term(t.p_idx(1, 0, 1), t.p_idx(1, 0, 0))
        + term(t.p_idx(2, 0, 1), t.p_idx(2, 0, 0));
    (chi.min(1.0), chi_p.min(1.0))
}

/// ξ = (√p(1|3,2) + c30·cp21·√p(1|0,1) + c31·cp20·√p(1|1,0))².
pub fn xi_of(t: &OutcomeTable, c: &CoeffPoint) -> f64 {
    let root = t.p_idx(1, 3, 2).sqrt()
        + c.c30 * c.cp21 * t.p_idx(1, 0, 1).sqrt()
        + c.c31 * c.cp20 * t.p_idx(1, 1, 0).sqrt();
    root * root
}

/// ζ = (√p(2|3,2) + c30·cp20·√p(2|0,0) + c31·cp21·√p(2|1,1))².
pub fn zeta_of(t: &OutcomeTable, c: &CoeffPoint) -> f64 {
    let root = t.p_idx(2, 3, 2).sqrt()
        + c.c30 * c.cp20 * t.p_idx(2, 0, 0).sqrt()
        + c.c31 * c.cp21 * t.p_idx(2, 1, 1).sqrt();
    root * root
}

/// Whether a coefficient point is consistent with the table: overlaps within
/// their χ bounds, both normalization identities within `feas_tol`, and the
/// two difference constraints below their ξ/ζ envelopes.
pub fn feasible(t: &OutcomeTable, c: &CoeffPoint, cfg: &BoundConfig) -> bool {
    let (chi, chi_p) = chi_bounds(t);
    if c.r.abs() > chi + cfg.feas_tol || c.rp.abs() > chi_p + cfg.feas_tol {
        return false;
    }
    let (n1, n2) = c.normalization_residuals();
    if n1 > cfg.feas_tol || n2 > cfg.feas_tol {
        return false;
    }
    let diff1 = c.c30 * c.cp20 * t.p_idx(1, 0, 0).sqrt() - c.c31 * c.cp21 * t.p_idx(1, 1, 1).sqrt();
    if diff1 * diff1 > xi_of(t, c) + cfg.feas_tol {
        return false;
    }
    let diff2 = c.c30 * c.cp21 * t.p_idx(2, 0, 1).sqrt() - c.c31 * c.cp20 * t.p_idx(2, 1, 0).sqrt();
    diff2 * diff2 <= zeta_of(t, c) + cfg.feas_tol
}

/// Outcome of the ε grid search.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonOutcome {
    pub epsilon: f64,
    pub argmax: CoeffPoint,
    pub degenerate: bool,
    /// max of (√ξ + |c30·cp20 − c31·cp21|·√p(1|1,1))² / (c30·cp20)².
    pub branch1: f64,
    /// max of (√ξ + |c30·cp20 − c31·cp21|·√p(1|0,0))² / (c31·cp21)².
    pub branch2: f64,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    if n == 1 || (hi - lo).abs() < 1e-15 {
        return vec![0.5 * (lo + hi)];
    }
    let step = (hi - lo) / (n - 1) as f64;
    let mut v: Vec<f64> = (0..n).map(|i| lo + i as f64 * step).collect();
    v[n - 1] = hi;
    v
}

/// One normalized (cos·s, sin·s) coefficient pair for a grid node.
#[derive(Debug, Clone, Copy)]
struct SidePoint {
    c1: f64,
    c2: f64,
    r: f64,
}

/// Grid of coefficient pairs for u in [u_lo, u_hi], r in [r_lo, r_hi],
/// ordered u-major then r, skipping unnormalizable blow-ups.
fn side_points(u_lo: f64, u_hi: f64, r_lo: f64, r_hi: f64, nu: usize, nr: usize) -> Vec<SidePoint> {
    let mut pts = Vec::with_capacity(nu * nr);
    for u in linspace(u_lo, u_hi, nu) {
        let (sin_u, cos_u) = u.sin_cos();
        let two_cs = 2.0 * sin_u * cos_u;
        for r in linspace(r_lo, r_hi, nr) {
            // s² = 1/(1 + 2·r·cos·sin); skip near-singular combinations.
            let denom = 1.0 + r * two_cs;
            if denom <= 1e-9 {
                continue;
            }
            let s = denom.sqrt().recip();
            pts.push(SidePoint {
                c1: s * cos_u,
                c2: s * sin_u,
                r,
            });
        }
    }
    pts
}

#[derive(Debug, Clone, Copy)]
struct BranchMax {
    value: f64,
    point: CoeffPoint,
}

struct ScanState {
    any_feasible: bool,
    degenerate_witness: bool,
    best1: Option<BranchMax>,
    best2: Option<BranchMax>,
}

/// Evaluates every (a-side × b-side) combination in lexicographic grid
/// order; strict-greater updates keep the earliest maximizer, which makes
/// the argmax independent of any parallel evaluation strategy.
fn scan(
    roots: &Roots,
    a_pts: &[SidePoint],
    b_pts: &[SidePoint],
    cfg: &BoundConfig,
    track1: bool,
    track2: bool,
    state: &mut ScanState,
) {
    let tol = cfg.feas_tol;
    let floor = cfg.denom_floor;
    for pa in a_pts {
        for pb in b_pts {
            let a = pa.c1 * pb.c1;
            let b = pa.c2 * pb.c2;
            let c = pa.c1 * pb.c2;
            let d = pa.c2 * pb.c1;
            let xi_root = roots.s132 + c * roots.s101 + d * roots.s110;
            let diff1 = a * roots.s100 - b * roots.s111;
            if diff1 * diff1 > xi_root * xi_root + tol {
                continue;
            }
            let zeta_root = roots.s232 + a * roots.s200 + b * roots.s211;
            let diff2 = c * roots.s201 - d * roots.s210;
            if diff2 * diff2 > zeta_root * zeta_root + tol {
                continue;
            }
            state.any_feasible = true;
            let aa = a * a;
            let bb = b * b;
            if aa < floor && bb < floor {
                state.degenerate_witness = true;
            }
            let gap = (a - b).abs();
            if track1 && aa >= floor {
                let num = xi_root + gap * roots.s111;
                let val = num * num / aa;
                if state.best1.is_none_or(|m| val > m.value) {
                    state.best1 = Some(BranchMax {
                        value: val,
                        point: CoeffPoint {
                            c30: pa.c1,
                            c31: pa.c2,
                            cp20: pb.c1,
                            cp21: pb.c2,
                            r: pa.r,
                            rp: pb.r,
                        },
                    });
                }
            }
            if track2 && bb >= floor {
                let num = xi_root + gap * roots.s100;
                let val = num * num / bb;
                if state.best2.is_none_or(|m| val > m.value) {
                    state.best2 = Some(BranchMax {
                        value: val,
                        point: CoeffPoint {
                            c30: pa.c1,
                            c31: pa.c2,
                            cp20: pb.c1,
                            cp21: pb.c2,
                            r: pa.r,
                            rp: pb.r,
                        },
                    });
                }
            }
        }
    }
}

const REFINE_SHRINK: f64 = 0.1;

fn refine_branch(
    roots: &Roots,
    cfg: &BoundConfig,
    chi: f64,
    chi_p: f64,
    branch: usize,
    state: &mut ScanState,
) {
    for round in 1..=cfg.refine_rounds {
        let best = if branch == 1 { state.best1 } else { state.best2 };
        let Some(m) = best else { return };
        let p = m.point;
        let width_u = core::f64::consts::FRAC_PI_2 * REFINE_SHRINK.powi(round as i32);
        let u_a = p.c31.atan2(p.c30);
        let u_b = p.cp21.atan2(p.cp20);
        let a_pts = side_points(
            (u_a - 0.5 * width_u).max(0.0),
            (u_a + 0.5 * width_u).min(core::f64::consts::FRAC_PI_2),
            (p.r - chi * REFINE_SHRINK.powi(round as i32)).max(-chi),
            (p.r + chi * REFINE_SHRINK.powi(round as i32)).min(chi),
            cfg.grid_u,
            cfg.grid_r,
        );
        let b_pts = side_points(
            (u_b - 0.5 * width_u).max(0.0),
            (u_b + 0.5 * width_u).min(core::f64::consts::FRAC_PI_2),
            (p.rp - chi_p * REFINE_SHRINK.powi(round as i32)).max(-chi_p),
            (p.rp + chi_p * REFINE_SHRINK.powi(round as i32)).min(chi_p),
            cfg.grid_u,
            cfg.grid_r,
        );
        scan(roots, &a_pts, &b_pts, cfg, branch == 1, branch == 2, state);
    }
}

/// The adversary envelope ε: the smaller of the two branch maxima over the
/// feasible coefficient set, discretized on the configured grid with local
/// refinement around each branch maximum.
pub fn epsilon_search(t: &OutcomeTable, cfg: &BoundConfig) -> Result<EpsilonOutcome, BoundError> {
    cfg.validate()?;
    let (chi, chi_p) = chi_bounds(t);
    let roots = Roots::new(t);
    let a_pts = side_points(0.0, core::f64::consts::FRAC_PI_2, -chi, chi, cfg.grid_u, cfg.grid_r);
    let b_pts = side_points(
        0.0,
        core::f64::consts::FRAC_PI_2,
        -chi_p,
        chi_p,
        cfg.grid_u,
        cfg.grid_r,
    );
    let mut state = ScanState {
        any_feasible: false,
        degenerate_witness: false,
        best1: None,
        best2: None,
    };
    scan(&roots, &a_pts, &b_pts, cfg, true, true, &mut state);
    if !state.any_feasible {
        return Err(BoundError::InfeasibleStatistics);
    }
    refine_branch(&roots, cfg, chi, chi_p, 1, &mut state);
    refine_branch(&roots, cfg, chi, chi_p, 2, &mut state);

    let v1 = state.best1.map_or(f64::INFINITY, |m| m.value);
    let v2 = state.best2.map_or(f64::INFINITY, |m| m.value);
    let both_empty = state.best1.is_none() && state.best2.is_none();
    let (epsilon, argmax) = if v1 <= v2 {
        (
            v1,
            state
                .best1
                .or(state.best2)
                .map(|m| m.point)
                .unwrap_or(CoeffPoint {
                    c30: 0.0,
                    c31: 0.0,
                    cp20: 0.0,
                    cp21: 0.0,
                    r: 0.0,
                    rp: 0.0,
                }),
        )
    } else {
        (v2, state.best2.map(|m| m.point).expect("v2 finite"))
    };
    Ok(EpsilonOutcome {
        epsilon,
        argmax,
        degenerate: state.degenerate_witness || both_empty,
        branch1: v1,
        branch2: v2,
    })
}

/// Conclusive basis-0 announcement weight: p(1|0,0)+p(1|1,1)+p(1|0,1)+p(1|1,0).
fn basis0_gain(t: &OutcomeTable) -> f64 {
    t.p_idx(1, 0, 0) + t.p_idx(1, 1, 1) + t.p_idx(1, 0, 1) + t.p_idx(1, 1, 0)
}

/// Bit error rate of the basis-0 sifted key.
pub fn bit_error(t: &OutcomeTable) -> Result<f64, BoundError> {
    let gain = basis0_gain(t);
    if gain <= 0.0 {
        return Err(BoundError::ZeroGain);
    }
    Ok((t.p_idx(1, 0, 1) + t.p_idx(1, 1, 0)) / gain)
}

/// Shannon binary entropy in bits, with H(0) = H(1) = 0.
pub fn binary_entropy(x: f64) -> Result<f64, BoundError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(BoundError::EntropyDomain(x));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(0.0);
    }
    Ok(-x * x.log2() - (1.0 - x) * (1.0 - x).log2())
}

fn e_p_from_epsilon(t: &OutcomeTable, epsilon_safe: f64, degenerate: bool) -> Result<f64, BoundError> {
    if degenerate {
        return Ok(0.5);
    }
    let gain = basis0_gain(t);
    if gain <= 0.0 {
        return Err(BoundError::ZeroGain);
    }
    let cross = t.p_idx(1, 0, 1).sqrt() + t.p_idx(1, 1, 0).sqrt();
    Ok(((cross * cross + epsilon_safe) / (2.0 * gain)).min(0.5))
}

/// Upper bound on the phase error rate, clamped to \[0, 1/2\]. Runs the full
/// ε search with the configured safety pad.
pub fn phase_error_bound(t: &OutcomeTable, cfg: &BoundConfig) -> Result<f64, BoundError> {
    let out = epsilon_search(t, cfg)?;
    e_p_from_epsilon(t, out.epsilon * (1.0 + cfg.grid_pad), out.degenerate)
}

/// The full bound pipeline: χ bounds, bit error, ε search, phase-error
/// bound, and the secret-key rate R = 1 − H(e_b) − H(e_p) clamped to \[0,1\].
pub fn key_rate(t: &OutcomeTable, cfg: &BoundConfig) -> Result<BoundResult, BoundError> {
    let (chi, chi_p) = chi_bounds(t);
    let e_b = bit_error(t)?;
    let out = epsilon_search(t, cfg)?;
    let epsilon_safe = out.epsilon * (1.0 + cfg.grid_pad);
    let e_p = e_p_from_epsilon(t, epsilon_safe, out.degenerate)?;
    let rate = (1.0 - binary_entropy(e_b)? - binary_entropy(e_p)?).clamp(0.0, 1.0);
    Ok(BoundResult {
        chi,
        chi_p,
        e_b,
        epsilon: out.epsilon,
        epsilon_safe,
        e_p,
        rate,
        degenerate: out.degenerate,
        argmax: out.argmax,
    })
}

/// Key rate of the reference protocol with trusted, perfectly characterized
/// BB84 senders and a relay announcing a single Bell state. With a trusted
/// basis-independent source the phase error of the basis-0 key equals its
/// bit error, so R = 1 − 2·H(e_b), clamped at 0.
pub fn baseline_key_rate(t: &OutcomeTable) -> Result<f64, BoundError> {
    let e_b = bit_error(t)?;
    Ok((1.0 - 2.0 * binary_entropy(e_b)?).max(0.0))
}

// ---------------------------------------------------------------------------
// Randomized adversary-strategy soundness oracle
// ---------------------------------------------------------------------------

fn random_unit_vector<R: Rng>(rng: &mut R, dim: usize) -> Vec<Complex64> {
    loop {
        let mut v: Vec<Complex64> = (0..dim)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im)
            })
            .collect();
        let norm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if norm_sq > 1e-12 {
            let norm = norm_sq.sqrt();
            for z in &mut v {
                *z /= norm;
            }
            return v;
        }
    }
}

fn norm_sq(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// ‖a·s100·γ1 + b·s111·γ2‖²
fn constraint_norm_sq(a: f64, b: f64, roots: &Roots, g1: &[Complex64], g2: &[Complex64]) -> f64 {
    g1.iter()
        .zip(g2.iter())
        .map(|(x, y)| (a * roots.s100 * x + b * roots.s111 * y).norm_sqr())
        .sum()
}

/// ‖s100·γ1 + s111·γ2‖² — the phase-error numerator being bounded.
fn objective_norm_sq(roots: &Roots, g1: &[Complex64], g2: &[Complex64]) -> f64 {
    g1.iter()
        .zip(g2.iter())
        .map(|(x, y)| (roots.s100 * x + roots.s111 * y).norm_sqr())
        .sum()
}

/// Samples `n` explicit adversary strategies consistent with the observed
/// table and returns the largest phase-error numerator seen. Soundness of
/// the bound demands that this never exceed ε (plus tolerance).
///
/// Each strategy is a feasible coefficient point from the configured grid
/// (restricted to points where both branch denominators clear the floor,
/// so both branch bounds apply) together with unit vectors γ1, γ2 of
/// dimension at most 8 that satisfy the strategy-envelope constraint
/// ‖c30·cp20·√p(1|0,0)·γ1 + c31·cp21·√p(1|1,1)·γ2‖² ≤ ξ strictly. Half the
/// samples place the pair exactly on the constraint boundary (the worst
/// case along the aligned two-dimensional family); the rest interpolate
/// from the anti-aligned anchor toward a random direction, pushed to the
/// boundary by bisection. Returns 0 when n = 0 or no consistent strategy
/// was found.
pub fn adversary_sampling(
    t: &OutcomeTable,
    cfg: &BoundConfig,
    n: u64,
    seed: u64,
) -> Result<f64, BoundError> {
    cfg.validate()?;
    let (chi, chi_p) = chi_bounds(t);
    let roots = Roots::new(t);
    let a_pts = side_points(0.0, core::f64::consts::FRAC_PI_2, -chi, chi, cfg.grid_u, cfg.grid_r);
    let b_pts = side_points(
        0.0,
        core::f64::consts::FRAC_PI_2,
        -chi_p,
        chi_p,
        cfg.grid_u,
        cfg.grid_r,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0xadf);

    // Reservoir of feasible grid points with both denominators admissible;
    // each entry stores (a, b, √ξ) = (c30·cp20, c31·cp21, √ξ at the point).
    const RESERVOIR: usize = 2048;
    let mut pool: Vec<(f64, f64, f64)> = Vec::with_capacity(RESERVOIR);
    let mut seen = 0u64;
    let tol = cfg.feas_tol;
    for pa in &a_pts {
        for pb in &b_pts {
            let a = pa.c1 * pb.c1;
            let b = pa.c2 * pb.c2;
            let c = pa.c1 * pb.c2;
            let d = pa.c2 * pb.c1;
            let xi_root = roots.s132 + c * roots.s101 + d * roots.s110;
            let diff1 = a * roots.s100 - b * roots.s111;
            if diff1 * diff1 > xi_root * xi_root + tol {
                continue;
            }
            let zeta_root = roots.s232 + a * roots.s200 + b * roots.s211;
            let diff2 = c * roots.s201 - d * roots.s210;
            if diff2 * diff2 > zeta_root * zeta_root + tol {
                continue;
            }
            if a * a < cfg.denom_floor || b * b < cfg.denom_floor {
                continue;
            }
            seen += 1;
            if pool.len() < RESERVOIR {
                pool.push((a, b, xi_root));
            } else {
                let j = rng.gen_range(0..seen);
                if (j as usize) < RESERVOIR {
                    pool[j as usize] = (a, b, xi_root);
                }
            }
        }
    }
    if pool.is_empty() {
        return Err(BoundError::InfeasibleStatistics);
    }

    let p100 = roots.s100 * roots.s100;
    let p111 = roots.s111 * roots.s111;
    let cross = roots.s100 * roots.s111;
    let mut best = 0.0f64;
    for i in 0..n {
        let (a, b, xi_root) = pool[rng.gen_range(0..pool.len())];
        let xi = xi_root * xi_root;
        if i % 2 == 0 {
            // Boundary strategy: γ1 = e0, γ2 = w·e0 + √(1−w²)·e1 with the
            // overlap w pushed to the constraint boundary. The phase-error
            // numerator is then p100 + p111 + 2·w·√(p100·p111).
            let slack = xi - a * a * p100 - b * b * p111;
            let scale = 2.0 * a * b * cross;
            let w = if scale > 1e-300 {
                (slack / scale).min(1.0)
            } else if slack >= 0.0 {
                0.0
            } else {
                continue;
            };
            if w < -1.0 {
                continue;
            }
            // Guard against rounding pushing the point past the envelope.
            let constr = a * a * p100 + b * b * p111 + scale * w;
            if constr > xi * (1.0 + 1e-12) + 1e-300 {
                continue;
            }
            let objective = p100 + p111 + 2.0 * cross * w;
            best = best.max(objective);
        } else {
            // Random strategy: interpolate on the unit sphere from the
            // anti-aligned anchor toward a random direction, bisecting for
            // the largest interpolation weight that stays inside the
            // envelope.
            let dim = rng.gen_range(1..=8usize);
            let g1 = random_unit_vector(&mut rng, dim);
            let graw = random_unit_vector(&mut rng, dim);
            let anchor: Vec<Complex64> = g1.iter().map(|z| -z).collect();
            let blend = |lambda: f64| -> Option<Vec<Complex64>> {
                let mut v: Vec<Complex64> = anchor
                    .iter()
                    .zip(graw.iter())
                    .map(|(x, y)| (1.0 - lambda) * x + lambda * y)
                    .collect();
                let nrm = norm_sq(&v);
                if nrm < 1e-24 {
                    return None;
                }
                let nrm = nrm.sqrt();
                for z in &mut v {
                    *z /= nrm;
                }
                Some(v)
            };
            let within = |g2: &[Complex64]| constraint_norm_sq(a, b, &roots, &g1, g2) <= xi;
            let Some(g2_at_0) = blend(0.0) else { continue };
            if !within(&g2_at_0) {
                continue;
            }
            let mut lo = 0.0f64;
            if blend(1.0).is_some_and(|g| within(&g)) {
                lo = 1.0;
            } else {
                let mut hi = 1.0f64;
                for _ in 0..48 {
                    let mid = 0.5 * (lo + hi);
                    match blend(mid) {
                        Some(g) if within(&g) => lo = mid,
                        _ => hi = mid,
                    }
                }
            }
            if let Some(g2) = blend(lo) {
                if within(&g2) {
                    best = best.max(objective_norm_sq(&roots, &g1, &g2));
                }
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{closed_form_table, DetectorParams};
    use crate::tables::{ideal_bb84_table, OutcomeTable};

    fn coarse() -> BoundConfig {
        BoundConfig {
            grid_u: 61,
            grid_r: 21,
            refine_rounds: 1,
            ..Default::default()
        }
    }

    fn merged_orthogonal_table() -> OutcomeTable {
        // z=2 weight folded into z=0: the statistics of a relay announcing a
        // single Bell state.
        OutcomeTable::from_columns([
            [0.5, 0.5, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.5, 0.5, 0.0],
            [0.5, 0.5, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.5, 0.5, 0.0],
        ])
        .unwrap()
    }

    #[test]
    fn chi_bounds_on_ideal_table() {
        let (chi, chi_p) = chi_bounds(&ideal_bb84_table());
        assert_eq!(chi, 0.5);
        assert_eq!(chi_p, 0.5);
    }

    #[test]
    fn chi_cap_at_one() {
        let t = OutcomeTable::from_columns([[1.0, 0.0, 0.0]; 8]).unwrap();
        let (chi, chi_p) = chi_bounds(&t);
        assert_eq!(chi, 1.0);
        assert_eq!(chi_p, 1.0);
    }

    #[test]
    fn xi_zeta_vanish_on_ideal_table() {
        let t = ideal_bb84_table();
        for c in [
            CoeffPoint { c30: 0.3, c31: 0.7, cp20: 0.6, cp21: 0.4, r: 0.0, rp: 0.0 },
            CoeffPoint { c30: 1.0, c31: 0.0, cp20: 0.0, cp21: 1.0, r: 0.1, rp: -0.1 },
        ] {
            assert_eq!(xi_of(&t, &c), 0.0);
            assert_eq!(zeta_of(&t, &c), 0.0);
        }
    }

    #[test]
    fn xi_direct_arithmetic() {
        let mut cols = ideal_bb84_table().columns();
        cols[6] = [0.99, 0.01, 0.0]; // (3,2)
        cols[1] = [0.96, 0.04, 0.0]; // (0,1)
        cols[2] = [0.96, 0.04, 0.0]; // (1,0)
        let t = OutcomeTable::from_columns(cols).unwrap();
        let c = CoeffPoint { c30: 0.5, c31: 0.5, cp20: 0.5, cp21: 0.5, r: 1.0, rp: 1.0 };
        // (0.1 + 0.25·0.2 + 0.25·0.2)² = 0.04
        assert!((xi_of(&t, &c) - 0.04).abs() < 1e-15);
    }

    #[test]
    fn feasible_examples_on_ideal_table() {
        let t = ideal_bb84_table();
        let cfg = BoundConfig::default();
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let balanced = CoeffPoint { c30: h, c31: h, cp20: h, cp21: h, r: 0.0, rp: 0.0 };
        assert!(feasible(&t, &balanced, &cfg));
        let slanted = CoeffPoint { c30: 1.0, c31: 0.0, cp20: 1.0, cp21: 0.0, r: 0.0, rp: 0.0 };
        assert!(!feasible(&t, &slanted, &cfg));
        let denormalized = CoeffPoint { c30: 1.0, c31: 1.0, cp20: h, cp21: h, r: 0.0, rp: 0.0 };
        assert!(!feasible(&t, &denormalized, &cfg));
    }

    #[test]
    fn epsilon_vanishes_on_ideal_table() {
        let out = epsilon_search(&ideal_bb84_table(), &coarse()).unwrap();
        assert!(out.epsilon <= 1e-6, "epsilon = {}", out.epsilon);
        assert!(!out.degenerate);
        let p = out.argmax;
        assert!((p.c30 - p.c31).abs() <= 0.02, "argmax {:?}", p);
        assert!((p.cp20 - p.cp21).abs() <= 0.02, "argmax {:?}", p);
    }

    #[test]
    fn merged_single_bell_table_is_degenerate() {
        let out = epsilon_search(&merged_orthogonal_table(), &coarse()).unwrap();
        assert!(out.degenerate);
        let r = key_rate(&merged_orthogonal_table(), &coarse()).unwrap();
        assert_eq!(r.e_p, 0.5);
        assert_eq!(r.rate, 0.0);
    }

    /// Cross-check against two independent reference maximizations of the
    /// same objective (a vectorized grid replica and an SLSQP run, both
    /// landing on the constraint boundary at r = rp = +χ).
    #[test]
    fn epsilon_matches_independent_references() {
        let t = closed_form_table(&DetectorParams::new(70.0, 0.1, 1e-5).unwrap()).unwrap();
        let cfg = BoundConfig { grid_u: 121, grid_r: 31, refine_rounds: 2, ..Default::default() };
        let out = epsilon_search(&t, &cfg).unwrap();
        // SLSQP boundary value 2.3296e-5; grid replica 2.341e-5.
        assert!(
            (out.epsilon - 2.3296e-5).abs() / 2.3296e-5 < 0.02,
            "epsilon = {:.6e}",
            out.epsilon
        );
        assert!(!out.degenerate);
    }

    #[test]
    fn branches_agree_on_symmetric_tables() {
        let t = closed_form_table(&DetectorParams::new(25.0, 0.1, 1e-5).unwrap()).unwrap();
        let out = epsilon_search(&t, &coarse()).unwrap();
        let rel = (out.branch1 - out.branch2).abs() / out.branch1.max(1e-30);
        assert!(rel < 1e-6, "branch1 {:.6e} branch2 {:.6e}", out.branch1, out.branch2);
    }

    #[test]
    fn infeasible_at_trivial_resolution() {
        // Both corner families are blocked for this table, so a 2×1 grid has
        // no feasible point at all.
        let t = OutcomeTable::from_columns([
            [0.0, 1.0, 0.0],
            [0.5, 0.0, 0.5],
            [0.5, 0.0, 0.5],
            [0.5, 0.5, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
        ])
        .unwrap();
        let cfg = BoundConfig { grid_u: 2, grid_r: 1, refine_rounds: 0, ..Default::default() };
        assert_eq!(epsilon_search(&t, &cfg), Err(BoundError::InfeasibleStatistics));
    }

    #[test]
    fn bit_error_cases() {
        assert_eq!(bit_error(&ideal_bb84_table()).unwrap(), 0.0);
        let mut cols = ideal_bb84_table().columns();
        cols[0] = [0.75, 0.25, 0.0];
        cols[1] = [0.75, 0.25, 0.0];
        cols[2] = [0.75, 0.25, 0.0];
        cols[3] = [0.75, 0.25, 0.0];
        let quarter = OutcomeTable::from_columns(cols).unwrap();
        assert_eq!(bit_error(&quarter).unwrap(), 0.5);
        let dead = OutcomeTable::from_columns([[1.0, 0.0, 0.0]; 8]).unwrap();
        assert_eq!(bit_error(&dead), Err(BoundError::ZeroGain));
    }

    #[test]
    fn bit_error_on_lossy_channel() {
        let t = closed_form_table(&DetectorParams::new(50.0, 0.1, 1e-5).unwrap()).unwrap();
        let e = bit_error(&t).unwrap();
        assert!(e > 0.0 && e < 0.5);
        // pinned from direct evaluation of the closed-form expressions
        assert!((e - 3.932742245569689e-3).abs() < 1e-15, "e_b = {e:.15e}");
    }

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        // pinned from direct evaluation
        assert!((binary_entropy(0.11).unwrap() - 0.499915958164528).abs() < 1e-10);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.1).is_err());
    }

    #[test]
    fn key_rate_on_ideal_table() {
        let r = key_rate(&ideal_bb84_table(), &coarse()).unwrap();
        assert_eq!(r.e_b, 0.0);
        assert!(r.e_p <= 1e-6);
        assert!(r.rate >= 1.0 - 1e-4, "rate = {}", r.rate);
        assert!(!r.degenerate);
    }

    #[test]
    fn key_rate_positive_at_eleven_percent_errors() {
        // 1 − 2·H(0.11) — the entropy pipeline on symmetric error rates.
        let h = binary_entropy(0.11).unwrap();
        let r = 1.0 - 2.0 * h;
        assert!(r > 0.0);
        assert!((r - 1.680836709440081e-4).abs() < 1e-10);
    }

    #[test]
    fn perturbed_table_phase_error_dominated_by_cross_clicks() {
        let mut cols = ideal_bb84_table().columns();
        cols[1] = [0.495, 0.005, 0.5];
        cols[2] = [0.495, 0.005, 0.5];
        let t = OutcomeTable::from_columns(cols).unwrap();
        let e_p = phase_error_bound(&t, &coarse()).unwrap();
        let gain = 0.5 + 0.5 + 0.005 + 0.005;
        let lower = {
            let s = 0.005f64.sqrt();
            (s + s) * (s + s) / (2.0 * gain)
        };
        assert!(e_p >= lower, "e_p = {e_p}, lower = {lower}");
        assert!(e_p > 0.0 && e_p <= 0.5);
    }

    #[test]
    fn baseline_rate_cases() {
        assert_eq!(baseline_key_rate(&ideal_bb84_table()).unwrap(), 1.0);
        let t = closed_form_table(&DetectorParams::new(0.0, 1.0, 0.0).unwrap()).unwrap();
        assert_eq!(baseline_key_rate(&t).unwrap(), 1.0);
        let qr = key_rate(&t, &coarse()).unwrap();
        assert!((qr.rate - 1.0).abs() <= 1e-9);
        // with η = 0.1 at L = 0 the dark counts separate the two protocols
        let t = closed_form_table(&DetectorParams::new(0.0, 0.1, 1e-5).unwrap()).unwrap();
        let base = baseline_key_rate(&t).unwrap();
        let qmdi = key_rate(&t, &coarse()).unwrap().rate;
        assert!(base > qmdi + 1e-3, "base {base} vs qmdi {qmdi}");
    }

    #[test]
    fn refinement_never_decreases_epsilon() {
        let t = closed_form_table(&DetectorParams::new(40.0, 0.1, 1e-5).unwrap()).unwrap();
        let base = BoundConfig { grid_u: 61, grid_r: 21, refine_rounds: 0, ..Default::default() };
        let refined = BoundConfig { refine_rounds: 2, ..base.clone() };
        let e0 = epsilon_search(&t, &base).unwrap().epsilon;
        let e2 = epsilon_search(&t, &refined).unwrap().epsilon;
        assert!(e2 >= e0 - base.feas_tol, "e0 {e0} e2 {e2}");
    }

    #[test]
    fn finer_aligned_grid_dominates_coarser() {
        // 61 = 2·(31−1)+1 and 21 = 2·(11−1)+1, so the coarse lattice is an
        // exact subset of the fine one and the max can only grow.
        let coarse_cfg =
            BoundConfig { grid_u: 31, grid_r: 11, refine_rounds: 0, ..Default::default() };
        let fine_cfg =
            BoundConfig { grid_u: 61, grid_r: 21, refine_rounds: 0, ..Default::default() };
        let ideal = ideal_bb84_table();
        let noise = OutcomeTable::uniform_noise();
        for (i, w) in [0.03, 0.07, 0.12, 0.2, 0.35].iter().enumerate() {
            let t = ideal.mix(&noise, *w).unwrap();
            let ec = epsilon_search(&t, &coarse_cfg).unwrap().epsilon;
            let ef = epsilon_search(&t, &fine_cfg).unwrap().epsilon;
            assert!(ef >= ec - coarse_cfg.feas_tol, "table {i}: coarse {ec} fine {ef}");
        }
    }

    #[test]
    fn noise_mixtures_never_increase_rate() {
        let ideal = ideal_bb84_table();
        let noise = OutcomeTable::uniform_noise();
        let cfg = coarse();
        let r0 = key_rate(&ideal, &cfg).unwrap().rate;
        for w in [0.0, 0.05, 0.1] {
            let r = key_rate(&ideal.mix(&noise, w).unwrap(), &cfg).unwrap().rate;
            assert!(r <= r0 + 1e-9, "w={w}: rate {r} above {r0}");
        }
    }

    #[test]
    fn adversary_sampling_below_epsilon() {
        let cfg = coarse();
        for params in [
            DetectorParams::new(25.0, 0.1, 1e-5).unwrap(),
            DetectorParams::new(10.0, 0.1, 1e-5).unwrap(),
            DetectorParams::new(10.0, 0.5, 1e-4).unwrap(),
        ] {
            let t = closed_form_table(&params).unwrap();
            let out = epsilon_search(&t, &cfg).unwrap();
            let sampled = adversary_sampling(&t, &cfg, 2_000, 17).unwrap();
            assert!(
                sampled <= out.epsilon + cfg.feas_tol,
                "sampled {sampled} vs epsilon {}",
                out.epsilon
            );
            assert!(sampled > 0.0);
        }
    }

    #[test]
    fn adversary_sampling_collapses_on_ideal_table() {
        let cfg = coarse();
        let t = ideal_bb84_table();
        let out = epsilon_search(&t, &cfg).unwrap();
        let sampled = adversary_sampling(&t, &cfg, 500, 3).unwrap();
        assert!(sampled <= out.epsilon + cfg.feas_tol, "sampled {sampled}");
    }

    #[test]
    fn adversary_sampling_zero_samples() {
        let t = ideal_bb84_table();
        assert_eq!(adversary_sampling(&t, &coarse(), 0, 1).unwrap(), 0.0);
    }

    /// Full pipeline regression pin at the default grid for a lossy
    /// channel point; also exercises the rate being strictly inside (0,1).
    #[test]
    fn key_rate_pinned_at_50km() {
        let t = closed_form_table(&DetectorParams::new(50.0, 0.1, 1e-5).unwrap()).unwrap();
        let r = key_rate(&t, &BoundConfig::default()).unwrap();
        assert!(r.rate > 0.0 && r.rate < 1.0);
        assert!((r.rate - 0.184936).abs() < 1e-3, "rate = {:.6}", r.rate);
    }

    #[test]
    fn entropy_concave_on_random_pairs() {
        // H((x+y)/2) ≥ (H(x)+H(y))/2 on [0, 1/2]
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..1000 {
            let x: f64 = rng.gen_range(0.0..=0.5);
            let y: f64 = rng.gen_range(0.0..=0.5);
            let lhs = binary_entropy(0.5 * (x + y)).unwrap();
            let rhs = 0.5 * (binary_entropy(x).unwrap() + binary_entropy(y).unwrap());
            assert!(lhs >= rhs - 1e-12, "x={x} y={y}");
        }
    }
}
