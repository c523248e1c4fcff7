//! Dense complex-vector math for qubit and two-qubit states.
//!
//! Dimensions are fixed at 2 and 4; this is not a general simulator. States
//! are stored as given and never re-phased: every comparison that matters
//! goes through the magnitude of an inner product, so global phases are
//! irrelevant throughout.

use alloc::format;
use alloc::string::String;

use num_complex::Complex64;
// Float supplies f64 math under no_std. In test builds dev-dependency
// feature unification links std, whose inherent methods shadow the trait
// and leave this import "unused".
#[allow(unused_imports)]
use num_traits::Float;

/// Complex amplitude of a basis component. Dimensionless.
pub type ComplexAmp = Complex64;

/// Tolerance for normalization and orthogonality checks. All quantities in
/// this crate are O(1), so double precision leaves plenty of headroom.
pub const NORM_TOL: f64 = 1e-12;

/// Errors from state construction and vector operations.
#[derive(Debug, Clone, PartialEq)]
pub enum QstateError {
    /// Inner product of vectors with different dimensions.
    DimensionMismatch { left: usize, right: usize },
    /// Squared norm differs from 1 by more than [`NORM_TOL`].
    NotNormalized { norm_sq: f64 },
    /// An amplitude is NaN or infinite.
    NonFinite,
}

impl core::fmt::Display for QstateError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            QstateError::DimensionMismatch { left, right } => {
                write!(f, "dimension mismatch: {left} vs {right}")
            }
            QstateError::NotNormalized { norm_sq } => {
                write!(f, "state not normalized: squared norm {norm_sq}")
            }
            QstateError::NonFinite => write!(f, "non-finite amplitude"),
        }
    }
}

impl core::error::Error for QstateError {}

fn check_amps(amps: &[Complex64]) -> Result<(), QstateError> {
    if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
        return Err(QstateError::NonFinite);
    }
    let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if (norm_sq - 1.0).abs() > NORM_TOL {
        return Err(QstateError::NotNormalized { norm_sq });
    }
    Ok(())
}

/// A normalized single-qubit state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    amps: [Complex64; 2],
}

impl QubitState {
    /// Builds a state from its two amplitudes, enforcing unit norm.
    pub fn new(amps: [Complex64; 2]) -> Result<Self, QstateError> {
        check_amps(&amps)?;
        Ok(Self { amps })
    }

    /// Builds a state from real amplitudes, normalizing them.
    pub fn from_reals(a0: f64, a1: f64) -> Result<Self, QstateError> {
        let norm = (a0 * a0 + a1 * a1).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(QstateError::NonFinite);
        }
        Self::new([
            Complex64::new(a0 / norm, 0.0),
            Complex64::new(a1 / norm, 0.0),
        ])
    }

    pub fn ket0() -> Self {
        Self {
            amps: [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        }
    }

    pub fn ket1() -> Self {
        Self {
            amps: [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        }
    }

    /// (|0⟩ + |1⟩)/√2
    pub fn plus() -> Self {
        Self::from_reals(1.0, 1.0).expect("constant state")
    }

    /// (|0⟩ − |1⟩)/√2
    pub fn minus() -> Self {
        Self::from_reals(1.0, -1.0).expect("constant state")
    }

    pub fn amps(&self) -> &[Complex64; 2] {
        &self.amps
    }

    /// ⟨self|other⟩, conjugate-linear in `self`.
    pub fn dot(&self, other: &QubitState) -> Complex64 {
        dot_slices(&self.amps, &other.amps)
    }

    /// |⟨self|other⟩| — the phase-free overlap used for all state comparisons.
    pub fn overlap_mag(&self, other: &QubitState) -> f64 {
        self.dot(other).norm()
    }
}

/// A normalized two-qubit state over the ordered basis (|00⟩,|01⟩,|10⟩,|11⟩).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitState {
    amps: [Complex64; 4],
}

impl TwoQubitState {
    pub fn new(amps: [Complex64; 4]) -> Result<Self, QstateError> {
        check_amps(&amps)?;
        Ok(Self { amps })
    }

    pub fn amps(&self) -> &[Complex64; 4] {
        &self.amps
    }

    /// ⟨self|other⟩, conjugate-linear in `self`.
    pub fn dot(&self, other: &TwoQubitState) -> Complex64 {
        dot_slices(&self.amps, &other.amps)
    }

    pub fn overlap_mag(&self, other: &TwoQubitState) -> f64 {
        self.dot(other).norm()
    }
}

fn dot_slices(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| x.conj() * y)
        .sum()
}

/// ⟨a|b⟩ for arbitrary same-length amplitude vectors, conjugate-linear in
/// the first argument.
pub fn inner_product(a: &[Complex64], b: &[Complex64]) -> Result<Complex64, QstateError> {
    if a.len() != b.len() {
        return Err(QstateError::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(dot_slices(a, b))
}

/// |a⟩ ⊗ |b⟩ over the ordered two-qubit basis: `amps[2i + j] = a[i] · b[j]`.
pub fn tensor(a: &QubitState, b: &QubitState) -> TwoQubitState {
    let mut amps = [Complex64::new(0.0, 0.0); 4];
    for i in 0..2 {
        for j in 0..2 {
            amps[2 * i + j] = a.amps[i] * b.amps[j];
        }
    }
    TwoQubitState { amps }
}

/// Labels for the four maximally entangled Bell states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BellLabel {
    /// (|00⟩ + |11⟩)/√2
    PhiPlus,
    /// (|01⟩ + |10⟩)/√2
    PsiPlus,
    /// (|00⟩ − |11⟩)/√2
    PhiMinus,
    /// (|01⟩ − |10⟩)/√2
    PsiMinus,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [
        BellLabel::PhiPlus,
        BellLabel::PsiPlus,
        BellLabel::PhiMinus,
        BellLabel::PsiMinus,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BellLabel::PhiPlus => "phi+",
            BellLabel::PsiPlus => "psi+",
            BellLabel::PhiMinus => "phi-",
            BellLabel::PsiMinus => "psi-",
        }
    }
}

/// The Bell state for a label. The four outputs form an orthonormal set.
pub fn bell_vector(label: BellLabel) -> TwoQubitState {
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let amps = match label {
        BellLabel::PhiPlus => [h, 0.0, 0.0, h],
        BellLabel::PsiPlus => [0.0, h, h, 0.0],
        BellLabel::PhiMinus => [h, 0.0, 0.0, -h],
        BellLabel::PsiMinus => [0.0, h, -h, 0.0],
    };
    TwoQubitState {
        amps: amps.map(|x| Complex64::new(x, 0.0)),
    }
}

/// A sender's four encoding states, indexed by setting x ∈ {0,1,2,3}.
/// Settings 0 and 1 belong to basis 0, settings 2 and 3 to basis 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncodingSet {
    states: [QubitState; 4],
}

impl EncodingSet {
    pub fn new(states: [QubitState; 4]) -> Self {
        Self { states }
    }

    /// The ideal BB84 set: |0⟩, |1⟩, |+⟩, |−⟩.
    pub fn ideal_bb84() -> Self {
        Self {
            states: [
                QubitState::ket0(),
                QubitState::ket1(),
                QubitState::plus(),
                QubitState::minus(),
            ],
        }
    }

    pub fn state(&self, x: usize) -> &QubitState {
        &self.states[x]
    }

    pub fn states(&self) -> &[QubitState; 4] {
        &self.states
    }

    pub fn describe(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.states.iter().enumerate() {
            let a = s.amps();
            out += &format!(
                "x={i}: [{:+.4}{:+.4}i, {:+.4}{:+.4}i] ",
                a[0].re, a[0].im, a[1].re, a[1].im
            );
        }
        out
    }
}

/// Whether the ideal-BB84 joint state |φ_x⟩⊗|φ′_y⟩ has nonzero overlap with
/// the given Bell state (threshold 1e-12).
pub fn bell_overlap_nonzero(x: usize, y: usize, label: BellLabel) -> bool {
    let enc = EncodingSet::ideal_bb84();
    let joint = tensor(enc.state(x), enc.state(y));
    bell_vector(label).overlap_mag(&joint) > 1e-12
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn inner_product_basis_cases() {
        let k0 = QubitState::ket0();
        let k1 = QubitState::ket1();
        let plus = QubitState::plus();
        assert_eq!(k0.dot(&k0), c(1.0, 0.0));
        assert_eq!(k0.dot(&k1), c(0.0, 0.0));
        assert!((plus.dot(&k0).re - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn inner_product_conjugate_linear_in_first_argument() {
        let a = [c(0.6, 0.3), c(0.2, -0.1)];
        let b = [c(0.1, 0.9), c(-0.4, 0.2)];
        let ab = inner_product(&a, &b).unwrap();
        let ba = inner_product(&b, &a).unwrap();
        assert!((ab - ba.conj()).norm() < 1e-15);
    }

    #[test]
    fn inner_product_dimension_mismatch() {
        let a = [c(1.0, 0.0)];
        let b = [c(1.0, 0.0), c(0.0, 0.0)];
        assert_eq!(
            inner_product(&a, &b),
            Err(QstateError::DimensionMismatch { left: 1, right: 2 })
        );
    }

    #[test]
    fn tensor_product_cases() {
        let t = tensor(&QubitState::ket0(), &QubitState::ket1());
        assert_eq!(t.amps()[1], c(1.0, 0.0));
        assert_eq!(t.amps()[0], c(0.0, 0.0));

        let pp = tensor(&QubitState::plus(), &QubitState::plus());
        for a in pp.amps() {
            assert!((a.re - 0.5).abs() < 1e-15 && a.im == 0.0);
        }

        let oneminus = tensor(&QubitState::ket1(), &QubitState::minus());
        let h = core::f64::consts::FRAC_1_SQRT_2;
        assert!((oneminus.amps()[2].re - h).abs() < 1e-15);
        assert!((oneminus.amps()[3].re + h).abs() < 1e-15);
        assert_eq!(oneminus.amps()[0], c(0.0, 0.0));
    }

    #[test]
    fn bell_vectors_orthonormal() {
        for (i, a) in BellLabel::ALL.iter().enumerate() {
            for (j, b) in BellLabel::ALL.iter().enumerate() {
                let ip = bell_vector(*a).dot(&bell_vector(*b)).norm();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (ip - expect).abs() < NORM_TOL,
                    "⟨{:?}|{:?}⟩ = {}",
                    a,
                    b,
                    ip
                );
            }
        }
    }

    #[test]
    fn bell_vector_components() {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let phi = bell_vector(BellLabel::PhiPlus);
        assert_eq!(phi.amps()[0].re, h);
        assert_eq!(phi.amps()[3].re, h);
        let psi = bell_vector(BellLabel::PsiPlus);
        assert_eq!(psi.amps()[1].re, h);
        assert_eq!(psi.amps()[2].re, h);
    }

    #[test]
    fn not_normalized_rejected() {
        let r = QubitState::new([c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(r, Err(QstateError::NotNormalized { .. })));
        let r = QubitState::new([c(f64::NAN, 0.0), c(0.0, 0.0)]);
        assert_eq!(r, Err(QstateError::NonFinite));
    }

    /// The relay-compatibility grid for the ideal BB84 joint states: rows are
    /// same-basis setting pairs, columns are the four Bell states in the order
    /// (|00+11⟩, |01−10⟩, |01+10⟩, |00−11⟩). `true` means nonzero overlap.
    #[rustfmt::skip]
    pub(crate) const EXPECTED_OVERLAP_GRID: [((usize, usize), [bool; 4]); 8] = [
        ((0, 0), [true,  false, false, true ]),
        ((1, 1), [true,  false, false, true ]),
        ((0, 1), [false, true,  true,  false]),
        ((1, 0), [false, true,  true,  false]),
        ((2, 2), [true,  false, true,  false]),
        ((3, 3), [true,  false, true,  false]),
        ((2, 3), [false, true,  false, true ]),
        ((3, 2), [false, true,  false, true ]),
    ];

    pub(crate) const GRID_COLUMNS: [BellLabel; 4] = [
        BellLabel::PhiPlus,
        BellLabel::PsiMinus,
        BellLabel::PsiPlus,
        BellLabel::PhiMinus,
    ];

    #[test]
    fn overlap_grid_matches_expected() {
        for ((x, y), row) in EXPECTED_OVERLAP_GRID {
            for (col, expect) in GRID_COLUMNS.iter().zip(row) {
                assert_eq!(
                    bell_overlap_nonzero(x, y, *col),
                    expect,
                    "pair ({x},{y}), bell {:?}",
                    col
                );
            }
        }
    }

    fn arb_amps<const N: usize>() -> impl Strategy<Value = [Complex64; N]> {
        prop::collection::vec(-1.0f64..1.0, 2 * N).prop_filter_map("nonzero", |v| {
            let mut amps = [Complex64::new(0.0, 0.0); N];
            let mut norm_sq = 0.0;
            for i in 0..N {
                amps[i] = Complex64::new(v[2 * i], v[2 * i + 1]);
                norm_sq += amps[i].norm_sqr();
            }
            if norm_sq < 1e-6 {
                return None;
            }
            let norm = norm_sq.sqrt();
            for a in &mut amps {
                *a /= norm;
            }
            Some(amps)
        })
    }

    proptest! {
        #[test]
        fn cauchy_schwarz(a in arb_amps::<4>(), b in arb_amps::<4>()) {
            let ab = inner_product(&a, &b).unwrap().norm_sqr();
            let aa = inner_product(&a, &a).unwrap().re;
            let bb = inner_product(&b, &b).unwrap().re;
            prop_assert!(ab <= aa * bb + 1e-12);
        }

        #[test]
        fn tensor_preserves_norm(a in arb_amps::<2>(), b in arb_amps::<2>()) {
            let qa = QubitState::new(a).unwrap();
            let qb = QubitState::new(b).unwrap();
            let t = tensor(&qa, &qb);
            let norm_sq: f64 = t.amps().iter().map(|x| x.norm_sqr()).sum();
            prop_assert!((norm_sq - 1.0).abs() < NORM_TOL);
        }
    }
}
