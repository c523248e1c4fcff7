//! Conditional announcement-probability tables p(z|x,y).
//!
//! A table holds, for each same-basis sender pair (x,y), the probability of
//! each relay announcement z: 0 = failure, 1 = projection onto (|00⟩+|11⟩)/√2,
//! 2 = projection onto (|01⟩+|10⟩)/√2. Cross-basis pairs are discarded at
//! basis sift and never appear. These tables are the sole input to the
//! security bound.

use alloc::string::String;
use alloc::vec::Vec;

use alloc::format;

/// Relay announcement for one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Announcement {
    /// No conclusive Bell measurement.
    Failure,
    /// Projection onto (|00⟩+|11⟩)/√2.
    PhiPlus,
    /// Projection onto (|01⟩+|10⟩)/√2.
    PsiPlus,
}

impl Announcement {
    pub const ALL: [Announcement; 3] = [
        Announcement::Failure,
        Announcement::PhiPlus,
        Announcement::PsiPlus,
    ];

    pub fn index(self) -> usize {
        match self {
            Announcement::Failure => 0,
            Announcement::PhiPlus => 1,
            Announcement::PsiPlus => 2,
        }
    }

    pub fn from_index(z: usize) -> Option<Self> {
        Self::ALL.get(z).copied()
    }
}

/// A same-basis sender setting pair. Settings 0,1 are basis 0 and 2,3 are
/// basis 1; x and y must fall in the same basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SenderPair {
    x: u8,
    y: u8,
}

/// Errors from table construction and validation.
#[derive(Debug, Clone, PartialEq)]
pub enum TableError {
    /// x or y outside 0..=3, or the two settings are in different bases.
    InvalidPair { x: u8, y: u8 },
    /// `from_counts` saw a sender pair with no events at all.
    ZeroTotal { pair: SenderPair },
    /// Construction produced an invalid table; the report lists violations.
    Invalid(Vec<TableViolation>),
}

impl core::fmt::Display for TableError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            TableError::InvalidPair { x, y } => write!(f, "invalid sender pair ({x},{y})"),
            TableError::ZeroTotal { pair } => {
                write!(f, "no counts for sender pair ({},{})", pair.x(), pair.y())
            }
            TableError::Invalid(violations) => {
                write!(f, "invalid table: ")?;
                for v in violations {
                    write!(f, "[{v}] ")?;
                }
                Ok(())
            }
        }
    }
}

impl core::error::Error for TableError {}

impl SenderPair {
    pub fn new(x: u8, y: u8) -> Result<Self, TableError> {
        if x > 3 || y > 3 || (x < 2) != (y < 2) {
            return Err(TableError::InvalidPair { x, y });
        }
        Ok(Self { x, y })
    }

    pub fn x(self) -> u8 {
        self.x
    }

    pub fn y(self) -> u8 {
        self.y
    }

    /// The eight same-basis pairs in canonical column order.
    pub const ALL: [SenderPair; 8] = [
        SenderPair { x: 0, y: 0 },
        SenderPair { x: 0, y: 1 },
        SenderPair { x: 1, y: 0 },
        SenderPair { x: 1, y: 1 },
        SenderPair { x: 2, y: 2 },
        SenderPair { x: 2, y: 3 },
        SenderPair { x: 3, y: 2 },
        SenderPair { x: 3, y: 3 },
    ];

    /// Column position of this pair in [`SenderPair::ALL`] order.
    pub fn column_index(self) -> usize {
        match (self.x, self.y) {
            (0, 0) => 0,
            (0, 1) => 1,
            (1, 0) => 2,
            (1, 1) => 3,
            (2, 2) => 4,
            (2, 3) => 5,
            (3, 2) => 6,
            (3, 3) => 7,
            _ => unreachable!("constructor enforces same-basis pairs"),
        }
    }
}

/// One violated table invariant, with the offending entry.
#[derive(Debug, Clone, PartialEq)]
pub enum TableViolation {
    /// Σ_z p(z|x,y) differs from 1 beyond tolerance.
    ColumnSum { pair: SenderPair, sum: f64 },
    /// An entry outside \[0,1\].
    Range { pair: SenderPair, z: usize, value: f64 },
    /// An entry is NaN or infinite.
    NonFinite { pair: SenderPair, z: usize },
}

impl core::fmt::Display for TableViolation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            TableViolation::ColumnSum { pair, sum } => write!(
                f,
                "column ({},{}) sums to {sum}, expected 1",
                pair.x(),
                pair.y()
            ),
            TableViolation::Range { pair, z, value } => write!(
                f,
                "p({z}|{},{}) = {value} outside [0,1]",
                pair.x(),
                pair.y()
            ),
            TableViolation::NonFinite { pair, z } => {
                write!(f, "p({z}|{},{}) is not finite", pair.x(), pair.y())
            }
        }
    }
}

/// Tolerance on per-pair probability sums.
pub const COLUMN_SUM_TOL: f64 = 1e-9;

/// Conditional announcement probabilities over the eight same-basis pairs.
/// Immutable after construction; constructors validate every invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeTable {
    // p[column][z]
    p: [[f64; 3]; 8],
}

impl OutcomeTable {
    /// Builds a table from per-pair probability triples `[p0, p1, p2]` in
    /// [`SenderPair::ALL`] column order, validating all invariants.
    pub fn from_columns(p: [[f64; 3]; 8]) -> Result<Self, TableError> {
        let t = Self { p };
        let report = t.validate();
        if report.is_empty() {
            Ok(t)
        } else {
            Err(TableError::Invalid(report))
        }
    }

    /// Checks every invariant; returns one entry per violation, empty iff
    /// the table is valid.
    pub fn validate(&self) -> Vec<TableViolation> {
        let mut report = Vec::new();
        for pair in SenderPair::ALL {
            let col = &self.p[pair.column_index()];
            for (z, &v) in col.iter().enumerate() {
                if !v.is_finite() {
                    report.push(TableViolation::NonFinite { pair, z });
                } else if !(0.0..=1.0).contains(&v) {
                    report.push(TableViolation::Range { pair, z, value: v });
                }
            }
            let sum: f64 = col.iter().sum();
            if sum.is_finite() && (sum - 1.0).abs() > COLUMN_SUM_TOL {
                report.push(TableViolation::ColumnSum { pair, sum });
            }
        }
        report
    }

    /// p(z|x,y).
    pub fn p(&self, z: Announcement, pair: SenderPair) -> f64 {
        self.p[pair.column_index()][z.index()]
    }

    /// p(z|x,y) by announcement index; panics if z > 2 or the pair is not a
    /// same-basis pair.
    pub fn p_idx(&self, z: usize, x: u8, y: u8) -> f64 {
        let pair = SenderPair::new(x, y).expect("same-basis pair");
        self.p[pair.column_index()][z]
    }

    /// The `[p0, p1, p2]` triple for one pair.
    pub fn column(&self, pair: SenderPair) -> [f64; 3] {
        self.p[pair.column_index()]
    }

    /// All eight columns in [`SenderPair::ALL`] order.
    pub fn columns(&self) -> [[f64; 3]; 8] {
        self.p
    }

    /// Entrywise maximum absolute difference to another table.
    pub fn max_abs_diff(&self, other: &OutcomeTable) -> f64 {
        let mut worst = 0.0f64;
        for c in 0..8 {
            for z in 0..3 {
                worst = worst.max((self.p[c][z] - other.p[c][z]).abs());
            }
        }
        worst
    }

    /// Entrywise convex mixture `(1−w)·self + w·other`.
    pub fn mix(&self, other: &OutcomeTable, w: f64) -> Result<OutcomeTable, TableError> {
        let mut p = [[0.0; 3]; 8];
        for c in 0..8 {
            for z in 0..3 {
                p[c][z] = (1.0 - w) * self.p[c][z] + w * other.p[c][z];
            }
        }
        OutcomeTable::from_columns(p)
    }

    /// The table where every pair announces uniformly over {0,1,2}.
    pub fn uniform_noise() -> OutcomeTable {
        OutcomeTable {
            p: [[1.0 / 3.0; 3]; 8],
        }
    }

    pub fn describe(&self) -> String {
        let mut out = String::new();
        for pair in SenderPair::ALL {
            let c = self.column(pair);
            out += &format!(
                "({},{}): [{:.6}, {:.6}, {:.6}]\n",
                pair.x(),
                pair.y(),
                c[0],
                c[1],
                c[2]
            );
        }
        out
    }
}

/// The announcement table of an ideal lossless relay fed perfect BB84 states:
/// per correlated basis-0 pair the conclusive rate is 1/2 (only one of the
/// two reachable Bell states is announced), while |++⟩-type pairs split their
/// full weight across both announcements.
pub fn ideal_bb84_table() -> OutcomeTable {
    OutcomeTable {
        p: [
            // (x,y)      [ p0,  p1,  p2 ]
            /* 0,0 */ [0.5, 0.5, 0.0],
            /* 0,1 */ [0.5, 0.0, 0.5],
            /* 1,0 */ [0.5, 0.0, 0.5],
            /* 1,1 */ [0.5, 0.5, 0.0],
            /* 2,2 */ [0.0, 0.5, 0.5],
            /* 2,3 */ [1.0, 0.0, 0.0],
            /* 3,2 */ [1.0, 0.0, 0.0],
            /* 3,3 */ [0.0, 0.5, 0.5],
        ],
    }
}

/// The announcement table produced by the four-dimensional joint-source
/// construction in [`crate::attacks`]. Numerically identical to
/// [`ideal_bb84_table`]; the equality is exactly what makes the joint source
/// undetectable from statistics.
pub fn joint_sender_table() -> OutcomeTable {
    ideal_bb84_table()
}

/// Estimates a table from event counts `counts[column][z]` in
/// [`SenderPair::ALL`] order. Every pair needs at least one event.
pub fn from_counts(counts: &[[u64; 3]; 8]) -> Result<OutcomeTable, TableError> {
    let mut p = [[0.0; 3]; 8];
    for pair in SenderPair::ALL {
        let col = pair.column_index();
        let total: u64 = counts[col].iter().sum();
        if total == 0 {
            return Err(TableError::ZeroTotal { pair });
        }
        for z in 0..3 {
            p[col][z] = counts[col][z] as f64 / total as f64;
        }
    }
    OutcomeTable::from_columns(p)
}
