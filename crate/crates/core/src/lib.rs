//! Security-bound engine for measurement-device-independent QKD with
//! uncharacterized qubit sources (QMDIQKD).
//!
//! The relay between the two senders is untrusted and announces one of three
//! messages per round: failure, or a projection onto one of two Bell states.
//! Everything the senders can certify about their own devices is that each
//! emits a fixed two-dimensional (qubit) state per setting. From the observed
//! conditional announcement statistics alone, this crate computes a provable
//! upper bound on the phase-error rate and hence a lower bound on the secret
//! key rate.
//!
//! Modules:
//!
//! - [`qstate`] — dense complex-vector math for qubit / two-qubit states and
//!   Bell projections.
//! - [`tables`] — the conditional announcement tables `p(z|x,y)` that are the
//!   sole input to the bound.
//! - [`channel`] — fiber-loss / detector-efficiency / dark-count model that
//!   generates tables, in closed form and via an independent Monte-Carlo
//!   event oracle.
//! - [`bound`] — the constrained grid search for the phase-error bound and
//!   the key rate, plus a randomized adversary-strategy soundness oracle.
//! - [`attacks`] — constructions that certify the protocol's insecurity
//!   counterexamples (single-Bell-state relays, four-dimensional joint
//!   sources).
//!
//! The crate is `no_std` (with `alloc`); IO, serialization formats, and the
//! command-line front end live in the companion `qmdiqkd-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod attacks;
pub mod bound;
pub mod channel;
pub mod qstate;
pub mod tables;

pub use channel::DetectorParams;
pub use qstate::{BellLabel, EncodingSet, QubitState, TwoQubitState};
pub use tables::{Announcement, OutcomeTable, SenderPair, TableError};
