//! Classical simulation of SU(2) Schur sampling circuits.
//!
//! An n-qubit Schur sampling circuit measures `W |J, M⟩` in the sequentially
//! coupled spin basis, where `W` is a classical reversible circuit and
//! `|J, M⟩` is labeled by a path `J` on the angular-momentum branching
//! diagram plus an azimuthal number `M`. This crate provides:
//!
//! - [`spin`] — branching-diagram paths, Yamanouchi symbols, two-row Young
//!   tableaux, exact dimension counting, and uniform `(J, M)` samplers;
//! - [`cg`] — exact Clebsch-Gordan coefficients for coupling with spin 1/2;
//! - [`state`] — coupled-basis states with exact amplitude evaluation,
//!   exact sampling, and a dense change-of-basis oracle;
//! - [`circuit`] — reversible X/CNOT/Toffoli circuits, permutation gates,
//!   and states prepared by running a circuit on a basis state;
//! - [`estimate`] — Monte Carlo (ε, δ)-approximation of overlaps between
//!   tractable states and of branching-prefix marginals;
//! - [`heavy`] — the threshold search that finds every path whose output
//!   probability exceeds θ by walking the branching diagram level by level;
//! - [`sparse`] — approximate sampling of near-sparse output distributions
//!   with a total-variation guarantee;
//! - [`dense`] — dense spin-operator applications used by verification
//!   oracles.
//!
//! All spins are stored doubled (2j, 2m) so half-integers stay exact, and
//! every randomized routine is a deterministic function of its `u64` seed.

pub mod bits;
pub mod cg;
pub mod circuit;
pub mod dense;
pub mod error;
pub mod estimate;
pub mod heavy;
pub mod seed;
pub mod sparse;
pub mod spin;
pub mod state;

pub use bits::BitString;
pub use error::{Error, Result};
pub use spin::{DoubledAzimuthal, DoubledSpin, SpinPath};
pub use state::SchurLabel;
