//! Experiment harness behind the `schur` binary: sparsity scans of
//! permutation-gate outputs and symmetric-group character cross-checks.

pub mod character;
pub mod experiments;
