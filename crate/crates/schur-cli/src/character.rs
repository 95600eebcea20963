//! Symmetric-group characters of two-row shapes and the block-trace demo.
//!
//! The character is computed by the Murnaghan-Nakayama recursion, which for
//! a two-row shape only ever removes three kinds of border strip: a run at
//! the end of the top row, a run at the end of the bottom row, or an
//! L-shaped strip spanning both rows (sign −1). This gives an exact
//! integer oracle that is independent of the spin machinery.
//!
//! The demo computes the trace of a permutation gate over one total-spin
//! block by dense simulation: summing diagonal coupled-basis matrix
//! elements over all paths at J and all M. Preparing the uniform
//! superposition over coupled labels, tagging the spin register, applying
//! the permutation and undoing the preparation makes the probability of
//! reading all zeros alongside J equal to (trace/2^n)².

use schur_core::circuit::PermutationGate;
use schur_core::error::{Error, Result};
use schur_core::spin::{enumerate_paths, path_count, DoubledSpin, YoungShape2};
use schur_core::state::{dense_schur_vector, SchurLabel};
use serde::Serialize;

/// Exact character of the two-row shape at the given cycle type.
pub fn mn_character(shape: YoungShape2, cycles: &[usize]) -> Result<i128> {
    let total: usize = cycles.iter().sum();
    if total != shape.boxes() || cycles.contains(&0) {
        return Err(Error::BadPartition);
    }
    Ok(mn(shape.row1, shape.row2, cycles))
}

fn mn(a: u32, b: u32, cycles: &[usize]) -> i128 {
    let Some((&first, rest)) = cycles.split_first() else {
        debug_assert!(a == 0 && b == 0);
        return 1;
    };
    let l = first as u32;
    let mut total = 0i128;
    // Horizontal strip at the end of the top row.
    if a >= l && a - l >= b {
        total += mn(a - l, b, rest);
    }
    // Horizontal strip at the end of the bottom row.
    if b >= l {
        total += mn(a, b - l, rest);
    }
    // Strip spanning both rows: leaves (b − 1, a + 1 − l), height one.
    if b >= 1 && l + b >= a + 2 && l <= a + 1 {
        total -= mn(b - 1, a + 1 - l, rest);
    }
    total
}

#[derive(Clone, Debug, Serialize)]
pub struct CharacterDemo {
    pub n: usize,
    pub perm: Vec<usize>,
    pub twice_j: u32,
    pub cycle_type: Vec<usize>,
    /// Trace of the permutation gate over the full J eigenspace
    /// (irrep character times the 2J+1 azimuthal multiplicity).
    pub block_trace: f64,
    /// Probability of the all-zeros readout with spin register J:
    /// (block_trace)²/4^n.
    pub p_zero: f64,
    /// Independent integer character of the (n/2+J, n/2−J) shape.
    pub character: i128,
    pub multiplicity: u32,
    /// Whether |block_trace| equals multiplicity·|character| to 1e−6.
    pub trace_matches_character: bool,
}

/// Dense block-trace computation plus the character cross-check.
pub fn character_demo(
    n: usize,
    perm: &PermutationGate,
    spin: DoubledSpin,
) -> Result<CharacterDemo> {
    if perm.wires() != n {
        return Err(Error::LengthMismatch { want: n, got: perm.wires() });
    }
    // Reuse the dense-oracle guard: the demo builds 2^n vectors.
    let dim = 1usize << n;
    let _ = path_count(n, spin)?; // validates parity
    let forward: Vec<u32> = (0..dim)
        .map(|x| {
            perm.apply(&schur_core::bits::BitString::from_index(x as u128, n))
                .expect("wire count checked")
                .index() as u32
        })
        .collect();
    let mut trace = 0.0f64;
    for path in enumerate_paths(n)? {
        if path.endpoint() != spin {
            continue;
        }
        for twice_m in spin.azimuthal_values() {
            let v = dense_schur_vector(&SchurLabel::new(path, twice_m)?)?.amps;
            let mut diag = 0.0;
            for (x, &vx) in v.iter().enumerate() {
                if vx != 0.0 {
                    diag += v[forward[x] as usize] * vx;
                }
            }
            trace += diag;
        }
    }
    let cycle_type = perm.cycle_type();
    let shape = YoungShape2::from_endpoint(n, spin)?;
    let character = mn_character(shape, &cycle_type)?;
    let multiplicity = spin.multiplicity();
    let expected = multiplicity as i128 * character.abs();
    let trace_matches_character = (trace.abs() - expected as f64).abs() < 1e-6;
    let amp = trace / dim as f64;
    Ok(CharacterDemo {
        n,
        perm: perm.one_line(),
        twice_j: spin.0,
        cycle_type,
        block_trace: trace,
        p_zero: amp * amp,
        character,
        multiplicity,
        trace_matches_character,
    })
}

/// All partitions of n (cycle types), largest part first within each.
pub fn cycle_types(n: usize) -> Vec<Vec<usize>> {
    fn extend(remaining: usize, cap: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if remaining == 0 {
            out.push(prefix.clone());
            return;
        }
        for part in (1..=cap.min(remaining)).rev() {
            prefix.push(part);
            extend(remaining - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    extend(n, n, &mut Vec::new(), &mut out);
    out
}

/// A permutation with the given cycle type, built from consecutive blocks.
pub fn permutation_of_type(cycles: &[usize]) -> PermutationGate {
    let n: usize = cycles.iter().sum();
    let mut one_line: Vec<usize> = (1..=n).collect();
    let mut base = 0;
    for &len in cycles {
        for i in 0..len {
            one_line[base + i] = base + (i + 1) % len + 1;
        }
        base += len;
    }
    PermutationGate::from_one_line(&one_line).expect("cycle blocks form a bijection")
}
