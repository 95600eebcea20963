//! Dense spin-operator applications for verification oracles.
//!
//! These act on raw amplitude vectors indexed by computational bitstrings
//! (wire 0 = least significant bit, 0-bit = spin up). They exist to check
//! eigenvalue equations and projector identities at small qubit counts,
//! not to simulate anything at scale.

/// Applies the total-spin operator of the first `k` qubits:
/// S² = 3k/4 + (1/2) Σ_{a<b} (XX + YY + ZZ)_{ab}.
pub fn apply_total_spin_sq(amps: &[f64], n: usize, k: usize) -> Vec<f64> {
    assert!(k >= 1 && k <= n);
    assert_eq!(amps.len(), 1 << n);
    let mut out: Vec<f64> = amps.iter().map(|a| a * (3.0 * k as f64 / 4.0)).collect();
    for a in 0..k {
        for b in a + 1..k {
            for (x, &amp) in amps.iter().enumerate() {
                if amp == 0.0 {
                    continue;
                }
                let bit_a = (x >> a) & 1;
                let bit_b = (x >> b) & 1;
                if bit_a == bit_b {
                    out[x] += 0.5 * amp; // ZZ diagonal, aligned spins
                } else {
                    out[x] -= 0.5 * amp; // ZZ diagonal, opposite spins
                    out[x ^ (1 << a) ^ (1 << b)] += amp; // (XX + YY)/2 swap
                }
            }
        }
    }
    out
}

/// Applies the azimuthal operator Z = (1/2) Σ_k Z_k (doubled eigenvalue =
/// bitstring spin weight).
pub fn apply_azimuthal(amps: &[f64], n: usize) -> Vec<f64> {
    assert_eq!(amps.len(), 1 << n);
    amps.iter()
        .enumerate()
        .map(|(x, &a)| {
            let ones = (x as u64).count_ones() as i32;
            let twice_m = n as i32 - 2 * ones;
            a * twice_m as f64 / 2.0
        })
        .collect()
}

/// Largest absolute entry of `A·v − λ·v`.
pub fn eigen_residual(applied: &[f64], v: &[f64], lambda: f64) -> f64 {
    applied
        .iter()
        .zip(v)
        .map(|(av, x)| (av - lambda * x).abs())
        .fold(0.0, f64::max)
}
