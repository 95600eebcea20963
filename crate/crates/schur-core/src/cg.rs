//! Exact Clebsch-Gordan coefficients for coupling a spin-j system with one
//! spin-1/2 — the only coupling the sequential basis needs.
//!
//! Every coefficient is ±√(p/q) with integer p and q = 2(2j + 1); the
//! radicand is formed exactly and a single floating square root is taken.
//! Phases follow the Condon-Shortley convention: all coefficients real,
//! the stretched (highest-m) coefficient positive, and the down-coupled
//! coefficient negative exactly when the new spin is up.

use crate::error::{Error, Result};

/// A coupling query: prior total spin `2j` with azimuthal `2m`, a new
/// qubit of doubled spin `spin_bit` ∈ {+1, −1}, coupled up (J = j + 1/2)
/// or down (J = j − 1/2).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CgQuery {
    pub twice_j: u32,
    pub twice_m: i32,
    pub spin_bit: i32,
    pub up: bool,
}

/// Signed radicand numerator of the coefficient; the denominator is always
/// 2(2j + 1). Evaluates to 0 exactly when the target azimuthal value is
/// out of range, so callers may use it unguarded.
#[inline]
pub(crate) fn cg_numerator(twice_j: u32, twice_m: i32, spin_up: bool, couple_up: bool) -> (i64, bool) {
    debug_assert!(twice_m.unsigned_abs() <= twice_j);
    let tj = twice_j as i64;
    let tm = twice_m as i64;
    let s = if spin_up { 1 } else { -1 };
    if couple_up {
        (tj + s * tm + 2, false)
    } else {
        (tj - s * tm, spin_up)
    }
}

/// The coefficient as a float; zero when the coupling is impossible.
#[inline]
pub(crate) fn cg_value(twice_j: u32, twice_m: i32, spin_up: bool, couple_up: bool) -> f64 {
    let (num, negative) = cg_numerator(twice_j, twice_m, spin_up, couple_up);
    let c = (num as f64 / (2 * (twice_j as i64 + 1)) as f64).sqrt();
    if negative {
        -c
    } else {
        c
    }
}

/// The coupling coefficient for a validated query.
pub fn cg_half(q: &CgQuery) -> Result<f64> {
    if q.spin_bit != 1 && q.spin_bit != -1 {
        return Err(Error::OutOfRange(format!("spin_bit {} must be ±1", q.spin_bit)));
    }
    if (q.twice_m - q.twice_j as i32) % 2 != 0 {
        return Err(Error::OutOfRange(format!(
            "parity violated: twice_m = {} with twice_j = {}",
            q.twice_m, q.twice_j
        )));
    }
    if q.twice_m.unsigned_abs() > q.twice_j {
        return Err(Error::OutOfRange(format!(
            "|twice_m| = {} exceeds twice_j = {}",
            q.twice_m.abs(),
            q.twice_j
        )));
    }
    if !q.up && q.twice_j == 0 {
        return Err(Error::OutOfRange("cannot couple down from spin zero".into()));
    }
    let twice_big_m = q.twice_m + q.spin_bit;
    let twice_big_j = if q.up { q.twice_j + 1 } else { q.twice_j - 1 };
    if twice_big_m.unsigned_abs() > twice_big_j {
        return Err(Error::OutOfRange(format!(
            "resulting |2M| = {} exceeds 2J = {twice_big_j}",
            twice_big_m.abs()
        )));
    }
    Ok(cg_value(q.twice_j, q.twice_m, q.spin_bit == 1, q.up))
}

/// Residual of the coupling orthogonality relation
/// Σ_{J,M} C(J,M | j,m; m₂) C(J,M | j,m′; m₂′) − δ_{m₂m₂′} δ_{mm′},
/// summing over J = j ± 1/2 and all M. Should vanish to ~1e−15.
pub fn cg_orthogonality_residual(
    twice_j: u32,
    twice_m: i32,
    twice_m_prime: i32,
    twice_m2: i32,
    twice_m2_prime: i32,
) -> f64 {
    let coeff = |tm: i32, tm2: i32, up: bool, twice_big_m: i32| -> f64 {
        if tm + tm2 != twice_big_m || tm.unsigned_abs() > twice_j {
            return 0.0;
        }
        let twice_big_j = if up { twice_j + 1 } else { twice_j.wrapping_sub(1) };
        if !up && twice_j == 0 {
            return 0.0;
        }
        if twice_big_m.unsigned_abs() > twice_big_j {
            return 0.0;
        }
        cg_value(twice_j, tm, tm2 == 1, up)
    };

    let mut sum = 0.0;
    for up in [false, true] {
        if !up && twice_j == 0 {
            continue;
        }
        let twice_big_j = if up { twice_j + 1 } else { twice_j - 1 } as i32;
        let mut twice_big_m = -twice_big_j;
        while twice_big_m <= twice_big_j {
            sum += coeff(twice_m, twice_m2, up, twice_big_m)
                * coeff(twice_m_prime, twice_m2_prime, up, twice_big_m);
            twice_big_m += 2;
        }
    }
    let expected = f64::from(twice_m2 == twice_m2_prime && twice_m == twice_m_prime);
    sum - expected
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn stretched_coefficient_is_one() {
        let c = cg_half(&CgQuery { twice_j: 1, twice_m: 1, spin_bit: 1, up: true }).unwrap();
        assert_eq!(c, 1.0);
    }

    #[test]
    fn singlet_coefficients() {
        // Coupling (j = 1/2, m = −1/2) with an up qubit down to J = 0.
        let c = cg_half(&CgQuery { twice_j: 1, twice_m: -1, spin_bit: 1, up: false }).unwrap();
        assert!((c + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        // Opposite order: (m = +1/2) with a down qubit.
        let c = cg_half(&CgQuery { twice_j: 1, twice_m: 1, spin_bit: -1, up: false }).unwrap();
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn branch_probabilities_sum_to_one() {
        for twice_j in 0..=16u32 {
            for twice_big_m in (-(twice_j as i32 + 1)..=twice_j as i32 + 1).step_by(2) {
                for up in [false, true] {
                    let twice_big_j = if up { twice_j as i32 + 1 } else { twice_j as i32 - 1 };
                    if twice_big_j < 0 || twice_big_m.abs() > twice_big_j {
                        continue;
                    }
                    let mut total = 0.0;
                    for spin_bit in [-1i32, 1] {
                        let tm = twice_big_m - spin_bit;
                        if tm.unsigned_abs() > twice_j {
                            continue;
                        }
                        total += cg_value(twice_j, tm, spin_bit == 1, up).powi(2);
                    }
                    assert!((total - 1.0).abs() < 1e-12, "2j={twice_j} 2M={twice_big_m} up={up}");
                }
            }
        }
    }

    #[test]
    fn coupling_blocks_are_orthogonal() {
        // At fixed (j, M) the 2×2 matrix over (J = j ± 1/2) × (spin bit)
        // is orthogonal: unit rows and vanishing row products.
        for twice_j in 1..=16u32 {
            for twice_big_m in (-(twice_j as i32) + 1..=twice_j as i32 - 1).step_by(2) {
                let row = |up: bool| -> [f64; 2] {
                    [-1i32, 1].map(|s| {
                        let tm = twice_big_m - s;
                        if tm.unsigned_abs() > twice_j {
                            0.0
                        } else {
                            cg_value(twice_j, tm, s == 1, up)
                        }
                    })
                };
                let plus = row(true);
                let minus = row(false);
                let dot = plus[0] * minus[0] + plus[1] * minus[1];
                assert!(dot.abs() < 1e-12, "2j={twice_j} 2M={twice_big_m}: {dot}");
            }
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(cg_half(&CgQuery { twice_j: 1, twice_m: 3, spin_bit: 1, up: true }).is_err());
        assert!(cg_half(&CgQuery { twice_j: 0, twice_m: 0, spin_bit: 1, up: false }).is_err());
        assert!(cg_half(&CgQuery { twice_j: 2, twice_m: 1, spin_bit: 1, up: true }).is_err());
        // Resulting |M| beyond J = j − 1/2.
        assert!(cg_half(&CgQuery { twice_j: 2, twice_m: 2, spin_bit: 1, up: false }).is_err());
    }

    #[test]
    fn orthogonality_examples() {
        assert!(cg_orthogonality_residual(1, 1, 1, 1, 1).abs() < 1e-12);
        assert!(cg_orthogonality_residual(1, 1, 1, 1, -1).abs() < 1e-12);
        assert!(cg_orthogonality_residual(10, 4, -2, 1, 1).abs() < 1e-12);
        assert!(cg_orthogonality_residual(10, 6, 6, -1, -1).abs() < 1e-12);
    }

    #[test]
    fn orthogonality_sweep() {
        for twice_j in 0..=20u32 {
            let tj = twice_j as i32;
            for tm in (-tj..=tj).step_by(2) {
                for tmp in (-tj..=tj).step_by(2) {
                    for tm2 in [-1, 1] {
                        for tm2p in [-1, 1] {
                            let r = cg_orthogonality_residual(twice_j, tm, tmp, tm2, tm2p);
                            assert!(r.abs() < 1e-12, "2j={twice_j} {tm} {tmp} {tm2} {tm2p}: {r}");
                        }
                    }
                }
            }
        }
    }

    /// Independent oracle: simultaneously diagonalize (S², Sz) on the
    /// (2j+1)⊗2 product space — Sz enters as a small perturbation that
    /// splits the M-degeneracy — and compare eigenvector component
    /// magnitudes with the closed forms.
    #[test]
    fn matches_dense_diagonalization() {
        let split = 1e-3;
        for twice_j in 1..=8u32 {
            let j = twice_j as f64 / 2.0;
            let dim = (twice_j + 1) as usize * 2;
            // Basis |m⟩|s⟩ with m-index a = 0..2j (m = j − a) and s ∈ {up, down}.
            let idx = |a: usize, s: usize| a * 2 + s;
            let m_of = |a: usize| j - a as f64;
            let mut total = DMatrix::<f64>::zeros(dim, dim);
            // S² + split·Sz with S² = S1² + S2² + 2 S1z S2z + S1+S2− + S1−S2+.
            for a in 0..=(twice_j as usize) {
                for s in 0..2 {
                    let m1 = m_of(a);
                    let m2 = if s == 0 { 0.5 } else { -0.5 };
                    let row = idx(a, s);
                    total[(row, row)] += j * (j + 1.0) + 0.75 + 2.0 * m1 * m2 + split * (m1 + m2);
                    // S1+ S2−: needs m1 ≤ j − 1 and s = up.
                    if a >= 1 && s == 0 {
                        let amp = (j * (j + 1.0) - m1 * (m1 + 1.0)).sqrt();
                        total[(idx(a - 1, 1), row)] += amp;
                    }
                    // S1− S2+: needs m1 ≥ −j + 1 and s = down.
                    if a < twice_j as usize && s == 1 {
                        let amp = (j * (j + 1.0) - m1 * (m1 - 1.0)).sqrt();
                        total[(idx(a + 1, 0), row)] += amp;
                    }
                }
            }
            let eig = nalgebra::SymmetricEigen::new(total);
            // Eigenvalues are J(J+1) + split·M, far closer to one J-block
            // than the other; match |components| against |cg| at (J, M).
            for (col, &lambda) in eig.eigenvalues.iter().enumerate() {
                let up_gap = (lambda - (j + 0.5) * (j + 1.5)).abs();
                let down_gap = (lambda - (j - 0.5) * (j + 0.5)).abs();
                let up = up_gap < down_gap;
                let vec = eig.eigenvectors.column(col);
                for a in 0..=(twice_j as usize) {
                    for s in 0..2 {
                        let comp = vec[idx(a, s)].abs();
                        if comp < 1e-7 {
                            continue;
                        }
                        let tm = twice_j as i32 - 2 * a as i32;
                        let spin_up = s == 0;
                        let expected = cg_value(twice_j, tm, spin_up, up).abs();
                        assert!(
                            (comp - expected).abs() < 1e-6,
                            "2j={twice_j} up={up} a={a} s={s}: {comp} vs {expected}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn condon_shortley_sign_structure() {
        for twice_j in 1..=10u32 {
            let tj = twice_j as i32;
            for tm in (-tj..=tj).step_by(2) {
                for spin_up in [false, true] {
                    assert!(cg_value(twice_j, tm, spin_up, true) >= 0.0);
                    let down = cg_value(twice_j, tm, spin_up, false);
                    if spin_up {
                        assert!(down <= 0.0);
                    } else {
                        assert!(down >= 0.0);
                    }
                }
            }
        }
    }
}
