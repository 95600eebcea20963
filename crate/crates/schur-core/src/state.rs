//! Sequentially coupled basis states: exact amplitude evaluation, exact
//! sampling, and the dense change-of-basis oracle.
//!
//! A state `|J, M⟩` is a branching path plus a doubled azimuthal number.
//! Its computational-basis amplitude is the product of one coupling
//! coefficient per step, with the running azimuthal value read off the
//! bitstring prefix (0-bit = spin up). Amplitudes are real; the product of
//! step radicands is accumulated exactly-as-rationals in floating point and
//! a single square root is taken at the end.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bits::BitString;
use crate::cg::cg_numerator;
use crate::error::{Error, Result};
use crate::seed::DetRng;
use crate::spin::{DoubledSpin, SpinPath};

/// A sequentially coupled basis state `|J, M⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct SchurLabel {
    path: SpinPath,
    twice_m: i32,
    // Cached per-qubit doubled spins, 1/(2(2j_[k-1]) + 2) step factors,
    // and per-(step, m) branch probabilities; the samplers and amplitude
    // walks are the innermost loops of every estimator.
    spins: Box<[u32]>,
    inv_den: Box<[f64]>,
    sweep: Box<[(f64, f64)]>,
    sweep_offsets: Box<[u32]>,
}

impl SchurLabel {
    pub fn new(path: SpinPath, twice_m: i32) -> Result<Self> {
        let endpoint = path.endpoint();
        if !endpoint.holds(twice_m) {
            return Err(Error::OutOfRange(format!(
                "twice_m = {twice_m} invalid for endpoint twice_j = {}",
                endpoint.0
            )));
        }
        let spins = path.spin_profile().into_boxed_slice();
        let inv_den: Box<[f64]> =
            spins.iter().map(|&tj| 1.0 / (2.0 * (tj as f64 + 1.0))).collect();
        // Branch probabilities of the backward sweep, indexed by step k and
        // the running azimuthal value: (P(spin up), P(spin down)).
        let n = spins.len();
        let mut sweep = Vec::new();
        let mut sweep_offsets = vec![0u32; n];
        for k in 1..n {
            sweep_offsets[k] = sweep.len() as u32;
            let tj = spins[k] as i32;
            let couple_up = spins[k] > spins[k - 1];
            for idx in 0..=tj {
                let tbm = 2 * idx - tj;
                let (num_up, _) = cg_numerator_shifted(spins[k - 1], tbm, true, couple_up);
                let (num_down, _) = cg_numerator_shifted(spins[k - 1], tbm, false, couple_up);
                sweep.push((
                    num_up as f64 * inv_den[k - 1],
                    num_down as f64 * inv_den[k - 1],
                ));
            }
        }
        Ok(SchurLabel {
            path,
            twice_m,
            spins,
            inv_den,
            sweep: sweep.into_boxed_slice(),
            sweep_offsets: sweep_offsets.into_boxed_slice(),
        })
    }

    pub fn path(&self) -> &SpinPath {
        &self.path
    }

    pub fn twice_m(&self) -> i32 {
        self.twice_m
    }

    pub fn qubits(&self) -> usize {
        self.path.qubits()
    }

    pub fn endpoint(&self) -> DoubledSpin {
        DoubledSpin(self.spins[self.qubits() - 1])
    }

    /// `⟨x | J, M⟩`.
    pub fn amplitude(&self, x: &BitString) -> Result<f64> {
        if x.len() != self.qubits() {
            return Err(Error::LengthMismatch { want: self.qubits(), got: x.len() });
        }
        Ok(self.amplitude_unchecked(x))
    }

    /// Amplitude without the length check; zero whenever the bitstring's
    /// spin weight disagrees with M or a running azimuthal value leaves
    /// its allowed range.
    #[inline]
    pub(crate) fn amplitude_unchecked(&self, x: &BitString) -> f64 {
        if x.twice_weight() != self.twice_m {
            return 0.0;
        }
        let n = self.qubits();
        // Product over steps of ±√(num/den), accumulated as one ratio.
        let mut ratio = 1.0f64;
        let mut negative = false;
        let mut tm: i32 = if x.bit(0) { -1 } else { 1 };
        for k in 1..n {
            let tj_prev = self.spins[k - 1];
            if tm.unsigned_abs() > tj_prev {
                return 0.0;
            }
            let spin_up = !x.bit(k);
            let couple_up = self.spins[k] > tj_prev;
            let (num, neg) = cg_numerator(tj_prev, tm, spin_up, couple_up);
            if num == 0 {
                return 0.0;
            }
            ratio *= num as f64 * self.inv_den[k - 1];
            negative ^= neg;
            tm += if spin_up { 1 } else { -1 };
        }
        let a = ratio.sqrt();
        if negative {
            -a
        } else {
            a
        }
    }

    /// Draws a bitstring with probability exactly `amplitude(x)²` by a
    /// backward sweep: starting from (J, M), each step emits the newest
    /// qubit's spin with the squared coupling coefficient as its weight,
    /// which sums to one over the two choices.
    pub fn sample(&self, rng: &mut DetRng) -> BitString {
        self.sample_with_amplitude(rng).0
    }

    /// Like [`Self::sample`], also returning the amplitude of the drawn
    /// bitstring (its sign included) at no extra cost.
    pub fn sample_with_amplitude(&self, rng: &mut DetRng) -> (BitString, f64) {
        use rand::Rng;
        let n = self.qubits();
        let mut x = BitString::zeros(n);
        let mut tm = self.twice_m;
        let mut ratio = 1.0f64;
        let mut negative = false;
        for k in (1..n).rev() {
            let tj = self.spins[k] as i32;
            // Branch weights num(up)/den and num(down)/den sum to one.
            let (p_up, p_down) =
                self.sweep[self.sweep_offsets[k] as usize + ((tm + tj) >> 1) as usize];
            if rng.gen::<f64>() < p_up {
                ratio *= p_up;
                // A down-coupling step entered on spin up carries the one
                // negative coefficient of the convention.
                negative ^= self.spins[k] < self.spins[k - 1];
                tm -= 1;
            } else {
                ratio *= p_down;
                x.set(k, true);
                tm += 1;
            }
        }
        debug_assert!(tm == 1 || tm == -1);
        if tm == -1 {
            x.set(0, true);
        }
        let a = ratio.sqrt();
        (x, if negative { -a } else { a })
    }
}

/// Coupling numerator expressed in terms of the *resulting* azimuthal
/// value `2M`: the prior is `2m = 2M − s`.
#[inline]
fn cg_numerator_shifted(twice_j_prev: u32, twice_big_m: i32, spin_up: bool, couple_up: bool) -> (i64, bool) {
    let tj = twice_j_prev as i64;
    let tbm = twice_big_m as i64;
    let s = if spin_up { 1 } else { -1 };
    if couple_up {
        (tj + s * tbm + 1, false)
    } else {
        (tj - s * tbm + 1, spin_up)
    }
}

impl Serialize for SchurLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("SchurLabel", 2)?;
        st.serialize_field("path", &self.path)?;
        st.serialize_field("twice_m", &self.twice_m)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for SchurLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            path: SpinPath,
            twice_m: i32,
        }
        let raw = Raw::deserialize(d)?;
        SchurLabel::new(raw.path, raw.twice_m).map_err(D::Error::custom)
    }
}

/// A dense real state vector indexed by computational bitstrings
/// (wire 0 = least significant index bit).
#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    n: usize,
    pub amps: Vec<f64>,
}

impl DenseState {
    pub fn new(n: usize, amps: Vec<f64>) -> Self {
        assert_eq!(amps.len(), 1 << n);
        DenseState { n, amps }
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a * a).sum()
    }

    pub fn dot(&self, other: &DenseState) -> f64 {
        assert_eq!(self.n, other.n);
        self.amps.iter().zip(&other.amps).map(|(a, b)| a * b).sum()
    }
}

const DENSE_GUARD_DEFAULT: usize = 14;

/// Dense-oracle qubit limit; `SCHUR_MAX_DENSE_N` overrides the default of
/// 14.
pub fn dense_guard() -> usize {
    static GUARD: std::sync::OnceLock<usize> = std::sync::OnceLock::new();
    *GUARD.get_or_init(|| {
        std::env::var("SCHUR_MAX_DENSE_N")
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(DENSE_GUARD_DEFAULT)
    })
}

pub(crate) fn check_dense(n: usize) -> Result<()> {
    let limit = dense_guard();
    if n > limit {
        return Err(Error::TooLarge { what: "dense qubit count", value: n, limit });
    }
    Ok(())
}

/// All 2^n amplitudes of a basis state.
pub fn dense_schur_vector(label: &SchurLabel) -> Result<DenseState> {
    let n = label.qubits();
    check_dense(n)?;
    let amps = (0..1usize << n)
        .map(|x| label.amplitude_unchecked(&BitString::from_index(x as u128, n)))
        .collect();
    Ok(DenseState::new(n, amps))
}

/// Expands a dense state over the coupled basis: returns every
/// `(label, ⟨label|ψ⟩)` in canonical order (paths lexicographic, then M
/// ascending). Runs the coupling cascade as a level-by-level transform in
/// O(n·2^n).
pub fn schur_decompose(state: &DenseState) -> Result<Vec<(SchurLabel, f64)>> {
    let n = state.qubits();
    check_dense(n)?;
    // Level k holds, for each path prefix on k qubits and each azimuthal
    // value, the contraction of ψ against that prefix state — a vector
    // over the remaining n−k qubits (qubit k+1 = least significant bit).
    struct Entry {
        prefix: SpinPath,
        // Contractions indexed by (2m + 2j)/2.
        per_m: Vec<Vec<f64>>,
    }

    let half = 1usize << (n - 1);
    let mut level = vec![Entry {
        prefix: SpinPath::single_qubit(),
        per_m: vec![
            (0..half).map(|y| state.amps[(y << 1) | 1]).collect(), // m = −1/2
            (0..half).map(|y| state.amps[y << 1]).collect(),       // m = +1/2
        ],
    }];

    for k in 1..n {
        let suffix_len = 1usize << (n - k - 1);
        let mut next = Vec::with_capacity(level.len() * 2);
        for entry in &level {
            let tj_prev = entry.prefix.endpoint().0;
            for up in [false, true] {
                let Some(child) = entry.prefix.extended(up) else {
                    continue;
                };
                let tj = child.endpoint().0;
                let mut per_m = Vec::with_capacity(tj as usize + 1);
                for idx in 0..=tj {
                    let t_big_m = 2 * idx as i32 - tj as i32;
                    let mut v = vec![0.0f64; suffix_len];
                    for (spin_up, bit) in [(true, 0usize), (false, 1usize)] {
                        let tm = t_big_m - if spin_up { 1 } else { -1 };
                        if tm.unsigned_abs() > tj_prev {
                            continue;
                        }
                        let (num, neg) = cg_numerator(tj_prev, tm, spin_up, up);
                        if num == 0 {
                            continue;
                        }
                        let c = {
                            let c = (num as f64 / (2 * (tj_prev as i64 + 1)) as f64).sqrt();
                            if neg {
                                -c
                            } else {
                                c
                            }
                        };
                        let parent = &entry.per_m[((tm + tj_prev as i32) / 2) as usize];
                        for (y, slot) in v.iter_mut().enumerate() {
                            *slot += c * parent[(y << 1) | bit];
                        }
                    }
                    per_m.push(v);
                }
                next.push(Entry { prefix: child, per_m });
            }
        }
        level = next;
    }

    let mut out = Vec::with_capacity(1 << n);
    for entry in level {
        let tj = entry.prefix.endpoint().0;
        for (idx, v) in entry.per_m.into_iter().enumerate() {
            let twice_m = 2 * idx as i32 - tj as i32;
            out.push((SchurLabel::new(entry.prefix, twice_m)?, v[0]));
        }
    }
    Ok(out)
}

/// The output distribution of a dense state over the coupled basis.
pub fn schur_distribution(state: &DenseState) -> Result<Vec<(SchurLabel, f64)>> {
    Ok(schur_decompose(state)?
        .into_iter()
        .map(|(label, a)| (label, a * a))
        .collect())
}
