//! Branching-diagram paths, Yamanouchi symbols, two-row Young tableaux,
//! dimension counting, and uniform path sampling.
//!
//! Coupling one spin-1/2 at a time, the total spin after k qubits starts at
//! j = 1/2 and moves by ±1/2 per step, never below zero. A path is encoded
//! as a Yamanouchi bitstring of length n−1 (leftmost bit = earliest step,
//! 1 = up-step); validity is exactly the rule that every length-m prefix
//! holds at most ⌈m/2⌉ zeroes. Paths ending at J are in bijection with
//! standard Young tableaux of the two-row shape (n/2 + J, n/2 − J), which
//! gives a second, hook-walk route to uniform path sampling.
//!
//! Spins are stored doubled (2j, 2m) so half-integers stay exact and parity
//! constraints become congruences.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::Zero;
use rand::{Rng, RngCore};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::seed::DetRng;

/// A total-spin value stored as 2j.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DoubledSpin(pub u32);

impl DoubledSpin {
    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// Number of azimuthal levels, 2j + 1.
    pub fn multiplicity(self) -> u32 {
        self.0 + 1
    }

    /// Doubled azimuthal values −2j, −2j + 2, …, 2j.
    pub fn azimuthal_values(self) -> impl Iterator<Item = i32> {
        let tj = self.0 as i32;
        (0..=self.0).map(move |i| 2 * i as i32 - tj)
    }

    pub fn holds(self, twice_m: i32) -> bool {
        twice_m.unsigned_abs() <= self.0 && (twice_m - self.0 as i32) % 2 == 0
    }
}

/// An azimuthal-spin value stored as 2m.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DoubledAzimuthal(pub i32);

/// A branching-diagram path on `n` qubits, encoded as its Yamanouchi symbol.
///
/// Step `i` (0-based) couples qubit `i + 2`; `true` raises the running spin
/// by 1/2, `false` lowers it. The implicit start is j = 1/2 after one qubit.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinPath {
    n: u16,
    steps: u128,
}

impl SpinPath {
    /// The unique path on a single qubit (empty Yamanouchi symbol).
    pub fn single_qubit() -> Self {
        SpinPath { n: 1, steps: 0 }
    }

    /// Validates a Yamanouchi bit sequence; `bits[i]` is step `i`.
    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        if bits.len() + 1 > crate::bits::MAX_WIRES {
            return Err(Error::TooLarge {
                what: "path length",
                value: bits.len() + 1,
                limit: crate::bits::MAX_WIRES,
            });
        }
        let mut steps = 0u128;
        let mut twice_j = 1i64;
        for (i, &b) in bits.iter().enumerate() {
            if b {
                steps |= 1 << i;
                twice_j += 1;
            } else {
                twice_j -= 1;
            }
            if twice_j < 0 {
                return Err(Error::InvalidYamanouchi(i + 1));
            }
        }
        Ok(SpinPath { n: (bits.len() + 1) as u16, steps })
    }

    /// Parses an ASCII Yamanouchi symbol such as `"101"`; `""` is the
    /// single-qubit path.
    pub fn parse(s: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return Err(Error::BadParameter(format!("Yamanouchi symbol contains '{c}'"))),
            }
        }
        SpinPath::from_bits(&bits)
    }

    #[inline]
    pub fn qubits(&self) -> usize {
        self.n as usize
    }

    /// Step `i` (0-based): `true` if the spin increased.
    #[inline]
    pub fn step(&self, i: usize) -> bool {
        debug_assert!(i + 1 < self.qubits());
        (self.steps >> i) & 1 == 1
    }

    /// Doubled total spin after the first `k` qubits, `1 ≤ k ≤ n`.
    pub fn spin_after(&self, k: usize) -> DoubledSpin {
        debug_assert!(k >= 1 && k <= self.qubits());
        let mask = if k >= 2 { (1u128 << (k - 1)) - 1 } else { 0 };
        let ones = (self.steps & mask).count_ones();
        let zeros = (k - 1) as u32 - ones;
        DoubledSpin(1 + ones - zeros)
    }

    /// Doubled total spin at the endpoint: 1 + #ones − #zeroes.
    pub fn endpoint(&self) -> DoubledSpin {
        self.spin_after(self.qubits())
    }

    /// The doubled spins after 1, 2, …, n qubits.
    pub fn spin_profile(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.qubits());
        let mut tj = 1u32;
        out.push(tj);
        for i in 0..self.qubits() - 1 {
            if self.step(i) {
                tj += 1;
            } else {
                tj -= 1;
            }
            out.push(tj);
        }
        out
    }

    /// The first `k` qubits of this path.
    pub fn prefix(&self, k: usize) -> SpinPath {
        debug_assert!(k >= 1 && k <= self.qubits());
        let mask = if k >= 2 { (1u128 << (k - 1)) - 1 } else { 0 };
        SpinPath { n: k as u16, steps: self.steps & mask }
    }

    /// Extends by one step; `None` when the step would dip below zero.
    pub fn extended(&self, up: bool) -> Option<SpinPath> {
        if self.qubits() + 1 > crate::bits::MAX_WIRES {
            return None;
        }
        if !up && self.endpoint().0 == 0 {
            return None;
        }
        let mut steps = self.steps;
        if up {
            steps |= 1 << (self.qubits() - 1);
        }
        Some(SpinPath { n: self.n + 1, steps })
    }

    /// True when `self` extends `prefix` (or equals it).
    pub fn has_prefix(&self, prefix: &SpinPath) -> bool {
        prefix.qubits() <= self.qubits() && self.prefix(prefix.qubits()) == *prefix
    }
}

impl fmt::Display for SpinPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.qubits() - 1 {
            f.write_str(if self.step(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for SpinPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SpinPath(\"{self}\")")
    }
}

impl FromStr for SpinPath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SpinPath::parse(s)
    }
}

impl Serialize for SpinPath {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SpinPath {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        SpinPath::parse(&s).map_err(D::Error::custom)
    }
}

const ENUMERATION_GUARD: usize = 20;

/// All valid paths on `n` qubits in lexicographic Yamanouchi order.
pub fn enumerate_paths(n: usize) -> Result<Vec<SpinPath>> {
    if n == 0 {
        return Err(Error::BadParameter("qubit count must be ≥ 1".into()));
    }
    if n > ENUMERATION_GUARD {
        return Err(Error::TooLarge { what: "enumeration qubit count", value: n, limit: ENUMERATION_GUARD });
    }
    let mut out = Vec::new();
    let mut stack = vec![SpinPath::single_qubit()];
    // Depth-first with the 0-step tried first gives lexicographic order.
    while let Some(p) = stack.pop() {
        if p.qubits() == n {
            out.push(p);
            continue;
        }
        if let Some(up) = p.extended(true) {
            stack.push(up);
        }
        if let Some(down) = p.extended(false) {
            stack.push(down);
        }
    }
    Ok(out)
}

/// Number of paths on `n` qubits ending at the given spin, exactly:
/// C(n, n/2 − J) − C(n, n/2 − J − 1) in doubled units.
pub fn path_count(n: usize, spin: DoubledSpin) -> Result<BigUint> {
    let tj = spin.0;
    if tj as usize > n || !(n as u32).wrapping_sub(tj).is_multiple_of(2) {
        return Err(Error::ParityMismatch { n, twice_j: tj });
    }
    let k = (n - tj as usize) / 2;
    let first = num_integer::binomial(BigUint::from(n), BigUint::from(k));
    let second = if k == 0 {
        BigUint::zero()
    } else {
        num_integer::binomial(BigUint::from(n), BigUint::from(k - 1))
    };
    Ok(first - second)
}

/// Endpoint spins reachable on `n` qubits, smallest first.
pub fn endpoint_spins(n: usize) -> Vec<DoubledSpin> {
    let lowest = if n.is_multiple_of(2) { 0 } else { 1 };
    (lowest..=n as u32).step_by(2).map(DoubledSpin).collect()
}

/// A two-row Young shape.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct YoungShape2 {
    pub row1: u32,
    pub row2: u32,
}

impl YoungShape2 {
    pub fn new(row1: u32, row2: u32) -> Result<Self> {
        if row1 < row2 {
            return Err(Error::BadParameter(format!("shape rows ({row1}, {row2}) out of order")));
        }
        Ok(YoungShape2 { row1, row2 })
    }

    /// The shape holding all paths on `n` qubits ending at `spin`:
    /// n/2 + J boxes on top, n/2 − J below.
    pub fn from_endpoint(n: usize, spin: DoubledSpin) -> Result<Self> {
        let tj = spin.0;
        if tj as usize > n || !(n as u32).wrapping_sub(tj).is_multiple_of(2) {
            return Err(Error::ParityMismatch { n, twice_j: tj });
        }
        Ok(YoungShape2 { row1: ((n as u32) + tj) / 2, row2: ((n as u32) - tj) / 2 })
    }

    pub fn boxes(&self) -> usize {
        (self.row1 + self.row2) as usize
    }

    pub fn endpoint(&self) -> DoubledSpin {
        DoubledSpin(self.row1 - self.row2)
    }
}

/// A standard Young tableau on two rows: entries 1..=n increase along rows
/// and down columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StdTableau2 {
    row1: Vec<u32>,
    row2: Vec<u32>,
}

impl StdTableau2 {
    pub fn new(row1: Vec<u32>, row2: Vec<u32>) -> Result<Self> {
        if row1.len() < row2.len() {
            return Err(Error::NotStandard);
        }
        let n = row1.len() + row2.len();
        let mut seen = vec![false; n + 1];
        for &e in row1.iter().chain(row2.iter()) {
            if e == 0 || e as usize > n || seen[e as usize] {
                return Err(Error::NotStandard);
            }
            seen[e as usize] = true;
        }
        for row in [&row1, &row2] {
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::NotStandard);
            }
        }
        if row2.iter().enumerate().any(|(c, &e)| row1[c] >= e) {
            return Err(Error::NotStandard);
        }
        Ok(StdTableau2 { row1, row2 })
    }

    pub fn row1(&self) -> &[u32] {
        &self.row1
    }

    pub fn row2(&self) -> &[u32] {
        &self.row2
    }

    pub fn shape(&self) -> YoungShape2 {
        YoungShape2 { row1: self.row1.len() as u32, row2: self.row2.len() as u32 }
    }
}

/// Fills a tableau from a path: entry 1 opens the upper row, then entry
/// i + 1 goes to the leftmost empty box of the upper row on an up-step and
/// of the lower row on a down-step.
pub fn path_to_tableau(path: &SpinPath) -> StdTableau2 {
    let mut row1 = vec![1u32];
    let mut row2 = Vec::new();
    for i in 0..path.qubits() - 1 {
        if path.step(i) {
            row1.push(i as u32 + 2);
        } else {
            row2.push(i as u32 + 2);
        }
    }
    StdTableau2 { row1, row2 }
}

/// Reads the steps back off a standard tableau; inverse of
/// [`path_to_tableau`].
pub fn tableau_to_path(t: &StdTableau2) -> SpinPath {
    let n = t.shape().boxes();
    let mut bits = vec![false; n - 1];
    for &e in &t.row1 {
        if e >= 2 {
            bits[e as usize - 2] = true;
        }
    }
    SpinPath::from_bits(&bits).expect("standard tableau encodes a valid path")
}

/// Draws a uniformly random standard tableau of the shape by hook walks;
/// every tableau of the shape has probability 1/d(J).
pub fn gnw_sample_tableau(shape: YoungShape2, rng: &mut DetRng) -> StdTableau2 {
    let n = shape.boxes();
    let mut row1 = vec![0u32; shape.row1 as usize];
    let mut row2 = vec![0u32; shape.row2 as usize];
    let mut len1 = shape.row1 as usize;
    let mut len2 = shape.row2 as usize;
    for entry in (1..=n as u32).rev() {
        // Start on a uniformly random remaining cell, then walk the hook.
        let start = rng.gen_range(0..len1 + len2);
        let (mut row, mut col) = if start < len1 { (1, start) } else { (2, start - len1) };
        loop {
            let arm = if row == 1 { len1 - 1 - col } else { len2 - 1 - col };
            let leg = usize::from(row == 1 && col < len2);
            let hook = arm + leg;
            if hook == 0 {
                break;
            }
            let pick = rng.gen_range(0..hook);
            if pick < arm {
                col += pick + 1;
            } else {
                row = 2;
            }
        }
        if row == 1 {
            row1[len1 - 1] = entry;
            len1 -= 1;
        } else {
            row2[len2 - 1] = entry;
            len2 -= 1;
        }
    }
    StdTableau2 { row1, row2 }
}

fn rejection_cap(n: usize) -> usize {
    64 * n * n
}

/// Draws `(path, 2M)` uniformly over all 2^n pairs by rejection: a random
/// Yamanouchi candidate of n−1 bits, then a random M′ ∈ {1, …, n+1}
/// accepted when M′ ≤ 2J + 1; any failure restarts from a fresh candidate.
pub fn sample_uniform_label_rejection(
    n: usize,
    rng: &mut DetRng,
) -> Result<(SpinPath, DoubledAzimuthal)> {
    if n == 0 || n > crate::bits::MAX_WIRES {
        return Err(Error::BadParameter(format!("qubit count {n} out of range")));
    }
    let cap = rejection_cap(n);
    for _ in 0..cap {
        let mut steps = 0u128;
        let mut twice_j = 1i64;
        let mut word = 0u64;
        let mut valid = true;
        for i in 0..n - 1 {
            if i % 64 == 0 {
                word = rng.next_u64();
            }
            let b = (word >> (i % 64)) & 1 == 1;
            if b {
                steps |= 1 << i;
                twice_j += 1;
            } else {
                twice_j -= 1;
            }
            if twice_j < 0 {
                valid = false;
                break;
            }
        }
        if !valid {
            continue;
        }
        let m_prime = rng.gen_range(1..=n as u64 + 1);
        if m_prime <= twice_j as u64 + 1 {
            let path = SpinPath { n: n as u16, steps };
            let twice_m = 2 * (m_prime as i32 - 1) - twice_j as i32;
            return Ok((path, DoubledAzimuthal(twice_m)));
        }
    }
    Err(Error::SamplerStalled(cap))
}

/// Same output law as [`sample_uniform_label_rejection`], via the hook-walk
/// route: draw the endpoint spin from Π(J) = (2J + 1)·d(J)/2^n exactly,
/// then a uniform tableau of that shape, then a uniform M.
pub fn sample_uniform_label_gnw(n: usize, rng: &mut DetRng) -> Result<(SpinPath, DoubledAzimuthal)> {
    if n == 0 || n > crate::bits::MAX_WIRES {
        return Err(Error::BadParameter(format!("qubit count {n} out of range")));
    }
    // Exact draw from Π: a uniform n-bit integer against cumulative
    // (2J + 1)·d(J) weights, which sum to 2^n.
    let mut u = BigUint::zero();
    for i in 0..n.div_ceil(64) {
        let take = (n - 64 * i).min(64) as u32;
        let word = rng.next_u64() & (u64::MAX >> (64 - take));
        u += BigUint::from(word) << (64 * i);
    }
    let mut chosen = None;
    let mut acc = BigUint::zero();
    for spin in endpoint_spins(n) {
        acc += path_count(n, spin)? * BigUint::from(spin.multiplicity());
        if u < acc {
            chosen = Some(spin);
            break;
        }
    }
    let spin = chosen.expect("cumulative weights reach 2^n");
    let tableau = gnw_sample_tableau(YoungShape2::from_endpoint(n, spin)?, rng);
    let path = tableau_to_path(&tableau);
    let idx = rng.gen_range(0..spin.multiplicity());
    let twice_m = 2 * idx as i32 - spin.0 as i32;
    Ok((path, DoubledAzimuthal(twice_m)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from;
    use num_traits::{One, ToPrimitive};

    #[test]
    fn parse_examples() {
        // Spins along "101": 1/2 → 1 → 1/2 → 1.
        let p = SpinPath::parse("101").unwrap();
        assert_eq!(p.spin_profile(), vec![1, 2, 1, 2]);

        let single = SpinPath::parse("").unwrap();
        assert_eq!(single.qubits(), 1);
        assert_eq!(single.endpoint(), DoubledSpin(1));

        assert_eq!(SpinPath::parse("00"), Err(Error::InvalidYamanouchi(2)));
    }

    #[test]
    fn endpoint_examples() {
        assert_eq!(SpinPath::parse("011").unwrap().endpoint(), DoubledSpin(2));
        assert_eq!(SpinPath::parse("01").unwrap().endpoint(), DoubledSpin(1));
        let stretched = SpinPath::from_bits(&[true; 9]).unwrap();
        assert_eq!(stretched.endpoint(), DoubledSpin(10));
    }

    #[test]
    fn enumerate_small() {
        let two: Vec<String> = enumerate_paths(2).unwrap().iter().map(|p| p.to_string()).collect();
        assert_eq!(two, ["0", "1"]);
        let three: Vec<String> = enumerate_paths(3).unwrap().iter().map(|p| p.to_string()).collect();
        assert_eq!(three, ["01", "10", "11"]);
    }

    #[test]
    fn counts_match_enumeration() {
        for n in 1..=12 {
            let paths = enumerate_paths(n).unwrap();
            for spin in endpoint_spins(n) {
                let expected = path_count(n, spin).unwrap().to_u64().unwrap();
                let observed = paths.iter().filter(|p| p.endpoint() == spin).count() as u64;
                assert_eq!(observed, expected, "n={n} twice_j={}", spin.0);
            }
        }
    }

    #[test]
    fn count_examples() {
        assert_eq!(path_count(6, DoubledSpin(0)).unwrap(), BigUint::from(5u32));
        assert_eq!(path_count(4, DoubledSpin(4)).unwrap(), BigUint::from(1u32));
        assert!(path_count(4, DoubledSpin(1)).is_err());
    }

    #[test]
    fn dimensions_fill_the_hilbert_space() {
        for n in 1..=30usize {
            let total: BigUint = endpoint_spins(n)
                .into_iter()
                .map(|s| path_count(n, s).unwrap() * BigUint::from(s.multiplicity()))
                .sum();
            assert_eq!(total, BigUint::one() << n, "n={n}");
        }
    }

    #[test]
    fn tableau_example() {
        let t = path_to_tableau(&SpinPath::parse("01").unwrap());
        assert_eq!(t.row1(), &[1, 3]);
        assert_eq!(t.row2(), &[2]);

        let stretched = path_to_tableau(&SpinPath::parse("1111").unwrap());
        assert_eq!(stretched.row1(), &[1, 2, 3, 4, 5]);
        assert!(stretched.row2().is_empty());
    }

    #[test]
    fn tableau_round_trip() {
        for n in 1..=10 {
            for p in enumerate_paths(n).unwrap() {
                let t = path_to_tableau(&p);
                assert_eq!(t.shape(), YoungShape2::from_endpoint(n, p.endpoint()).unwrap());
                assert_eq!(tableau_to_path(&t), p);
            }
        }
    }

    #[test]
    fn tableau_validation() {
        assert!(StdTableau2::new(vec![1, 3], vec![2]).is_ok());
        assert_eq!(StdTableau2::new(vec![2, 3], vec![1]), Err(Error::NotStandard));
        assert_eq!(StdTableau2::new(vec![1, 2], vec![2]), Err(Error::NotStandard));
    }

    #[test]
    fn gnw_single_row_is_deterministic() {
        let mut rng = rng_from(1);
        let t = gnw_sample_tableau(YoungShape2::new(4, 0).unwrap(), &mut rng);
        assert_eq!(t.row1(), &[1, 2, 3, 4]);
    }

    #[test]
    fn gnw_two_cell_shape_is_even() {
        // Shape (2,1) has exactly two tableaux.
        let mut rng = rng_from(7);
        let mut counts = [0u32; 2];
        for _ in 0..4000 {
            let t = gnw_sample_tableau(YoungShape2::new(2, 1).unwrap(), &mut rng);
            counts[usize::from(t.row1()[1] == 3)] += 1;
        }
        for c in counts {
            assert!((c as f64 - 2000.0).abs() < 200.0, "counts {counts:?}");
        }
    }

    #[test]
    fn uniform_sampler_single_qubit() {
        let mut rng = rng_from(3);
        let mut ups = 0;
        for _ in 0..2000 {
            let (p, m) = sample_uniform_label_rejection(1, &mut rng).unwrap();
            assert_eq!(p.qubits(), 1);
            assert!(m.0 == 1 || m.0 == -1);
            ups += i32::from(m.0 == 1);
        }
        assert!((ups - 1000).abs() < 150);
        let (_, m) = sample_uniform_label_gnw(1, &mut rng).unwrap();
        assert!(m.0 == 1 || m.0 == -1);
    }

    #[test]
    fn prefix_and_extension() {
        let p = SpinPath::parse("1101").unwrap();
        assert_eq!(p.prefix(3).to_string(), "11");
        assert!(p.has_prefix(&SpinPath::parse("110").unwrap()));
        assert!(!p.has_prefix(&SpinPath::parse("10").unwrap()));
        assert_eq!(p.extended(true).unwrap().to_string(), "11011");
        let ground = SpinPath::parse("100").unwrap();
        assert_eq!(ground.endpoint(), DoubledSpin(0));
        assert!(ground.extended(false).is_none());
    }
}
