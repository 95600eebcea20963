//! Classical reversible circuits (X / CNOT / Toffoli), permutation gates,
//! and states prepared by running a circuit on a coupled-basis state.
//!
//! Wire indices are 0-based in code and 1-based in serialized files. The
//! permutation convention is one-line: output bit `i` is input bit `π(i)`,
//! so a file entry `{"perm": [2, 3, 1, 5, 4]}` is the cycle (1,2,3)(4,5).

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::seed::DetRng;
use crate::state::{DenseState, SchurLabel};

/// Default cap on gate-list length; keeps "polynomially long" operational.
pub const DEFAULT_GATE_BUDGET: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    X { target: usize },
    Cx { control: usize, target: usize },
    Ccx { controls: [usize; 2], target: usize },
}

impl Gate {
    fn max_wire(&self) -> usize {
        match *self {
            Gate::X { target } => target,
            Gate::Cx { control, target } => control.max(target),
            Gate::Ccx { controls, target } => controls[0].max(controls[1]).max(target),
        }
    }

    fn wires_distinct(&self) -> bool {
        match *self {
            Gate::X { .. } => true,
            Gate::Cx { control, target } => control != target,
            Gate::Ccx { controls, target } => {
                controls[0] != controls[1] && controls[0] != target && controls[1] != target
            }
        }
    }

    /// Every gate is its own inverse.
    #[inline]
    fn apply_mask(&self, bits: u128) -> u128 {
        match *self {
            Gate::X { target } => bits ^ (1 << target),
            Gate::Cx { control, target } => {
                bits ^ (((bits >> control) & 1) << target)
            }
            Gate::Ccx { controls, target } => {
                bits ^ ((((bits >> controls[0]) & (bits >> controls[1])) & 1) << target)
            }
        }
    }
}

/// An ordered list of self-inverse classical gates on `wires` wires.
#[derive(Clone, Debug, PartialEq)]
pub struct ReversibleCircuit {
    wires: usize,
    gates: Vec<Gate>,
}

impl ReversibleCircuit {
    pub fn new(wires: usize, gates: Vec<Gate>) -> Result<Self> {
        Self::with_budget(wires, gates, DEFAULT_GATE_BUDGET)
    }

    pub fn with_budget(wires: usize, gates: Vec<Gate>, budget: usize) -> Result<Self> {
        if wires == 0 || wires > crate::bits::MAX_WIRES {
            return Err(Error::BadParameter(format!("wire count {wires} out of range")));
        }
        if gates.len() > budget {
            return Err(Error::TooLarge { what: "gate count", value: gates.len(), limit: budget });
        }
        for g in &gates {
            if g.max_wire() >= wires {
                return Err(Error::BadGate(format!("wire {} out of range", g.max_wire())));
            }
            if !g.wires_distinct() {
                return Err(Error::BadGate("control and target wires must be distinct".into()));
            }
        }
        Ok(ReversibleCircuit { wires, gates })
    }

    pub fn identity(wires: usize) -> Self {
        ReversibleCircuit { wires, gates: Vec::new() }
    }

    pub fn wires(&self) -> usize {
        self.wires
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// `w(x)`.
    pub fn apply(&self, x: &BitString) -> Result<BitString> {
        if x.len() != self.wires {
            return Err(Error::LengthMismatch { want: self.wires, got: x.len() });
        }
        Ok(self.forward(*x))
    }

    /// `w⁻¹(x)`: the gates in reverse order.
    pub fn invert_apply(&self, x: &BitString) -> Result<BitString> {
        if x.len() != self.wires {
            return Err(Error::LengthMismatch { want: self.wires, got: x.len() });
        }
        Ok(self.backward(*x))
    }

    #[inline]
    pub(crate) fn forward(&self, x: BitString) -> BitString {
        let mut bits = x.index();
        for g in &self.gates {
            bits = g.apply_mask(bits);
        }
        BitString::from_index(bits, self.wires)
    }

    #[inline]
    pub(crate) fn backward(&self, x: BitString) -> BitString {
        let mut bits = x.index();
        for g in self.gates.iter().rev() {
            bits = g.apply_mask(bits);
        }
        BitString::from_index(bits, self.wires)
    }

    /// Uniformly random circuit for tests and scans; Toffolis only appear
    /// when three distinct wires exist.
    pub fn random(wires: usize, gates: usize, rng: &mut DetRng) -> Self {
        use rand::seq::SliceRandom;
        use rand::Rng;
        let mut out = Vec::with_capacity(gates);
        let mut wire_ids: Vec<usize> = (0..wires).collect();
        for _ in 0..gates {
            let kind = rng.gen_range(0..3u8);
            wire_ids.shuffle(rng);
            out.push(match kind {
                0 => Gate::X { target: wire_ids[0] },
                1 if wires >= 2 => Gate::Cx { control: wire_ids[0], target: wire_ids[1] },
                2 if wires >= 3 => {
                    Gate::Ccx { controls: [wire_ids[0], wire_ids[1]], target: wire_ids[2] }
                }
                _ => Gate::X { target: wire_ids[0] },
            });
        }
        ReversibleCircuit { wires, gates: out }
    }
}

#[derive(Serialize, Deserialize)]
struct GateSpec {
    g: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    c: Vec<usize>,
    t: usize,
}

#[derive(Serialize, Deserialize)]
struct CircuitSpec {
    wires: usize,
    gates: Vec<GateSpec>,
}

impl Serialize for ReversibleCircuit {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let gates = self
            .gates
            .iter()
            .map(|g| match *g {
                Gate::X { target } => GateSpec { g: "x".into(), c: vec![], t: target + 1 },
                Gate::Cx { control, target } => {
                    GateSpec { g: "cx".into(), c: vec![control + 1], t: target + 1 }
                }
                Gate::Ccx { controls, target } => GateSpec {
                    g: "ccx".into(),
                    c: vec![controls[0] + 1, controls[1] + 1],
                    t: target + 1,
                },
            })
            .collect();
        CircuitSpec { wires: self.wires, gates }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ReversibleCircuit {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let spec = CircuitSpec::deserialize(d)?;
        let mut gates = Vec::with_capacity(spec.gates.len());
        for gs in spec.gates {
            let dec = |w: usize| {
                if w == 0 {
                    Err(D::Error::custom("wire indices are 1-based"))
                } else {
                    Ok(w - 1)
                }
            };
            let gate = match (gs.g.as_str(), gs.c.len()) {
                ("x", 0) => Gate::X { target: dec(gs.t)? },
                ("cx", 1) => Gate::Cx { control: dec(gs.c[0])?, target: dec(gs.t)? },
                ("ccx", 2) => Gate::Ccx {
                    controls: [dec(gs.c[0])?, dec(gs.c[1])?],
                    target: dec(gs.t)?,
                },
                (name, nc) => {
                    return Err(D::Error::custom(format!(
                        "gate \"{name}\" with {nc} controls is not one of x/cx/ccx"
                    )))
                }
            };
            gates.push(gate);
        }
        ReversibleCircuit::new(spec.wires, gates).map_err(D::Error::custom)
    }
}

/// A wire permutation in one-line notation: output bit `i` = input bit
/// `map[i]` (0-based internally).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermutationGate {
    map: Vec<usize>,
}

impl PermutationGate {
    /// From 1-based one-line notation as serialized.
    pub fn from_one_line(one_based: &[usize]) -> Result<Self> {
        let n = one_based.len();
        let mut map = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        for &w in one_based {
            if w == 0 || w > n || seen[w - 1] {
                return Err(Error::NotBijection);
            }
            seen[w - 1] = true;
            map.push(w - 1);
        }
        Ok(PermutationGate { map })
    }

    /// Parses cycle notation such as `"(1,2,3)(4,5)"` on `n` wires; a cycle
    /// `(a,b,c)` maps a→b→c→a. Fixed points may be omitted.
    pub fn from_cycles(s: &str, n: usize) -> Result<Self> {
        let mut one_based: Vec<usize> = (1..=n).collect();
        let body = s.trim();
        if !body.is_empty() {
            for cycle in body.split(')') {
                let cycle = cycle.trim().trim_start_matches('(').trim();
                if cycle.is_empty() {
                    continue;
                }
                let elems: Vec<usize> = cycle
                    .split(',')
                    .map(|tok| {
                        tok.trim()
                            .parse::<usize>()
                            .map_err(|_| Error::BadParameter(format!("bad cycle entry '{tok}'")))
                    })
                    .collect::<Result<_>>()?;
                for (i, &a) in elems.iter().enumerate() {
                    let b = elems[(i + 1) % elems.len()];
                    if a == 0 || a > n || b == 0 || b > n {
                        return Err(Error::BadParameter(format!("cycle entry out of 1..={n}")));
                    }
                    one_based[a - 1] = b;
                }
            }
        }
        Self::from_one_line(&one_based)
    }

    pub fn identity(n: usize) -> Self {
        PermutationGate { map: (0..n).collect() }
    }

    /// Uniformly random permutation.
    pub fn random(n: usize, rng: &mut DetRng) -> Self {
        use rand::seq::SliceRandom;
        let mut map: Vec<usize> = (0..n).collect();
        map.shuffle(rng);
        PermutationGate { map }
    }

    pub fn wires(&self) -> usize {
        self.map.len()
    }

    /// One-line notation, 1-based, as serialized.
    pub fn one_line(&self) -> Vec<usize> {
        self.map.iter().map(|&w| w + 1).collect()
    }

    /// Output bit `i` = input bit `π(i)`.
    pub fn apply(&self, x: &BitString) -> Result<BitString> {
        if x.len() != self.wires() {
            return Err(Error::LengthMismatch { want: self.wires(), got: x.len() });
        }
        Ok(self.forward(*x))
    }

    #[inline]
    pub(crate) fn forward(&self, x: BitString) -> BitString {
        let mut y = BitString::zeros(self.wires());
        for (i, &src) in self.map.iter().enumerate() {
            if x.bit(src) {
                y.set(i, true);
            }
        }
        y
    }

    #[inline]
    pub(crate) fn backward(&self, y: BitString) -> BitString {
        let mut x = BitString::zeros(self.wires());
        for (i, &src) in self.map.iter().enumerate() {
            if y.bit(i) {
                x.set(src, true);
            }
        }
        x
    }

    /// Cycle lengths (including fixed points), largest first.
    pub fn cycle_type(&self) -> Vec<usize> {
        let n = self.wires();
        let mut seen = vec![false; n];
        let mut cycles = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut w = start;
            while !seen[w] {
                seen[w] = true;
                len += 1;
                w = self.map[w];
            }
            cycles.push(len);
        }
        cycles.sort_unstable_by(|a, b| b.cmp(a));
        cycles
    }
}

impl Serialize for PermutationGate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Spec {
            perm: Vec<usize>,
        }
        Spec { perm: self.one_line() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PermutationGate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        #[derive(Deserialize)]
        struct Spec {
            perm: Vec<usize>,
        }
        let spec = Spec::deserialize(d)?;
        PermutationGate::from_one_line(&spec.perm).map_err(D::Error::custom)
    }
}

/// The block-swap permutation exchanging wire `n+i` with wire `n−k+i` for
/// `1 ≤ i ≤ k` (1-based) on `n + k` wires.
pub fn build_uswaps(n: usize, k: usize) -> Result<PermutationGate> {
    if k == 0 || k > n {
        return Err(Error::BadK { n, k });
    }
    let mut map: Vec<usize> = (0..n + k).collect();
    for i in 0..k {
        map.swap(n + i, n - k + i);
    }
    Ok(PermutationGate { map })
}

/// The swap layer used by the marginal estimator: exchanges wire `i` with
/// wire `n+i` for `1 ≤ i ≤ k` (1-based) on `n + k` wires, moving a k-qubit
/// ancilla register onto the first k system wires.
pub fn build_prefix_swaps(n: usize, k: usize) -> Result<PermutationGate> {
    if k == 0 || k > n {
        return Err(Error::BadK { n, k });
    }
    let mut map: Vec<usize> = (0..n + k).collect();
    for i in 0..k {
        map.swap(i, n + i);
    }
    Ok(PermutationGate { map })
}

/// A classical reversible map on bitstrings: a gate list or a permutation.
#[derive(Clone, Debug, PartialEq)]
pub enum ClassicalMap {
    Identity(usize),
    Circuit(ReversibleCircuit),
    Perm(PermutationGate),
}

impl ClassicalMap {
    pub fn wires(&self) -> usize {
        match self {
            ClassicalMap::Identity(n) => *n,
            ClassicalMap::Circuit(c) => c.wires(),
            ClassicalMap::Perm(p) => p.wires(),
        }
    }

    #[inline]
    pub fn forward(&self, x: BitString) -> BitString {
        debug_assert_eq!(x.len(), self.wires());
        match self {
            ClassicalMap::Identity(_) => x,
            ClassicalMap::Circuit(c) => c.forward(x),
            ClassicalMap::Perm(p) => p.forward(x),
        }
    }

    #[inline]
    pub fn backward(&self, x: BitString) -> BitString {
        debug_assert_eq!(x.len(), self.wires());
        match self {
            ClassicalMap::Identity(_) => x,
            ClassicalMap::Circuit(c) => c.backward(x),
            ClassicalMap::Perm(p) => p.backward(x),
        }
    }
}

/// `W (|J, M⟩ ⊗ |0…0⟩)`: a coupled-basis state on `n` qubits, `k` ancilla
/// wires cleared, then a classical circuit over all `n + k` wires.
///
/// Amplitudes evaluate through the inverse circuit and samples push basis
/// draws forward, so the state stays exactly samplable and evaluable.
#[derive(Clone, Debug)]
pub struct PreparedState {
    map: ClassicalMap,
    label: SchurLabel,
    ancillas: usize,
}

impl PreparedState {
    pub fn new(map: ClassicalMap, label: SchurLabel, ancillas: usize) -> Result<Self> {
        let want = label.qubits() + ancillas;
        if map.wires() != want {
            return Err(Error::LengthMismatch { want, got: map.wires() });
        }
        Ok(PreparedState { map, label, ancillas })
    }

    /// Without ancillas: `W |J, M⟩`.
    pub fn plain(map: ClassicalMap, label: SchurLabel) -> Result<Self> {
        Self::new(map, label, 0)
    }

    pub fn wires(&self) -> usize {
        self.label.qubits() + self.ancillas
    }

    pub fn label(&self) -> &SchurLabel {
        &self.label
    }

    pub fn map(&self) -> &ClassicalMap {
        &self.map
    }

    /// `⟨x| W (|J,M⟩ ⊗ |0⟩^k) = ⟨w⁻¹(x)| (|J,M⟩ ⊗ |0⟩^k)`.
    pub fn amplitude(&self, x: &BitString) -> Result<f64> {
        if x.len() != self.wires() {
            return Err(Error::LengthMismatch { want: self.wires(), got: x.len() });
        }
        Ok(self.amplitude_unchecked(x))
    }

    #[inline]
    pub(crate) fn amplitude_unchecked(&self, x: &BitString) -> f64 {
        let pre = self.map.backward(*x);
        let n = self.label.qubits();
        if pre.index() >> n != 0 {
            return 0.0; // an ancilla bit is set
        }
        self.label.amplitude_unchecked(&pre.slice(0, n))
    }

    pub fn sample(&self, rng: &mut DetRng) -> BitString {
        self.sample_with_amplitude(rng).0
    }

    pub fn sample_with_amplitude(&self, rng: &mut DetRng) -> (BitString, f64) {
        let (y, a) = self.label.sample_with_amplitude(rng);
        let full = y.concat(&BitString::zeros(self.ancillas));
        (self.map.forward(full), a)
    }

    /// Dense amplitude vector on all `n + k` wires (oracle use).
    pub fn dense(&self) -> Result<DenseState> {
        let w = self.wires();
        crate::state::check_dense(w)?;
        let mut amps = vec![0.0; 1 << w];
        let n = self.label.qubits();
        for x in 0..1u128 << n {
            let pre = BitString::from_index(x, w);
            let a = self.label.amplitude_unchecked(&pre.slice(0, n));
            if a != 0.0 {
                amps[self.map.forward(pre).index_usize()] = a;
            }
        }
        Ok(DenseState::new(w, amps))
    }

    /// Exact output distribution over every `(path, 2M)` pair, by dense
    /// expansion over the coupled basis (oracle use, guarded size).
    pub fn output_distribution(&self) -> Result<Vec<(SchurLabel, f64)>> {
        crate::state::schur_distribution(&self.dense()?)
    }
}
