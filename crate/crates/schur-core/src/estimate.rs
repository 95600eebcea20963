//! Monte Carlo (ε, δ)-approximation of overlaps between exactly samplable
//! states and of branching-prefix marginals.
//!
//! A tractable state exposes amplitude evaluation and exact sampling from
//! the squared-amplitude law. The overlap ⟨φ|ψ⟩ is estimated from draws
//! x ~ |φ(x)|² through the ratio Z = ψ(x)/φ(x), whose mean is the overlap
//! and whose second moment is exactly 1; a median of batch means turns the
//! Chebyshev batch guarantee into an exponential tail.
//!
//! The marginal of a length-k branching prefix is a sum of 2j+1 overlaps:
//! for each azimuthal value m, the product state |φ⟩⊗|j,m⟩ on n+k wires is
//! compared against itself with the ancilla register swapped onto the
//! first k system wires, which contracts |j,m⟩⟨j,m| against the prefix
//! qubits of φ.

use rayon::prelude::*;

use crate::bits::BitString;
use crate::circuit::{build_prefix_swaps, PermutationGate, PreparedState};
use crate::error::{Error, Result};
use crate::seed::{mix, rng_from, DetRng};
use crate::spin::SpinPath;
use crate::state::SchurLabel;

/// Additive accuracy, failure probability, and master seed of one estimate.
#[derive(Clone, Copy, Debug)]
pub struct EstimationParams {
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
}

impl EstimationParams {
    pub fn new(epsilon: f64, delta: f64, seed: u64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 2.0) {
            return Err(Error::BadParameter(format!("epsilon {epsilon} outside (0, 2]")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::BadParameter(format!("delta {delta} outside (0, 1)")));
        }
        Ok(EstimationParams { epsilon, delta, seed })
    }

    /// Samples per batch: ⌈8/ε²⌉.
    pub fn batch_size(&self) -> u64 {
        (8.0 / (self.epsilon * self.epsilon)).ceil() as u64
    }

    /// Batches: ⌈18·ln(2/δ)⌉.
    pub fn batch_count(&self) -> u64 {
        (18.0 * (2.0 / self.delta).ln()).ceil() as u64
    }
}

/// A state with classically samplable output law and computable amplitudes.
pub trait CtState: Send + Sync {
    fn wires(&self) -> usize;

    /// `⟨x|φ⟩`; length is the caller's responsibility.
    fn amplitude_at(&self, x: &BitString) -> f64;

    /// Draws x with probability `amplitude_at(x)²` and returns the
    /// amplitude of the drawn string alongside.
    fn sample_with_amplitude(&self, rng: &mut DetRng) -> (BitString, f64);

    fn sample_state(&self, rng: &mut DetRng) -> BitString {
        self.sample_with_amplitude(rng).0
    }

    /// Concrete access for the specialized product-form fast path of the
    /// marginal estimator; `None` falls back to the generic construction.
    fn as_prepared(&self) -> Option<&PreparedState> {
        None
    }
}

impl CtState for SchurLabel {
    fn wires(&self) -> usize {
        self.qubits()
    }

    fn amplitude_at(&self, x: &BitString) -> f64 {
        self.amplitude_unchecked(x)
    }

    fn sample_with_amplitude(&self, rng: &mut DetRng) -> (BitString, f64) {
        SchurLabel::sample_with_amplitude(self, rng)
    }
}

impl CtState for PreparedState {
    fn wires(&self) -> usize {
        PreparedState::wires(self)
    }

    fn amplitude_at(&self, x: &BitString) -> f64 {
        self.amplitude_unchecked(x)
    }

    fn sample_with_amplitude(&self, rng: &mut DetRng) -> (BitString, f64) {
        PreparedState::sample_with_amplitude(self, rng)
    }

    fn as_prepared(&self) -> Option<&PreparedState> {
        Some(self)
    }
}

/// Tensor product of two tractable states; `left` occupies the low wires.
pub struct ProductState<'a> {
    pub left: &'a dyn CtState,
    pub right: &'a dyn CtState,
}

impl CtState for ProductState<'_> {
    fn wires(&self) -> usize {
        self.left.wires() + self.right.wires()
    }

    fn amplitude_at(&self, x: &BitString) -> f64 {
        let nl = self.left.wires();
        let a = self.left.amplitude_at(&x.slice(0, nl));
        if a == 0.0 {
            return 0.0;
        }
        a * self.right.amplitude_at(&x.slice(nl, x.len() - nl))
    }

    fn sample_with_amplitude(&self, rng: &mut DetRng) -> (BitString, f64) {
        let (xl, al) = self.left.sample_with_amplitude(rng);
        let (xr, ar) = self.right.sample_with_amplitude(rng);
        (xl.concat(&xr), al * ar)
    }
}

/// A tractable state with a wire permutation applied.
pub struct PermutedState<'a> {
    pub inner: &'a dyn CtState,
    pub perm: &'a PermutationGate,
}

impl CtState for PermutedState<'_> {
    fn wires(&self) -> usize {
        self.inner.wires()
    }

    fn amplitude_at(&self, x: &BitString) -> f64 {
        self.inner.amplitude_at(&self.perm.backward(*x))
    }

    fn sample_with_amplitude(&self, rng: &mut DetRng) -> (BitString, f64) {
        let (x, a) = self.inner.sample_with_amplitude(rng);
        (self.perm.forward(x), a)
    }
}

/// An overlap estimate with its sampling cost.
#[derive(Clone, Copy, Debug)]
pub struct Estimate {
    pub value: f64,
    pub samples_used: u64,
}

/// Median-of-means skeleton shared by every estimator: `draw` produces one
/// sample of the unbiased ratio statistic.
fn median_of_means(
    params: &EstimationParams,
    draw: impl Fn(&mut DetRng) -> f64 + Sync,
) -> Estimate {
    let m = params.batch_size();
    let r = params.batch_count();
    let mut means: Vec<f64> = (0..r)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng_from(mix(params.seed, b));
            let mut acc = 0.0f64;
            for _ in 0..m {
                acc += draw(&mut rng);
            }
            acc / m as f64
        })
        .collect();
    means.sort_unstable_by(f64::total_cmp);
    let value = if r % 2 == 1 {
        means[(r / 2) as usize]
    } else {
        0.5 * (means[(r / 2 - 1) as usize] + means[(r / 2) as usize])
    };
    Estimate { value, samples_used: m * r }
}

/// Median-of-means estimate of `⟨φ|ψ⟩`, within ε of the truth with
/// probability at least 1 − δ.
pub fn estimate_overlap(
    phi: &dyn CtState,
    psi: &dyn CtState,
    params: &EstimationParams,
) -> Result<Estimate> {
    if phi.wires() != psi.wires() {
        return Err(Error::DimensionMismatch(phi.wires(), psi.wires()));
    }
    Ok(median_of_means(params, |rng| {
        let (x, a_phi) = phi.sample_with_amplitude(rng);
        psi.amplitude_at(&x) / a_phi
    }))
}

/// Wire limit below which the marginal kernel memoizes amplitudes in flat
/// tables; beyond it, amplitudes are walked per sample.
const KERNEL_TABLE_LIMIT: usize = 14;

/// Specialized evaluation of one azimuthal term of a marginal: the overlap
/// of `φ ⊗ |j,m⟩` with its prefix-swapped image, written in product form.
/// Bit-identical to the generic construction (the swap of wires i ↔ n+i
/// turns the permuted amplitude into φ(anc · suffix)·anc(prefix)); only
/// the evaluation route differs.
fn estimate_term_product_form(
    phi: &PreparedState,
    anc: &SchurLabel,
    params: &EstimationParams,
) -> Estimate {
    let n = phi.wires();
    let k = anc.qubits();
    let suffix_mask: u128 = !((1u128 << k) - 1);
    let pre_mask: u128 = (1u128 << k) - 1;
    let tabulate = n <= KERNEL_TABLE_LIMIT;

    let phi_table: Option<Vec<f64>> = tabulate.then(|| {
        (0..1usize << n)
            .map(|x| phi.amplitude_at(&BitString::from_index(x as u128, n)))
            .collect()
    });
    let anc_table: Option<Vec<f64>> = (k <= KERNEL_TABLE_LIMIT).then(|| {
        (0..1usize << k)
            .map(|x| anc.amplitude_at(&BitString::from_index(x as u128, k)))
            .collect()
    });
    // The classical map's action, memoized over base-label draws (whose
    // ancilla wires are always clear).
    let fwd_table: Option<Vec<u32>> = tabulate.then(|| {
        (0..1usize << phi.label().qubits())
            .map(|x| {
                let full = BitString::from_index(x as u128, n);
                phi.map().forward(full).index() as u32
            })
            .collect()
    });

    median_of_means(params, |rng| {
        let (x_phi_idx, a_phi) = match &fwd_table {
            Some(t) => {
                let (y, a) = phi.label().sample_with_amplitude(rng);
                (t[y.index_usize()] as u128, a)
            }
            None => {
                let (x, a) = phi.sample_with_amplitude(rng);
                (x.index(), a)
            }
        };
        let (x_anc, a_anc) = anc.sample_with_amplitude(rng);
        let y = x_anc.index() | (x_phi_idx & suffix_mask);
        let phi_y = match &phi_table {
            Some(t) => t[y as usize],
            None => phi.amplitude_at(&BitString::from_index(y, n)),
        };
        let anc_pre = match &anc_table {
            Some(t) => t[(x_phi_idx & pre_mask) as usize],
            None => anc.amplitude_at(&BitString::from_index(x_phi_idx & pre_mask, k)),
        };
        phi_y * anc_pre / (a_phi * a_anc)
    })
}

/// One azimuthal term through the explicit swap construction on n+k wires.
fn estimate_term_swapped(
    phi: &dyn CtState,
    anc: &SchurLabel,
    swaps: &PermutationGate,
    params: &EstimationParams,
) -> Result<Estimate> {
    let joint = ProductState { left: phi, right: anc };
    let swapped = PermutedState { inner: &joint, perm: swaps };
    estimate_overlap(&joint, &swapped, params)
}

/// Estimate of the output marginal of a branching prefix: the total
/// probability that the first k qubits of φ carry the prefix's spin
/// history. Each of the 2j+1 azimuthal terms is estimated to ε/(2j+1)
/// accuracy with failure share δ/(2j+1); the sum is clamped to [0, 1].
pub fn estimate_marginal(
    prefix: &SpinPath,
    phi: &dyn CtState,
    params: &EstimationParams,
) -> Result<Estimate> {
    let k = prefix.qubits();
    let n = phi.wires();
    if k > n {
        return Err(Error::PrefixTooLong { k, n });
    }
    let spin = prefix.endpoint();
    let mult = spin.multiplicity() as u64;
    let sub = EstimationParams {
        epsilon: params.epsilon / mult as f64,
        delta: params.delta / mult as f64,
        seed: params.seed,
    };
    let results: Vec<Estimate> = spin
        .azimuthal_values()
        .collect::<Vec<_>>()
        .into_par_iter()
        .enumerate()
        .map(|(i, twice_m)| -> Result<Estimate> {
            let anc = SchurLabel::new(*prefix, twice_m)?;
            let term = EstimationParams { seed: mix(params.seed, i as u64), ..sub };
            match phi.as_prepared() {
                Some(prep) => Ok(estimate_term_product_form(prep, &anc, &term)),
                None => {
                    let swaps = build_prefix_swaps(n, k)?;
                    estimate_term_swapped(phi, &anc, &swaps, &term)
                }
            }
        })
        .collect::<Result<_>>()?;
    let mut total = 0.0;
    let mut samples = 0;
    for e in &results {
        total += e.value;
        samples += e.samples_used;
    }
    Ok(Estimate { value: total.clamp(0.0, 1.0), samples_used: samples })
}

/// Estimate of a single output probability `|⟨J, M|φ⟩|²` — the full-length
/// specialization of the marginal machinery, one azimuthal term, no
/// accuracy split.
pub fn estimate_label_probability(
    label: &SchurLabel,
    phi: &dyn CtState,
    params: &EstimationParams,
) -> Result<Estimate> {
    let n = phi.wires();
    if label.qubits() != n {
        return Err(Error::DimensionMismatch(label.qubits(), n));
    }
    let est = match phi.as_prepared() {
        Some(prep) => estimate_term_product_form(prep, label, params),
        None => {
            let swaps = build_prefix_swaps(n, n)?;
            estimate_term_swapped(phi, label, &swaps, params)?
        }
    };
    Ok(Estimate { value: est.value.clamp(0.0, 1.0), samples_used: est.samples_used })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::ClassicalMap;
    use crate::spin::enumerate_paths;
    use crate::state::dense_schur_vector;

    fn label(path: &str, twice_m: i32) -> SchurLabel {
        SchurLabel::new(SpinPath::parse(path).unwrap(), twice_m).unwrap()
    }

    #[test]
    fn params_validate() {
        assert!(EstimationParams::new(0.1, 0.1, 0).is_ok());
        assert!(EstimationParams::new(0.0, 0.1, 0).is_err());
        assert!(EstimationParams::new(0.1, 1.0, 0).is_err());
        let p = EstimationParams::new(0.5, 0.1, 0).unwrap();
        assert_eq!(p.batch_size(), 32);
        assert_eq!(p.batch_count(), 54);
    }

    #[test]
    fn identical_states_give_exactly_one() {
        let l = label("10", 1);
        let p = EstimationParams::new(0.5, 0.2, 1).unwrap();
        let e = estimate_overlap(&l, &l, &p).unwrap();
        assert_eq!(e.value, 1.0);
        assert_eq!(e.samples_used, p.batch_size() * p.batch_count());
    }

    #[test]
    fn orthogonal_states_estimate_near_zero() {
        let a = label("10", 1);
        let b = label("11", 1);
        let p = EstimationParams::new(0.1, 0.05, 7).unwrap();
        let e = estimate_overlap(&a, &b, &p).unwrap();
        assert!(e.value.abs() <= 0.1, "estimate {}", e.value);
    }

    #[test]
    fn marginal_of_own_prefix_is_one() {
        let l = label("101", 0);
        let phi = PreparedState::plain(ClassicalMap::Identity(4), l).unwrap();
        let p = EstimationParams::new(0.2, 0.1, 3).unwrap();
        for k in 1..=4 {
            let prefix = SpinPath::parse(&"101"[..k - 1]).unwrap();
            let e = estimate_marginal(&prefix, &phi, &p).unwrap();
            assert!((e.value - 1.0).abs() <= 0.2, "k={k} estimate {}", e.value);
        }
        // A non-prefix gets ≈ 0.
        let other = SpinPath::parse("11").unwrap();
        let e = estimate_marginal(&other, &phi, &p).unwrap();
        assert!(e.value <= 0.2, "estimate {}", e.value);
    }

    /// The swap construction reproduces ⟨φ|j,m⟩⟨j,m|φ⟩ exactly: checked
    /// densely for every prefix and azimuthal value at n ≤ 5.
    #[test]
    fn swap_overlap_identity_dense() {
        let mut rng = rng_from(17);
        for n in 2..=5usize {
            let circuit = crate::circuit::ReversibleCircuit::random(n, 3 * n, &mut rng);
            let base = label(
                &enumerate_paths(n).unwrap()[0].to_string(),
                enumerate_paths(n).unwrap()[0].endpoint().azimuthal_values().next().unwrap(),
            );
            let phi =
                PreparedState::plain(ClassicalMap::Circuit(circuit), base).unwrap();
            let phi_dense = phi.dense().unwrap();
            for k in 1..=n {
                let swaps = build_prefix_swaps(n, k).unwrap();
                for prefix in enumerate_paths(k).unwrap() {
                    for twice_m in prefix.endpoint().azimuthal_values() {
                        let anc = SchurLabel::new(prefix, twice_m).unwrap();
                        // Dense ⟨χ|U|χ⟩ for χ = φ ⊗ |j,m⟩.
                        let joint = ProductState { left: &phi, right: &anc };
                        let total = n + k;
                        let mut lhs = 0.0;
                        for x in 0..1u128 << total {
                            let x = BitString::from_index(x, total);
                            let a = joint.amplitude_at(&x);
                            if a != 0.0 {
                                lhs += a * joint.amplitude_at(&swaps.backward(x));
                            }
                        }
                        // Exact ⟨φ|j,m⟩⟨j,m|φ⟩ by contraction of the dense state.
                        let anc_dense = dense_schur_vector(&anc).unwrap();
                        let mut rhs = 0.0;
                        for suffix in 0..1u128 << (n - k) {
                            let mut partial = 0.0;
                            for u in 0..1u128 << k {
                                let full = (suffix << k) | u;
                                partial += anc_dense.amps[u as usize]
                                    * phi_dense.amps[full as usize];
                            }
                            rhs += partial * partial;
                        }
                        assert!(
                            (lhs - rhs).abs() < 1e-10,
                            "n={n} k={k} prefix={prefix} m={twice_m}: {lhs} vs {rhs}"
                        );
                    }
                }
            }
        }
    }

    /// Exact marginals sum over both one-step extensions to the parent
    /// marginal (dense quantities, no estimation).
    #[test]
    fn dense_marginals_nest() {
        let mut rng = rng_from(23);
        let n = 5;
        let circuit = crate::circuit::ReversibleCircuit::random(n, 12, &mut rng);
        let base = label("1010", 1);
        let phi = PreparedState::plain(ClassicalMap::Circuit(circuit), base).unwrap();
        let dist = crate::state::schur_distribution(&phi.dense().unwrap()).unwrap();
        let marginal = |prefix: &SpinPath| -> f64 {
            dist.iter()
                .filter(|(l, _)| l.path().has_prefix(prefix))
                .map(|(_, p)| p)
                .sum()
        };
        for k in 1..n {
            for prefix in enumerate_paths(k).unwrap() {
                let parent = marginal(&prefix);
                let children: f64 = [false, true]
                    .into_iter()
                    .filter_map(|up| prefix.extended(up))
                    .map(|c| marginal(&c))
                    .sum();
                assert!((parent - children).abs() < 1e-12);
            }
        }
        assert!((marginal(&SpinPath::single_qubit()) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn estimated_marginal_tracks_dense_oracle() {
        let mut rng = rng_from(31);
        let n = 5;
        let circuit = crate::circuit::ReversibleCircuit::random(n, 10, &mut rng);
        let base = label("0110", 1);
        let phi = PreparedState::plain(ClassicalMap::Circuit(circuit), base).unwrap();
        let dist = crate::state::schur_distribution(&phi.dense().unwrap()).unwrap();
        let p = EstimationParams::new(0.15, 0.05, 41).unwrap();
        for prefix in enumerate_paths(3).unwrap() {
            let truth: f64 = dist
                .iter()
                .filter(|(l, _)| l.path().has_prefix(&prefix))
                .map(|(_, q)| q)
                .sum();
            let e = estimate_marginal(&prefix, &phi, &p).unwrap();
            assert!(
                (e.value - truth).abs() <= p.epsilon,
                "prefix {prefix}: {} vs {truth}",
                e.value
            );
        }
    }

    #[test]
    fn label_probability_matches_dense() {
        let n = 4;
        let perm = PermutationGate::from_cycles("(1,3)(2,4)", n).unwrap();
        let base = label("011", 2);
        let phi = PreparedState::plain(ClassicalMap::Perm(perm), base).unwrap();
        let dist = crate::state::schur_distribution(&phi.dense().unwrap()).unwrap();
        let p = EstimationParams::new(0.1, 0.05, 13).unwrap();
        for (target, truth) in dist.into_iter().filter(|(_, q)| *q > 0.05) {
            let e = estimate_label_probability(&target, &phi, &p).unwrap();
            assert!(
                (e.value - truth).abs() <= p.epsilon,
                "label {target:?}: {} vs {truth}",
                e.value
            );
        }
    }

    #[test]
    fn ratio_second_moment_is_bounded() {
        // E[Z²] = Σ ψ(x)² = 1 exactly; the empirical mean should sit within
        // a few standard errors of at most 1.
        let a = label("101", 0);
        let b = label("110", 0);
        let mut rng = rng_from(3);
        let trials = 20_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..trials {
            let (x, amp) = CtState::sample_with_amplitude(&a, &mut rng);
            let z = b.amplitude_at(&x) / amp;
            sum += z * z;
            sum_sq += z * z * z * z;
        }
        let mean = sum / trials as f64;
        let var = (sum_sq / trials as f64 - mean * mean).max(0.0);
        let stderr = (var / trials as f64).sqrt();
        assert!(mean <= 1.0 + 3.0 * stderr, "E[Z²] = {mean} ± {stderr}");
    }

    /// The product-form fast path must agree with the explicit swapped
    /// overlap bit for bit: same draws, same ratios, same medians.
    #[test]
    fn product_form_matches_swap_construction_bitwise() {
        let mut rng = rng_from(19);
        for n in 2..=5usize {
            let circuit = crate::circuit::ReversibleCircuit::random(n, 2 * n, &mut rng);
            let paths = enumerate_paths(n).unwrap();
            let base_path = paths[paths.len() / 2];
            let base = SchurLabel::new(
                base_path,
                base_path.endpoint().azimuthal_values().last().unwrap(),
            )
            .unwrap();
            let phi = PreparedState::plain(ClassicalMap::Circuit(circuit), base).unwrap();
            for k in 1..=n {
                let swaps = build_prefix_swaps(n, k).unwrap();
                for prefix in enumerate_paths(k).unwrap().into_iter().take(2) {
                    for twice_m in prefix.endpoint().azimuthal_values() {
                        let anc = SchurLabel::new(prefix, twice_m).unwrap();
                        let p = EstimationParams::new(0.4, 0.2, 1000 + n as u64).unwrap();
                        let fast = estimate_term_product_form(&phi, &anc, &p);
                        let slow = estimate_term_swapped(&phi, &anc, &swaps, &p).unwrap();
                        assert_eq!(
                            fast.value.to_bits(),
                            slow.value.to_bits(),
                            "n={n} k={k} prefix={prefix} m={twice_m}"
                        );
                        assert_eq!(fast.samples_used, slow.samples_used);
                    }
                }
            }
        }
    }

    #[test]
    fn marginal_rejects_long_prefix() {
        let l = label("1", 2);
        let p = EstimationParams::new(0.5, 0.1, 0).unwrap();
        let prefix = SpinPath::parse("111").unwrap();
        assert!(matches!(
            estimate_marginal(&prefix, &l, &p),
            Err(Error::PrefixTooLong { .. })
        ));
    }
}
