//! Approximate sampling of near-sparse output distributions.
//!
//! If the output distribution over `(path, M)` pairs is within ε total
//! variation of some t-sparse distribution, then running the heavy-path
//! search at threshold θ = ε/t, refining each survivor's per-M
//! probabilities, and spreading the leftover mass uniformly over all
//! remaining pairs yields a distribution within 6ε of the truth — and one
//! that can be sampled exactly: a biased coin picks the heavy table or the
//! uniform tail, and the tail is drawn by rejection against the heavy set.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimate::CtState;
use crate::heavy::{km_search, resolve_heavy_probabilities, HeavyList, KmParams};
use crate::seed::{mix, DetRng};
use crate::spin::{
    sample_uniform_label_gnw, sample_uniform_label_rejection, DoubledAzimuthal, SpinPath,
};
use crate::state::SchurLabel;

/// Inputs to the sparse-sampling pipeline. `epsilon` and `t` fix the
/// search threshold θ = ε/t; `failure_budget` is split evenly between the
/// heavy search and the per-entry refinements.
#[derive(Clone, Copy, Debug)]
pub struct SparsityParams {
    pub epsilon: f64,
    pub t: u64,
    pub failure_budget: f64,
    pub seed: u64,
}

impl SparsityParams {
    pub fn new(epsilon: f64, t: u64, failure_budget: f64, seed: u64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::BadParameter(format!("epsilon {epsilon} outside (0, 1)")));
        }
        if t == 0 {
            return Err(Error::BadParameter("sparsity t must be ≥ 1".into()));
        }
        if !(failure_budget > 0.0 && failure_budget < 1.0) {
            return Err(Error::BadParameter(format!(
                "failure budget {failure_budget} outside (0, 1)"
            )));
        }
        Ok(SparsityParams { epsilon, t, failure_budget, seed })
    }

    pub fn theta(&self) -> f64 {
        self.epsilon / self.t as f64
    }
}

/// Which uniform tail sampler backs the rejection loop; both have the
/// exactly-uniform 2^{−n} law.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TailSampler {
    #[default]
    Rejection,
    Gnw,
}

/// The built approximation: a heavy table plus a uniform tail weight.
#[derive(Clone, Debug, Serialize)]
pub struct ApproxDistribution {
    pub n: usize,
    pub theta: f64,
    pub epsilon_prime: f64,
    /// Heavy pairs with their (floored, possibly rescaled) probabilities.
    pub heavy: Vec<HeavyPair>,
    /// Total heavy mass, the bias of the table-vs-tail coin.
    pub heavy_mass: f64,
    /// Probability of each single pair outside the heavy paths.
    pub tail_weight: f64,
    /// The normalization α = 1/(2^n − Σ_{heavy}(2J+1)) as an exact
    /// fraction string.
    pub alpha: String,
    /// Number of pairs outside the heavy paths (denominator of α).
    #[serde(serialize_with = "crate::sparse::serialize_biguint")]
    pub tail_pairs: BigUint,
    pub halted_at: Option<usize>,
    pub level_widths: Vec<usize>,
    #[serde(skip)]
    heavy_paths: BTreeSet<SpinPath>,
}

#[derive(Clone, Debug, Serialize)]
pub struct HeavyPair {
    pub path: SpinPath,
    pub twice_m: i32,
    pub estimate: f64,
}

pub(crate) fn serialize_biguint<S: serde::Serializer>(
    v: &BigUint,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

impl ApproxDistribution {
    /// The normalization factor α = 1/(2^n − Σ_{heavy paths} (2J+1)) as an
    /// exact fraction string; `"1/0"` marks an empty tail.
    pub fn alpha_fraction(&self) -> String {
        format!("1/{}", self.tail_pairs)
    }

    /// Probability assigned to one pair.
    pub fn probability_of(&self, path: &SpinPath, twice_m: i32) -> f64 {
        if self.heavy_paths.contains(path) {
            self.heavy
                .iter()
                .find(|h| h.path == *path && h.twice_m == twice_m)
                .map(|h| h.estimate)
                .unwrap_or(0.0)
        } else {
            self.tail_weight
        }
    }

    /// Total mass: heavy table plus tail; equals 1 up to rounding.
    pub fn total_mass(&self) -> f64 {
        self.heavy_mass + self.tail_weight * self.tail_pairs.to_f64().unwrap_or(0.0)
    }
}

/// Runs the full pipeline: heavy search at θ = ε/t, per-M refinement at
/// ε′ = min(ε/((n+1)|L|), ε/4t), tail weight α(1 − Σ p̃) floored at zero.
pub fn build_approx_distribution(
    phi: &dyn CtState,
    params: &SparsityParams,
) -> Result<ApproxDistribution> {
    let km = KmParams::new(params.theta(), params.failure_budget / 2.0, mix(params.seed, 0))?;
    let list = km_search(phi, &km)?;
    build_from_heavy_list(phi, params, &list)
}

/// The resolution-and-normalization half of the pipeline, reusable when a
/// heavy list is already available.
pub fn build_from_heavy_list(
    phi: &dyn CtState,
    params: &SparsityParams,
    list: &HeavyList,
) -> Result<ApproxDistribution> {
    let n = phi.wires();
    let theta = params.theta();
    let heavy_count = list.entries.len() as u64;
    let epsilon_prime = if heavy_count == 0 {
        params.epsilon / (4.0 * params.t as f64)
    } else {
        (params.epsilon / ((n as f64 + 1.0) * heavy_count as f64))
            .min(params.epsilon / (4.0 * params.t as f64))
    };

    let slots: u64 = list.entries.iter().map(|e| e.path.endpoint().multiplicity() as u64).sum();
    let per_entry_delta = if slots == 0 {
        0.5 // unused
    } else {
        (params.failure_budget / 2.0) / slots as f64
    };
    let resolved = resolve_heavy_probabilities(
        phi,
        list,
        epsilon_prime,
        per_entry_delta,
        mix(params.seed, 1),
    )?;

    let heavy_paths: BTreeSet<SpinPath> = list.entries.iter().map(|e| e.path).collect();
    let mut heavy: Vec<HeavyPair> = resolved
        .into_iter()
        .map(|r| HeavyPair { path: r.path, twice_m: r.twice_m, estimate: r.estimate })
        .collect();

    let tail_pairs = (BigUint::one() << n) - BigUint::from(slots);
    let mut heavy_sum: f64 = heavy.iter().map(|h| h.estimate).sum();
    let tail_weight;
    if tail_pairs.is_zero() {
        // Every pair is heavy; a legal vector requires exact unit mass.
        if heavy_sum > 0.0 {
            for h in &mut heavy {
                h.estimate /= heavy_sum;
            }
        }
        heavy_sum = 1.0;
        tail_weight = 0.0;
    } else if heavy_sum >= 1.0 {
        // Estimation noise pushed the table above unit mass: floor the
        // tail at zero and rescale the table.
        for h in &mut heavy {
            h.estimate /= heavy_sum;
        }
        heavy_sum = 1.0;
        tail_weight = 0.0;
    } else {
        tail_weight = (1.0 - heavy_sum) / tail_pairs.to_f64().expect("tail pair count is finite");
    }

    Ok(ApproxDistribution {
        n,
        theta,
        epsilon_prime,
        heavy,
        heavy_mass: heavy_sum,
        tail_weight,
        alpha: format!("1/{tail_pairs}"),
        tail_pairs,
        halted_at: list.halted_at,
        level_widths: list.level_widths.clone(),
        heavy_paths,
    })
}

const TAIL_REDRAW_CAP: usize = 1 << 20;

/// Draws one `(path, 2M)` pair from the approximation: a coin with the
/// heavy-table bias, then either a table lookup or uniform rejection
/// against the heavy paths.
pub fn sample(
    dist: &ApproxDistribution,
    tail: TailSampler,
    rng: &mut DetRng,
) -> Result<(SpinPath, DoubledAzimuthal)> {
    let u = rng.gen::<f64>();
    if u < dist.heavy_mass {
        let target = u; // reuse the coin as the table coordinate
        let mut acc = 0.0;
        for h in &dist.heavy {
            acc += h.estimate;
            if target < acc {
                return Ok((h.path, DoubledAzimuthal(h.twice_m)));
            }
        }
        if let Some(h) = dist.heavy.last() {
            return Ok((h.path, DoubledAzimuthal(h.twice_m)));
        }
    }
    for _ in 0..TAIL_REDRAW_CAP {
        let (path, m) = match tail {
            TailSampler::Rejection => sample_uniform_label_rejection(dist.n, rng)?,
            TailSampler::Gnw => sample_uniform_label_gnw(dist.n, rng)?,
        };
        if !dist.heavy_paths.contains(&path) {
            return Ok((path, m));
        }
    }
    Err(Error::SamplerStalled(TAIL_REDRAW_CAP))
}

/// Outcome of the exact support check against a full distribution.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SupportCheck {
    /// Twice the mass outside the best t-element support — the exact
    /// distance to the nearest t-sparse distribution.
    pub best_t_distance: f64,
    /// Whether that distance is within ε (the premise of the tail bound).
    pub sparse_verified: bool,
    /// Mass on pairs at or below the ε/t cutoff.
    pub off_support_mass: f64,
    /// Whether the 2ε tail bound holds (vacuous unless verified).
    pub bound_holds: bool,
}

/// Exact support bound check on an oracle distribution: with
/// S = {pairs with p > ε/t}, near-sparsity forces the off-S mass ≤ 2ε.
pub fn support_bound_check(
    dist: &[(SchurLabel, f64)],
    t: u64,
    epsilon: f64,
) -> Result<SupportCheck> {
    if t == 0 {
        return Err(Error::BadParameter("sparsity t must be ≥ 1".into()));
    }
    let mut probs: Vec<f64> = dist.iter().map(|(_, p)| *p).collect();
    probs.sort_unstable_by(|a, b| b.total_cmp(a));
    let top_t: f64 = probs.iter().take(t as usize).sum();
    let best_t_distance = 2.0 * (1.0 - top_t).max(0.0);
    let cutoff = epsilon / t as f64;
    let off_support_mass: f64 = probs.iter().filter(|&&p| p <= cutoff).sum();
    let sparse_verified = best_t_distance <= epsilon;
    Ok(SupportCheck {
        best_t_distance,
        sparse_verified,
        off_support_mass,
        bound_holds: !sparse_verified || off_support_mass <= 2.0 * epsilon,
    })
}

/// Total variation distance between the approximation and a full oracle
/// distribution over all 2^n pairs.
pub fn tv_distance_to(dist: &ApproxDistribution, oracle: &[(SchurLabel, f64)]) -> f64 {
    let mut sum = 0.0;
    for (label, p) in oracle {
        sum += (dist.probability_of(label.path(), label.twice_m()) - p).abs();
    }
    0.5 * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{ClassicalMap, PreparedState};
    use crate::seed::rng_from;
    use crate::spin::enumerate_paths;

    fn prepared(path: &str, twice_m: i32) -> PreparedState {
        let label = SchurLabel::new(SpinPath::parse(path).unwrap(), twice_m).unwrap();
        let n = label.qubits();
        PreparedState::plain(ClassicalMap::Identity(n), label).unwrap()
    }

    #[test]
    fn alpha_formula_instance() {
        // n = 3 with the fully stretched path heavy: Σ(2J+1) = 4, α = 1/4.
        let phi = prepared("11", 1);
        let params = SparsityParams::new(0.4, 1, 0.2, 3).unwrap();
        let d = build_approx_distribution(&phi, &params).unwrap();
        assert_eq!(d.heavy.len(), 4);
        assert_eq!(d.tail_pairs, BigUint::from(4u32));
        assert_eq!(d.alpha_fraction(), "1/4");
        assert!((d.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn epsilon_prime_formula() {
        // ε = 0.2, t = 4, n = 3, |L| = 2 → ε′ = min(0.2/8, 0.2/16) = 0.0125.
        let eps: f64 = 0.2;
        let t = 4u64;
        let n = 3usize;
        let l = 2u64;
        let expected = (eps / ((n as f64 + 1.0) * l as f64)).min(eps / (4.0 * t as f64));
        assert!((expected - 0.0125).abs() < 1e-15);
    }

    #[test]
    fn delta_distribution_concentrates() {
        let phi = prepared("01", 1);
        let params = SparsityParams::new(0.2, 1, 0.2, 11).unwrap();
        let d = build_approx_distribution(&phi, &params).unwrap();
        assert!((d.total_mass() - 1.0).abs() < 1e-12);
        let main = d
            .heavy
            .iter()
            .find(|h| h.path.to_string() == "01" && h.twice_m == 1)
            .expect("heavy entry present");
        assert!(main.estimate > 0.9);
        assert!(d.tail_weight < 0.05);
        let mut rng = rng_from(4);
        for _ in 0..32 {
            let (p, m) = sample(&d, TailSampler::Rejection, &mut rng).unwrap();
            if p.to_string() == "01" {
                assert!(m.0 == 1 || m.0 == -1);
            }
        }
    }

    #[test]
    fn pure_tail_is_uniform() {
        // An empty heavy list is legal; sampling must be uniform over all
        // 2^n pairs.
        let phi = prepared("101", 0);
        let params = SparsityParams::new(0.9, 1, 0.2, 5).unwrap();
        let empty = crate::heavy::HeavyList {
            theta: params.theta(),
            gamma: 0.1,
            entries: Vec::new(),
            level_widths: Vec::new(),
            halted_at: None,
            samples_used: 0,
        };
        let d = build_from_heavy_list(&phi, &params, &empty).unwrap();
        assert!(d.heavy.is_empty());
        assert_eq!(d.tail_pairs, BigUint::from(16u32));
        assert!((d.tail_weight - 1.0 / 16.0).abs() < 1e-12);

        let mut rng = rng_from(8);
        let mut counts = std::collections::BTreeMap::new();
        let draws = 16_000;
        for _ in 0..draws {
            let (p, m) = sample(&d, TailSampler::Rejection, &mut rng).unwrap();
            *counts.entry((p.to_string(), m.0)).or_insert(0u32) += 1;
        }
        assert_eq!(counts.len(), 16);
        for (_, c) in counts {
            assert!((c as f64 - 1000.0).abs() < 200.0, "count {c}");
        }
    }

    #[test]
    fn tail_samplers_agree() {
        let phi = prepared("10", 1);
        let params = SparsityParams::new(0.3, 1, 0.2, 6).unwrap();
        let d = build_approx_distribution(&phi, &params).unwrap();
        let draws = 20_000;
        let tally = |mode: TailSampler, seed: u64| {
            let mut rng = rng_from(seed);
            let mut counts = std::collections::BTreeMap::new();
            for _ in 0..draws {
                let (p, m) = sample(&d, mode, &mut rng).unwrap();
                *counts.entry((p.to_string(), m.0)).or_insert(0i64) += 1;
            }
            counts
        };
        let a = tally(TailSampler::Rejection, 100);
        let b = tally(TailSampler::Gnw, 200);
        for (key, ca) in a {
            let cb = b.get(&key).copied().unwrap_or(0);
            // Two-sample agreement within Poisson noise.
            let diff = (ca - cb).abs() as f64;
            let scale = ((ca + cb) as f64).sqrt().max(1.0);
            assert!(diff < 6.0 * scale, "{key:?}: {ca} vs {cb}");
        }
    }

    #[test]
    fn support_check_examples() {
        let phi = prepared("11", 1);
        let dist = crate::state::schur_distribution(&phi.dense().unwrap()).unwrap();
        // Exactly 1-sparse: distance zero, off-support mass zero.
        let c = support_bound_check(&dist, 1, 0.1).unwrap();
        assert_eq!(c.best_t_distance, 0.0);
        assert!(c.sparse_verified);
        assert!(c.off_support_mass <= 1e-12);
        assert!(c.bound_holds);

        // Uniform over 2^n pairs is far from 1-sparse: vacuous check.
        let n = 4;
        let uniform: Vec<(SchurLabel, f64)> = enumerate_paths(n)
            .unwrap()
            .into_iter()
            .flat_map(|p| {
                p.endpoint()
                    .azimuthal_values()
                    .map(move |m| (SchurLabel::new(p, m).unwrap(), 1.0 / 16.0))
                    .collect::<Vec<_>>()
            })
            .collect();
        let c = support_bound_check(&uniform, 1, 0.4).unwrap();
        assert!(!c.sparse_verified);
        assert!(c.bound_holds); // vacuously
    }

    #[test]
    fn sampler_matches_built_distribution() {
        let phi = prepared("011", 2);
        let params = SparsityParams::new(0.25, 1, 0.2, 15).unwrap();
        let d = build_approx_distribution(&phi, &params).unwrap();
        let mut rng = rng_from(77);
        let draws = 40_000usize;
        let mut counts = std::collections::BTreeMap::new();
        for _ in 0..draws {
            let (p, m) = sample(&d, TailSampler::Rejection, &mut rng).unwrap();
            *counts.entry((p.to_string(), m.0)).or_insert(0u32) += 1;
        }
        // Empirical law matches d itself.
        for path in enumerate_paths(4).unwrap() {
            for m in path.endpoint().azimuthal_values() {
                let q = d.probability_of(&path, m);
                let c = counts.get(&(path.to_string(), m)).copied().unwrap_or(0);
                let expected = q * draws as f64;
                let tol = 6.0 * (expected.max(1.0)).sqrt() + 2.0;
                assert!(
                    (c as f64 - expected).abs() < tol,
                    "pair ({path}, {m}): {c} vs {expected}"
                );
            }
        }
    }
}
