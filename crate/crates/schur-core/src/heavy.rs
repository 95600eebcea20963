//! Threshold search for heavy output paths.
//!
//! Walks the branching diagram level by level: every surviving prefix is
//! extended both ways, each child's output marginal is estimated to θ/4,
//! and children with estimates ≥ 3θ/4 survive. Marginals only shrink along
//! a path, so every path with output probability above θ survives to the
//! end, while no survivor can be lighter than θ/2 (up to the per-call
//! failure probability). A level wider than 2/θ is impossible when all
//! estimates succeed, so the search then halts and reports an empty list.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimate::{
    estimate_label_probability, estimate_marginal, CtState, Estimate, EstimationParams,
};
use crate::seed::mix;
use crate::spin::SpinPath;
use crate::state::SchurLabel;

/// Threshold, overall failure budget, and master seed of one search.
#[derive(Clone, Copy, Debug)]
pub struct KmParams {
    pub theta: f64,
    pub gamma: f64,
    pub seed: u64,
}

impl KmParams {
    pub fn new(theta: f64, gamma: f64, seed: u64) -> Result<Self> {
        if theta <= 0.0 || theta.is_nan() {
            return Err(Error::BadParameter(format!("theta {theta} must be positive")));
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::BadParameter(format!("gamma {gamma} outside (0, 1)")));
        }
        Ok(KmParams { theta, gamma, seed })
    }

    /// Failure probability per marginal call. The baseline θ/(4n) keeps the
    /// whole-run failure at 2δn/θ = 1/2; smaller caller budgets tighten it
    /// to γθ/(2.2n), strictly inside the θ/(2n) bound the analysis needs.
    pub fn per_call_delta(&self, n: usize) -> f64 {
        let base = self.theta / (4.0 * n as f64);
        if self.gamma >= 0.5 {
            base
        } else {
            self.gamma * self.theta / (2.2 * n as f64)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HeavyEntry {
    pub path: SpinPath,
    pub estimate: f64,
}

/// The search result: surviving paths with their marginal estimates, the
/// width of every level, and whether the width cap fired (an empty output
/// with `halted_at` set is an abort, not a genuinely empty heavy set).
#[derive(Clone, Debug, Serialize)]
pub struct HeavyList {
    pub theta: f64,
    pub gamma: f64,
    pub entries: Vec<HeavyEntry>,
    pub level_widths: Vec<usize>,
    pub halted_at: Option<usize>,
    pub samples_used: u64,
}

impl HeavyList {
    pub fn contains(&self, path: &SpinPath) -> bool {
        self.entries.iter().any(|e| e.path == *path)
    }
}

/// Finds every n-qubit path whose output probability under φ exceeds θ.
pub fn km_search(phi: &dyn CtState, params: &KmParams) -> Result<HeavyList> {
    let n = phi.wires();
    let delta = params.per_call_delta(n.max(2));
    km_search_with(n, params, |prefix, level, child| {
        let sub = EstimationParams {
            epsilon: params.theta / 4.0,
            delta,
            seed: mix(mix(params.seed, level as u64), child as u64),
        };
        estimate_marginal(prefix, phi, &sub)
    })
}

/// Search skeleton with the marginal estimator injected; the chain of
/// levels, the 3θ/4 acceptance rule, and the 2/θ width cap live here.
pub(crate) fn km_search_with(
    n: usize,
    params: &KmParams,
    estimator: impl Fn(&SpinPath, usize, usize) -> Result<Estimate> + Sync,
) -> Result<HeavyList> {
    let mut out = HeavyList {
        theta: params.theta,
        gamma: params.gamma,
        entries: Vec::new(),
        level_widths: Vec::new(),
        halted_at: None,
        samples_used: 0,
    };
    if n == 0 {
        return Err(Error::BadParameter("state has no wires".into()));
    }
    if n == 1 {
        // Level-by-level search is vacuous: report the single path with an
        // honest estimate of its (unit) marginal.
        let root = SpinPath::single_qubit();
        let est = estimator(&root, 1, 0)?;
        out.samples_used = est.samples_used;
        out.level_widths.push(1);
        if est.value >= 0.75 * params.theta {
            out.entries.push(HeavyEntry { path: root, estimate: est.value });
        }
        return Ok(out);
    }

    let width_cap = 2.0 / params.theta;
    let mut survivors = vec![SpinPath::single_qubit()];
    for level in 2..=n {
        let children: Vec<SpinPath> = survivors
            .iter()
            .flat_map(|p| [p.extended(false), p.extended(true)])
            .flatten()
            .collect();
        let estimates: Vec<Estimate> = children
            .par_iter()
            .enumerate()
            .map(|(child, prefix)| estimator(prefix, level, child))
            .collect::<Result<_>>()?;
        out.samples_used += estimates.iter().map(|e| e.samples_used).sum::<u64>();
        let mut next = Vec::new();
        let mut kept = Vec::new();
        for (prefix, est) in children.into_iter().zip(&estimates) {
            if est.value >= 0.75 * params.theta {
                next.push(prefix);
                kept.push(est.value);
            }
        }
        out.level_widths.push(next.len());
        if next.len() as f64 > width_cap {
            out.halted_at = Some(level);
            out.entries.clear();
            return Ok(out);
        }
        if next.is_empty() {
            return Ok(out);
        }
        if level == n {
            out.entries = next
                .into_iter()
                .zip(kept)
                .map(|(path, estimate)| HeavyEntry { path, estimate })
                .collect();
            return Ok(out);
        }
        survivors = next;
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct ResolvedEntry {
    pub path: SpinPath,
    pub twice_m: i32,
    pub estimate: f64,
}

/// Per-azimuthal output probabilities for every heavy path: each of the
/// 2J+1 values of M is estimated to ε with failure δ.
pub fn resolve_heavy_probabilities(
    phi: &dyn CtState,
    list: &HeavyList,
    epsilon: f64,
    delta: f64,
    seed: u64,
) -> Result<Vec<ResolvedEntry>> {
    let jobs: Vec<(usize, SpinPath, i32)> = list
        .entries
        .iter()
        .enumerate()
        .flat_map(|(i, e)| {
            e.path.endpoint().azimuthal_values().map(move |tm| (i, e.path, tm))
        })
        .collect();
    jobs.into_par_iter()
        .map(|(i, path, twice_m)| {
            let label = SchurLabel::new(path, twice_m)?;
            let sub = EstimationParams::new(epsilon, delta, mix(mix(seed, i as u64), twice_m as i64 as u64))?;
            let est = estimate_label_probability(&label, phi, &sub)?;
            Ok(ResolvedEntry { path, twice_m, estimate: est.value })
        })
        .collect()
}
