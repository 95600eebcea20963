//! Sparsity scan over permutation-gate instances.
//!
//! For each qubit count, draws `(path, M)` inputs uniformly, applies random
//! permutation gates, computes the exact output distribution over the
//! matching spin block, and reports how often three near-sparsity proxies
//! hold:
//!
//! - A: the block holds an element above 1/(2n);
//! - B: the total mass of elements below 1/(2n²) stays under 1/(2n);
//! - B′: the same bound with the support-bound cutoff 1/(2n³) — the mass
//!   of elements below ε/t at ε = 1/n, t = 2n² (reported separately; see
//!   the survey notes in the README for why both matter);
//! - C (blocks larger than n only): all but the largest ⌊C·(log₂ d)^D⌋
//!   elements sum to less than 1/log₂ d.

use num_traits::ToPrimitive;
use rayon::prelude::*;
use schur_core::circuit::{ClassicalMap, PermutationGate, PreparedState};
use schur_core::error::{Error, Result};
use schur_core::seed::{mix, rng_from};
use schur_core::spin::{path_count, sample_uniform_label_rejection};
use schur_core::state::SchurLabel;
use serde::Serialize;

#[derive(Clone, Copy, Debug)]
pub struct ScanParams {
    pub n_lo: usize,
    pub n_hi: usize,
    pub paths_per_n: usize,
    pub perms_per_path: usize,
    pub seed: u64,
    /// Criterion-C element count is ⌊c_coeff·(log₂ d)^d_exponent⌋.
    pub c_coeff: f64,
    pub d_exponent: f64,
    pub include_instances: bool,
}

impl Default for ScanParams {
    fn default() -> Self {
        ScanParams {
            n_lo: 4,
            n_hi: 10,
            paths_per_n: 5,
            perms_per_path: 10,
            seed: 0,
            c_coeff: 1.0,
            d_exponent: 2.0,
            include_instances: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InstanceRecord {
    pub path: String,
    pub twice_m: i32,
    pub perm: Vec<usize>,
    pub block_dim: u64,
    pub largest: f64,
    pub pass_a: bool,
    pub pass_b: bool,
    pub pass_b_support: bool,
    pub pass_c: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SparsityRow {
    pub n: usize,
    pub instances: usize,
    pub pass_a: usize,
    pub pass_b: usize,
    pub pass_b_support: usize,
    pub c_evaluated: usize,
    pub pass_c: usize,
    pub fraction_a: f64,
    pub fraction_b: f64,
    pub fraction_b_support: f64,
    pub fraction_c: Option<f64>,
    /// 95% Wilson intervals for the two criterion-B pass fractions.
    pub wilson_b: (f64, f64),
    pub wilson_b_support: (f64, f64),
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub records: Vec<InstanceRecord>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SparsityReport {
    pub seed: u64,
    pub paths_per_n: usize,
    pub perms_per_path: usize,
    pub c_coeff: f64,
    pub d_exponent: f64,
    pub rows: Vec<SparsityRow>,
}

/// 95% Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = (z / denom) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

pub fn sparsity_scan(params: &ScanParams) -> Result<SparsityReport> {
    if params.n_lo < 2 || params.n_hi < params.n_lo {
        return Err(Error::BadParameter("scan range must satisfy 2 ≤ lo ≤ hi".into()));
    }
    let mut rows = Vec::new();
    for n in params.n_lo..=params.n_hi {
        let jobs: Vec<(usize, usize)> = (0..params.paths_per_n)
            .flat_map(|p| (0..params.perms_per_path).map(move |q| (p, q)))
            .collect();
        let records: Vec<InstanceRecord> = jobs
            .into_par_iter()
            .map(|(path_idx, perm_idx)| -> Result<InstanceRecord> {
                let seed = mix(mix(mix(params.seed, n as u64), path_idx as u64), perm_idx as u64);
                let mut rng = rng_from(seed);
                let (path, m) = sample_uniform_label_rejection(n, &mut rng)?;
                let perm = PermutationGate::random(n, &mut rng);
                let label = SchurLabel::new(path, m.0)?;
                let phi = PreparedState::plain(ClassicalMap::Perm(perm.clone()), label)?;
                let dist = phi.output_distribution()?;
                // The permutation preserves (J, M): the support is the
                // block of paths sharing the input's endpoint and M.
                let block: Vec<f64> = dist
                    .iter()
                    .filter(|(l, _)| l.path().endpoint() == path.endpoint() && l.twice_m() == m.0)
                    .map(|(_, p)| *p)
                    .collect();
                let block_mass: f64 = block.iter().sum();
                debug_assert!((block_mass - 1.0).abs() < 1e-9);
                let d =
                    path_count(n, path.endpoint())?.to_u64().expect("block dimension fits u64");
                let nf = n as f64;
                let largest = block.iter().cloned().fold(0.0, f64::max);
                let pass_a = largest > 1.0 / (2.0 * nf);
                let small_mass: f64 =
                    block.iter().filter(|&&p| p < 1.0 / (2.0 * nf * nf)).sum();
                let pass_b = small_mass < 1.0 / (2.0 * nf);
                let support_mass: f64 =
                    block.iter().filter(|&&p| p < 1.0 / (2.0 * nf * nf * nf)).sum();
                let pass_b_support = support_mass < 1.0 / (2.0 * nf);
                let pass_c = (d as f64 > nf).then(|| {
                    let log_d = (d as f64).log2();
                    let keep = (params.c_coeff * log_d.powf(params.d_exponent)).floor() as usize;
                    let mut sorted = block.clone();
                    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
                    let tail: f64 = sorted.iter().skip(keep).sum();
                    tail < 1.0 / log_d
                });
                Ok(InstanceRecord {
                    path: path.to_string(),
                    twice_m: m.0,
                    perm: perm.one_line(),
                    block_dim: d,
                    largest,
                    pass_a,
                    pass_b,
                    pass_b_support,
                    pass_c,
                })
            })
            .collect::<Result<_>>()?;

        let instances = records.len();
        let pass_a = records.iter().filter(|r| r.pass_a).count();
        let pass_b = records.iter().filter(|r| r.pass_b).count();
        let pass_b_support = records.iter().filter(|r| r.pass_b_support).count();
        let c_evaluated = records.iter().filter(|r| r.pass_c.is_some()).count();
        let pass_c = records.iter().filter(|r| r.pass_c == Some(true)).count();
        rows.push(SparsityRow {
            n,
            instances,
            pass_a,
            pass_b,
            pass_b_support,
            c_evaluated,
            pass_c,
            fraction_a: pass_a as f64 / instances as f64,
            fraction_b: pass_b as f64 / instances as f64,
            fraction_b_support: pass_b_support as f64 / instances as f64,
            fraction_c: (c_evaluated > 0).then(|| pass_c as f64 / c_evaluated as f64),
            wilson_b: wilson_interval(pass_b, instances),
            wilson_b_support: wilson_interval(pass_b_support, instances),
            records: if params.include_instances { records } else { Vec::new() },
        });
    }
    Ok(SparsityReport {
        seed: params.seed,
        paths_per_n: params.paths_per_n,
        perms_per_path: params.perms_per_path,
        c_coeff: params.c_coeff,
        d_exponent: params.d_exponent,
        rows,
    })
}
