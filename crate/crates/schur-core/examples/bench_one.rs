use schur_core::circuit::{ClassicalMap, PreparedState, ReversibleCircuit};
use schur_core::heavy::{km_search, KmParams};
use schur_core::seed::{mix, rng_from};
use schur_core::state::SchurLabel;
use std::time::Instant;

fn main() {
    let mut worst = Vec::new();
    for inst in 0..100u64 {
        let n = if inst % 2 == 0 { 3 } else { 4 };
        let seed = mix(0xC6, inst);
        let mut rng = rng_from(mix(seed, 0xA11CE));
        let mut lrng = rng_from(mix(seed, 0x1AB));
        let (path, m) = schur_core::spin::sample_uniform_label_rejection(n, &mut lrng).unwrap();
        let label = SchurLabel::new(path, m.0).unwrap();
        let map = if inst % 4 < 2 {
            ClassicalMap::Circuit(ReversibleCircuit::random(n, 3 * n, &mut rng))
        } else {
            ClassicalMap::Perm(schur_core::circuit::PermutationGate::random(n, &mut rng))
        };
        let phi = PreparedState::plain(map, label).unwrap();
        let params = KmParams::new(1.0 / (2.0 * n as f64), 0.1, mix(0xC6EED, inst)).unwrap();
        let t0 = Instant::now();
        let list = km_search(&phi, &params).unwrap();
        let secs = t0.elapsed().as_secs_f64();
        worst.push((secs, inst, n, list.samples_used));
    }
    worst.sort_by(|a, b| b.0.total_cmp(&a.0));
    for (secs, inst, n, samples) in worst.iter().take(5) {
        println!("inst {inst} n={n}: {secs:.1} s, {samples} samples, {:.1} ns/sample", secs * 1e9 / *samples as f64);
    }
    let total: f64 = worst.iter().map(|w| w.0).sum();
    println!("total {total:.0} s");
}
