mod common;

use std::collections::BTreeMap;

use qiseg::statevector;
use qiseg::{build_pipeline, run_tracked, sample_shots, samples, Circuit, ThresholdConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn exact_distribution(circuit: &Circuit) -> BTreeMap<u64, f64> {
    let map = run_tracked(circuit).unwrap();
    map.distribution(&circuit.readout_qubits())
        .into_iter()
        .map(|(k, w)| (k, *w.numer() as f64 / *w.denom() as f64))
        .collect()
}

fn within_4_sigma(circuit: &Circuit, shots: u64, seed: u64) {
    let exact = exact_distribution(circuit);
    let hist = sample_shots(circuit, shots, seed).unwrap();
    for r in &hist.records {
        assert!(exact.contains_key(&r.bitstring), "outcome {} outside the tracked support", hist.format_bits(r.bitstring));
    }
    for (&k, &p) in &exact {
        let sigma = (p * (1.0 - p) / shots as f64).sqrt();
        let freq = hist.count(k) as f64 / shots as f64;
        assert!((freq - p).abs() <= 4.0 * sigma, "{}: {freq} vs {p}", hist.format_bits(k));
    }
}

#[test]
fn random_instances_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for seed in 0..10 {
        let img = common::random_image(&mut rng, 1, 2);
        let cfg = common::random_config(&mut rng, 2, 2);
        within_4_sigma(&build_pipeline(&img, &cfg).unwrap(), 4096, seed);
    }
}

#[test]
fn demo_image_agrees() {
    let cfg = ThresholdConfig::two_threshold(3, 0b010, 0b100, None).unwrap();
    within_4_sigma(&build_pipeline(&samples::demo_4x4(), &cfg).unwrap(), 4096, 7);
}

#[test]
fn fixed_seed_is_reproducible() {
    let cfg = ThresholdConfig::two_threshold(3, 0b010, 0b100, None).unwrap();
    let c = build_pipeline(&samples::demo_4x4(), &cfg).unwrap();
    let a = sample_shots(&c, 512, 99).unwrap();
    assert_eq!(a, sample_shots(&c, 512, 99).unwrap());
    assert_ne!(a, sample_shots(&c, 512, 100).unwrap());
}

#[test]
fn single_trajectory_stays_on_tracked_support() {
    // After the first reset a trajectory may collapse onto fewer positions,
    // but never onto a (position, color) pair the exact map lacks.
    let cfg = ThresholdConfig::two_threshold(3, 0b010, 0b100, None).unwrap();
    let c = build_pipeline(&samples::demo_4x4(), &cfg).unwrap();
    let exact = exact_distribution(&c);
    for seed in 0..5 {
        let state = statevector::run(&c, 0, seed).unwrap();
        assert!((state.norm_sqr() - 1.0).abs() < 1e-9);
        for k in state.probabilities(&c.readout_qubits()).keys() {
            assert!(exact.contains_key(k));
        }
    }
}

#[test]
fn shot_averaged_position_marginal_is_uniform() {
    let cfg = ThresholdConfig::new(3, vec![2, 4, 6], None).unwrap();
    let c = build_pipeline(&samples::demo_4x4(), &cfg).unwrap();
    let shots = 4096u64;
    let hist = sample_shots(&c, shots, 3).unwrap();
    let mut marginal = [0u64; 16];
    for r in &hist.records {
        marginal[(r.bitstring & 0b1111) as usize] += r.count;
    }
    let p = 1.0 / 16.0;
    let sigma = (p * (1.0 - p) / shots as f64).sqrt();
    for (pos, &count) in marginal.iter().enumerate() {
        let freq = count as f64 / shots as f64;
        assert!((freq - p).abs() <= 4.0 * sigma, "position {pos:04b}: {freq}");
    }
}
