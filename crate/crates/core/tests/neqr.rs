mod common;

use std::collections::BTreeSet;

use qiseg::cost::{quantum_cost, CostSelection};
use qiseg::neqr::{build_preparation, decode};
use qiseg::statevector::{self, QuantumState};
use qiseg::{run_tracked, samples, ImageGray, RegisterLayout};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Image recovered from the nonzero amplitudes of a prepared state.
fn image_from_state(state: &QuantumState, layout: &RegisterLayout) -> ImageGray {
    let mut pixels = vec![None; 1 << layout.position().len()];
    for (i, a) in state.amplitudes().iter().enumerate() {
        if a.norm_sqr() > 1e-12 {
            let pos = RegisterLayout::read_register(layout.position(), i as u64) as usize;
            let color = RegisterLayout::read_register(layout.color(), i as u64) as u32;
            assert!(pixels[pos].replace(color).is_none(), "position {pos} appears twice");
        }
    }
    let pixels = pixels.into_iter().map(|p| p.expect("every position present")).collect();
    ImageGray::new(layout.n(), layout.q(), pixels).unwrap()
}

#[test]
fn four_level_state_amplitudes() {
    let img = samples::four_level_2x2();
    let layout = RegisterLayout::new(8, 1).unwrap();
    let state = statevector::run(&build_preparation(&img, &layout).unwrap(), 0, 0).unwrap();
    let expected: BTreeSet<u64> = [(0u64, 0u64), (1, 100), (2, 200), (3, 255)]
        .iter()
        .map(|&(pos, color)| {
            let bits = RegisterLayout::write_register(layout.position(), 0, pos);
            RegisterLayout::write_register(layout.color(), bits, color)
        })
        .collect();
    let mut nonzero = BTreeSet::new();
    for (i, a) in state.amplitudes().iter().enumerate() {
        if a.norm() > 1e-10 {
            assert!((a.re - 0.5).abs() <= 1e-10 && a.im.abs() <= 1e-10, "amplitude {a} at {i}");
            nonzero.insert(i as u64);
        }
    }
    assert_eq!(nonzero, expected);
}

#[test]
fn random_images_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in 1..=2 {
        for q in 1..=4 {
            for _ in 0..15 {
                let img = common::random_image(&mut rng, n, q);
                let layout = RegisterLayout::new(q, n).unwrap();
                let prep = build_preparation(&img, &layout).unwrap();
                let state = statevector::run(&prep, 0, 0).unwrap();
                let amp = 0.5f64.powi(n as i32);
                for a in state.amplitudes().iter().filter(|a| a.norm() > 1e-10) {
                    assert!((a.re - amp).abs() <= 1e-10 && a.im.abs() <= 1e-10);
                }
                assert!((state.norm_sqr() - 1.0).abs() <= 1e-10);
                assert_eq!(image_from_state(&state, &layout), img);
                assert_eq!(decode(&run_tracked(&prep).unwrap(), &layout).unwrap(), img);
            }
        }
    }
}

#[test]
fn preparation_costs_nothing_as_processing() {
    let layout = RegisterLayout::new(3, 2).unwrap();
    let prep = build_preparation(&samples::demo_4x4(), &layout).unwrap();
    assert_eq!(quantum_cost(&prep, &CostSelection::Processing).unwrap().actual_cost, 0);
    let named = quantum_cost(&prep, &CostSelection::stages(&["prep"])).unwrap();
    assert!(named.actual_cost > 0);
}

#[test]
fn printed_input_state_differs_by_one_term() {
    let layout = RegisterLayout::new(3, 2).unwrap();
    let map = run_tracked(&build_preparation(&samples::demo_4x4(), &layout).unwrap()).unwrap();
    let prepared: BTreeSet<(u64, u64)> = map.color_map(&layout).into_iter().collect();
    let printed: BTreeSet<(u64, u64)> = common::PRINTED_INPUT.iter().map(|t| common::split_term(t)).collect();
    // The printed list repeats position 1011 with color 000 where position
    // 1000 belongs.
    let missing: Vec<_> = prepared.difference(&printed).collect();
    let extra: Vec<_> = printed.difference(&prepared).collect();
    assert_eq!(missing, vec![&(0b1000, 0b000)]);
    assert_eq!(extra, vec![&(0b1011, 0b000)]);
}
