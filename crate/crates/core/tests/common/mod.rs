#![allow(dead_code)]

use qiseg::{ImageGray, ThresholdConfig};
use rand::seq::index::sample;
use rand::Rng;

pub fn random_image<R: Rng>(rng: &mut R, n: usize, q: usize) -> ImageGray {
    let max = 1u32 << q;
    let pixels = (0..1usize << (2 * n)).map(|_| rng.gen_range(0..max)).collect();
    ImageGray::new(n, q, pixels).unwrap()
}

/// Random valid config: `count` distinct thresholds, levels satisfying
/// `g_k >= T_(k-1)`.
pub fn random_config<R: Rng>(rng: &mut R, q: usize, count: usize) -> ThresholdConfig {
    let max = (1u32 << q) - 1;
    let mut thresholds: Vec<u32> = sample(rng, max as usize, count).into_iter().map(|t| t as u32 + 1).collect();
    thresholds.sort_unstable();
    let mut levels = vec![rng.gen_range(0..=max)];
    for &t in &thresholds {
        levels.push(rng.gen_range(t..=max));
    }
    ThresholdConfig::new(q, thresholds, Some(levels)).unwrap()
}

/// Terms printed for the segmented 4×4 demo image, `color(3) ∥ position(4)`.
pub const PRINTED_SEGMENTED: [&str; 16] = [
    "1000000", "1000001", "1000010", "1000011", "1000100", "1000101", "0000110", "0000111",
    "0001000", "1111001", "0001010", "1111011", "0001100", "1111101", "1001110", "1111111",
];

/// Terms printed for the input 4×4 demo image.
pub const PRINTED_INPUT: [&str; 16] = [
    "0110000", "0100001", "0110010", "0100011", "0100100", "0110101", "0000110", "0010111",
    "0001011", "1011001", "0001010", "1011011", "0001100", "1011101", "1011110", "1111111",
];

/// `(position, color)` from a printed 7-bit term.
pub fn split_term(term: &str) -> (u64, u64) {
    let v = u64::from_str_radix(term, 2).unwrap();
    (v & 0b1111, v >> 4)
}
