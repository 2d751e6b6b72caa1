//! Dense statevector simulation with mid-circuit reset and shot sampling.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`). A run with seed
//! `s` draws from stream 0 of the generator seeded with `s`; shot `k` of
//! [`sample_shots`] draws from stream `k`, so shots are independent of each
//! other and of the thread that executes them.
//!
//! RESET is a projective Z measurement of the target followed by a flip when
//! the outcome is 1.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::circuit::{Circuit, GateKind, GateOp, RegisterLayout};

/// Largest supported state: 2^26 amplitudes (1 GiB).
pub const MAX_WIDTH: usize = 26;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("circuit width {circuit} does not match state width {state}")]
    WidthMismatch { circuit: usize, state: usize },
    #[error("width {0} exceeds the statevector limit of {MAX_WIDTH} qubits")]
    TooWide(usize),
    #[error("initial basis state {initial} out of range for {width} qubits")]
    InitialOutOfRange { initial: u64, width: usize },
    #[error("state collapsed to zero norm at op {0}")]
    ZeroNorm(usize),
    #[error("shot count must be at least 1")]
    NoShots,
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Index of the `i`-th basis state whose bit `t` is clear.
#[inline]
fn with_zero_bit(i: usize, t: usize) -> usize {
    let low = i & ((1 << t) - 1);
    ((i >> t) << (t + 1)) | low
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    amplitudes: Vec<Complex64>,
    width: usize,
}

impl QuantumState {
    /// Basis state `|initial⟩` on `width` qubits.
    pub fn basis(width: usize, initial: u64) -> Result<Self, SimError> {
        if width > MAX_WIDTH {
            return Err(SimError::TooWide(width));
        }
        if initial >> width != 0 {
            return Err(SimError::InitialOutOfRange { initial, width });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << width];
        amplitudes[initial as usize] = Complex64::new(1.0, 0.0);
        Ok(QuantumState { amplitudes, width })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: u64) -> Complex64 {
        self.amplitudes[index as usize]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    /// Applies one op. `op_index` is only used for error reporting.
    pub fn apply<R: Rng + ?Sized>(
        &mut self,
        op: &GateOp,
        rng: &mut R,
        op_index: usize,
    ) -> Result<(), SimError> {
        match op.kind() {
            GateKind::H => self.hadamard(op.target()),
            GateKind::Reset => self.reset(op.target(), rng, op_index)?,
            _ => self.controlled_flip(op),
        }
        Ok(())
    }

    fn hadamard(&mut self, t: usize) {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bit = 1 << t;
        for i in 0..self.amplitudes.len() / 2 {
            let i0 = with_zero_bit(i, t);
            let (a, b) = (self.amplitudes[i0], self.amplitudes[i0 | bit]);
            self.amplitudes[i0] = (a + b) * s;
            self.amplitudes[i0 | bit] = (a - b) * s;
        }
    }

    fn controlled_flip(&mut self, op: &GateOp) {
        let (mut mask, mut want) = (0usize, 0usize);
        for c in op.controls() {
            mask |= 1 << c.qubit;
            if c.polarity == crate::circuit::Polarity::Positive {
                want |= 1 << c.qubit;
            }
        }
        let t = op.target();
        for i in 0..self.amplitudes.len() / 2 {
            let i0 = with_zero_bit(i, t);
            if i0 & mask == want {
                self.amplitudes.swap(i0, i0 | (1 << t));
            }
        }
    }

    fn reset<R: Rng + ?Sized>(&mut self, t: usize, rng: &mut R, op_index: usize) -> Result<(), SimError> {
        let bit = 1 << t;
        let half = self.amplitudes.len() / 2;
        let (mut p0, mut p1) = (0.0, 0.0);
        for i in 0..half {
            let i0 = with_zero_bit(i, t);
            p0 += self.amplitudes[i0].norm_sqr();
            p1 += self.amplitudes[i0 | bit].norm_sqr();
        }
        let one = rng.gen::<f64>() * (p0 + p1) < p1;
        let kept = if one { p1 } else { p0 };
        if kept <= f64::MIN_POSITIVE {
            return Err(SimError::ZeroNorm(op_index));
        }
        let scale = 1.0 / kept.sqrt();
        let zero = Complex64::new(0.0, 0.0);
        for i in 0..half {
            let i0 = with_zero_bit(i, t);
            let src = if one { i0 | bit } else { i0 };
            self.amplitudes[i0] = self.amplitudes[src] * scale;
            self.amplitudes[i0 | bit] = zero;
        }
        Ok(())
    }

    /// Draws one computational-basis outcome.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let r = rng.gen::<f64>() * self.norm_sqr();
        let mut acc = 0.0;
        let mut last_nonzero = 0;
        for (i, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            if p > 0.0 {
                acc += p;
                last_nonzero = i;
                if r < acc {
                    return i as u64;
                }
            }
        }
        last_nonzero as u64
    }

    /// Marginal distribution over `subset` (MSB first), keyed by the
    /// subset's register value.
    ///
    /// # Panics
    /// If a qubit in `subset` is outside the state.
    pub fn probabilities(&self, subset: &[usize]) -> BTreeMap<u64, f64> {
        assert!(subset.iter().all(|&q| q < self.width), "qubit subset out of range");
        let mut out = BTreeMap::new();
        for (i, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            if p > 0.0 {
                *out.entry(RegisterLayout::read_register(subset, i as u64)).or_insert(0.0) += p;
            }
        }
        out
    }
}

fn apply_ops<R: Rng + ?Sized>(
    state: &mut QuantumState,
    ops: &[GateOp],
    offset: usize,
    rng: &mut R,
) -> Result<(), SimError> {
    for (i, op) in ops.iter().enumerate() {
        state.apply(op, rng, offset + i)?;
    }
    Ok(())
}

fn check_width(circuit: &Circuit) -> Result<(), SimError> {
    if circuit.width() > MAX_WIDTH {
        return Err(SimError::TooWide(circuit.width()));
    }
    Ok(())
}

/// Simulates `circuit` from basis state `initial`.
pub fn run(circuit: &Circuit, initial: u64, seed: u64) -> Result<QuantumState, SimError> {
    check_width(circuit)?;
    let mut state = QuantumState::basis(circuit.width(), initial)?;
    apply_ops(&mut state, circuit.ops(), 0, &mut stream_rng(seed, 0))?;
    Ok(state)
}

/// Continues simulation of an existing state.
pub fn run_on(circuit: &Circuit, state: &mut QuantumState, seed: u64) -> Result<(), SimError> {
    if circuit.width() != state.width() {
        return Err(SimError::WidthMismatch { circuit: circuit.width(), state: state.width() });
    }
    apply_ops(state, circuit.ops(), 0, &mut stream_rng(seed, 0))
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ShotRecord {
    /// Measured readout register value.
    pub bitstring: u64,
    pub count: u64,
    pub probability: f64,
}

/// Aggregated shot outcomes over a readout register.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub shots: u64,
    /// Readout qubits, MSB first.
    pub readout: Vec<usize>,
    /// Sorted by bitstring.
    pub records: Vec<ShotRecord>,
}

impl Histogram {
    pub fn from_outcomes(readout: Vec<usize>, outcomes: &[u64]) -> Self {
        let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
        for &o in outcomes {
            *counts.entry(o).or_default() += 1;
        }
        let shots = outcomes.len() as u64;
        let records = counts
            .into_iter()
            .map(|(bitstring, count)| ShotRecord {
                bitstring,
                count,
                probability: count as f64 / shots as f64,
            })
            .collect();
        Histogram { shots, readout, records }
    }

    pub fn format_bits(&self, value: u64) -> String {
        let len = self.readout.len();
        (0..len).map(|i| if (value >> (len - 1 - i)) & 1 == 1 { '1' } else { '0' }).collect()
    }

    pub fn count(&self, bitstring: u64) -> u64 {
        self.records.iter().find(|r| r.bitstring == bitstring).map_or(0, |r| r.count)
    }

    /// `bitstring,count,probability` CSV, one row per observed outcome.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bitstring,count,probability\n");
        for r in &self.records {
            let _ = writeln!(out, "{},{},{}", self.format_bits(r.bitstring), r.count, r.probability);
        }
        out
    }
}

/// Runs `shots` independent trajectories from `|0…0⟩` and measures the
/// circuit's readout qubits at the end of each.
///
/// The deterministic prefix before the first RESET is simulated once and
/// shared by all shots.
pub fn sample_shots(circuit: &Circuit, shots: u64, seed: u64) -> Result<Histogram, SimError> {
    if shots == 0 {
        return Err(SimError::NoShots);
    }
    check_width(circuit)?;
    let split = circuit
        .ops()
        .iter()
        .position(|op| op.kind() == GateKind::Reset)
        .unwrap_or(circuit.len());
    let (prefix, rest) = circuit.ops().split_at(split);
    let mut base = QuantumState::basis(circuit.width(), 0)?;
    // No resets in the prefix, so no randomness is consumed.
    apply_ops(&mut base, prefix, 0, &mut stream_rng(seed, 0))?;

    let readout = circuit.readout_qubits();
    let outcomes = (0..shots)
        .into_par_iter()
        .map(|shot| {
            let mut rng = stream_rng(seed, shot);
            let mut state = base.clone();
            apply_ops(&mut state, rest, split, &mut rng)?;
            Ok(RegisterLayout::read_register(&readout, state.sample(&mut rng)))
        })
        .collect::<Result<Vec<u64>, SimError>>()?;
    Ok(Histogram::from_outcomes(readout, &outcomes))
}
