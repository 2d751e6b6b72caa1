//! Exact basis-branch simulation.
//!
//! When every H acts on a fresh qubit during preparation and everything
//! afterwards is a basis permutation or a reset, the state is an equal-weight
//! mixture of basis vectors tagged by the H-split qubits. Each branch then
//! evolves as a classical bit vector. Resets decohere, which matches the
//! exact channel as long as no two branches share a tag; that condition is
//! checked by [`BranchMap::assert_no_collision`] rather than assumed.

use std::collections::{BTreeMap, HashMap};

use num_rational::Ratio;
use rayon::prelude::*;
use thiserror::Error;

use crate::circuit::{Circuit, GateKind, GateOp, RegisterLayout};
use crate::cost::PREP_STAGE;

/// Branch probability. Denominators are powers of two.
pub type Weight = Ratio<u64>;

/// Bit vectors are `u64`, and one bit of headroom keeps `2^-h` weights exact.
pub const MAX_TRACKED_WIDTH: usize = 63;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TrackedError {
    #[error("width {0} exceeds the tracked backend limit of {MAX_TRACKED_WIDTH}")]
    TooWide(usize),
    #[error("H at op {op_index} is outside the `prep` stage; use the statevector backend")]
    HOutsidePrep { op_index: usize },
    #[error("H at op {op_index} targets qubit {qubit}, which is not a position qubit")]
    HNotOnPosition { op_index: usize, qubit: usize },
    #[error("H at op {op_index} targets qubit {qubit}, which is not in a fresh |0⟩ state")]
    HNotFresh { op_index: usize, qubit: usize },
    #[error("branch weights sum to {0}, not 1")]
    WeightSum(Weight),
    #[error("branches {first:#b} and {second:#b} share position tag {tag:#b}")]
    Collision { tag: u64, first: u64, second: u64 },
    #[error("circuit width {circuit} does not match branch map width {map}")]
    WidthMismatch { circuit: usize, map: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Branch {
    pub bits: u64,
    pub weight: Weight,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchMap {
    width: usize,
    /// Qubits split by H, in the order they were split.
    tags: Vec<usize>,
    branches: Vec<Branch>,
}

impl BranchMap {
    /// A single branch holding basis state `bits`.
    pub fn from_basis(width: usize, bits: u64) -> Result<Self, TrackedError> {
        if width > MAX_TRACKED_WIDTH {
            return Err(TrackedError::TooWide(width));
        }
        Ok(BranchMap { width, tags: Vec::new(), branches: vec![Branch { bits, weight: Weight::from_integer(1) }] })
    }

    pub fn from_branches(width: usize, tags: Vec<usize>, branches: Vec<Branch>) -> Result<Self, TrackedError> {
        if width > MAX_TRACKED_WIDTH {
            return Err(TrackedError::TooWide(width));
        }
        let total: Weight = branches.iter().map(|b| b.weight).sum();
        if total != Weight::from_integer(1) {
            return Err(TrackedError::WeightSum(total));
        }
        Ok(BranchMap { width, tags, branches })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn tags(&self) -> &[usize] {
        &self.tags
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn total_weight(&self) -> Weight {
        self.branches.iter().map(|b| b.weight).sum()
    }

    /// Applies a post-preparation op to every branch. H is refused.
    pub fn apply(&mut self, op: &GateOp) -> Result<(), TrackedError> {
        if op.kind() == GateKind::H {
            return Err(TrackedError::HOutsidePrep { op_index: 0 });
        }
        for b in &mut self.branches {
            b.bits = op.apply_to_bits(b.bits);
        }
        Ok(())
    }

    /// Applies every op of `circuit`; the circuit must not contain H.
    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<(), TrackedError> {
        if circuit.width() != self.width {
            return Err(TrackedError::WidthMismatch { circuit: circuit.width(), map: self.width });
        }
        if let Some(i) = circuit.ops().iter().position(|op| op.kind() == GateKind::H) {
            return Err(TrackedError::HOutsidePrep { op_index: i });
        }
        let ops = circuit.ops();
        self.branches.par_iter_mut().for_each(|b| {
            b.bits = ops.iter().fold(b.bits, |bits, op| op.apply_to_bits(bits));
        });
        Ok(())
    }

    fn tag_of(&self, bits: u64) -> u64 {
        self.tags.iter().fold(0, |acc, &q| (acc << 1) | ((bits >> q) & 1))
    }

    /// Fails if two branches carry the same tag value.
    pub fn assert_no_collision(&self) -> Result<(), TrackedError> {
        let mut seen: HashMap<u64, u64> = HashMap::with_capacity(self.branches.len());
        for b in &self.branches {
            let tag = self.tag_of(b.bits);
            if let Some(first) = seen.insert(tag, b.bits) {
                return Err(TrackedError::Collision { tag, first, second: b.bits });
            }
        }
        Ok(())
    }

    /// Exact distribution of the `readout` register (MSB first).
    pub fn distribution(&self, readout: &[usize]) -> BTreeMap<u64, Weight> {
        let mut out = BTreeMap::new();
        for b in &self.branches {
            *out.entry(RegisterLayout::read_register(readout, b.bits)).or_insert_with(|| Weight::from_integer(0)) +=
                b.weight;
        }
        out
    }

    /// Position value → color value over all branches. Later branches win on
    /// duplicate positions; call [`assert_no_collision`](Self::assert_no_collision) first.
    pub fn color_map(&self, layout: &RegisterLayout) -> BTreeMap<u64, u64> {
        self.branches
            .iter()
            .map(|b| {
                (
                    RegisterLayout::read_register(layout.position(), b.bits),
                    RegisterLayout::read_register(layout.color(), b.bits),
                )
            })
            .collect()
    }
}

/// Runs `circuit` from `|0…0⟩`.
///
/// Every H must sit in the `prep` stage and act on a qubit no earlier op has
/// touched; when the circuit carries a layout it must also be a position
/// qubit.
pub fn run_tracked(circuit: &Circuit) -> Result<BranchMap, TrackedError> {
    let mut map = BranchMap::from_basis(circuit.width(), 0)?;
    let ops = circuit.ops();
    let last_h = ops.iter().rposition(|op| op.kind() == GateKind::H);
    let split_end = last_h.map_or(0, |i| i + 1);
    let mut touched = 0u64;

    for (i, op) in ops[..split_end].iter().enumerate() {
        if op.kind() != GateKind::H {
            map.apply(op)?;
            touched |= 1 << op.target();
            continue;
        }
        let t = op.target();
        if circuit.stage_of(i) != Some(PREP_STAGE) {
            return Err(TrackedError::HOutsidePrep { op_index: i });
        }
        if let Some(layout) = circuit.layout() {
            if !layout.position().contains(&t) {
                return Err(TrackedError::HNotOnPosition { op_index: i, qubit: t });
            }
        }
        if touched & (1 << t) != 0 || map.branches.iter().any(|b| b.bits & (1 << t) != 0) {
            return Err(TrackedError::HNotFresh { op_index: i, qubit: t });
        }
        touched |= 1 << t;
        let half = Weight::new(1, 2);
        map.branches = map
            .branches
            .iter()
            .flat_map(|b| {
                let w = b.weight * half;
                [Branch { bits: b.bits, weight: w }, Branch { bits: b.bits | (1 << t), weight: w }]
            })
            .collect();
        map.tags.push(t);
    }

    let rest = &ops[split_end..];
    map.branches.par_iter_mut().for_each(|b| {
        b.bits = rest.iter().fold(b.bits, |bits, op| op.apply_to_bits(bits));
    });
    Ok(map)
}
