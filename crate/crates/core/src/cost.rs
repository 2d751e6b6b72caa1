//! Quantum cost accounting.
//!
//! NOT, CNOT and reset cost 1, a Toffoli costs 5. An MCX with `m` controls is
//! charged `10(m - 1)`, the cost of a Toffoli V-chain of `2(m - 1)` gates; it
//! only appears in state preparation, which is never counted. Negative
//! controls are charged as the two X gates that flank them once lowered.

use std::collections::BTreeMap;
use std::ops::{Add, AddAssign};

use serde::Serialize;

use crate::circuit::{Circuit, CircuitError, GateKind, GateOp};

/// Name of the state-preparation stage excluded from processing cost.
pub const PREP_STAGE: &str = "prep";

pub const TOFFOLI_COST: u64 = 5;

/// Declared weight for an MCX with `m >= 3` controls.
pub fn mcx_cost(m: usize) -> u64 {
    10 * (m as u64).saturating_sub(1)
}

/// Which stages a ledger covers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CostSelection {
    /// Everything except [`PREP_STAGE`], including ops before the first stage.
    Processing,
    Stages(Vec<String>),
}

impl CostSelection {
    pub fn stages<S: AsRef<str>>(names: &[S]) -> Self {
        CostSelection::Stages(names.iter().map(|s| s.as_ref().to_string()).collect())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GateCounts {
    /// H and X gates in the circuit plus the X gates from lowering polarity.
    pub single_qubit: u64,
    /// The lowering X gates alone (already included in `single_qubit`).
    pub polarity_x: u64,
    pub cnot: u64,
    pub toffoli: u64,
    pub mcx: u64,
    /// Summed declared weight of the MCX gates.
    pub mcx_weight: u64,
    pub reset: u64,
}

impl GateCounts {
    pub fn record(&mut self, op: &GateOp) {
        let lowering = 2 * op.negative_controls() as u64;
        self.polarity_x += lowering;
        self.single_qubit += lowering;
        match op.kind() {
            GateKind::H | GateKind::X => self.single_qubit += 1,
            GateKind::Cnot => self.cnot += 1,
            GateKind::Toffoli => self.toffoli += 1,
            GateKind::Mcx => {
                self.mcx += 1;
                self.mcx_weight += mcx_cost(op.controls().len());
            }
            GateKind::Reset => self.reset += 1,
        }
    }

    pub fn actual_cost(&self) -> u64 {
        self.single_qubit + self.cnot + TOFFOLI_COST * self.toffoli + self.mcx_weight + self.reset
    }
}

impl Add for GateCounts {
    type Output = GateCounts;

    fn add(mut self, rhs: GateCounts) -> GateCounts {
        self += rhs;
        self
    }
}

impl AddAssign for GateCounts {
    fn add_assign(&mut self, rhs: GateCounts) {
        self.single_qubit += rhs.single_qubit;
        self.polarity_x += rhs.polarity_x;
        self.cnot += rhs.cnot;
        self.toffoli += rhs.toffoli;
        self.mcx += rhs.mcx;
        self.mcx_weight += rhs.mcx_weight;
        self.reset += rhs.reset;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StageCost {
    pub stage: String,
    #[serde(flatten)]
    pub counts: GateCounts,
    pub actual_cost: u64,
    pub paper_cost: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CostLedger {
    pub per_stage: Vec<StageCost>,
    pub totals: GateCounts,
    pub actual_cost: u64,
    /// Sum of the published formulas registered on the counted stages.
    pub paper_cost: u64,
    pub cost_by_formula: BTreeMap<String, u64>,
}

impl CostLedger {
    /// Merges two ledgers over disjoint stage sets.
    pub fn combine(mut self, other: CostLedger) -> CostLedger {
        self.per_stage.extend(other.per_stage);
        self.totals += other.totals;
        self.actual_cost += other.actual_cost;
        self.paper_cost += other.paper_cost;
        for (k, v) in other.cost_by_formula {
            *self.cost_by_formula.entry(k).or_default() += v;
        }
        self
    }
}

const UNSTAGED: &str = "(unstaged)";

/// Counts gates over the selected stages of `circuit`.
pub fn quantum_cost(circuit: &Circuit, selection: &CostSelection) -> Result<CostLedger, CircuitError> {
    let mut groups: Vec<(String, std::ops::Range<usize>)> = Vec::new();
    match selection {
        CostSelection::Processing => {
            let first = circuit.stages().first().map_or(circuit.len(), |s| s.start);
            if first > 0 {
                groups.push((UNSTAGED.to_string(), 0..first));
            }
            for s in circuit.stages().iter().filter(|s| s.name != PREP_STAGE) {
                groups.push((s.name.clone(), s.start..s.end));
            }
        }
        CostSelection::Stages(names) => {
            for name in names {
                let s = circuit
                    .stage(name)
                    .ok_or_else(|| CircuitError::UnknownStage(name.clone()))?;
                groups.push((s.name.clone(), s.start..s.end));
            }
        }
    }

    let mut ledger = CostLedger::default();
    for (name, range) in groups {
        let mut counts = GateCounts::default();
        for op in &circuit.ops()[range] {
            counts.record(op);
        }
        let mut paper_cost = 0;
        for f in circuit.formulas().iter().filter(|f| f.stage == name) {
            paper_cost += f.value;
            *ledger.cost_by_formula.entry(f.name.clone()).or_default() += f.value;
        }
        let actual = counts.actual_cost();
        ledger.totals += counts;
        ledger.actual_cost += actual;
        ledger.paper_cost += paper_cost;
        ledger.per_stage.push(StageCost { stage: name, counts, actual_cost: actual, paper_cost });
    }
    Ok(ledger)
}
