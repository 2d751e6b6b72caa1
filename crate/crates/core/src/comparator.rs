//! Reset-reuse quantum comparator writing `y = [a < b]`.
//!
//! The comparison walks from the least significant bit upwards keeping a
//! single running flag `lt_k = [a mod 2^(k+1) < b mod 2^(k+1)]`:
//!
//! ```text
//! lt_0 = ¬a_0 ∧ b_0
//! lt_k = (¬a_k ∧ b_k) ⊕ (¬(a_k ⊕ b_k) ∧ lt_(k-1))
//! ```
//!
//! so a higher bit decides on its own and the lower outcome is consulted only
//! on a tie. The flag alternates between the result qubit and the first aux
//! qubit; the second aux holds `a_k ⊕ b_k`. After each step the stale flag and
//! the xor qubit are reset, so the whole comparator uses three work qubits
//! regardless of `q` and leaves both aux qubits in `|0⟩`.

use thiserror::Error;

use crate::circuit::{Circuit, CircuitError, Control, GateOp, RegisterLayout};

/// Formula name registered on every comparator stage.
pub const COMPARATOR_FORMULA: &str = "comparator-paper";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComparatorError {
    #[error("comparator width q must be at least 1")]
    ZeroWidth,
    #[error("operand registers have different widths ({a} and {b})")]
    LengthMismatch { a: usize, b: usize },
    #[error("qubit {0} is assigned to more than one comparator register")]
    Overlap(usize),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComparatorSpec {
    /// Compared value, MSB first.
    pub a: Vec<usize>,
    /// Reference value (threshold), MSB first.
    pub b: Vec<usize>,
    pub aux: [usize; 2],
    pub result: usize,
    pub stage: String,
    width: usize,
    layout: Option<RegisterLayout>,
}

impl ComparatorSpec {
    pub fn new(
        a: Vec<usize>,
        b: Vec<usize>,
        aux: [usize; 2],
        result: usize,
        stage: impl Into<String>,
    ) -> Result<Self, ComparatorError> {
        if a.len() != b.len() {
            return Err(ComparatorError::LengthMismatch { a: a.len(), b: b.len() });
        }
        if a.is_empty() {
            return Err(ComparatorError::ZeroWidth);
        }
        let all: Vec<usize> = a.iter().chain(&b).chain(&aux).copied().chain([result]).collect();
        for (i, q) in all.iter().enumerate() {
            if all[..i].contains(q) {
                return Err(ComparatorError::Overlap(*q));
            }
        }
        let width = all.iter().max().map_or(0, |m| m + 1);
        Ok(ComparatorSpec { a, b, aux, result, stage: stage.into(), width, layout: None })
    }

    /// Compares the color register against the threshold register, writing
    /// into result slot `slot` (0 or 1).
    pub fn from_layout(layout: &RegisterLayout, slot: usize, stage: impl Into<String>) -> Result<Self, ComparatorError> {
        let mut spec = Self::new(
            layout.color().to_vec(),
            layout.threshold().to_vec(),
            layout.cmp_aux(),
            layout.results()[slot],
            stage,
        )?;
        spec.width = layout.width();
        spec.layout = Some(layout.clone());
        Ok(spec)
    }

    pub fn q(&self) -> usize {
        self.a.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }
}

/// Builds the comparator as a one-stage circuit fragment.
///
/// Pre: both aux qubits and the result are `|0⟩`. Post: result holds
/// `[a < b]`, operands are unchanged and both aux qubits are `|0⟩`.
pub fn build_comparator(spec: &ComparatorSpec) -> Result<Circuit, ComparatorError> {
    let mut c = match &spec.layout {
        Some(l) => Circuit::with_layout(l.clone()),
        None => Circuit::new(spec.width),
    };
    c.begin_stage(spec.stage.clone())?;
    let q = spec.q();
    let bit = |reg: &[usize], k: usize| reg[q - 1 - k];
    let [flag_alt, xor] = spec.aux;
    // lt_(q-1) must land on the result qubit.
    let holder = |k: usize| if (q - 1 - k) % 2 == 0 { spec.result } else { flag_alt };

    c.push(GateOp::toffoli(Control::neg(bit(&spec.a, 0)), Control::pos(bit(&spec.b, 0)), holder(0)))?;
    for k in 1..q {
        let (ak, bk) = (bit(&spec.a, k), bit(&spec.b, k));
        let (prev, next) = (holder(k - 1), holder(k));
        c.push(GateOp::toffoli(Control::neg(ak), Control::pos(bk), next))?;
        c.push(GateOp::cnot(Control::pos(ak), xor))?;
        c.push(GateOp::cnot(Control::pos(bk), xor))?;
        c.push(GateOp::toffoli(Control::neg(xor), Control::pos(prev), next))?;
        c.push(GateOp::reset(xor))?;
        c.push(GateOp::reset(prev))?;
    }
    c.register_formula(COMPARATOR_FORMULA, &spec.stage, paper_comparator_cost(q))?;
    Ok(c)
}

/// Published comparator cost `18q - 13`.
pub fn paper_comparator_cost(q: usize) -> u64 {
    (18 * q as u64).saturating_sub(13)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{quantum_cost, CostSelection};
    use crate::tracked::BranchMap;

    fn standalone(q: usize) -> ComparatorSpec {
        let a = (0..q).collect();
        let b = (q..2 * q).collect();
        ComparatorSpec::new(a, b, [2 * q, 2 * q + 1], 2 * q + 2, "cmp").unwrap()
    }

    fn compare(spec: &ComparatorSpec, a: u64, b: u64) -> u64 {
        let c = build_comparator(spec).unwrap();
        let bits = RegisterLayout::write_register(&spec.a, 0, a);
        let bits = RegisterLayout::write_register(&spec.b, bits, b);
        let mut map = BranchMap::from_basis(c.width(), bits).unwrap();
        map.apply_circuit(&c).unwrap();
        map.branches()[0].bits
    }

    #[test]
    fn three_lt_four() {
        let spec = standalone(3);
        let out = compare(&spec, 0b011, 0b100);
        assert_eq!((out >> spec.result) & 1, 1);
    }

    #[test]
    fn equal_is_not_less() {
        let spec = standalone(3);
        let out = compare(&spec, 0b101, 0b101);
        assert_eq!((out >> spec.result) & 1, 0);
    }

    #[test]
    fn gate_counts() {
        for q in 1..=6 {
            let c = build_comparator(&standalone(q)).unwrap();
            let ledger = quantum_cost(&c, &CostSelection::Processing).unwrap();
            let t = ledger.totals;
            assert_eq!(t.toffoli as usize, 2 * q - 1);
            assert_eq!(t.cnot as usize, 2 * (q - 1));
            assert_eq!(t.reset as usize, 2 * (q - 1));
            assert_eq!(t.polarity_x as usize, 2 * (2 * q - 1));
            assert_eq!(ledger.paper_cost, paper_comparator_cost(q));
            assert_eq!(ledger.cost_by_formula[COMPARATOR_FORMULA], paper_comparator_cost(q));
        }
    }

    #[test]
    fn paper_formula_values() {
        assert_eq!(paper_comparator_cost(1), 5);
        assert_eq!(paper_comparator_cost(3), 41);
        assert_eq!(paper_comparator_cost(8), 131);
    }

    #[test]
    fn invalid_specs() {
        assert_eq!(ComparatorSpec::new(vec![], vec![], [0, 1], 2, "c"), Err(ComparatorError::ZeroWidth));
        assert_eq!(
            ComparatorSpec::new(vec![0, 1], vec![2], [3, 4], 5, "c"),
            Err(ComparatorError::LengthMismatch { a: 2, b: 1 })
        );
        assert_eq!(ComparatorSpec::new(vec![0], vec![1], [2, 0], 3, "c"), Err(ComparatorError::Overlap(0)));
        assert_eq!(ComparatorSpec::new(vec![0], vec![1], [2, 3], 1, "c"), Err(ComparatorError::Overlap(1)));
    }
}
