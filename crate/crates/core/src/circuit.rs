//! Gate-level circuit representation.
//!
//! A [`Circuit`] is an ordered list of [`GateOp`]s over `width` qubits, split
//! into named, contiguous stages. Stages are what the cost ledger counts over,
//! so the preparation stage can be excluded from quantum cost while the full
//! pipeline remains one simulable circuit.
//!
//! Qubit `i` corresponds to bit `i` of a computational basis index.

use std::fmt;

use thiserror::Error;

/// Errors raised while building or composing circuits.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("qubit {qubit} out of range for width {width}")]
    QubitOutOfRange { qubit: usize, width: usize },
    #[error("qubit {0} used more than once in a single gate")]
    DuplicateQubit(usize),
    #[error("{kind} gate cannot carry {count} controls")]
    ControlCount { kind: GateKind, count: usize },
    #[error("stage `{0}` already exists")]
    DuplicateStage(String),
    #[error("unknown stage `{0}`")]
    UnknownStage(String),
    #[error("fragment width {fragment} exceeds circuit width {circuit}")]
    FragmentTooWide { fragment: usize, circuit: usize },
    #[error("invalid register layout: {0}")]
    Layout(String),
}

/// Which value of a control qubit enables the gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Control {
    pub qubit: usize,
    pub polarity: Polarity,
}

impl Control {
    pub fn pos(qubit: usize) -> Self {
        Control { qubit, polarity: Polarity::Positive }
    }

    pub fn neg(qubit: usize) -> Self {
        Control { qubit, polarity: Polarity::Negative }
    }

    /// Control that fires when the qubit holds `value`.
    pub fn on(qubit: usize, value: bool) -> Self {
        if value {
            Self::pos(qubit)
        } else {
            Self::neg(qubit)
        }
    }

    #[inline]
    pub fn is_satisfied(&self, bits: u64) -> bool {
        let set = (bits >> self.qubit) & 1 == 1;
        match self.polarity {
            Polarity::Positive => set,
            Polarity::Negative => !set,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    H,
    X,
    Cnot,
    Toffoli,
    Mcx,
    Reset,
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Cnot => "CNOT",
            GateKind::Toffoli => "TOFFOLI",
            GateKind::Mcx => "MCX",
            GateKind::Reset => "RESET",
        };
        f.write_str(name)
    }
}

/// One gate or reset.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GateOp {
    kind: GateKind,
    target: usize,
    controls: Vec<Control>,
}

impl GateOp {
    /// Raw constructor; the control count is checked when the op is appended.
    pub fn new(kind: GateKind, target: usize, controls: Vec<Control>) -> Self {
        GateOp { kind, target, controls }
    }

    pub fn h(target: usize) -> Self {
        Self::new(GateKind::H, target, Vec::new())
    }

    pub fn x(target: usize) -> Self {
        Self::new(GateKind::X, target, Vec::new())
    }

    pub fn cnot(control: Control, target: usize) -> Self {
        Self::new(GateKind::Cnot, target, vec![control])
    }

    pub fn toffoli(c0: Control, c1: Control, target: usize) -> Self {
        Self::new(GateKind::Toffoli, target, vec![c0, c1])
    }

    pub fn mcx(controls: Vec<Control>, target: usize) -> Self {
        Self::new(GateKind::Mcx, target, controls)
    }

    pub fn reset(target: usize) -> Self {
        Self::new(GateKind::Reset, target, Vec::new())
    }

    /// NOT with any number of controls, picking X/CNOT/TOFFOLI/MCX by count.
    pub fn controlled_x(controls: Vec<Control>, target: usize) -> Self {
        let kind = match controls.len() {
            0 => GateKind::X,
            1 => GateKind::Cnot,
            2 => GateKind::Toffoli,
            _ => GateKind::Mcx,
        };
        Self::new(kind, target, controls)
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn controls(&self) -> &[Control] {
        &self.controls
    }

    pub fn negative_controls(&self) -> usize {
        self.controls
            .iter()
            .filter(|c| c.polarity == Polarity::Negative)
            .count()
    }

    /// True for every kind except H and RESET.
    pub fn is_permutation(&self) -> bool {
        !matches!(self.kind, GateKind::H | GateKind::Reset)
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(self.target).chain(self.controls.iter().map(|c| c.qubit))
    }

    pub fn validate(&self, width: usize) -> Result<(), CircuitError> {
        let expected_ok = match self.kind {
            GateKind::H | GateKind::X | GateKind::Reset => self.controls.is_empty(),
            GateKind::Cnot => self.controls.len() == 1,
            GateKind::Toffoli => self.controls.len() == 2,
            GateKind::Mcx => self.controls.len() >= 3,
        };
        if !expected_ok {
            return Err(CircuitError::ControlCount { kind: self.kind, count: self.controls.len() });
        }
        let mut seen = 0u128;
        for q in self.qubits() {
            if q >= width {
                return Err(CircuitError::QubitOutOfRange { qubit: q, width });
            }
            if q < 128 {
                if seen & (1 << q) != 0 {
                    return Err(CircuitError::DuplicateQubit(q));
                }
                seen |= 1 << q;
            }
        }
        Ok(())
    }

    #[inline]
    pub fn controls_satisfied(&self, bits: u64) -> bool {
        self.controls.iter().all(|c| c.is_satisfied(bits))
    }

    /// Classical action on a basis state. H has no classical action and is
    /// returned unchanged; RESET clears its target.
    #[inline]
    pub fn apply_to_bits(&self, bits: u64) -> u64 {
        match self.kind {
            GateKind::H => bits,
            GateKind::Reset => bits & !(1 << self.target),
            _ => {
                if self.controls_satisfied(bits) {
                    bits ^ (1 << self.target)
                } else {
                    bits
                }
            }
        }
    }
}

impl fmt::Display for GateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.kind)?;
        for c in &self.controls {
            if c.polarity == Polarity::Negative {
                write!(f, "!")?;
            }
            write!(f, "q{},", c.qubit)?;
        }
        write!(f, "q{})", self.target)
    }
}

/// Assignment of register roles to qubit indices.
///
/// Every register is stored most-significant bit first. The standard
/// allocation puts position bits lowest, then color, so a basis index's low
/// `q + 2n` bits read as `color ∥ position`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterLayout {
    q: usize,
    n: usize,
    color: Vec<usize>,
    position: Vec<usize>,
    threshold: Vec<usize>,
    cmp_aux: [usize; 2],
    results: [usize; 2],
}

impl RegisterLayout {
    /// Standard layout for `q`-bit gray values on a `2^n × 2^n` image.
    pub fn new(q: usize, n: usize) -> Result<Self, CircuitError> {
        if q == 0 {
            return Err(CircuitError::Layout("gray depth q must be at least 1".into()));
        }
        let p = 2 * n;
        let position = (0..p).rev().collect();
        let color = (p..p + q).rev().collect();
        let threshold = (p + q..p + 2 * q).rev().collect();
        let base = p + 2 * q;
        Self::from_parts(q, n, color, position, threshold, [base, base + 1], [base + 2, base + 3])
    }

    /// Custom allocation; registers are given MSB first and must be disjoint.
    pub fn from_parts(
        q: usize,
        n: usize,
        color: Vec<usize>,
        position: Vec<usize>,
        threshold: Vec<usize>,
        cmp_aux: [usize; 2],
        results: [usize; 2],
    ) -> Result<Self, CircuitError> {
        if q == 0 {
            return Err(CircuitError::Layout("gray depth q must be at least 1".into()));
        }
        if color.len() != q || threshold.len() != q {
            return Err(CircuitError::Layout(format!(
                "color and threshold registers need {q} qubits"
            )));
        }
        if position.len() != 2 * n {
            return Err(CircuitError::Layout(format!("position register needs {} qubits", 2 * n)));
        }
        let layout = RegisterLayout { q, n, color, position, threshold, cmp_aux, results };
        let width = layout.width();
        let mut seen = vec![false; width];
        for idx in layout.all_qubits() {
            if idx >= width {
                return Err(CircuitError::Layout(format!(
                    "qubit {idx} outside width {width}"
                )));
            }
            if std::mem::replace(&mut seen[idx], true) {
                return Err(CircuitError::Layout(format!("qubit {idx} assigned twice")));
            }
        }
        Ok(layout)
    }

    fn all_qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.color
            .iter()
            .chain(&self.position)
            .chain(&self.threshold)
            .chain(&self.cmp_aux)
            .chain(&self.results)
            .copied()
    }

    /// Always `2q + 2n + 4`.
    pub fn width(&self) -> usize {
        2 * self.q + 2 * self.n + 4
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn color(&self) -> &[usize] {
        &self.color
    }

    pub fn position(&self) -> &[usize] {
        &self.position
    }

    pub fn threshold(&self) -> &[usize] {
        &self.threshold
    }

    pub fn cmp_aux(&self) -> [usize; 2] {
        self.cmp_aux
    }

    pub fn results(&self) -> [usize; 2] {
        self.results
    }

    /// Color qubits then position qubits, MSB first.
    pub fn readout(&self) -> Vec<usize> {
        self.color.iter().chain(&self.position).copied().collect()
    }

    /// Reads an MSB-first register out of a basis index.
    pub fn read_register(register: &[usize], bits: u64) -> u64 {
        register.iter().fold(0, |acc, &q| (acc << 1) | ((bits >> q) & 1))
    }

    /// Writes `value` into an MSB-first register of a basis index.
    pub fn write_register(register: &[usize], bits: u64, value: u64) -> u64 {
        let len = register.len();
        register.iter().enumerate().fold(bits, |acc, (i, &q)| {
            let bit = (value >> (len - 1 - i)) & 1;
            (acc & !(1 << q)) | (bit << q)
        })
    }
}

/// A named, contiguous range of ops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stage {
    pub name: String,
    pub start: usize,
    pub end: usize,
}

/// A published cost formula evaluated for a specific stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaperFormula {
    pub name: String,
    pub stage: String,
    pub value: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    width: usize,
    ops: Vec<GateOp>,
    stages: Vec<Stage>,
    layout: Option<RegisterLayout>,
    formulas: Vec<PaperFormula>,
}

impl Circuit {
    pub fn new(width: usize) -> Self {
        Circuit { width, ops: Vec::new(), stages: Vec::new(), layout: None, formulas: Vec::new() }
    }

    pub fn with_layout(layout: RegisterLayout) -> Self {
        let mut c = Self::new(layout.width());
        c.layout = Some(layout);
        c
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn layout(&self) -> Option<&RegisterLayout> {
        self.layout.as_ref()
    }

    pub fn formulas(&self) -> &[PaperFormula] {
        &self.formulas
    }

    pub fn stage(&self, name: &str) -> Option<&Stage> {
        self.stages.iter().find(|s| s.name == name)
    }

    /// Name of the stage containing op `index`, if any.
    pub fn stage_of(&self, index: usize) -> Option<&str> {
        self.stages
            .iter()
            .find(|s| s.start <= index && index < s.end)
            .map(|s| s.name.as_str())
    }

    /// Opens a new stage; subsequent ops extend it until the next one opens.
    pub fn begin_stage(&mut self, name: impl Into<String>) -> Result<(), CircuitError> {
        let name = name.into();
        if self.stage(&name).is_some() {
            return Err(CircuitError::DuplicateStage(name));
        }
        let at = self.ops.len();
        self.stages.push(Stage { name, start: at, end: at });
        Ok(())
    }

    pub fn push(&mut self, op: GateOp) -> Result<(), CircuitError> {
        op.validate(self.width)?;
        self.ops.push(op);
        if let Some(open) = self.stages.last_mut() {
            open.end = self.ops.len();
        }
        Ok(())
    }

    /// Builder-style [`push`](Self::push).
    pub fn append_gate(mut self, op: GateOp) -> Result<Self, CircuitError> {
        self.push(op)?;
        Ok(self)
    }

    pub fn register_formula(
        &mut self,
        name: impl Into<String>,
        stage: &str,
        value: u64,
    ) -> Result<(), CircuitError> {
        if self.stage(stage).is_none() {
            return Err(CircuitError::UnknownStage(stage.to_string()));
        }
        self.formulas.push(PaperFormula { name: name.into(), stage: stage.to_string(), value });
        Ok(())
    }

    /// Appends a fragment built over the same (or a narrower) qubit range.
    /// Fragment ops preceding its first stage join the currently open stage.
    pub fn append(&mut self, fragment: &Circuit) -> Result<(), CircuitError> {
        if fragment.width > self.width {
            return Err(CircuitError::FragmentTooWide {
                fragment: fragment.width,
                circuit: self.width,
            });
        }
        for s in &fragment.stages {
            if self.stage(&s.name).is_some() {
                return Err(CircuitError::DuplicateStage(s.name.clone()));
            }
        }
        let first_stage = fragment.stages.first().map_or(fragment.ops.len(), |s| s.start);
        for op in &fragment.ops[..first_stage] {
            self.push(op.clone())?;
        }
        for s in &fragment.stages {
            self.begin_stage(s.name.clone())?;
            for op in &fragment.ops[s.start..s.end] {
                self.push(op.clone())?;
            }
        }
        self.formulas.extend(fragment.formulas.iter().cloned());
        Ok(())
    }

    /// Copy of the circuit truncated just before stage `name` begins.
    pub fn prefix_before(&self, name: &str) -> Result<Circuit, CircuitError> {
        let pos = self
            .stages
            .iter()
            .position(|s| s.name == name)
            .ok_or_else(|| CircuitError::UnknownStage(name.into()))?;
        let cut = self.stages[pos].start;
        let stages: Vec<Stage> = self.stages[..pos].to_vec();
        let formulas = self
            .formulas
            .iter()
            .filter(|f| stages.iter().any(|s| s.name == f.stage))
            .cloned()
            .collect();
        Ok(Circuit {
            width: self.width,
            ops: self.ops[..cut].to_vec(),
            stages,
            layout: self.layout.clone(),
            formulas,
        })
    }

    /// Drops layout metadata and formulas, keeping ops and stages.
    pub(crate) fn from_raw_parts(width: usize, ops: Vec<GateOp>, stages: Vec<Stage>) -> Self {
        Circuit { width, ops, stages, layout: None, formulas: Vec::new() }
    }

    /// Qubits to read out after measurement: the layout's `color ∥ position`,
    /// or every qubit (MSB first) when no layout is attached.
    pub fn readout_qubits(&self) -> Vec<usize> {
        match &self.layout {
            Some(l) => l.readout(),
            None => (0..self.width).rev().collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn append_x_to_empty_circuit() {
        let c = Circuit::new(3).append_gate(GateOp::x(0)).unwrap();
        assert_eq!(c.len(), 1);
    }

    #[test]
    fn cnot_with_shared_control_and_target_is_rejected() {
        let err = Circuit::new(6).append_gate(GateOp::cnot(Control::pos(5), 5)).unwrap_err();
        assert_eq!(err, CircuitError::DuplicateQubit(5));
    }

    #[test]
    fn toffoli_appends_to_width_three() {
        let c = Circuit::new(3)
            .append_gate(GateOp::toffoli(Control::pos(0), Control::pos(1), 2))
            .unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.ops()[0].kind(), GateKind::Toffoli);
    }

    #[test]
    fn reset_with_controls_is_rejected() {
        let op = GateOp::new(GateKind::Reset, 0, vec![Control::pos(1)]);
        assert!(matches!(
            Circuit::new(2).append_gate(op),
            Err(CircuitError::ControlCount { kind: GateKind::Reset, count: 1 })
        ));
    }

    #[test]
    fn out_of_range_and_bad_mcx_are_rejected() {
        assert!(matches!(
            Circuit::new(2).append_gate(GateOp::x(2)),
            Err(CircuitError::QubitOutOfRange { qubit: 2, width: 2 })
        ));
        let two = GateOp::new(GateKind::Mcx, 3, vec![Control::pos(0), Control::pos(1)]);
        assert!(Circuit::new(4).append_gate(two).is_err());
        let h = GateOp::new(GateKind::H, 0, vec![Control::pos(1)]);
        assert!(Circuit::new(2).append_gate(h).is_err());
    }

    #[test]
    fn stages_extend_with_pushes() {
        let mut c = Circuit::new(2);
        c.push(GateOp::x(0)).unwrap();
        c.begin_stage("a").unwrap();
        c.push(GateOp::x(1)).unwrap();
        c.push(GateOp::x(1)).unwrap();
        c.begin_stage("b").unwrap();
        c.push(GateOp::h(0)).unwrap();
        assert_eq!(c.stage("a").unwrap(), &Stage { name: "a".into(), start: 1, end: 3 });
        assert_eq!(c.stage("b").unwrap(), &Stage { name: "b".into(), start: 3, end: 4 });
        assert_eq!(c.stage_of(0), None);
        assert_eq!(c.stage_of(2), Some("a"));
        assert!(matches!(c.begin_stage("a"), Err(CircuitError::DuplicateStage(_))));
    }

    #[test]
    fn append_fragment_keeps_stage_structure() {
        let mut frag = Circuit::new(2);
        frag.push(GateOp::x(0)).unwrap();
        frag.begin_stage("f").unwrap();
        frag.push(GateOp::x(1)).unwrap();
        frag.register_formula("f-cost", "f", 3).unwrap();

        let mut c = Circuit::new(4);
        c.begin_stage("main").unwrap();
        c.push(GateOp::h(3)).unwrap();
        c.append(&frag).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.stage("main").unwrap().end, 2);
        assert_eq!(c.stage("f").unwrap().start, 2);
        assert_eq!(c.formulas().len(), 1);
        assert!(matches!(
            frag.clone().append(&c),
            Err(CircuitError::FragmentTooWide { .. })
        ));
    }

    #[test]
    fn standard_layout_shape() {
        let l = RegisterLayout::new(3, 2).unwrap();
        assert_eq!(l.width(), 14);
        assert_eq!(l.position(), &[3, 2, 1, 0]);
        assert_eq!(l.color(), &[6, 5, 4]);
        assert_eq!(l.threshold(), &[9, 8, 7]);
        assert_eq!(l.cmp_aux(), [10, 11]);
        assert_eq!(l.results(), [12, 13]);
        let bits = RegisterLayout::write_register(l.color(), 0, 0b101);
        assert_eq!(bits, 0b101 << 4);
        assert_eq!(RegisterLayout::read_register(l.color(), bits), 0b101);
    }

    #[test]
    fn overlapping_layout_is_rejected() {
        let err = RegisterLayout::from_parts(1, 0, vec![0], vec![], vec![0], [1, 2], [3, 4]);
        assert!(matches!(err, Err(CircuitError::Layout(_))));
    }

    #[test]
    fn prefix_before_cuts_at_stage() {
        let mut c = Circuit::new(1);
        c.begin_stage("a").unwrap();
        c.push(GateOp::x(0)).unwrap();
        c.begin_stage("b").unwrap();
        c.push(GateOp::x(0)).unwrap();
        c.register_formula("fa", "a", 1).unwrap();
        c.register_formula("fb", "b", 1).unwrap();
        let p = c.prefix_before("b").unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.stages().len(), 1);
        assert_eq!(p.formulas().len(), 1);
    }
}
