//! OpenQASM 2.0 subset export and import.
//!
//! Only `h`, `x`, `cx`, `ccx` and `reset` are emitted. Negative controls are
//! lowered to X-flanked positive controls and MCX gates to Toffoli networks
//! that borrow idle qubits as dirty ancillas (restored on exit, so their
//! state never matters). Stages are written as `// stage:<name>` comments.

use thiserror::Error;

use crate::circuit::{Circuit, CircuitError, Control, GateKind, GateOp, Polarity, Stage};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QasmError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("cannot lower {gate}: no idle qubit to borrow in a width-{width} circuit")]
    NoFreeQubit { gate: String, width: usize },
}

fn parse_err(line: usize, message: impl Into<String>) -> QasmError {
    QasmError::Parse { line, message: message.into() }
}

/// Rewrites `circuit` into the exportable gate set: positive controls only,
/// at most two controls per gate. Stage boundaries are preserved.
pub fn lower(circuit: &Circuit) -> Result<Circuit, QasmError> {
    let width = circuit.width();
    let mut ops = Vec::with_capacity(circuit.len());
    let mut index_map = Vec::with_capacity(circuit.len() + 1);
    for op in circuit.ops() {
        index_map.push(ops.len());
        lower_op(op, width, &mut ops)?;
    }
    index_map.push(ops.len());
    let stages = circuit
        .stages()
        .iter()
        .map(|s| Stage { name: s.name.clone(), start: index_map[s.start], end: index_map[s.end] })
        .collect();
    Ok(Circuit::from_raw_parts(width, ops, stages))
}

fn lower_op(op: &GateOp, width: usize, out: &mut Vec<GateOp>) -> Result<(), QasmError> {
    if !op.is_permutation() || op.negative_controls() == 0 && op.controls().len() <= 2 {
        out.push(op.clone());
        return Ok(());
    }
    let flips: Vec<usize> = op
        .controls()
        .iter()
        .filter(|c| c.polarity == Polarity::Negative)
        .map(|c| c.qubit)
        .collect();
    let controls: Vec<usize> = op.controls().iter().map(|c| c.qubit).collect();
    out.extend(flips.iter().map(|&q| GateOp::x(q)));
    mcx_network(&controls, op.target(), width, out).map_err(|()| QasmError::NoFreeQubit {
        gate: op.to_string(),
        width,
    })?;
    out.extend(flips.iter().map(|&q| GateOp::x(q)));
    Ok(())
}

/// Multi-controlled NOT from Toffolis, borrowing idle qubits.
fn mcx_network(controls: &[usize], target: usize, width: usize, out: &mut Vec<GateOp>) -> Result<(), ()> {
    let m = controls.len();
    if m <= 2 {
        out.push(GateOp::controlled_x(controls.iter().map(|&q| Control::pos(q)).collect(), target));
        return Ok(());
    }
    let pool: Vec<usize> = (0..width)
        .filter(|q| *q != target && !controls.contains(q))
        .collect();
    if pool.len() >= m - 2 {
        v_chain(controls, target, &pool[..m - 2], out);
        return Ok(());
    }
    let Some(&borrowed) = pool.first() else {
        return Err(());
    };
    // Split in two halves around one borrowed qubit; each half then has the
    // other half's wires available as its own dirty ancillas.
    let (low, high) = controls.split_at(m.div_ceil(2));
    let mut high_with = high.to_vec();
    high_with.push(borrowed);
    for _ in 0..2 {
        mcx_network(low, borrowed, width, out)?;
        mcx_network(&high_with, target, width, out)?;
    }
    Ok(())
}

/// `4(m - 2)` Toffolis using `m - 2` dirty ancillas.
fn v_chain(c: &[usize], target: usize, anc: &[usize], out: &mut Vec<GateOp>) {
    let m = c.len();
    let tof = |a: usize, b: usize, t: usize| GateOp::toffoli(Control::pos(a), Control::pos(b), t);
    let ladder: Vec<GateOp> = (2..=m - 2).rev().map(|j| tof(c[j], anc[j - 2], anc[j - 1])).collect();
    for _ in 0..2 {
        out.push(tof(c[m - 1], anc[m - 3], target));
        out.extend(ladder.iter().cloned());
        out.push(tof(c[0], c[1], anc[0]));
        out.extend(ladder.iter().rev().cloned());
    }
}

fn qubit_list(op: &GateOp) -> String {
    op.controls()
        .iter()
        .map(|c| c.qubit)
        .chain(std::iter::once(op.target()))
        .map(|q| format!("q[{q}]"))
        .collect::<Vec<_>>()
        .join(",")
}

fn mnemonic(kind: GateKind) -> &'static str {
    match kind {
        GateKind::H => "h",
        GateKind::X => "x",
        GateKind::Cnot => "cx",
        GateKind::Toffoli => "ccx",
        GateKind::Reset => "reset",
        GateKind::Mcx => unreachable!("MCX is lowered before rendering"),
    }
}

/// Renders `circuit` as OpenQASM 2.0 text.
pub fn export(circuit: &Circuit) -> Result<String, QasmError> {
    let lowered = lower(circuit)?;
    let mut text = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    text.push_str(&format!("qreg q[{}];\n", lowered.width()));
    let mut stages = lowered.stages().iter().peekable();
    for (i, op) in lowered.ops().iter().enumerate() {
        while let Some(s) = stages.next_if(|s| s.start == i) {
            text.push_str(&format!("// stage:{}\n", s.name));
        }
        text.push_str(&format!("{} {};\n", mnemonic(op.kind()), qubit_list(op)));
    }
    for s in stages {
        text.push_str(&format!("// stage:{}\n", s.name));
    }
    Ok(text)
}

fn parse_qubit(arg: &str, reg: &str, line: usize) -> Result<usize, QasmError> {
    let arg = arg.trim();
    let malformed = || parse_err(line, format!("malformed qubit reference `{arg}`"));
    let (name, rest) = arg.split_once('[').ok_or_else(malformed)?;
    let idx = rest.strip_suffix(']').ok_or_else(malformed)?;
    if name.trim() != reg {
        return Err(parse_err(line, format!("unknown register `{}`", name.trim())));
    }
    idx.trim().parse().map_err(|_| malformed())
}

/// Parses text in the exported subset. The `OPENQASM` header and `include`
/// line are optional; a single `qreg` must precede the first gate.
pub fn parse(text: &str) -> Result<Circuit, QasmError> {
    let mut circuit: Option<(String, Circuit)> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let (code, comment) = match raw.find("//") {
            Some(at) => (&raw[..at], Some(raw[at + 2..].trim())),
            None => (raw, None),
        };

        let mut pieces: Vec<&str> = code.split(';').collect();
        let tail = pieces.pop().unwrap_or("");
        if !tail.trim().is_empty() {
            return Err(parse_err(line, format!("missing `;` after `{}`", tail.trim())));
        }
        for stmt in pieces.iter().map(|s| s.trim()) {
            if stmt.is_empty() {
                continue;
            }
            let (head, args) = stmt.split_once(char::is_whitespace).unwrap_or((stmt, ""));
            let args = args.trim();
            match head {
                "OPENQASM" => {
                    if args != "2.0" {
                        return Err(parse_err(line, format!("unsupported version `{args}`")));
                    }
                }
                "include" => {}
                "qreg" => {
                    if circuit.is_some() {
                        return Err(parse_err(line, "only one qreg is supported"));
                    }
                    let (name, rest) = args
                        .split_once('[')
                        .ok_or_else(|| parse_err(line, format!("malformed qreg `{args}`")))?;
                    let width = rest
                        .strip_suffix(']')
                        .and_then(|w| w.trim().parse().ok())
                        .ok_or_else(|| parse_err(line, format!("malformed qreg `{args}`")))?;
                    circuit = Some((name.trim().to_string(), Circuit::new(width)));
                }
                _ => {
                    let arity = match head {
                        "h" | "x" | "reset" => 1,
                        "cx" => 2,
                        "ccx" => 3,
                        other => return Err(parse_err(line, format!("unknown mnemonic `{other}`"))),
                    };
                    let (reg, c) = circuit
                        .as_mut()
                        .ok_or_else(|| parse_err(line, "gate before qreg declaration"))?;
                    let qubits = args
                        .split(',')
                        .map(|a| parse_qubit(a, reg, line))
                        .collect::<Result<Vec<_>, _>>()?;
                    if qubits.len() != arity {
                        return Err(parse_err(
                            line,
                            format!("`{head}` takes {arity} qubits, got {}", qubits.len()),
                        ));
                    }
                    let (target, ctrl) = qubits.split_last().expect("arity >= 1");
                    let controls = ctrl.iter().map(|&q| Control::pos(q)).collect();
                    let op = match head {
                        "h" => GateOp::h(*target),
                        "reset" => GateOp::reset(*target),
                        _ => GateOp::controlled_x(controls, *target),
                    };
                    c.push(op).map_err(|e| parse_err(line, e.to_string()))?;
                }
            }
        }

        if let Some(stage) = comment.and_then(|c| c.strip_prefix("stage:")) {
            let (_, c) = circuit
                .as_mut()
                .ok_or_else(|| parse_err(line, "stage marker before qreg declaration"))?;
            c.begin_stage(stage.trim())
                .map_err(|e: CircuitError| parse_err(line, e.to_string()))?;
        }
    }
    circuit
        .map(|(_, c)| c)
        .ok_or_else(|| parse_err(text.lines().count().max(1), "missing qreg declaration"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn body(text: &str) -> Vec<&str> {
        text.lines().skip(3).collect()
    }

    #[test]
    fn single_x_line() {
        let mut c = Circuit::new(1);
        c.push(GateOp::x(0)).unwrap();
        assert_eq!(body(&export(&c).unwrap()), vec!["x q[0];"]);
    }

    #[test]
    fn toffoli_line() {
        let mut c = Circuit::new(3);
        c.push(GateOp::toffoli(Control::pos(0), Control::pos(1), 2)).unwrap();
        assert_eq!(body(&export(&c).unwrap()), vec!["ccx q[0],q[1],q[2];"]);
    }

    #[test]
    fn negative_control_is_x_flanked() {
        let mut c = Circuit::new(2);
        c.push(GateOp::cnot(Control::neg(0), 1)).unwrap();
        assert_eq!(body(&export(&c).unwrap()), vec!["x q[0];", "cx q[0],q[1];", "x q[0];"]);
    }

    #[test]
    fn header_is_always_emitted() {
        let text = export(&Circuit::new(4)).unwrap();
        assert_eq!(text, "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[4];\n");
    }

    #[test]
    fn parse_minimal() {
        let c = parse("qreg q[1];\nx q[0];").unwrap();
        assert_eq!(c.ops(), &[GateOp::x(0)]);
    }

    #[test]
    fn unknown_mnemonic_reports_line() {
        let err = parse("foo q[0];").unwrap_err();
        assert_eq!(err, QasmError::Parse { line: 1, message: "unknown mnemonic `foo`".into() });
        let err = parse("qreg q[2];\n\nx q[0];\nfoo q[0];").unwrap_err();
        assert!(matches!(err, QasmError::Parse { line: 4, .. }));
    }

    #[test]
    fn malformed_references() {
        for bad in ["x q0;", "x q[a];", "x r[0];", "cx q[0];", "x q[5];", "cx q[1],q[1];", "x q[0]"] {
            let text = format!("qreg q[2];\n{bad}\n");
            match parse(&text) {
                Err(QasmError::Parse { line: 2, .. }) => {}
                other => panic!("{bad}: {other:?}"),
            }
        }
    }

    #[test]
    fn stage_comments_round_trip() {
        let text = "OPENQASM 2.0;\nqreg q[2];\nx q[0];\n// stage:a\nh q[1];\n// plain comment\n// stage:b\n";
        let c = parse(text).unwrap();
        assert_eq!(c.stages().len(), 2);
        assert_eq!(c.stage("a").unwrap().start, 1);
        assert_eq!(c.stage("a").unwrap().end, 2);
        assert_eq!(c.stage("b").unwrap().start, 2);
        let again = parse(&export(&c).unwrap()).unwrap();
        assert_eq!(again.stages(), c.stages());
        assert_eq!(again.ops(), c.ops());
    }

    fn permutation_matches(op: &GateOp, width: usize) {
        let mut c = Circuit::new(width);
        c.push(op.clone()).unwrap();
        let lowered = lower(&c).unwrap();
        assert!(lowered.ops().iter().all(|g| g.negative_controls() == 0 && g.controls().len() <= 2));
        for bits in 0..1u64 << width {
            let got = lowered.ops().iter().fold(bits, |b, g| g.apply_to_bits(b));
            assert_eq!(got, op.apply_to_bits(bits), "{op} on {bits:b}");
        }
    }

    #[test]
    fn mcx_lowering_is_exact_with_many_ancillas() {
        for m in 3..=5 {
            let controls = (0..m).map(|i| Control::on(i, i % 2 == 0)).collect();
            permutation_matches(&GateOp::mcx(controls, m), 2 * m);
        }
    }

    #[test]
    fn mcx_lowering_is_exact_with_one_ancilla() {
        for m in 3..=7 {
            let controls = (0..m).map(Control::pos).collect();
            permutation_matches(&GateOp::mcx(controls, m), m + 2);
        }
        let mixed = (0..5).map(|i| Control::on(i + 1, i != 2)).collect();
        permutation_matches(&GateOp::mcx(mixed, 0), 7);
    }

    #[test]
    fn mcx_without_idle_qubit_cannot_be_lowered() {
        let mut c = Circuit::new(4);
        c.push(GateOp::mcx((0..3).map(Control::pos).collect(), 3)).unwrap();
        assert!(matches!(export(&c), Err(QasmError::NoFreeQubit { width: 4, .. })));
    }
}
