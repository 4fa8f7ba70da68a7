//! Text serialization of circuits (`.circ` files).
//!
//! Probabilities and coordinates are written with the shortest decimal that
//! round-trips, so serialize(parse(t)) is byte-stable after canonicalization.

use super::{Circuit, CircuitError, Instruction, Opcode, Target};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("line {line}, col {col}: unknown opcode '{word}'")]
    UnknownOpcode { line: usize, col: usize, word: String },
    #[error("line {line}, col {col}: bad target '{word}'")]
    BadTarget { line: usize, col: usize, word: String },
    #[error("line {line}, col {col}: bad argument '{word}'")]
    BadArgument { line: usize, col: usize, word: String },
    #[error("line {line}: unterminated argument list")]
    UnterminatedArgs { line: usize },
    #[error("line {line}: {source}")]
    Invalid {
        line: usize,
        #[source]
        source: CircuitError,
    },
    #[error("{0}")]
    Structure(#[from] CircuitError),
}

pub fn serialize_circuit(circuit: &Circuit) -> String {
    let mut out = String::new();
    for inst in circuit.instructions() {
        serialize_instruction(inst, &mut out);
        out.push('\n');
    }
    out
}

fn serialize_instruction(inst: &Instruction, out: &mut String) {
    out.push_str(inst.opcode.name());
    if !inst.args.is_empty() {
        out.push('(');
        for (i, a) in inst.args.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str(&format_num(*a));
        }
        out.push(')');
    }
    for t in &inst.targets {
        match t {
            Target::Qubit(q) => out.push_str(&format!(" {q}")),
            Target::Rec(k) => out.push_str(&format!(" rec[{k}]")),
        }
    }
}

fn format_num(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

pub fn parse_circuit(text: &str) -> Result<Circuit, ParseError> {
    let mut instructions = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        instructions.push(parse_line(content, line)?);
    }
    Circuit::from_instructions(instructions).map_err(ParseError::Structure)
}

fn parse_line(content: &str, line: usize) -> Result<Instruction, ParseError> {
    // Opcode, optionally followed by (args), then whitespace-separated targets.
    let (head, rest) = match content.find(|c: char| c.is_whitespace() || c == '(') {
        Some(i) => content.split_at(i),
        None => (content, ""),
    };
    let opcode = Opcode::from_name(head).ok_or_else(|| ParseError::UnknownOpcode {
        line,
        col: 1,
        word: head.to_string(),
    })?;

    let rest = rest.trim_start();
    let (args, targets_str) = if let Some(stripped) = rest.strip_prefix('(') {
        let close = stripped.find(')').ok_or(ParseError::UnterminatedArgs { line })?;
        let arg_str = &stripped[..close];
        let mut args = Vec::new();
        for part in arg_str.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let v: f64 = part.parse().map_err(|_| ParseError::BadArgument {
                line,
                col: content.find(part).map(|i| i + 1).unwrap_or(0),
                word: part.to_string(),
            })?;
            args.push(v);
        }
        (args, &stripped[close + 1..])
    } else {
        (Vec::new(), rest)
    };

    let mut targets = Vec::new();
    for word in targets_str.split_whitespace() {
        if let Some(inner) = word.strip_prefix("rec[").and_then(|w| w.strip_suffix(']')) {
            let k: i32 = inner.parse().map_err(|_| ParseError::BadTarget {
                line,
                col: content.find(word).map(|i| i + 1).unwrap_or(0),
                word: word.to_string(),
            })?;
            targets.push(Target::Rec(k));
        } else {
            let q: u32 = word.parse().map_err(|_| ParseError::BadTarget {
                line,
                col: content.find(word).map(|i| i + 1).unwrap_or(0),
                word: word.to_string(),
            })?;
            targets.push(Target::Qubit(q));
        }
    }
    Ok(Instruction { opcode, args, targets })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_simple_program() {
        let c = parse_circuit("H 0\nCZ 0 1\nM 1\n").unwrap();
        assert_eq!(c.instructions().len(), 3);
        assert_eq!(c.num_measurements(), 1);
        assert_eq!(c.num_qubits(), 2);
    }

    #[test]
    fn parses_detector_with_coords() {
        let c = parse_circuit("M 0\nM 1\nDETECTOR(1, 2, 0) rec[-1] rec[-2]\n").unwrap();
        assert_eq!(c.detectors().len(), 1);
        assert_eq!(c.detectors()[0].coords, [1.0, 2.0, 0.0]);
        assert_eq!(c.detectors()[0].measurements, vec![1, 0]);
    }

    #[test]
    fn unknown_opcode_is_an_error() {
        let err = parse_circuit("CNOT 0 1\n").unwrap_err();
        assert!(matches!(err, ParseError::UnknownOpcode { line: 1, .. }));
    }

    #[test]
    fn reports_line_of_bad_target() {
        let err = parse_circuit("H 0\nM zzz\n").unwrap_err();
        assert!(matches!(err, ParseError::BadTarget { line: 2, .. }));
    }

    #[test]
    fn rec_out_of_range_is_rejected() {
        let err = parse_circuit("M 0\nDETECTOR(0, 0, 0) rec[-2]\n").unwrap_err();
        assert!(matches!(err, ParseError::Structure(CircuitError::RecOutOfRange(-2, 1))));
    }

    #[test]
    fn overlapping_cz_rejected() {
        let err = parse_circuit("CZ 0 1 1 2\n").unwrap_err();
        assert!(matches!(err, ParseError::Structure(CircuitError::OverlappingCz(1))));
    }

    #[test]
    fn roundtrip_preserves_semantics() {
        let src = "QUBIT_COORDS(1, 1) 0\nR 0 1\nTICK\nH 0\nX_ERROR(0.01) 0 1\nCZ 0 1\nTICK\nM 0 1\nDETECTOR(0, 0, 0) rec[-2]\nOBSERVABLE_INCLUDE(0) rec[-1]\n";
        let c = parse_circuit(src).unwrap();
        let text = serialize_circuit(&c);
        let c2 = parse_circuit(&text).unwrap();
        assert_eq!(c, c2);
        assert_eq!(serialize_circuit(&c2), text);
    }

    #[test]
    fn shortest_roundtrip_probability_formatting() {
        let c = parse_circuit("X_ERROR(0.0002) 0\n").unwrap();
        assert_eq!(serialize_circuit(&c), "X_ERROR(0.0002) 0\n");
    }
}
