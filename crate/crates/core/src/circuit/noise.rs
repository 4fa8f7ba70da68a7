//! SI1000 circuit-level depolarizing noise, modern interpretation.
//!
//! Measurement and reset count as two separate operations with full noise
//! sets: after each M the untouched qubits pick up DEPOLARIZE1(p/10) and
//! DEPOLARIZE1(2p); the same two terms follow each R. Measured qubits get a
//! 5p bit
//! flip before readout, reset qubits a 2p flip afterwards. CZ gates carry
//! two-qubit depolarizing p, single-qubit gates p/10, and idle qubits p/10
//! per tick.

use super::{inst_pq, Circuit, CircuitError, Instruction, Opcode};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub p: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum NoiseError {
    #[error("noise strength {0} outside [0, 0.1]")]
    BadStrength(f64),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

impl NoiseParams {
    pub fn new(p: f64) -> Result<Self, NoiseError> {
        if !(0.0..=0.1).contains(&p) {
            return Err(NoiseError::BadStrength(p));
        }
        Ok(NoiseParams { p })
    }
}

/// Inject SI1000 noise into a noiseless circuit. Non-noise instructions keep
/// their count and order; the noisy circuit interleaves channels per moment.
pub fn apply_si1000(clean: &Circuit, noise: NoiseParams) -> Result<Circuit, NoiseError> {
    if clean.has_noise() {
        return Err(CircuitError::NoiseAlreadyPresent.into());
    }
    let p = noise.p;
    let n = clean.num_qubits();
    let mut out: Vec<Instruction> = Vec::new();

    let mut moment: Vec<&Instruction> = Vec::new();
    let mut moments: Vec<Vec<&Instruction>> = Vec::new();
    for i in clean.instructions() {
        if i.opcode == Opcode::Tick {
            moments.push(std::mem::take(&mut moment));
        } else {
            moment.push(i);
        }
    }
    moments.push(moment);

    for (mi, m) in moments.iter().enumerate() {
        if mi > 0 {
            out.push(Instruction { opcode: Opcode::Tick, args: vec![], targets: vec![] });
        }
        emit_moment(m, p, n, &mut out)?;
    }
    Ok(Circuit::from_instructions(out)?)
}

fn emit_moment(
    moment: &[&Instruction],
    p: f64,
    num_qubits: u32,
    out: &mut Vec<Instruction>,
) -> Result<(), NoiseError> {
    let mut measured: Vec<u32> = Vec::new();
    let mut measured_x: Vec<u32> = Vec::new();
    let mut reset: Vec<u32> = Vec::new();
    let mut reset_x: Vec<u32> = Vec::new();
    let mut cz_pairs: Vec<u32> = Vec::new();
    let mut single_gate: Vec<u32> = Vec::new();
    let mut bookkeeping: Vec<&Instruction> = Vec::new();
    let mut ops: Vec<&Instruction> = Vec::new();

    for i in moment {
        match i.opcode {
            Opcode::M => measured.extend(i.qubits()),
            Opcode::MX => measured_x.extend(i.qubits()),
            Opcode::R => reset.extend(i.qubits()),
            Opcode::RX => reset_x.extend(i.qubits()),
            Opcode::CZ => cz_pairs.extend(i.qubits()),
            Opcode::H => single_gate.extend(i.qubits()),
            Opcode::Detector | Opcode::ObservableInclude | Opcode::QubitCoords => {
                bookkeeping.push(i);
                continue;
            }
            Opcode::Tick => unreachable!(),
            _ => return Err(CircuitError::NoiseAlreadyPresent.into()),
        }
        ops.push(i);
    }

    let has_meas = !measured.is_empty() || !measured_x.is_empty();
    let has_reset = !reset.is_empty() || !reset_x.is_empty();
    let has_gate = !cz_pairs.is_empty() || !single_gate.is_empty();
    if (has_meas && (has_reset || has_gate)) || (has_reset && has_gate) {
        return Err(CircuitError::MixedMoment.into());
    }

    let mut touched: Vec<u32> = Vec::new();
    touched.extend(&measured);
    touched.extend(&measured_x);
    touched.extend(&reset);
    touched.extend(&reset_x);
    touched.extend(&cz_pairs);
    touched.extend(&single_gate);
    let idle: Vec<u32> = (0..num_qubits).filter(|q| !touched.contains(q)).collect();

    let push_noise = |out: &mut Vec<Instruction>, op: Opcode, prob: f64, qs: &[u32]| {
        if prob > 0.0 && !qs.is_empty() {
            let mut qs = qs.to_vec();
            if op != Opcode::Depolarize2 {
                qs.sort_unstable();
            }
            out.push(inst_pq(op, prob, &qs));
        }
    };

    if has_meas {
        // Pre-measurement flips in the measured basis, then M, then the two
        // idle terms on everything not being measured.
        push_noise(out, Opcode::XError, 5.0 * p, &measured);
        push_noise(out, Opcode::ZError, 5.0 * p, &measured_x);
        for i in ops {
            out.push((*i).clone());
        }
        push_noise(out, Opcode::Depolarize1, p / 10.0, &idle);
        push_noise(out, Opcode::Depolarize1, 2.0 * p, &idle);
    } else if has_reset {
        for i in ops {
            out.push((*i).clone());
        }
        push_noise(out, Opcode::XError, 2.0 * p, &reset);
        push_noise(out, Opcode::ZError, 2.0 * p, &reset_x);
        push_noise(out, Opcode::Depolarize1, p / 10.0, &idle);
        push_noise(out, Opcode::Depolarize1, 2.0 * p, &idle);
    } else if has_gate {
        for i in ops {
            out.push((*i).clone());
        }
        push_noise(out, Opcode::Depolarize2, p, &cz_pairs);
        let mut singles = single_gate.clone();
        singles.extend(&idle);
        push_noise(out, Opcode::Depolarize1, p / 10.0, &singles);
    } else if !bookkeeping.is_empty() && touched.is_empty() {
        // Bookkeeping-only moment: no noise.
    }

    for b in bookkeeping {
        out.push((*b).clone());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{parse_circuit, serialize_circuit};

    #[test]
    fn paper_snippet_structure() {
        // Measured qubits 7..12, idle 0..6, p = 0.002: must reproduce the
        // SI1000 measure-then-reset block with all four idle/flip terms.
        let clean = parse_circuit("M 7 8 9 10 11 12\nTICK\nR 7 8 9 10 11 12\n").unwrap();
        let noisy = apply_si1000(&clean, NoiseParams::new(0.002).unwrap()).unwrap();
        let text = serialize_circuit(&noisy);
        let expected = "X_ERROR(0.01) 7 8 9 10 11 12\n\
             M 7 8 9 10 11 12\n\
             DEPOLARIZE1(0.0002) 0 1 2 3 4 5 6\n\
             DEPOLARIZE1(0.004) 0 1 2 3 4 5 6\n\
             TICK\n\
             R 7 8 9 10 11 12\n\
             X_ERROR(0.004) 7 8 9 10 11 12\n\
             DEPOLARIZE1(0.0002) 0 1 2 3 4 5 6\n\
             DEPOLARIZE1(0.004) 0 1 2 3 4 5 6\n";
        assert_eq!(text, expected);
    }

    #[test]
    fn zero_noise_is_identity() {
        let clean = parse_circuit("R 0 1\nTICK\nH 0\nTICK\nCZ 0 1\nTICK\nM 0 1\n").unwrap();
        let noisy = apply_si1000(&clean, NoiseParams::new(0.0).unwrap()).unwrap();
        assert_eq!(serialize_circuit(&noisy), serialize_circuit(&clean));
    }

    #[test]
    fn gate_moment_noise() {
        let clean = parse_circuit("CZ 0 1\nTICK\nH 0\n").unwrap();
        let noisy = apply_si1000(&clean, NoiseParams::new(0.01).unwrap()).unwrap();
        let text = serialize_circuit(&noisy);
        assert_eq!(
            text,
            "CZ 0 1\nDEPOLARIZE2(0.01) 0 1\nTICK\nH 0\nDEPOLARIZE1(0.001) 0 1\n"
        );
    }

    #[test]
    fn rejects_noisy_input() {
        let c = parse_circuit("X_ERROR(0.1) 0\n").unwrap();
        let err = apply_si1000(&c, NoiseParams::new(0.01).unwrap()).unwrap_err();
        assert_eq!(err, NoiseError::Circuit(CircuitError::NoiseAlreadyPresent));
    }

    #[test]
    fn rejects_mixed_moment() {
        let c = parse_circuit("M 0\nR 1\n").unwrap();
        let err = apply_si1000(&c, NoiseParams::new(0.01).unwrap()).unwrap_err();
        assert_eq!(err, NoiseError::Circuit(CircuitError::MixedMoment));
    }

    #[test]
    fn rejects_bad_strength() {
        assert!(NoiseParams::new(0.2).is_err());
        assert!(NoiseParams::new(-0.1).is_err());
    }

    #[test]
    fn preserves_non_noise_instruction_count_and_order() {
        let clean =
            parse_circuit("R 0 1 2\nTICK\nH 0 1\nTICK\nCZ 0 1\nTICK\nM 0 1\nDETECTOR(0, 0, 0) rec[-1]\n")
                .unwrap();
        let noisy = apply_si1000(&clean, NoiseParams::new(0.005).unwrap()).unwrap();
        let kept: Vec<_> = noisy
            .instructions()
            .iter()
            .filter(|i| !i.opcode.is_noise())
            .cloned()
            .collect();
        let original: Vec<_> = clean.instructions().to_vec();
        assert_eq!(kept, original);
    }
}
