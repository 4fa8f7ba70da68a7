//! Shot sampling: tableau reference runs plus Pauli-frame Monte Carlo.

mod frame;
mod symbolic;
mod tableau;

pub use frame::{
    attach_auxiliary_labels, detection_fraction, sample_shots, AuxiliaryLabels, Sampler, ShotRecord,
};
pub use symbolic::{determinism_analysis, DeterminismReport};
pub use tableau::Tableau;

use crate::circuit::{Circuit, Opcode};
use crate::util::{Bits, CounterRng};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("noiseless measurement {0} is random; the builder should have made it deterministic")]
    NondeterministicMeasurement(u32),
    #[error("need at least one shot and one detector")]
    EmptySample,
    #[error("circuit lacks the builder layout metadata required for auxiliary labels")]
    MissingLayoutMetadata,
    #[error("shots were sampled with different seeds")]
    MixedProvenance,
}

/// Noiseless reference: per-measurement values with random outcomes resolved
/// by projecting onto the outcome-0 branch, plus a determinism mask.
#[derive(Clone, Debug)]
pub struct ReferenceRun {
    pub measurements: Bits,
    pub deterministic: Bits,
}

/// Run the tableau simulator over the circuit with all noise channels
/// skipped. Detector semantics rest on this reference; randomness that the
/// state collapse leaves free is resolved to outcome 0.
pub fn reference_run(circuit: &Circuit) -> ReferenceRun {
    let n = circuit.num_qubits() as usize;
    let mut t = Tableau::new(n.max(1));
    let mut measurements = Bits::new(circuit.num_measurements() as usize);
    let mut deterministic = Bits::new(circuit.num_measurements() as usize);
    let mut cursor = 0usize;
    for inst in circuit.instructions() {
        match inst.opcode {
            Opcode::H => inst.qubits().for_each(|q| t.h(q as usize)),
            Opcode::CZ => {
                let qs: Vec<u32> = inst.qubits().collect();
                for p in qs.chunks(2) {
                    t.cz(p[0] as usize, p[1] as usize);
                }
            }
            Opcode::R => inst.qubits().for_each(|q| t.reset_z(q as usize)),
            Opcode::RX => inst.qubits().for_each(|q| t.reset_x(q as usize)),
            Opcode::M | Opcode::MX => {
                for q in inst.qubits() {
                    let (v, random) = if inst.opcode == Opcode::M {
                        t.measure_z(q as usize, false)
                    } else {
                        t.measure_x(q as usize, false)
                    };
                    measurements.set(cursor, v);
                    deterministic.set(cursor, !random);
                    cursor += 1;
                }
            }
            _ => {}
        }
    }
    ReferenceRun { measurements, deterministic }
}

/// Reference run that demands full determinism: errors with the index of the
/// first random noiseless measurement. Builder circuits with off-basis
/// first-round stabilizers legitimately fail this; it exists to pin down
/// circuits (like the colour-code flags) that are deterministic by design.
pub fn reference_measurements_strict(circuit: &Circuit) -> Result<Bits, SimError> {
    let r = reference_run(circuit);
    if let Some(i) = (0..r.deterministic.len()).find(|&i| !r.deterministic.get(i)) {
        return Err(SimError::NondeterministicMeasurement(i as u32));
    }
    Ok(r.measurements)
}

/// Slow per-shot tableau sampler with noise, for cross-validating the frame
/// sampler on small circuits. Random measurement outcomes are drawn honestly.
pub fn sample_shots_tableau(circuit: &Circuit, count: u64, seed: u64) -> Vec<ShotRecord> {
    let reference = reference_run(circuit);
    let rng = CounterRng::new(seed ^ 0x7ab1e5);
    (0..count)
        .map(|shot| {
            let mut t = Tableau::new(circuit.num_qubits() as usize);
            let mut draw = 0u64;
            let mut next = || {
                draw += 1;
                rng.uniform(shot, draw)
            };
            let mut measurements = Bits::new(circuit.num_measurements() as usize);
            let mut cursor = 0usize;
            for inst in circuit.instructions() {
                match inst.opcode {
                    Opcode::H => inst.qubits().for_each(|q| t.h(q as usize)),
                    Opcode::CZ => {
                        let qs: Vec<u32> = inst.qubits().collect();
                        for p in qs.chunks(2) {
                            t.cz(p[0] as usize, p[1] as usize);
                        }
                    }
                    Opcode::R => inst.qubits().for_each(|q| t.reset_z(q as usize)),
                    Opcode::RX => inst.qubits().for_each(|q| t.reset_x(q as usize)),
                    Opcode::M | Opcode::MX => {
                        for q in inst.qubits() {
                            let forced = next() < 0.5;
                            let (v, _) = if inst.opcode == Opcode::M {
                                t.measure_z(q as usize, forced)
                            } else {
                                t.measure_x(q as usize, forced)
                            };
                            measurements.set(cursor, v);
                            cursor += 1;
                        }
                    }
                    Opcode::XError | Opcode::ZError => {
                        let p = inst.args[0];
                        let z_flip = inst.opcode == Opcode::ZError;
                        for q in inst.qubits() {
                            if next() < p {
                                if z_flip {
                                    t.z(q as usize);
                                } else {
                                    t.x(q as usize);
                                }
                            }
                        }
                    }
                    Opcode::Depolarize1 => {
                        let p = inst.args[0];
                        for q in inst.qubits() {
                            if next() < p {
                                match (next() * 3.0) as u32 {
                                    0 => t.x(q as usize),
                                    1 => t.y(q as usize),
                                    _ => t.z(q as usize),
                                }
                            }
                        }
                    }
                    Opcode::Depolarize2 => {
                        let p = inst.args[0];
                        let qs: Vec<u32> = inst.qubits().collect();
                        for pr in qs.chunks(2) {
                            if next() < p {
                                let v = (next() * 15.0) as u32 + 1;
                                let (a, b) = (pr[0] as usize, pr[1] as usize);
                                if v & 1 != 0 {
                                    t.x(a);
                                }
                                if v & 2 != 0 {
                                    t.z(a);
                                }
                                if v & 4 != 0 {
                                    t.x(b);
                                }
                                if v & 8 != 0 {
                                    t.z(b);
                                }
                            }
                        }
                    }
                    _ => {}
                }
            }
            let combine = |sets: &[u32]| -> bool {
                let mut v = false;
                for &m in sets {
                    v ^= measurements.get(m as usize) ^ reference.measurements.get(m as usize);
                }
                v
            };
            let mut detection_events = Bits::new(circuit.detectors().len());
            for (i, d) in circuit.detectors().iter().enumerate() {
                detection_events.set(i, combine(&d.measurements));
            }
            let mut observable_flips = Bits::new(circuit.observables().len());
            for (i, o) in circuit.observables().iter().enumerate() {
                observable_flips.set(i, combine(&o.measurements));
            }
            ShotRecord {
                measurements,
                detection_events,
                observable_flips,
                aux: None,
                seed,
                index: shot,
            }
        })
        .collect()
}
