//! Noisy stabilizer circuits as ordered instruction lists.
//!
//! The text grammar is a compatible subset of the Stim circuit format so
//! builder outputs can be cross-checked against an external simulator:
//! only the opcodes listed in [`Opcode`] are supported.

mod builder;
mod noise;
mod text;
mod view;

pub use builder::{build_memory_circuit, BuiltCircuit, CircuitMeta};
pub use noise::{apply_si1000, NoiseParams};
pub use text::{parse_circuit, serialize_circuit, ParseError};
pub use view::{unified_cycle_view, CycleView, SlotKind};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Opcode {
    R,
    RX,
    M,
    MX,
    H,
    CZ,
    XError,
    ZError,
    Depolarize1,
    Depolarize2,
    Detector,
    ObservableInclude,
    QubitCoords,
    Tick,
}

impl Opcode {
    pub fn name(self) -> &'static str {
        match self {
            Opcode::R => "R",
            Opcode::RX => "RX",
            Opcode::M => "M",
            Opcode::MX => "MX",
            Opcode::H => "H",
            Opcode::CZ => "CZ",
            Opcode::XError => "X_ERROR",
            Opcode::ZError => "Z_ERROR",
            Opcode::Depolarize1 => "DEPOLARIZE1",
            Opcode::Depolarize2 => "DEPOLARIZE2",
            Opcode::Detector => "DETECTOR",
            Opcode::ObservableInclude => "OBSERVABLE_INCLUDE",
            Opcode::QubitCoords => "QUBIT_COORDS",
            Opcode::Tick => "TICK",
        }
    }

    pub fn from_name(s: &str) -> Option<Opcode> {
        Some(match s {
            "R" => Opcode::R,
            "RX" => Opcode::RX,
            "M" => Opcode::M,
            "MX" => Opcode::MX,
            "H" => Opcode::H,
            "CZ" => Opcode::CZ,
            "X_ERROR" => Opcode::XError,
            "Z_ERROR" => Opcode::ZError,
            "DEPOLARIZE1" => Opcode::Depolarize1,
            "DEPOLARIZE2" => Opcode::Depolarize2,
            "DETECTOR" => Opcode::Detector,
            "OBSERVABLE_INCLUDE" => Opcode::ObservableInclude,
            "QUBIT_COORDS" => Opcode::QubitCoords,
            "TICK" => Opcode::Tick,
            _ => return None,
        })
    }

    pub fn is_noise(self) -> bool {
        matches!(self, Opcode::XError | Opcode::ZError | Opcode::Depolarize1 | Opcode::Depolarize2)
    }

    pub fn is_measurement(self) -> bool {
        matches!(self, Opcode::M | Opcode::MX)
    }

    pub fn is_reset(self) -> bool {
        matches!(self, Opcode::R | Opcode::RX)
    }
}

/// An instruction target: a qubit id or a measurement-record back-reference
/// `rec[-k]` (k >= 1, counted from the most recent measurement).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Target {
    Qubit(u32),
    Rec(i32),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instruction {
    pub opcode: Opcode,
    pub args: Vec<f64>,
    pub targets: Vec<Target>,
}

impl Instruction {
    pub fn qubits(&self) -> impl Iterator<Item = u32> + '_ {
        self.targets.iter().filter_map(|t| match t {
            Target::Qubit(q) => Some(*q),
            Target::Rec(_) => None,
        })
    }
}

/// Structured detector: absolute measurement indices plus (x, y, cycle) coords.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorDef {
    pub measurements: Vec<u32>,
    pub coords: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableDef {
    pub index: u32,
    pub measurements: Vec<u32>,
}

#[derive(Debug, Error, PartialEq)]
pub enum CircuitError {
    #[error("probability argument {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("CZ expects an even number of qubit targets, got {0}")]
    OddCzTargets(usize),
    #[error("CZ targets must form disjoint pairs (qubit {0} repeated)")]
    OverlappingCz(u32),
    #[error("instruction {0} expects qubit targets only")]
    ExpectedQubits(&'static str),
    #[error("record reference rec[{0}] out of range at measurement count {1}")]
    RecOutOfRange(i32, u32),
    #[error("instruction {0} expects record targets only")]
    ExpectedRecords(&'static str),
    #[error("detector cycle coordinates must be nondecreasing (saw {0} after {1})")]
    DetectorCycleOrder(f64, f64),
    #[error("{0} expects exactly {1} argument(s)")]
    BadArgCount(&'static str, usize),
    #[error("circuit already contains noise instructions")]
    NoiseAlreadyPresent,
    #[error("cycles must be >= 1")]
    BadCycles,
    #[error("moment mixes measurement/reset with other operations; SI1000 rules are per-moment")]
    MixedMoment,
    #[error("measurement count {0} does not split into whole cycles of {1}")]
    RaggedCycles(u32, u32),
}

/// An ordered instruction list with validated, cached detector/observable
/// structure. Immutable after construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    instructions: Vec<Instruction>,
    num_qubits: u32,
    num_measurements: u32,
    detectors: Vec<DetectorDef>,
    observables: Vec<ObservableDef>,
    qubit_coords: Vec<(u32, f64, f64)>,
}

impl Circuit {
    pub fn from_instructions(instructions: Vec<Instruction>) -> Result<Circuit, CircuitError> {
        let mut num_qubits = 0u32;
        let mut num_measurements = 0u32;
        let mut detectors: Vec<DetectorDef> = Vec::new();
        let mut observables: Vec<ObservableDef> = Vec::new();
        let mut qubit_coords = Vec::new();
        let mut last_cycle = f64::NEG_INFINITY;

        for inst in &instructions {
            for t in &inst.targets {
                if let Target::Qubit(q) = t {
                    num_qubits = num_qubits.max(q + 1);
                }
            }
            match inst.opcode {
                Opcode::XError | Opcode::ZError | Opcode::Depolarize1 | Opcode::Depolarize2 => {
                    if inst.args.len() != 1 {
                        return Err(CircuitError::BadArgCount(inst.opcode.name(), 1));
                    }
                    let p = inst.args[0];
                    if !(0.0..=1.0).contains(&p) {
                        return Err(CircuitError::BadProbability(p));
                    }
                    if inst.targets.iter().any(|t| matches!(t, Target::Rec(_))) {
                        return Err(CircuitError::ExpectedQubits(inst.opcode.name()));
                    }
                    if inst.opcode == Opcode::Depolarize2 && inst.targets.len() % 2 != 0 {
                        return Err(CircuitError::OddCzTargets(inst.targets.len()));
                    }
                }
                Opcode::CZ => {
                    let qs: Vec<u32> = inst.qubits().collect();
                    if qs.len() != inst.targets.len() {
                        return Err(CircuitError::ExpectedQubits("CZ"));
                    }
                    if qs.len() % 2 != 0 {
                        return Err(CircuitError::OddCzTargets(qs.len()));
                    }
                    let mut seen = std::collections::HashSet::new();
                    for q in qs {
                        if !seen.insert(q) {
                            return Err(CircuitError::OverlappingCz(q));
                        }
                    }
                }
                Opcode::M | Opcode::MX => {
                    if inst.targets.iter().any(|t| matches!(t, Target::Rec(_))) {
                        return Err(CircuitError::ExpectedQubits(inst.opcode.name()));
                    }
                    num_measurements += inst.targets.len() as u32;
                }
                Opcode::Detector => {
                    let coords = match inst.args.len() {
                        3 => [inst.args[0], inst.args[1], inst.args[2]],
                        _ => return Err(CircuitError::BadArgCount("DETECTOR", 3)),
                    };
                    if coords[2] < last_cycle {
                        return Err(CircuitError::DetectorCycleOrder(coords[2], last_cycle));
                    }
                    last_cycle = coords[2];
                    let measurements = resolve_recs(inst, num_measurements)?;
                    detectors.push(DetectorDef { measurements, coords });
                }
                Opcode::ObservableInclude => {
                    if inst.args.len() != 1 {
                        return Err(CircuitError::BadArgCount("OBSERVABLE_INCLUDE", 1));
                    }
                    let index = inst.args[0] as u32;
                    let measurements = resolve_recs(inst, num_measurements)?;
                    while observables.len() <= index as usize {
                        observables.push(ObservableDef { index: observables.len() as u32, measurements: vec![] });
                    }
                    observables[index as usize].measurements.extend(measurements);
                }
                Opcode::QubitCoords => {
                    if inst.args.len() != 2 {
                        return Err(CircuitError::BadArgCount("QUBIT_COORDS", 2));
                    }
                    for t in &inst.targets {
                        if let Target::Qubit(q) = t {
                            qubit_coords.push((*q, inst.args[0], inst.args[1]));
                        }
                    }
                }
                Opcode::R | Opcode::RX | Opcode::H | Opcode::Tick => {
                    if inst.targets.iter().any(|t| matches!(t, Target::Rec(_))) {
                        return Err(CircuitError::ExpectedQubits(inst.opcode.name()));
                    }
                }
            }
        }
        Ok(Circuit { instructions, num_qubits, num_measurements, detectors, observables, qubit_coords })
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn num_qubits(&self) -> u32 {
        self.num_qubits
    }

    pub fn num_measurements(&self) -> u32 {
        self.num_measurements
    }

    pub fn detectors(&self) -> &[DetectorDef] {
        &self.detectors
    }

    pub fn observables(&self) -> &[ObservableDef] {
        &self.observables
    }

    pub fn qubit_coords(&self) -> &[(u32, f64, f64)] {
        &self.qubit_coords
    }

    pub fn has_noise(&self) -> bool {
        self.instructions.iter().any(|i| i.opcode.is_noise())
    }
}

fn resolve_recs(inst: &Instruction, measured_so_far: u32) -> Result<Vec<u32>, CircuitError> {
    let mut out = Vec::with_capacity(inst.targets.len());
    for t in &inst.targets {
        match t {
            Target::Rec(k) => {
                let k = *k;
                if k >= 0 || (-k) as u32 > measured_so_far {
                    return Err(CircuitError::RecOutOfRange(k, measured_so_far));
                }
                out.push((measured_so_far as i64 + k as i64) as u32);
            }
            Target::Qubit(_) => return Err(CircuitError::ExpectedRecords(inst.opcode.name())),
        }
    }
    Ok(out)
}

/// Convenience constructors used by builders and tests.
pub fn inst(opcode: Opcode, targets: Vec<Target>) -> Instruction {
    Instruction { opcode, args: vec![], targets }
}

pub fn inst_q(opcode: Opcode, qubits: &[u32]) -> Instruction {
    Instruction { opcode, args: vec![], targets: qubits.iter().map(|&q| Target::Qubit(q)).collect() }
}

pub fn inst_pq(opcode: Opcode, arg: f64, qubits: &[u32]) -> Instruction {
    Instruction { opcode, args: vec![arg], targets: qubits.iter().map(|&q| Target::Qubit(q)).collect() }
}
