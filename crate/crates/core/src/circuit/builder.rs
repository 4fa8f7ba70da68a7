//! Memory-experiment circuit builders for both code families.
//!
//! Surface code: every cycle applies one common readout to all plaquettes —
//! reset the measure qubits, Hadamard everything, run four uniform CZ layers
//! with data Hadamards between layers 1-2 and 3-4, Hadamard everything, and
//! measure. X-class plaquettes touch their data qubits in the order NE, SE,
//! NW, SW and Z-class plaquettes in NE, NW, SE, SW, so overlapping plaquettes
//! touch shared qubits in a consistent order and the layer structure measures
//! the XZZX stabilizers.
//!
//! Colour code: each cycle reads all X stabilizers then all Z stabilizers
//! through Bell-flag circuits. The cell's measure and flag ancillas are
//! entangled, coupled to disjoint halves of the cell, and disentangled, so
//! the measure qubit reads the full stabilizer and the flag is deterministic
//! 0 absent errors. The data Hadamard layers are applied for the X readout
//! only.

use super::{
    apply_si1000, inst_q, Circuit, CircuitError, Instruction, NoiseParams, Opcode, Target,
};
use crate::circuit::noise::NoiseError;
use crate::layout::{
    build_layout, surface_data_colour, Basis, CodeKind, CodeSpec, LayoutError, QubitLayout, Role,
    COLOUR_ORDER_FLAG, COLOUR_ORDER_MEASURE, SURFACE_ORDER_X, SURFACE_ORDER_Z,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BuildError {
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

/// Per-detector classification carried alongside builder circuits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorClass {
    /// Stabilizer slot the detector compares (usize::MAX never occurs; flags
    /// reference their cell's slot).
    pub slot: u32,
    pub basis: Basis,
    pub is_flag: bool,
    /// Cycle index; `cycles` for the final data-readout comparison.
    pub cycle: u32,
}

/// Builder metadata required by the sampler (auxiliary labels), the unified
/// cycle view, and the matching-graph projection.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CircuitMeta {
    pub spec: CodeSpec,
    pub cycles: u32,
    pub layout: QubitLayout,
    /// Measurements per readout cycle (surface: one per stabilizer; colour:
    /// measure+flag per cell per sub-cycle).
    pub per_cycle_measurements: u32,
    /// Data-qubit ids in final-readout target order.
    pub final_data_order: Vec<u32>,
    /// Per data qubit (indexed by position in `final_data_order`): true when
    /// its final readout is effectively in the X basis (Hadamard before M).
    pub final_data_x_basis: Vec<bool>,
    pub detector_classes: Vec<DetectorClass>,
    /// Slots whose stabilizers are deterministic in the memory basis.
    pub in_basis_slots: Vec<u32>,
}

impl CircuitMeta {
    /// Absolute measurement index of the stabilizer (measure-qubit) readout
    /// for `slot` in cycle `t`.
    pub fn slot_measurement(&self, t: u32, slot: u32) -> u32 {
        match self.spec.kind {
            CodeKind::Surface => t * self.per_cycle_measurements + slot,
            CodeKind::Colour => {
                let n_cells = self.per_cycle_measurements / 4;
                let cell = slot / 2;
                let sub = slot % 2; // 0 = X sub-cycle, 1 = Z sub-cycle
                t * self.per_cycle_measurements + sub * 2 * n_cells + 2 * cell
            }
        }
    }

    /// Absolute measurement index of the flag readout for `slot` in cycle `t`
    /// (colour code only).
    pub fn flag_measurement(&self, t: u32, slot: u32) -> Option<u32> {
        match self.spec.kind {
            CodeKind::Surface => None,
            CodeKind::Colour => Some(self.slot_measurement(t, slot) + 1),
        }
    }

    pub fn final_measurement_base(&self) -> u32 {
        self.cycles * self.per_cycle_measurements
    }

    pub fn final_data_index(&self, qubit: u32) -> u32 {
        self.final_measurement_base()
            + self.final_data_order.iter().position(|&q| q == qubit).unwrap() as u32
    }
}

/// A noisy memory circuit plus its noiseless skeleton and builder metadata.
#[derive(Clone, Debug)]
pub struct BuiltCircuit {
    pub circuit: Circuit,
    pub clean: Circuit,
    pub meta: CircuitMeta,
}

/// Build a `cycles`-round memory experiment with SI1000 noise.
pub fn build_memory_circuit(
    spec: CodeSpec,
    cycles: u32,
    noise: NoiseParams,
) -> Result<BuiltCircuit, BuildError> {
    if cycles < 1 {
        return Err(CircuitError::BadCycles.into());
    }
    let layout = build_layout(spec)?;
    let (clean, meta) = match spec.kind {
        CodeKind::Surface => build_surface_clean(&layout, cycles),
        CodeKind::Colour => build_colour_clean(&layout, cycles),
    };
    let clean = Circuit::from_instructions(clean)?;
    let circuit = apply_si1000(&clean, noise)?;
    Ok(BuiltCircuit { circuit, clean, meta })
}

struct Writer {
    instructions: Vec<Instruction>,
    measured: u32,
    started: bool,
}

impl Writer {
    fn new() -> Self {
        Writer { instructions: Vec::new(), measured: 0, started: false }
    }

    fn moment(&mut self) {
        if self.started {
            self.instructions.push(Instruction { opcode: Opcode::Tick, args: vec![], targets: vec![] });
        }
        self.started = true;
    }

    fn push(&mut self, i: Instruction) {
        self.instructions.push(i);
    }

    /// Emit one M instruction; returns the absolute index of the first target.
    fn measure(&mut self, qubits: &[u32]) -> u32 {
        let base = self.measured;
        self.measured += qubits.len() as u32;
        self.push(inst_q(Opcode::M, qubits));
        base
    }

    fn detector(&mut self, coords: [f64; 3], absolute: &[u32]) {
        let targets = absolute
            .iter()
            .map(|&a| Target::Rec(a as i32 - self.measured as i32))
            .collect();
        self.push(Instruction { opcode: Opcode::Detector, args: coords.to_vec(), targets });
    }

    fn observable(&mut self, index: u32, absolute: &[u32]) {
        let targets = absolute
            .iter()
            .map(|&a| Target::Rec(a as i32 - self.measured as i32))
            .collect();
        self.push(Instruction {
            opcode: Opcode::ObservableInclude,
            args: vec![index as f64],
            targets,
        });
    }
}

fn qubit_coords_block(layout: &QubitLayout, w: &mut Writer) {
    for q in &layout.qubits {
        w.push(Instruction {
            opcode: Opcode::QubitCoords,
            args: vec![q.x, q.y],
            targets: vec![Target::Qubit(q.id)],
        });
    }
}

fn build_surface_clean(layout: &QubitLayout, cycles: u32) -> (Vec<Instruction>, CircuitMeta) {
    let spec = layout.spec;
    let n_stabs = layout.stabilizers.len() as u32;
    let data: Vec<u32> = layout.data_ids();
    let measures: Vec<u32> = layout.stabilizers.iter().map(|s| s.measure).collect();
    let all: Vec<u32> = (0..layout.qubits.len() as u32).collect();
    // Data qubits whose XZZX local frame is rotated relative to the memory
    // basis; they are prepared and read out through a Hadamard.
    let plus_colour: u8 = if spec.basis == Basis::Z { 1 } else { 0 };
    let rotated: Vec<u32> = data
        .iter()
        .copied()
        .filter(|&q| surface_data_colour(layout.qubit(q).x, layout.qubit(q).y) == plus_colour)
        .collect();

    let coord_id: std::collections::HashMap<(i64, i64), u32> = layout
        .qubits
        .iter()
        .filter(|q| q.role == Role::Data)
        .map(|q| ((q.x as i64, q.y as i64), q.id))
        .collect();

    let mut detector_classes = Vec::new();
    let in_basis: Vec<u32> = layout
        .stabilizers
        .iter()
        .filter(|s| s.basis == spec.basis)
        .map(|s| s.id)
        .collect();

    let mut w = Writer::new();
    w.moment();
    qubit_coords_block(layout, &mut w);
    w.push(inst_q(Opcode::R, &data));
    w.moment();
    w.push(inst_q(Opcode::H, &rotated));

    for t in 0..cycles {
        w.moment();
        w.push(inst_q(Opcode::R, &measures));
        w.moment();
        w.push(inst_q(Opcode::H, &all));
        for layer in 0..4 {
            if layer == 1 || layer == 3 {
                w.moment();
                w.push(inst_q(Opcode::H, &data));
            }
            w.moment();
            let mut pairs: Vec<u32> = Vec::new();
            for s in &layout.stabilizers {
                let (dx, dy) = match s.basis {
                    Basis::X => SURFACE_ORDER_X[layer],
                    Basis::Z => SURFACE_ORDER_Z[layer],
                };
                let key = (s.x as i64 + dx, s.y as i64 + dy);
                if let Some(&q) = coord_id.get(&key) {
                    pairs.push(s.measure);
                    pairs.push(q);
                }
            }
            w.push(inst_q(Opcode::CZ, &pairs));
        }
        w.moment();
        w.push(inst_q(Opcode::H, &all));
        w.moment();
        let base = w.measure(&measures);
        for s in &layout.stabilizers {
            let this = base + s.id;
            if t == 0 {
                if s.basis == spec.basis {
                    w.detector([s.x, s.y, 0.0], &[this]);
                    detector_classes.push(DetectorClass { slot: s.id, basis: s.basis, is_flag: false, cycle: 0 });
                }
            } else {
                let prev = this - n_stabs;
                w.detector([s.x, s.y, t as f64], &[prev, this]);
                detector_classes.push(DetectorClass { slot: s.id, basis: s.basis, is_flag: false, cycle: t });
            }
        }
    }

    w.moment();
    w.push(inst_q(Opcode::H, &rotated));
    w.moment();
    let final_base = w.measure(&data);
    let final_idx = |q: u32| final_base + data.iter().position(|&x| x == q).unwrap() as u32;
    for s in &layout.stabilizers {
        if s.basis != spec.basis {
            continue;
        }
        let mut refs: Vec<u32> = s.members.iter().map(|&q| final_idx(q)).collect();
        refs.push((cycles - 1) * n_stabs + s.id);
        w.detector([s.x, s.y, cycles as f64], &refs);
        detector_classes.push(DetectorClass { slot: s.id, basis: s.basis, is_flag: false, cycle: cycles });
    }
    let obs: Vec<u32> = layout.observable_support[0].iter().map(|&q| final_idx(q)).collect();
    w.observable(0, &obs);

    let final_data_x_basis: Vec<bool> = data
        .iter()
        .map(|&q| {
            let c = surface_data_colour(layout.qubit(q).x, layout.qubit(q).y);
            c == plus_colour
        })
        .collect();

    let meta = CircuitMeta {
        spec,
        cycles,
        layout: layout.clone(),
        per_cycle_measurements: n_stabs,
        final_data_order: data,
        final_data_x_basis,
        detector_classes,
        in_basis_slots: in_basis,
    };
    (w.instructions, meta)
}

fn build_colour_clean(layout: &QubitLayout, cycles: u32) -> (Vec<Instruction>, CircuitMeta) {
    let spec = layout.spec;
    let data: Vec<u32> = layout.data_ids();
    // Cells in slot order: X stabilizer at slot 2c, Z at 2c+1, sharing ancillas.
    let cells: Vec<&crate::layout::Stabilizer> =
        layout.stabilizers.iter().filter(|s| s.basis == Basis::X).collect();
    let n_cells = cells.len() as u32;
    let m_qubits: Vec<u32> = cells.iter().map(|c| c.measure).collect();
    let f_qubits: Vec<u32> = cells.iter().map(|c| c.flag.unwrap()).collect();
    let mut ancillas: Vec<u32> = Vec::new();
    for c in &cells {
        ancillas.push(c.measure);
        ancillas.push(c.flag.unwrap());
    }

    let coord_id: std::collections::HashMap<(i64, i64), u32> = layout
        .qubits
        .iter()
        .filter(|q| q.role == Role::Data)
        .map(|q| ((q.x.round() as i64, q.y.round() as i64), q.id))
        .collect();

    let mut detector_classes = Vec::new();
    let in_basis: Vec<u32> = layout
        .stabilizers
        .iter()
        .filter(|s| s.basis == spec.basis)
        .map(|s| s.id)
        .collect();

    let mut w = Writer::new();
    w.moment();
    qubit_coords_block(layout, &mut w);
    w.push(inst_q(Opcode::R, &data));
    if spec.basis == Basis::X {
        w.moment();
        w.push(inst_q(Opcode::H, &data));
    }

    let per_cycle = 4 * n_cells;
    for t in 0..cycles {
        for (sub, basis) in [(0u32, Basis::X), (1u32, Basis::Z)] {
            let data_h = basis == Basis::X;
            w.moment();
            w.push(inst_q(Opcode::R, &ancillas));
            w.moment();
            let mut mf: Vec<u32> = m_qubits.clone();
            mf.extend(&f_qubits);
            mf.sort_unstable();
            w.push(inst_q(Opcode::H, &mf));
            w.moment();
            let mut bell: Vec<u32> = Vec::new();
            for c in &cells {
                bell.push(c.measure);
                bell.push(c.flag.unwrap());
            }
            w.push(inst_q(Opcode::CZ, &bell));
            w.moment();
            let mut h_targets = f_qubits.clone();
            if data_h {
                h_targets.extend(&data);
            }
            h_targets.sort_unstable();
            w.push(inst_q(Opcode::H, &h_targets));
            for layer in 0..3 {
                w.moment();
                let mut pairs: Vec<u32> = Vec::new();
                for c in &cells {
                    let (dx, dy) = COLOUR_ORDER_MEASURE[layer];
                    if let Some(&q) = coord_id.get(&(c.x as i64 + dx, c.y as i64 + dy)) {
                        pairs.push(c.measure);
                        pairs.push(q);
                    }
                    let (dx, dy) = COLOUR_ORDER_FLAG[layer];
                    if let Some(&q) = coord_id.get(&(c.x as i64 + dx, c.y as i64 + dy)) {
                        pairs.push(c.flag.unwrap());
                        pairs.push(q);
                    }
                }
                w.push(inst_q(Opcode::CZ, &pairs));
            }
            w.moment();
            let mut h_targets = f_qubits.clone();
            if data_h {
                h_targets.extend(&data);
            }
            h_targets.sort_unstable();
            w.push(inst_q(Opcode::H, &h_targets));
            w.moment();
            let mut bell: Vec<u32> = Vec::new();
            for c in &cells {
                bell.push(c.measure);
                bell.push(c.flag.unwrap());
            }
            w.push(inst_q(Opcode::CZ, &bell));
            w.moment();
            w.push(inst_q(Opcode::H, &mf));
            w.moment();
            let mut targets: Vec<u32> = Vec::new();
            for c in &cells {
                targets.push(c.measure);
                targets.push(c.flag.unwrap());
            }
            let base = w.measure(&targets);
            for (ci, c) in cells.iter().enumerate() {
                let slot = 2 * ci as u32 + sub;
                let m_idx = base + 2 * ci as u32;
                let f_idx = m_idx + 1;
                w.detector([c.x, c.y, t as f64], &[f_idx]);
                detector_classes.push(DetectorClass { slot, basis, is_flag: true, cycle: t });
                if t == 0 {
                    if basis == spec.basis {
                        w.detector([c.x, c.y, 0.0], &[m_idx]);
                        detector_classes.push(DetectorClass { slot, basis, is_flag: false, cycle: 0 });
                    }
                } else {
                    let prev = m_idx - per_cycle;
                    w.detector([c.x, c.y, t as f64], &[prev, m_idx]);
                    detector_classes.push(DetectorClass { slot, basis, is_flag: false, cycle: t });
                }
            }
        }
    }

    if spec.basis == Basis::X {
        w.moment();
        w.push(inst_q(Opcode::H, &data));
    }
    w.moment();
    let final_base = w.measure(&data);
    let final_idx = |q: u32| final_base + data.iter().position(|&x| x == q).unwrap() as u32;
    let sub = if spec.basis == Basis::X { 0 } else { 1 };
    for (ci, c) in cells.iter().enumerate() {
        let slot = 2 * ci as u32 + sub;
        let mut refs: Vec<u32> = c.members.iter().map(|&q| final_idx(q)).collect();
        let last_m = (cycles - 1) * per_cycle + sub * 2 * n_cells + 2 * ci as u32;
        refs.push(last_m);
        w.detector([c.x, c.y, cycles as f64], &refs);
        detector_classes.push(DetectorClass { slot, basis: spec.basis, is_flag: false, cycle: cycles });
    }
    let obs: Vec<u32> = layout.observable_support[0].iter().map(|&q| final_idx(q)).collect();
    w.observable(0, &obs);

    let final_data_x_basis = vec![spec.basis == Basis::X; data.len()];
    let meta = CircuitMeta {
        spec,
        cycles,
        layout: layout.clone(),
        per_cycle_measurements: per_cycle,
        final_data_order: data,
        final_data_x_basis,
        detector_classes,
        in_basis_slots: in_basis,
    };
    (w.instructions, meta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surface(d: u32, cycles: u32) -> BuiltCircuit {
        build_memory_circuit(
            CodeSpec { kind: CodeKind::Surface, distance: d, basis: Basis::Z },
            cycles,
            NoiseParams::new(0.001).unwrap(),
        )
        .unwrap()
    }

    fn colour(d: u32, cycles: u32) -> BuiltCircuit {
        build_memory_circuit(
            CodeSpec { kind: CodeKind::Colour, distance: d, basis: Basis::Z },
            cycles,
            NoiseParams::new(0.001).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn surface_d3_two_cycles_measurement_count() {
        let b = surface(3, 2);
        assert_eq!(b.circuit.num_measurements(), 25); // 16 stabilizer + 9 data
    }

    #[test]
    fn surface_d3_two_cycles_detector_count() {
        let b = surface(3, 2);
        // 4 first-cycle Z-type + 8 middle + 4 final.
        assert_eq!(b.circuit.detectors().len(), 16);
        assert_eq!(b.meta.detector_classes.len(), 16);
    }

    #[test]
    fn colour_d3_one_cycle_measurement_count() {
        let b = colour(3, 1);
        // 6 ancillas per sub-cycle, two sub-cycles, plus 7 data qubits.
        assert_eq!(b.circuit.num_measurements(), 12 + 7);
        assert_eq!(b.meta.per_cycle_measurements, 12);
    }

    #[test]
    fn colour_per_cycle_ancilla_count_invariant() {
        for d in [3, 5] {
            let b = colour(d, 2);
            let n_cells = (3 * d * d - 3) / 8;
            assert_eq!(b.meta.per_cycle_measurements, 2 * n_cells * 2);
        }
    }

    #[test]
    fn rejects_zero_cycles() {
        let err = build_memory_circuit(
            CodeSpec { kind: CodeKind::Surface, distance: 3, basis: Basis::Z },
            0,
            NoiseParams::new(0.001).unwrap(),
        );
        assert!(err.is_err());
    }

    #[test]
    fn exactly_one_observable() {
        for b in [surface(3, 2), colour(3, 1)] {
            assert_eq!(b.circuit.observables().len(), 1);
            assert_eq!(
                b.circuit.observables()[0].measurements.len(),
                b.meta.layout.observable_support[0].len()
            );
        }
    }

    #[test]
    fn serialize_parse_roundtrip_over_builder_corpus() {
        use crate::circuit::{parse_circuit, serialize_circuit};
        for d in [3u32, 5] {
            for cycles in [1u32, 2, 10] {
                for kind in [CodeKind::Surface, CodeKind::Colour] {
                    let b = build_memory_circuit(
                        CodeSpec { kind, distance: d, basis: Basis::Z },
                        cycles,
                        NoiseParams::new(0.002).unwrap(),
                    )
                    .unwrap();
                    let text = serialize_circuit(&b.circuit);
                    let parsed = parse_circuit(&text).unwrap();
                    assert_eq!(parsed, b.circuit);
                    assert_eq!(serialize_circuit(&parsed), text);
                }
            }
        }
    }

    #[test]
    fn meta_measurement_indexing_matches_counts() {
        let b = colour(3, 2);
        let meta = &b.meta;
        // X slot of cell 0, cycle 1.
        assert_eq!(meta.slot_measurement(1, 0), 12);
        // Z slot of cell 0, cycle 0 comes after the X sub-cycle block.
        assert_eq!(meta.slot_measurement(0, 1), 6);
        assert_eq!(meta.flag_measurement(0, 0), Some(1));
        assert_eq!(meta.final_measurement_base(), 24);
    }

    #[test]
    fn cz_layers_have_disjoint_targets() {
        for b in [surface(5, 1), colour(5, 1)] {
            for i in b.clean.instructions() {
                if i.opcode == Opcode::CZ {
                    let qs: Vec<u32> = i.qubits().collect();
                    let set: std::collections::HashSet<u32> = qs.iter().cloned().collect();
                    assert_eq!(qs.len(), set.len());
                }
            }
        }
    }
}
