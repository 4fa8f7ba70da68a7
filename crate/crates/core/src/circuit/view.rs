//! Unified per-cycle data representation.
//!
//! The colour code measures each cell's stabilizers in two sub-cycles with
//! alternating bases; the view reshapes both sub-cycles into a single cycle
//! of interleaved stabilizer slots (X, Z, X, Z, ... per cell), with flag
//! measurements aligned to their slots. For the surface code the slot order
//! is the identity arrangement. The final data readout maps to its own
//! terminal slot group.

use super::{CircuitError, CircuitMeta};
use crate::layout::CodeKind;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlotKind {
    /// Stabilizer (measure-qubit) readout.
    Measurement,
    /// Flag-qubit readout (colour code only).
    Flag,
    /// Final data-qubit readout; belongs to the terminal group.
    TerminalData,
}

/// Mapping from raw measurement indices to the decoder's (cycle, slot,
/// channel) arrangement.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CycleView {
    pub cycles: u32,
    pub slots: u32,
    /// Entry per raw measurement index: (cycle, slot, kind). The terminal
    /// data readouts carry cycle == cycles and no slot.
    map: Vec<(u32, Option<u32>, SlotKind)>,
    /// Per (cycle, slot): measurement index of the stabilizer readout.
    slot_meas: Vec<u32>,
    /// Per (cycle, slot): measurement index of the flag readout, if any.
    slot_flag: Vec<Option<u32>>,
}

impl CycleView {
    pub fn lookup(&self, meas_index: u32) -> (u32, Option<u32>, SlotKind) {
        self.map[meas_index as usize]
    }

    pub fn slot_measurement(&self, cycle: u32, slot: u32) -> u32 {
        self.slot_meas[(cycle * self.slots + slot) as usize]
    }

    pub fn slot_flag(&self, cycle: u32, slot: u32) -> Option<u32> {
        self.slot_flag[(cycle * self.slots + slot) as usize]
    }
}

/// Build the unified view for a builder circuit. Errors when the measurement
/// count does not split into whole cycles.
pub fn unified_cycle_view(meta: &CircuitMeta, num_measurements: u32) -> Result<CycleView, CircuitError> {
    let per_cycle = meta.per_cycle_measurements;
    let n_data = meta.final_data_order.len() as u32;
    if num_measurements != meta.cycles * per_cycle + n_data {
        return Err(CircuitError::RaggedCycles(num_measurements, per_cycle));
    }
    let slots = meta.layout.num_slots() as u32;
    let mut map = Vec::with_capacity(num_measurements as usize);
    let mut slot_meas = vec![0u32; (meta.cycles * slots) as usize];
    let mut slot_flag = vec![None; (meta.cycles * slots) as usize];

    for t in 0..meta.cycles {
        match meta.spec.kind {
            CodeKind::Surface => {
                for slot in 0..slots {
                    map.push((t, Some(slot), SlotKind::Measurement));
                    slot_meas[(t * slots + slot) as usize] = map.len() as u32 - 1;
                }
            }
            CodeKind::Colour => {
                let n_cells = slots / 2;
                for sub in 0..2u32 {
                    for cell in 0..n_cells {
                        let slot = 2 * cell + sub;
                        map.push((t, Some(slot), SlotKind::Measurement));
                        slot_meas[(t * slots + slot) as usize] = map.len() as u32 - 1;
                        map.push((t, Some(slot), SlotKind::Flag));
                        slot_flag[(t * slots + slot) as usize] = Some(map.len() as u32 - 1);
                    }
                }
            }
        }
    }
    for _ in 0..n_data {
        map.push((meta.cycles, None, SlotKind::TerminalData));
    }
    Ok(CycleView { cycles: meta.cycles, slots, map, slot_meas, slot_flag })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_memory_circuit, NoiseParams};
    use crate::layout::{Basis, CodeSpec};

    #[test]
    fn surface_view_is_identity_order() {
        let b = build_memory_circuit(
            CodeSpec { kind: CodeKind::Surface, distance: 3, basis: Basis::Z },
            2,
            NoiseParams::new(0.0).unwrap(),
        )
        .unwrap();
        let v = unified_cycle_view(&b.meta, b.circuit.num_measurements()).unwrap();
        assert_eq!(v.slots, 8);
        for t in 0..2 {
            for s in 0..8 {
                assert_eq!(v.slot_measurement(t, s), t * 8 + s);
                assert_eq!(v.slot_flag(t, s), None);
            }
        }
    }

    #[test]
    fn colour_d3_unified_slots_interleave_bases() {
        let b = build_memory_circuit(
            CodeSpec { kind: CodeKind::Colour, distance: 3, basis: Basis::Z },
            1,
            NoiseParams::new(0.0).unwrap(),
        )
        .unwrap();
        let v = unified_cycle_view(&b.meta, b.circuit.num_measurements()).unwrap();
        // 6 unified slots: 3 X + 3 Z interleaved, each with a flag channel.
        assert_eq!(v.slots, 6);
        for slot in 0..6 {
            let m = v.slot_measurement(0, slot);
            let f = v.slot_flag(0, slot).unwrap();
            assert_eq!(f, m + 1);
            let (cy, sl, kind) = v.lookup(m);
            assert_eq!((cy, sl, kind), (0, Some(slot), SlotKind::Measurement));
        }
        // X sub-cycle measurements come first in raw order, interleaved to
        // even slots; Z sub-cycle to odd slots.
        assert_eq!(v.slot_measurement(0, 0), 0);
        assert_eq!(v.slot_measurement(0, 2), 2);
        assert_eq!(v.slot_measurement(0, 1), 6);
    }

    #[test]
    fn terminal_readout_has_its_own_group() {
        let b = build_memory_circuit(
            CodeSpec { kind: CodeKind::Colour, distance: 3, basis: Basis::Z },
            1,
            NoiseParams::new(0.0).unwrap(),
        )
        .unwrap();
        let v = unified_cycle_view(&b.meta, b.circuit.num_measurements()).unwrap();
        let (cy, slot, kind) = v.lookup(b.circuit.num_measurements() - 1);
        assert_eq!(cy, 1);
        assert_eq!(slot, None);
        assert_eq!(kind, SlotKind::TerminalData);
    }

    #[test]
    fn ragged_measurement_count_rejected() {
        let b = build_memory_circuit(
            CodeSpec { kind: CodeKind::Surface, distance: 3, basis: Basis::Z },
            2,
            NoiseParams::new(0.0).unwrap(),
        )
        .unwrap();
        assert!(unified_cycle_view(&b.meta, b.circuit.num_measurements() + 1).is_err());
    }
}
