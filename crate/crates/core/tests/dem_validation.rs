//! DEM validation against the simulator: every elementary component's
//! simulated symptom must equal the extracted one, and no small mechanism
//! combination may form an undetected logical flip.

use qeclab::circuit::{build_memory_circuit, BuiltCircuit, Instruction, NoiseParams, Opcode, Target};
use qeclab::dem::{component_symptoms, extract_dem};
use qeclab::layout::{Basis, CodeKind, CodeSpec};
use qeclab::sim::sample_shots;

fn built(kind: CodeKind, d: u32, cycles: u32, p: f64) -> BuiltCircuit {
    build_memory_circuit(
        CodeSpec { kind, distance: d, basis: Basis::Z },
        cycles,
        NoiseParams::new(p).unwrap(),
    )
    .unwrap()
}

/// Rebuild the circuit with all noise dropped and one component inserted as
/// a deterministic Pauli at its original position.
fn inject_component(
    b: &BuiltCircuit,
    instruction: usize,
    paulis: &[(u32, bool, bool)],
) -> qeclab::circuit::Circuit {
    let mut out: Vec<Instruction> = Vec::new();
    for (i, inst) in b.circuit.instructions().iter().enumerate() {
        if i == instruction {
            for &(q, x, z) in paulis {
                if x {
                    out.push(Instruction {
                        opcode: Opcode::XError,
                        args: vec![1.0],
                        targets: vec![Target::Qubit(q)],
                    });
                }
                if z {
                    out.push(Instruction {
                        opcode: Opcode::ZError,
                        args: vec![1.0],
                        targets: vec![Target::Qubit(q)],
                    });
                }
            }
        }
        if !inst.opcode.is_noise() {
            out.push(inst.clone());
        }
    }
    qeclab::circuit::Circuit::from_instructions(out).unwrap()
}

fn check_symptom_completeness(b: &BuiltCircuit) {
    let symptoms = component_symptoms(&b.circuit);
    assert!(!symptoms.is_empty());
    for (comp, dets, obs) in &symptoms {
        let injected = inject_component(b, comp.instruction, &comp.paulis);
        let shot = &sample_shots(&injected, 1, 0).unwrap()[0];
        let fired: Vec<u32> = shot.detection_events.iter_ones().map(|i| i as u32).collect();
        assert_eq!(&fired, dets, "detectors for component {comp:?}");
        let obs_sim = if shot.observable_flips.get(0) { 1u64 } else { 0 };
        assert_eq!(obs_sim, *obs, "observable for component {comp:?}");
    }
}

#[test]
fn surface_d3_symptoms_match_simulation_exhaustively() {
    check_symptom_completeness(&built(CodeKind::Surface, 3, 2, 0.001));
}

#[test]
fn colour_d3_symptoms_match_simulation_exhaustively() {
    check_symptom_completeness(&built(CodeKind::Colour, 3, 1, 0.001));
}

#[test]
fn surface_d3_mechanisms_touch_at_most_four_detectors() {
    let b = built(CodeKind::Surface, 3, 2, 0.001);
    let dem = extract_dem(&b.circuit);
    for m in &dem.mechanisms {
        assert!(m.detectors.len() <= 4, "{:?}", m);
    }
}

#[test]
fn probabilities_bounded_for_small_p() {
    for b in [built(CodeKind::Surface, 3, 2, 0.01), built(CodeKind::Colour, 3, 1, 0.01)] {
        let dem = extract_dem(&b.circuit);
        for m in &dem.mechanisms {
            assert!(m.probability > 0.0 && m.probability <= 0.5, "{}", m.probability);
        }
    }
}

/// No single mechanism or pair of mechanisms may flip the observable while
/// firing no detector: that would mean effective distance < 3 (e.g. from a
/// bad readout-order choice making hook errors stack along the logical).
fn check_no_small_undetected_logical(b: &BuiltCircuit) {
    let dem = extract_dem(&b.circuit);
    for m in &dem.mechanisms {
        assert!(
            !(m.detectors.is_empty() && m.observables != 0),
            "weight-1 undetected logical: {m:?}"
        );
    }
    let n = dem.mechanisms.len();
    for i in 0..n {
        for j in i + 1..n {
            let a = &dem.mechanisms[i];
            let b = &dem.mechanisms[j];
            if a.detectors == b.detectors && a.observables != b.observables {
                panic!("weight-2 undetected logical: {a:?} + {b:?}");
            }
        }
    }
}

#[test]
fn surface_d3_no_weight_two_logical_memory_z() {
    check_no_small_undetected_logical(&built(CodeKind::Surface, 3, 3, 0.001));
}

#[test]
fn surface_d3_no_weight_two_logical_memory_x() {
    let b = build_memory_circuit(
        CodeSpec { kind: CodeKind::Surface, distance: 3, basis: Basis::X },
        3,
        NoiseParams::new(0.001).unwrap(),
    )
    .unwrap();
    check_no_small_undetected_logical(&b);
}

#[test]
fn colour_d3_no_weight_two_logical() {
    check_no_small_undetected_logical(&built(CodeKind::Colour, 3, 2, 0.001));
}
