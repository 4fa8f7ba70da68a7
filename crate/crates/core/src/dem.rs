//! Detector-error-model extraction and the matching-graph projection.
//!
//! Every noise channel in the circuit is decomposed into elementary Pauli
//! components (DEPOLARIZE1 -> X, Y, Z at p/3; DEPOLARIZE2 -> 15 two-qubit
//! Paulis at p/15; X_ERROR/Z_ERROR -> one component). All components are
//! propagated through the Cliffords in a single symbolic pass, each carrying
//! a GF(2) marker bit, so the (detectors, observables) symptom per component
//! is exact. Components with identical symptoms merge with the
//! independent-OR rule p <- p1(1-p2) + p2(1-p1).

use crate::circuit::Circuit;
use crate::circuit::Opcode;
use crate::layout::Basis;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorMechanism {
    pub probability: f64,
    /// Sorted detector indices.
    pub detectors: Vec<u32>,
    /// Observable bit mask.
    pub observables: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorErrorModel {
    pub mechanisms: Vec<ErrorMechanism>,
    pub num_detectors: u32,
    pub num_observables: u32,
}

#[derive(Debug, Error, PartialEq)]
pub enum DemError {
    #[error("mechanism {{p={probability}, detectors {detectors:?}, obs {observables:#x}}} does not decompose into graph-like parts")]
    Undecomposable { probability: f64, detectors: Vec<u32>, observables: u64 },
    #[error("conflicting observable masks {0:#x} vs {1:#x} on matching edge ({2}, {3}); the code distance is broken")]
    MaskConflict(u64, u64, i64, i64),
    #[error("detector class list has {0} entries, circuit has {1} detectors")]
    ClassLength(usize, usize),
}

/// Elementary Pauli component of one noise instruction.
#[derive(Clone, Debug)]
pub struct Component {
    pub probability: f64,
    /// Index of the owning instruction in the circuit.
    pub instruction: usize,
    /// (qubit, x_part, z_part) for up to two qubits.
    pub paulis: Vec<(u32, bool, bool)>,
}

/// Enumerate the elementary Pauli components of all noise channels, in the
/// order the extraction pass consumes them.
pub fn components_of(circuit: &Circuit) -> Vec<Component> {
    let mut out = Vec::new();
    for (ii, inst) in circuit.instructions().iter().enumerate() {
        match inst.opcode {
            Opcode::XError | Opcode::ZError => {
                let p = inst.args[0];
                if p <= 0.0 {
                    continue;
                }
                let x = inst.opcode == Opcode::XError;
                for q in inst.qubits() {
                    out.push(Component { probability: p, instruction: ii, paulis: vec![(q, x, !x)] });
                }
            }
            Opcode::Depolarize1 => {
                let p = inst.args[0];
                if p <= 0.0 {
                    continue;
                }
                for q in inst.qubits() {
                    for (x, z) in [(true, false), (true, true), (false, true)] {
                        out.push(Component {
                            probability: p / 3.0,
                            instruction: ii,
                            paulis: vec![(q, x, z)],
                        });
                    }
                }
            }
            Opcode::Depolarize2 => {
                let p = inst.args[0];
                if p <= 0.0 {
                    continue;
                }
                let qs: Vec<u32> = inst.qubits().collect();
                for pair in qs.chunks(2) {
                    for v in 1u32..16 {
                        let paulis = vec![
                            (pair[0], v & 1 != 0, v & 2 != 0),
                            (pair[1], v & 4 != 0, v & 8 != 0),
                        ];
                        out.push(Component { probability: p / 15.0, instruction: ii, paulis });
                    }
                }
            }
            _ => {}
        }
    }
    out
}

/// Symbolic frame: per qubit, per Pauli axis, the set of components whose
/// injected error currently lands there.
struct SymbolicFrames {
    words: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

impl SymbolicFrames {
    fn new(n: usize, words: usize) -> Self {
        SymbolicFrames { words, x: vec![0; n * words], z: vec![0; n * words] }
    }

    fn mark(&mut self, x_axis: bool, q: u32, comp: usize) {
        let row = q as usize * self.words + comp / 64;
        let m = 1u64 << (comp % 64);
        if x_axis {
            self.x[row] ^= m;
        } else {
            self.z[row] ^= m;
        }
    }

    fn swap_xz(&mut self, q: u32) {
        let base = q as usize * self.words;
        for w in 0..self.words {
            std::mem::swap(&mut self.x[base + w], &mut self.z[base + w]);
        }
    }

    fn cz(&mut self, a: u32, b: u32) {
        let ab = a as usize * self.words;
        let bb = b as usize * self.words;
        for w in 0..self.words {
            let xa = self.x[ab + w];
            let xb = self.x[bb + w];
            self.z[ab + w] ^= xb;
            self.z[bb + w] ^= xa;
        }
    }

    fn clear(&mut self, q: u32) {
        let base = q as usize * self.words;
        for w in 0..self.words {
            self.x[base + w] = 0;
            self.z[base + w] = 0;
        }
    }

    fn clear_axis(&mut self, x_axis: bool, q: u32) {
        let base = q as usize * self.words;
        for w in 0..self.words {
            if x_axis {
                self.x[base + w] = 0;
            } else {
                self.z[base + w] = 0;
            }
        }
    }

    fn read(&self, x_axis: bool, q: u32, out: &mut Vec<u64>) {
        let base = q as usize * self.words;
        out.clear();
        out.extend_from_slice(if x_axis {
            &self.x[base..base + self.words]
        } else {
            &self.z[base..base + self.words]
        });
    }
}

/// Extract the detector error model of a noisy circuit.
pub fn extract_dem(circuit: &Circuit) -> DetectorErrorModel {
    let comps = components_of(circuit);
    let (det_lists, obs_masks) = component_symptoms_inner(circuit, &comps);

    // Merge identical symptoms with the independent-OR rule.
    let mut merged: HashMap<(Vec<u32>, u64), f64> = HashMap::new();
    for (c, comp) in comps.iter().enumerate() {
        if det_lists[c].is_empty() && obs_masks[c] == 0 {
            continue;
        }
        let key = (det_lists[c].clone(), obs_masks[c]);
        let p = merged.entry(key).or_insert(0.0);
        *p = or_probabilities(*p, comp.probability);
    }
    let mut mechanisms: Vec<ErrorMechanism> = merged
        .into_iter()
        .map(|((detectors, observables), probability)| ErrorMechanism {
            probability,
            detectors,
            observables,
        })
        .collect();
    mechanisms.sort_by(|a, b| a.detectors.cmp(&b.detectors).then(a.observables.cmp(&b.observables)));

    DetectorErrorModel {
        mechanisms,
        num_detectors: circuit.detectors().len() as u32,
        num_observables: circuit.observables().len() as u32,
    }
}

/// Exact (detectors, observable mask) symptom of every elementary component,
/// aligned with [`components_of`].
pub fn component_symptoms(circuit: &Circuit) -> Vec<(Component, Vec<u32>, u64)> {
    let comps = components_of(circuit);
    let (det_lists, obs_masks) = component_symptoms_inner(circuit, &comps);
    comps
        .into_iter()
        .zip(det_lists)
        .zip(obs_masks)
        .map(|((c, d), o)| (c, d, o))
        .collect()
}

fn component_symptoms_inner(circuit: &Circuit, comps: &[Component]) -> (Vec<Vec<u32>>, Vec<u64>) {
    let words = comps.len().div_ceil(64).max(1);
    let n = circuit.num_qubits() as usize;
    let mut frames = SymbolicFrames::new(n, words);
    let mut meas: Vec<Vec<u64>> = Vec::with_capacity(circuit.num_measurements() as usize);
    let mut comp_cursor = 0usize;
    let mut scratch = Vec::new();

    for inst in circuit.instructions() {
        match inst.opcode {
            Opcode::H => {
                for q in inst.qubits() {
                    frames.swap_xz(q);
                }
            }
            Opcode::CZ => {
                let qs: Vec<u32> = inst.qubits().collect();
                for pair in qs.chunks(2) {
                    frames.cz(pair[0], pair[1]);
                }
            }
            Opcode::R | Opcode::RX => {
                for q in inst.qubits() {
                    frames.clear(q);
                }
            }
            Opcode::M => {
                for q in inst.qubits() {
                    frames.read(true, q, &mut scratch);
                    meas.push(scratch.clone());
                    // Residual Z on a freshly collapsed qubit is a global
                    // phase; it can never fire anything later.
                    frames.clear_axis(false, q);
                }
            }
            Opcode::MX => {
                for q in inst.qubits() {
                    frames.read(false, q, &mut scratch);
                    meas.push(scratch.clone());
                    frames.clear_axis(true, q);
                }
            }
            Opcode::XError | Opcode::ZError | Opcode::Depolarize1 | Opcode::Depolarize2 => {
                if inst.args[0] <= 0.0 {
                    continue;
                }
                let n_parts = match inst.opcode {
                    Opcode::XError | Opcode::ZError => 1,
                    Opcode::Depolarize1 => 3,
                    _ => 15,
                };
                let per_target = if inst.opcode == Opcode::Depolarize2 { 2 } else { 1 };
                let qs: Vec<u32> = inst.qubits().collect();
                for chunk in qs.chunks(per_target) {
                    for _ in 0..n_parts {
                        let c = &comps[comp_cursor];
                        debug_assert_eq!(c.paulis[0].0, chunk[0]);
                        for &(q, x, z) in &c.paulis {
                            if x {
                                frames.mark(true, q, comp_cursor);
                            }
                            if z {
                                frames.mark(false, q, comp_cursor);
                            }
                        }
                        comp_cursor += 1;
                    }
                }
            }
            _ => {}
        }
    }
    debug_assert_eq!(comp_cursor, comps.len());

    // Transpose measurement flip sets into per-component symptoms.
    let mut det_lists: Vec<Vec<u32>> = vec![Vec::new(); comps.len()];
    let mut obs_masks: Vec<u64> = vec![0; comps.len()];
    let fold_set = |sets: &[u32]| -> Vec<u64> {
        let mut acc = vec![0u64; words];
        for &m in sets {
            for (a, b) in acc.iter_mut().zip(&meas[m as usize]) {
                *a ^= b;
            }
        }
        acc
    };
    for (di, d) in circuit.detectors().iter().enumerate() {
        let acc = fold_set(&d.measurements);
        for (w, &bits) in acc.iter().enumerate() {
            let mut bits = bits;
            while bits != 0 {
                let c = w * 64 + bits.trailing_zeros() as usize;
                bits &= bits - 1;
                det_lists[c].push(di as u32);
            }
        }
    }
    for (oi, o) in circuit.observables().iter().enumerate() {
        let acc = fold_set(&o.measurements);
        for (w, &bits) in acc.iter().enumerate() {
            let mut bits = bits;
            while bits != 0 {
                let c = w * 64 + bits.trailing_zeros() as usize;
                bits &= bits - 1;
                obs_masks[c] |= 1 << oi;
            }
        }
    }
    (det_lists, obs_masks)
}

/// Canonical, diff-stable text form: `error(p) D3 D7 L0` lines.
pub fn dem_to_text(dem: &DetectorErrorModel) -> String {
    let mut out = String::new();
    for m in &dem.mechanisms {
        out.push_str(&format!("error({})", m.probability));
        for d in &m.detectors {
            out.push_str(&format!(" D{d}"));
        }
        for l in 0..64 {
            if m.observables & (1 << l) != 0 {
                out.push_str(&format!(" L{l}"));
            }
        }
        out.push('\n');
    }
    out
}

pub fn dem_from_text(text: &str) -> Result<DetectorErrorModel, String> {
    let mut mechanisms = Vec::new();
    let mut num_detectors = 0;
    let mut num_observables = 0;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let rest = line
            .strip_prefix("error(")
            .ok_or_else(|| format!("line {}: expected error(p)", i + 1))?;
        let close = rest.find(')').ok_or_else(|| format!("line {}: missing )", i + 1))?;
        let probability: f64 = rest[..close].parse().map_err(|e| format!("line {}: {e}", i + 1))?;
        let mut detectors = Vec::new();
        let mut observables = 0u64;
        for tok in rest[close + 1..].split_whitespace() {
            if let Some(d) = tok.strip_prefix('D') {
                let d: u32 = d.parse().map_err(|e| format!("line {}: {e}", i + 1))?;
                num_detectors = num_detectors.max(d + 1);
                detectors.push(d);
            } else if let Some(l) = tok.strip_prefix('L') {
                let l: u32 = l.parse().map_err(|e| format!("line {}: {e}", i + 1))?;
                num_observables = num_observables.max(l + 1);
                observables |= 1 << l;
            } else {
                return Err(format!("line {}: bad token {tok}", i + 1));
            }
        }
        mechanisms.push(ErrorMechanism { probability, detectors, observables });
    }
    Ok(DetectorErrorModel { mechanisms, num_detectors, num_observables })
}

/// Weighted matching graph: nodes are detectors plus a virtual boundary.
#[derive(Clone, Debug)]
pub struct MatchingGraph {
    pub num_detectors: u32,
    /// (a, b, weight, observable mask), a < b.
    pub edges: Vec<(u32, u32, f64, u64)>,
    /// (a, weight, observable mask).
    pub boundary_edges: Vec<(u32, f64, u64)>,
    /// adjacency[v] = (neighbour or BOUNDARY, weight, mask) entries.
    pub adjacency: Vec<Vec<(u32, f64, u64)>>,
}

pub const BOUNDARY: u32 = u32::MAX;

/// Project a DEM onto a matching graph. `classes` gives each detector's
/// stabilizer basis; mechanisms touching more than two detectors must split
/// into per-basis parts with at most two detectors each (the standard
/// uncorrelated decomposition). The observable mask of a split mechanism
/// rides on the part whose detectors belong to `obs_basis` (the class that
/// detects memory-observable flips). Colour-code DEMs contain three-detector
/// single-basis mechanisms and are rejected as undecomposable.
pub fn to_matching_graph(
    dem: &DetectorErrorModel,
    classes: &[Basis],
    obs_basis: Basis,
) -> Result<MatchingGraph, DemError> {
    if classes.len() != dem.num_detectors as usize {
        return Err(DemError::ClassLength(classes.len(), dem.num_detectors as usize));
    }
    let mut acc: HashMap<(i64, i64), (f64, u64)> = HashMap::new();
    let mut add = |a: i64, b: i64, p: f64, mask: u64| -> Result<(), DemError> {
        let key = if a <= b { (a, b) } else { (b, a) };
        match acc.entry(key) {
            std::collections::hash_map::Entry::Occupied(mut e) => {
                let (q, m) = *e.get();
                if m != mask {
                    return Err(DemError::MaskConflict(m, mask, key.0, key.1));
                }
                e.insert((or_probabilities(q, p), m));
            }
            std::collections::hash_map::Entry::Vacant(v) => {
                v.insert((p, mask));
            }
        }
        Ok(())
    };

    for m in &dem.mechanisms {
        let undecomposable = || DemError::Undecomposable {
            probability: m.probability,
            detectors: m.detectors.clone(),
            observables: m.observables,
        };
        let mut by_basis: [Vec<u32>; 2] = [Vec::new(), Vec::new()];
        for &d in &m.detectors {
            let idx = match classes[d as usize] {
                Basis::X => 0,
                Basis::Z => 1,
            };
            by_basis[idx].push(d);
        }
        let obs_idx = match obs_basis {
            Basis::X => 0,
            Basis::Z => 1,
        };
        let mut parts: Vec<(&[u32], u64)> = Vec::new();
        for (idx, dets) in by_basis.iter().enumerate() {
            if dets.is_empty() {
                continue;
            }
            let mask = if idx == obs_idx { m.observables } else { 0 };
            parts.push((dets, mask));
        }
        if parts.is_empty() {
            // Detector-free logical flip: not representable in a graph.
            return Err(undecomposable());
        }
        if m.observables != 0 && parts.iter().all(|(_, mask)| *mask == 0) {
            parts[0].1 = m.observables;
        }
        for (dets, mask) in parts {
            match dets.len() {
                1 => add(dets[0] as i64, -1, m.probability, mask)?,
                2 => add(dets[0] as i64, dets[1] as i64, m.probability, mask)?,
                _ => return Err(undecomposable()),
            }
        }
    }

    let mut edges = Vec::new();
    let mut boundary_edges = Vec::new();
    let mut adjacency: Vec<Vec<(u32, f64, u64)>> = vec![Vec::new(); dem.num_detectors as usize];
    let mut keys: Vec<(i64, i64)> = acc.keys().cloned().collect();
    keys.sort_unstable();
    for key in keys {
        let (p, mask) = acc[&key];
        let p = p.min(0.5 - 1e-12);
        let w = ((1.0 - p) / p).ln();
        if key.0 < 0 {
            let a = key.1 as u32;
            boundary_edges.push((a, w, mask));
            adjacency[a as usize].push((BOUNDARY, w, mask));
        } else {
            let (a, b) = (key.0 as u32, key.1 as u32);
            edges.push((a, b, w, mask));
            adjacency[a as usize].push((b, w, mask));
            adjacency[b as usize].push((a, w, mask));
        }
    }
    Ok(MatchingGraph { num_detectors: dem.num_detectors, edges, boundary_edges, adjacency })
}

/// Independent-OR combination used when merging mechanisms.
pub fn or_probabilities(p1: f64, p2: f64) -> f64 {
    p1 * (1.0 - p2) + p2 * (1.0 - p1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;

    #[test]
    fn or_rule() {
        assert!((or_probabilities(0.1, 0.1) - 0.18).abs() < 1e-15);
    }

    #[test]
    fn zero_noise_circuit_gives_empty_dem() {
        let c = parse_circuit("R 0\nM 0\nDETECTOR(0, 0, 0) rec[-1]\n").unwrap();
        let dem = extract_dem(&c);
        assert!(dem.mechanisms.is_empty());
    }

    #[test]
    fn single_x_error_before_measurement() {
        let c = parse_circuit(
            "R 0\nX_ERROR(0.125) 0\nM 0\nDETECTOR(0, 0, 0) rec[-1]\nOBSERVABLE_INCLUDE(0) rec[-1]\n",
        )
        .unwrap();
        let dem = extract_dem(&c);
        assert_eq!(dem.mechanisms.len(), 1);
        assert_eq!(dem.mechanisms[0].detectors, vec![0]);
        assert_eq!(dem.mechanisms[0].observables, 1);
        assert!((dem.mechanisms[0].probability - 0.125).abs() < 1e-15);
    }

    #[test]
    fn depolarize_splits_and_merges() {
        // X and Y components of DEPOLARIZE1 both flip a Z measurement; they
        // merge into one mechanism with independent-OR probability.
        let c = parse_circuit("R 0\nDEPOLARIZE1(0.3) 0\nM 0\nDETECTOR(0, 0, 0) rec[-1]\n").unwrap();
        let dem = extract_dem(&c);
        assert_eq!(dem.mechanisms.len(), 1);
        let p = 0.1f64;
        assert!((dem.mechanisms[0].probability - or_probabilities(p, p)).abs() < 1e-12);
    }

    #[test]
    fn merge_is_order_independent() {
        let a = parse_circuit(
            "R 0\nX_ERROR(0.1) 0\nZ_ERROR(0.2) 0\nX_ERROR(0.05) 0\nM 0\nDETECTOR(0, 0, 0) rec[-1]\n",
        )
        .unwrap();
        let b = parse_circuit(
            "R 0\nX_ERROR(0.05) 0\nX_ERROR(0.1) 0\nZ_ERROR(0.2) 0\nM 0\nDETECTOR(0, 0, 0) rec[-1]\n",
        )
        .unwrap();
        assert_eq!(extract_dem(&a), extract_dem(&b));
    }

    #[test]
    fn text_roundtrip() {
        let c = parse_circuit(
            "R 0 1\nX_ERROR(0.01) 0\nDEPOLARIZE2(0.1) 0 1\nM 0 1\nDETECTOR(0, 0, 0) rec[-2]\nDETECTOR(1, 0, 0) rec[-1]\nOBSERVABLE_INCLUDE(0) rec[-1]\n",
        )
        .unwrap();
        let dem = extract_dem(&c);
        let text = dem_to_text(&dem);
        let back = dem_from_text(&text).unwrap();
        assert_eq!(back.mechanisms, dem.mechanisms);
    }

    #[test]
    fn matching_graph_weights() {
        let dem = DetectorErrorModel {
            mechanisms: vec![
                ErrorMechanism { probability: 0.01, detectors: vec![0, 1], observables: 0 },
                ErrorMechanism { probability: 0.02, detectors: vec![0], observables: 1 },
            ],
            num_detectors: 2,
            num_observables: 1,
        };
        let g = to_matching_graph(&dem, &[Basis::Z, Basis::Z], Basis::Z).unwrap();
        assert_eq!(g.edges.len(), 1);
        assert!((g.edges[0].2 - (99.0f64).ln()).abs() < 1e-12);
        assert_eq!(g.boundary_edges.len(), 1);
        assert_eq!(g.boundary_edges[0].2, 1);
    }

    #[test]
    fn three_detector_single_class_is_undecomposable() {
        let dem = DetectorErrorModel {
            mechanisms: vec![ErrorMechanism {
                probability: 0.01,
                detectors: vec![0, 1, 2],
                observables: 0,
            }],
            num_detectors: 3,
            num_observables: 0,
        };
        let err = to_matching_graph(&dem, &[Basis::Z; 3], Basis::Z).unwrap_err();
        assert!(matches!(err, DemError::Undecomposable { .. }));
    }
}
