//! Exact determinism analysis of noiseless circuits.
//!
//! Every reset (and the post-measurement phase freedom) introduces a fresh
//! GF(2) variable on the qubit's frame; propagating variable sets through
//! the Cliffords makes each measurement an affine function of the variables.
//! A measurement, detector, or observable is deterministic under zero noise
//! exactly when its variable set cancels.

use super::super::circuit::{Circuit, Opcode};
use crate::util::Bits;

#[derive(Clone, Default)]
struct VarSet {
    words: Vec<u64>,
}

impl VarSet {
    fn clear(&mut self) {
        self.words.clear();
    }

    fn set(&mut self, var: usize) {
        let w = var / 64;
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        self.words[w] ^= 1 << (var % 64);
    }

    fn xor(&mut self, other: &VarSet) {
        if self.words.len() < other.words.len() {
            self.words.resize(other.words.len(), 0);
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }
}

pub struct DeterminismReport {
    pub measurements: Bits,
    pub detectors: Bits,
    pub observables: Bits,
}

impl DeterminismReport {
    pub fn all_detectors_deterministic(&self) -> bool {
        (0..self.detectors.len()).all(|i| self.detectors.get(i))
    }

    pub fn first_random_measurement(&self) -> Option<u32> {
        (0..self.measurements.len()).find(|&i| !self.measurements.get(i)).map(|i| i as u32)
    }
}

pub fn determinism_analysis(circuit: &Circuit) -> DeterminismReport {
    let n = circuit.num_qubits() as usize;
    let mut next_var = 0usize;
    let mut fresh = || {
        let v = next_var;
        next_var += 1;
        v
    };
    // Initial |0> states carry free phases like any other reset.
    let mut xf: Vec<VarSet> = vec![VarSet::default(); n];
    let mut zf: Vec<VarSet> = (0..n)
        .map(|_| {
            let mut s = VarSet::default();
            s.set(fresh());
            s
        })
        .collect();

    let mut meas_sets: Vec<VarSet> = Vec::with_capacity(circuit.num_measurements() as usize);
    for inst in circuit.instructions() {
        match inst.opcode {
            Opcode::H => {
                for q in inst.qubits() {
                    let q = q as usize;
                    std::mem::swap(&mut xf[q], &mut zf[q]);
                }
            }
            Opcode::CZ => {
                let qs: Vec<u32> = inst.qubits().collect();
                for pair in qs.chunks(2) {
                    let (a, b) = (pair[0] as usize, pair[1] as usize);
                    let xa = xf[a].clone();
                    let xb = xf[b].clone();
                    zf[a].xor(&xb);
                    zf[b].xor(&xa);
                }
            }
            Opcode::R => {
                for q in inst.qubits() {
                    let q = q as usize;
                    xf[q].clear();
                    zf[q].clear();
                    zf[q].set(fresh());
                }
            }
            Opcode::RX => {
                for q in inst.qubits() {
                    let q = q as usize;
                    zf[q].clear();
                    xf[q].clear();
                    xf[q].set(fresh());
                }
            }
            Opcode::M => {
                for q in inst.qubits() {
                    let q = q as usize;
                    meas_sets.push(xf[q].clone());
                    zf[q].clear();
                    zf[q].set(fresh());
                }
            }
            Opcode::MX => {
                for q in inst.qubits() {
                    let q = q as usize;
                    meas_sets.push(zf[q].clone());
                    xf[q].clear();
                    xf[q].set(fresh());
                }
            }
            // Noise channels and bookkeeping do not move the noiseless frame.
            _ => {}
        }
    }

    let mut measurements = Bits::new(meas_sets.len());
    for (i, s) in meas_sets.iter().enumerate() {
        measurements.set(i, s.is_empty());
    }
    let combine = |idx: &[u32]| -> bool {
        let mut acc = VarSet::default();
        for &m in idx {
            acc.xor(&meas_sets[m as usize]);
        }
        acc.is_empty()
    };
    let mut detectors = Bits::new(circuit.detectors().len());
    for (i, d) in circuit.detectors().iter().enumerate() {
        detectors.set(i, combine(&d.measurements));
    }
    let mut observables = Bits::new(circuit.observables().len());
    for (i, o) in circuit.observables().iter().enumerate() {
        observables.set(i, combine(&o.measurements));
    }
    DeterminismReport { measurements, detectors, observables }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;

    #[test]
    fn zero_state_z_measurement_is_deterministic() {
        let c = parse_circuit("M 0\n").unwrap();
        let r = determinism_analysis(&c);
        assert!(r.measurements.get(0));
    }

    #[test]
    fn plus_measurement_in_z_is_random_but_repeat_xor_is_deterministic() {
        let c = parse_circuit("H 0\nM 0\nH 0\nH 0\nM 0\nDETECTOR(0, 0, 0) rec[-1] rec[-2]\n").unwrap();
        let r = determinism_analysis(&c);
        assert!(!r.measurements.get(0));
        assert!(!r.measurements.get(1));
        assert!(r.detectors.get(0), "repeat measurement parity is deterministic");
    }

    #[test]
    fn reset_breaks_correlation() {
        let c = parse_circuit("H 0\nM 0\nR 0\nH 0\nM 0\nDETECTOR(0, 0, 0) rec[-1] rec[-2]\n").unwrap();
        let r = determinism_analysis(&c);
        assert!(!r.detectors.get(0), "reset decouples the measurements");
    }

    #[test]
    fn bell_parity_deterministic() {
        let c = parse_circuit(
            "H 0\nH 1\nCZ 0 1\nH 1\nM 0\nM 1\nDETECTOR(0, 0, 0) rec[-1] rec[-2]\n",
        )
        .unwrap();
        let r = determinism_analysis(&c);
        assert!(!r.measurements.get(0));
        assert!(!r.measurements.get(1));
        assert!(r.detectors.get(0));
    }
}
