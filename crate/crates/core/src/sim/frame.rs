//! Bit-packed Pauli-frame Monte Carlo sampler.
//!
//! One tableau reference run per circuit establishes noiseless measurement
//! values; after that only Pauli frames are propagated, 64 shots per machine
//! word. Resets and measurements randomize the frame component that the
//! collapse leaves free, which reproduces the joint distribution of random
//! measurements (e.g. first-round off-basis stabilizers) without touching
//! the tableau again.
//!
//! All randomness is counter-based: every (noise instruction target, shot
//! block) pair owns a stream, so results are bit-identical for any worker
//! count.

use super::{reference_run, ReferenceRun, SimError};
use crate::circuit::{BuiltCircuit, Circuit, CircuitMeta, Opcode};
use crate::util::{Bits, CounterRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Auxiliary per-cycle training labels derived from simulator-privileged
/// frame information.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuxiliaryLabels {
    /// Observable of the hypothetical experiment ending at each cycle; the
    /// last entry equals the shot's real observable flip.
    pub fake_ending_observable: Bits,
    /// Hypothetical final-round stabilizer detector bits per cycle (one bit
    /// per in-basis slot).
    pub fake_ending_final_stabilizers: Vec<Bits>,
    /// Noise-free readout of the observable support at each cycle boundary.
    pub noiseless_observable: Bits,
}

/// One sampled shot of a memory experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub measurements: Bits,
    pub detection_events: Bits,
    pub observable_flips: Bits,
    pub aux: Option<AuxiliaryLabels>,
    /// Provenance: (seed, shot index) reproduce this shot exactly.
    pub seed: u64,
    pub index: u64,
}

#[derive(Clone, Debug)]
enum FrameOp {
    H(u32),
    Cz(u32, u32),
    Reset { q: u32, stream: u64, x_basis: bool },
    Measure { q: u32, stream: u64, x_basis: bool },
    BitFlip { q: u32, p: f64, stream: u64, z_flip: bool },
    Dep1 { q: u32, p: f64, stream: u64 },
    Dep2 { a: u32, b: u32, p: f64, stream: u64 },
    AuxProbe { cycle: u32 },
}

#[derive(Clone)]
struct AuxSpec {
    cycles: u32,
    /// (qubit id, final readout effectively in X basis) per data qubit.
    data: Vec<(u32, bool)>,
    /// Positions into `data` of the observable support.
    support: Vec<usize>,
    /// Per in-basis slot: member positions into `data`.
    slot_members: Vec<Vec<usize>>,
    /// Per cycle, per in-basis slot: measurement index of the slot readout.
    slot_meas: Vec<Vec<u32>>,
    /// Per in-basis slot: final-round detector index.
    final_detector: Vec<u32>,
}

/// Compiled sampler for one circuit.
pub struct Sampler {
    ops: Vec<FrameOp>,
    num_qubits: usize,
    num_measurements: usize,
    reference: ReferenceRun,
    detectors: Vec<Vec<u32>>,
    observables: Vec<Vec<u32>>,
    aux: Option<AuxSpec>,
}

impl Sampler {
    pub fn new(circuit: &Circuit) -> Result<Sampler, SimError> {
        Self::compile(circuit, None)
    }

    /// Sampler that also produces [`AuxiliaryLabels`], which requires builder
    /// layout metadata.
    pub fn with_aux(built: &BuiltCircuit) -> Result<Sampler, SimError> {
        let meta = &built.meta;
        let data: Vec<(u32, bool)> = meta
            .final_data_order
            .iter()
            .cloned()
            .zip(meta.final_data_x_basis.iter().cloned())
            .collect();
        let pos_of = |q: u32| -> Result<usize, SimError> {
            meta.final_data_order
                .iter()
                .position(|&x| x == q)
                .ok_or(SimError::MissingLayoutMetadata)
        };
        let support = meta.layout.observable_support[0]
            .iter()
            .map(|&q| pos_of(q))
            .collect::<Result<Vec<_>, _>>()?;
        let mut slot_members = Vec::new();
        let mut final_detector = Vec::new();
        for &slot in &meta.in_basis_slots {
            let st = &meta.layout.stabilizers[slot as usize];
            slot_members.push(st.members.iter().map(|&q| pos_of(q)).collect::<Result<Vec<_>, _>>()?);
            let det = meta
                .detector_classes
                .iter()
                .position(|c| c.cycle == meta.cycles && c.slot == slot && !c.is_flag)
                .ok_or(SimError::MissingLayoutMetadata)?;
            final_detector.push(det as u32);
        }
        let slot_meas: Vec<Vec<u32>> = (0..meta.cycles)
            .map(|t| meta.in_basis_slots.iter().map(|&s| meta.slot_measurement(t, s)).collect())
            .collect();
        let aux = AuxSpec {
            cycles: meta.cycles,
            data,
            support,
            slot_members,
            slot_meas,
            final_detector,
        };
        Self::compile(&built.circuit, Some((aux, meta)))
    }

    fn compile(circuit: &Circuit, aux: Option<(AuxSpec, &CircuitMeta)>) -> Result<Sampler, SimError> {
        let reference = reference_run(circuit);
        let mut ops = Vec::new();
        let mut next_stream = 0u64;
        let mut stream = || {
            let s = next_stream;
            next_stream += 1;
            s
        };
        let (aux_spec, per_cycle, cycles) = match &aux {
            Some((spec, meta)) => (Some(spec.clone()), meta.per_cycle_measurements, meta.cycles),
            None => (None, 0, 0),
        };
        let mut measured = 0u32;
        for inst in circuit.instructions() {
            match inst.opcode {
                Opcode::H => ops.extend(inst.qubits().map(FrameOp::H)),
                Opcode::CZ => {
                    let qs: Vec<u32> = inst.qubits().collect();
                    ops.extend(qs.chunks(2).map(|p| FrameOp::Cz(p[0], p[1])));
                }
                Opcode::R | Opcode::RX => {
                    let x_basis = inst.opcode == Opcode::RX;
                    ops.extend(
                        inst.qubits().map(|q| FrameOp::Reset { q, stream: stream(), x_basis }),
                    );
                }
                Opcode::M | Opcode::MX => {
                    let x_basis = inst.opcode == Opcode::MX;
                    for q in inst.qubits() {
                        ops.push(FrameOp::Measure { q, stream: stream(), x_basis });
                        measured += 1;
                        if aux_spec.is_some()
                            && per_cycle > 0
                            && measured % per_cycle == 0
                            && measured / per_cycle <= cycles
                        {
                            ops.push(FrameOp::AuxProbe { cycle: measured / per_cycle - 1 });
                        }
                    }
                }
                Opcode::XError | Opcode::ZError => {
                    let p = inst.args[0];
                    let z_flip = inst.opcode == Opcode::ZError;
                    ops.extend(
                        inst.qubits().map(|q| FrameOp::BitFlip { q, p, stream: stream(), z_flip }),
                    );
                }
                Opcode::Depolarize1 => {
                    let p = inst.args[0];
                    ops.extend(inst.qubits().map(|q| FrameOp::Dep1 { q, p, stream: stream() }));
                }
                Opcode::Depolarize2 => {
                    let p = inst.args[0];
                    let qs: Vec<u32> = inst.qubits().collect();
                    ops.extend(
                        qs.chunks(2).map(|pr| FrameOp::Dep2 { a: pr[0], b: pr[1], p, stream: stream() }),
                    );
                }
                Opcode::Detector | Opcode::ObservableInclude | Opcode::QubitCoords | Opcode::Tick => {}
            }
        }
        Ok(Sampler {
            ops,
            num_qubits: circuit.num_qubits() as usize,
            num_measurements: circuit.num_measurements() as usize,
            reference,
            detectors: circuit.detectors().iter().map(|d| d.measurements.clone()).collect(),
            observables: circuit.observables().iter().map(|o| o.measurements.clone()).collect(),
            aux: aux_spec,
        })
    }

    pub fn reference(&self) -> &ReferenceRun {
        &self.reference
    }

    /// Sample `count` shots. Deterministic in (seed, count) for any thread
    /// count: shots are processed in independent 64-lane blocks addressed by
    /// index.
    pub fn sample(&self, count: u64, seed: u64) -> Vec<ShotRecord> {
        let blocks = count.div_ceil(64);
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let lanes = (count - b * 64).min(64) as usize;
                self.sample_block(seed, b, lanes)
            })
            .flatten()
            .collect()
    }

    fn sample_block(&self, seed: u64, block: u64, lanes: usize) -> Vec<ShotRecord> {
        let rng = CounterRng::new(seed);
        let key = |stream: u64| (stream << 24) | block;
        let n = self.num_qubits;
        let mut x = vec![0u64; n];
        let mut z = vec![0u64; n];
        let mut flips = vec![0u64; self.num_measurements];
        let mut meas_cursor = 0usize;

        let aux_rows = self.aux.as_ref().map(|a| {
            let c = a.cycles as usize;
            (vec![0u64; c], vec![0u64; c], vec![vec![0u64; a.slot_members.len()]; c])
        });
        let (mut noiseless_obs, mut fake_obs, mut fake_stab) =
            aux_rows.unwrap_or((vec![], vec![], vec![]));

        for op in &self.ops {
            match *op {
                FrameOp::H(q) => {
                    let q = q as usize;
                    std::mem::swap(&mut x[q], &mut z[q]);
                }
                FrameOp::Cz(a, b) => {
                    let (a, b) = (a as usize, b as usize);
                    let xa = x[a];
                    let xb = x[b];
                    z[a] ^= xb;
                    z[b] ^= xa;
                }
                FrameOp::Reset { q, stream, x_basis } => {
                    let q = q as usize;
                    x[q] = 0;
                    z[q] = 0;
                    // Phase after reset is free; give it fresh randomness so
                    // later rotated-basis measurements come out uniform.
                    if x_basis {
                        x[q] = rng.word(key(stream), 128);
                    } else {
                        z[q] = rng.word(key(stream), 128);
                    }
                }
                FrameOp::Measure { q, stream, x_basis } => {
                    let q = q as usize;
                    if x_basis {
                        flips[meas_cursor] = z[q];
                        x[q] = rng.word(key(stream), 128);
                    } else {
                        flips[meas_cursor] = x[q];
                        z[q] = rng.word(key(stream), 128);
                    }
                    meas_cursor += 1;
                }
                FrameOp::BitFlip { q, p, stream, z_flip } => {
                    let w = rng.bernoulli_word(p, key(stream));
                    if z_flip {
                        z[q as usize] ^= w;
                    } else {
                        x[q as usize] ^= w;
                    }
                }
                FrameOp::Dep1 { q, p, stream } => {
                    let mut w = rng.bernoulli_word(p, key(stream));
                    while w != 0 {
                        let lane = w.trailing_zeros() as u64;
                        w &= w - 1;
                        let pauli = rng.word(key(stream), 64 + lane) % 3;
                        let bit = 1u64 << lane;
                        if pauli != 2 {
                            x[q as usize] ^= bit; // X or Y
                        }
                        if pauli != 0 {
                            z[q as usize] ^= bit; // Z or Y
                        }
                    }
                }
                FrameOp::Dep2 { a, b, p, stream } => {
                    let mut w = rng.bernoulli_word(p, key(stream));
                    while w != 0 {
                        let lane = w.trailing_zeros() as u64;
                        w &= w - 1;
                        // 15 non-identity two-qubit Paulis, uniformly.
                        let v = (rng.word(key(stream), 64 + lane) % 15 + 1) as u64;
                        let bit = 1u64 << lane;
                        if v & 1 != 0 {
                            x[a as usize] ^= bit;
                        }
                        if v & 2 != 0 {
                            z[a as usize] ^= bit;
                        }
                        if v & 4 != 0 {
                            x[b as usize] ^= bit;
                        }
                        if v & 8 != 0 {
                            z[b as usize] ^= bit;
                        }
                    }
                }
                FrameOp::AuxProbe { cycle } => {
                    let a = self.aux.as_ref().unwrap();
                    let t = cycle as usize;
                    let basis_flip = |pos: usize| -> u64 {
                        let (q, x_basis) = a.data[pos];
                        if x_basis {
                            z[q as usize]
                        } else {
                            x[q as usize]
                        }
                    };
                    let mut obs = 0u64;
                    for &pos in &a.support {
                        obs ^= basis_flip(pos);
                    }
                    noiseless_obs[t] = obs;
                    fake_obs[t] = obs;
                    for (k, members) in a.slot_members.iter().enumerate() {
                        let mut par = flips[a.slot_meas[t][k] as usize];
                        for &pos in members {
                            par ^= basis_flip(pos);
                        }
                        fake_stab[t][k] = par;
                    }
                }
            }
        }

        let detector_words: Vec<u64> = self
            .detectors
            .iter()
            .map(|set| set.iter().fold(0u64, |acc, &m| acc ^ flips[m as usize]))
            .collect();
        let observable_words: Vec<u64> = self
            .observables
            .iter()
            .map(|set| set.iter().fold(0u64, |acc, &m| acc ^ flips[m as usize]))
            .collect();

        // The fake ending of the true final cycle is the real ending.
        if let Some(a) = &self.aux {
            let t = a.cycles as usize - 1;
            fake_obs[t] = observable_words[0];
            for (k, &det) in a.final_detector.iter().enumerate() {
                fake_stab[t][k] = detector_words[det as usize];
            }
        }

        (0..lanes)
            .map(|lane| {
                let bit = |w: u64| (w >> lane) & 1 == 1;
                let mut measurements = Bits::new(self.num_measurements);
                for (i, &f) in flips.iter().enumerate() {
                    measurements.set(i, bit(f) ^ self.reference.measurements.get(i));
                }
                let mut detection_events = Bits::new(detector_words.len());
                for (i, &w) in detector_words.iter().enumerate() {
                    detection_events.set(i, bit(w));
                }
                let mut observable_flips = Bits::new(observable_words.len());
                for (i, &w) in observable_words.iter().enumerate() {
                    observable_flips.set(i, bit(w));
                }
                let aux = self.aux.as_ref().map(|a| {
                    let c = a.cycles as usize;
                    let mut fe = Bits::new(c);
                    let mut no = Bits::new(c);
                    let mut fs = Vec::with_capacity(c);
                    for t in 0..c {
                        fe.set(t, bit(fake_obs[t]));
                        no.set(t, bit(noiseless_obs[t]));
                        let mut row = Bits::new(a.slot_members.len());
                        for k in 0..a.slot_members.len() {
                            row.set(k, bit(fake_stab[t][k]));
                        }
                        fs.push(row);
                    }
                    AuxiliaryLabels {
                        fake_ending_observable: fe,
                        fake_ending_final_stabilizers: fs,
                        noiseless_observable: no,
                    }
                });
                ShotRecord {
                    measurements,
                    detection_events,
                    observable_flips,
                    aux,
                    seed,
                    index: block * 64 + lane as u64,
                }
            })
            .collect()
    }
}

/// Sample shots from a circuit (frames only, no auxiliary labels).
pub fn sample_shots(circuit: &Circuit, count: u64, seed: u64) -> Result<Vec<ShotRecord>, SimError> {
    if count < 1 {
        return Err(SimError::EmptySample);
    }
    Ok(Sampler::new(circuit)?.sample(count, seed))
}

/// Recompute and attach auxiliary labels to previously sampled shots.
/// Requires builder metadata; shots must carry their sampling provenance.
pub fn attach_auxiliary_labels(built: &BuiltCircuit, shots: &mut [ShotRecord]) -> Result<(), SimError> {
    if shots.is_empty() {
        return Ok(());
    }
    let sampler = Sampler::with_aux(built)?;
    let seed = shots[0].seed;
    let max_index = shots.iter().map(|s| s.index).max().unwrap();
    let regenerated = sampler.sample(max_index + 1, seed);
    for shot in shots.iter_mut() {
        if shot.seed != seed {
            return Err(SimError::MixedProvenance);
        }
        let r = &regenerated[shot.index as usize];
        debug_assert_eq!(r.measurements, shot.measurements, "provenance mismatch");
        shot.aux = r.aux.clone();
    }
    Ok(())
}

/// Mean detection-event rate over all shots and detectors.
pub fn detection_fraction(shots: &[ShotRecord]) -> Result<f64, SimError> {
    if shots.is_empty() || shots[0].detection_events.is_empty() {
        return Err(SimError::EmptySample);
    }
    let total: usize = shots.iter().map(|s| s.detection_events.count_ones()).sum();
    Ok(total as f64 / (shots.len() * shots[0].detection_events.len()) as f64)
}
