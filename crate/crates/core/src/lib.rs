//! Desk-scale quantum-error-correction decoding laboratory.
//!
//! The crate builds noisy memory-experiment circuits for rotated XZZX surface
//! codes and Bell-flagged triangular colour codes, samples syndromes with a
//! Pauli-frame simulator, extracts detector error models, and decodes with
//! exact matching / most-likely-error baselines as well as a streaming
//! recurrent-attention neural decoder.
//!
//! Modules map onto the pipeline stages:
//!
//! - [`layout`]: qubit geometry and stabilizer structure for both code families
//! - [`circuit`]: instruction lists, memory-circuit builders, SI1000 noise
//! - [`sim`]: tableau reference runs and bit-packed Pauli-frame sampling
//! - [`dem`]: detector-error-model extraction and the matching-graph projection
//! - [`decoders`]: exact MWPM (blossom) and an exhaustive most-likely-error oracle
//! - [`nn`]: a minimal dense-tensor core with reverse-mode differentiation
//! - [`aq`]: the streaming recurrent-attention decoder
//! - [`train`]: streamed training with masking, auxiliary losses and curricula
//! - [`metrics`]: logical-error-per-cycle statistics and Wilson intervals
//! - [`bench`]: throughput/latency harness with a simulated measurement clock

pub mod util;
pub mod layout;
pub mod circuit;
pub mod sim;
pub mod dem;
pub mod decoders;
pub mod metrics;
pub mod nn;
pub mod aq;
pub mod train;
pub mod bench;
pub mod io;
