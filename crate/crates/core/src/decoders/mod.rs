//! Reference decoders: exact uncorrelated MWPM and an exhaustive
//! most-likely-error oracle.

pub mod blossom;

