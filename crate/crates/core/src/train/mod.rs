//! Decoder training on simulator-generated streams.
