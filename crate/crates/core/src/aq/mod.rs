//! Streaming recurrent-attention decoder.
