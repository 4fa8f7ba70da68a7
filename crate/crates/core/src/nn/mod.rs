//! Minimal dense-tensor numeric core with reverse-mode differentiation.
