//! Empty library crate; the interesting targets live under benches/.
