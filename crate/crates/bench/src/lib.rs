//! Benchmark-only crate; see `benches/solvers.rs` for the measurements.
