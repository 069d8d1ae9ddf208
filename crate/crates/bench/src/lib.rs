//! Criterion benchmarks of type enumeration and encoding; see `benches/`.
