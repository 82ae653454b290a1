//! Criterion benchmarks for `ermgap-core`; see `benches/`.
