//! Criterion benchmarks for the `ma-core` kernels; see `benches/`.
