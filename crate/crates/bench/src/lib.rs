//! Criterion benchmarks for tprod-core; see `benches/`.
