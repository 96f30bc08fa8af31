//! Benchmarks for the selection pipeline live under `benches/`.
