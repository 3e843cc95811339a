//! Benchmark harness crate; the benchmarks live under `benches/`.
