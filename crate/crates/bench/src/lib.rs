//! Benchmarks for `wlsq-core` live in `benches/`.
