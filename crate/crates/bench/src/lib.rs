//! Benchmarks for the spectral kernels; see `benches/`.
