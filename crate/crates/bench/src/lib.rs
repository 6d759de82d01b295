//! Criterion benchmarks of the channel, scheduling and link kernels; see
//! `benches/kernels.rs`.
