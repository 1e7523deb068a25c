//! Benchmarks for the level model, the fits and the coupling calculation;
//! see `benches/model.rs`.
