//! Std companion to `lodblock-core`: a rayon-backed executor, N-Triples
//! ingest, file formats, run configuration and synthetic data.

pub mod config;
pub mod executor;
pub mod formats;
pub mod ingest;
pub mod run;
pub mod synth;

pub use executor::RayonExecutor;
pub use lodblock_core as core;
