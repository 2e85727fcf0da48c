//! Experiment runner behind the `rnndcor` binary.

pub mod config;
pub mod experiment;
pub mod svg;
