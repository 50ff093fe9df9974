//! Experiments, file formats and the acceptance battery on top of
//! `hypolab-core`.

pub mod cache;
pub mod config;
pub mod experiments;
pub mod output;
pub mod render;
pub mod suite;
