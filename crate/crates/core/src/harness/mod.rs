//! Experiment configuration, Monte Carlo engine and CSV output.

pub mod config;
pub mod engine;
pub mod report;

pub use config::{Coding, ExperimentConfig, Modem, Scheme};
pub use engine::{derive_seed, Experiment, ResultRow, SYMBOL_ENERGY};
