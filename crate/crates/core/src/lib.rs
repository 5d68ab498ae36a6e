pub mod cli;
pub mod curve;
pub mod data_io;
pub mod error;
pub mod harness;
pub mod imputers;
pub mod masking;
pub mod model;
pub mod ols;
pub mod rng;
pub mod stats;
pub mod synth;
