//! Library surface of the experiment runner: config parsing/validation and
//! result serialization. The binary in `main.rs` is a thin dispatcher over
//! these plus the `adiatherm` protocol operations.

pub mod config;
pub mod output;
