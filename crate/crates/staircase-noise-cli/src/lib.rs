//! Library side of the `staircase-noise` CLI: argument definitions, command
//! dispatch, and output rendering. The binary in `main.rs` is a thin shim so
//! integration tests can exercise everything below the argument parser.

pub mod cli;
pub mod commands;
pub mod output;
