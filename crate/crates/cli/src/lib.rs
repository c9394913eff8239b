//! Library surface of the command-line front end: scenario parsing,
//! subcommand implementations, result rendering, and the verification
//! suite. The binary in `main.rs` is a thin argument-parsing shell over
//! these modules so integration tests can drive them directly.

pub mod commands;
pub mod output;
pub mod scenario;
pub mod verify;
