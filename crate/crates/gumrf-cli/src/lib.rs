//! Reusable pieces of the `gumrf` binary: file formats, flat key=value
//! configs, and the benchmark harness. Kept in a library so integration
//! tests exercise the same code paths as the CLI.

pub mod bench;
pub mod config;
pub mod fileio;
