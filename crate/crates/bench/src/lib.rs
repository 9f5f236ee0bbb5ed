//! Command-line driver for the `hyperfem` kernels: the stability sweep, the
//! operator throughput benchmark, the pressure-loaded cube solve and the
//! byte ledger, configured from one TOML file.

pub mod cli;
pub mod config;
pub mod report;
pub mod throughput;

pub use config::{ConfigError, RunConfig};
pub use throughput::{run_throughput, BenchRecord};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
struct Guide;
