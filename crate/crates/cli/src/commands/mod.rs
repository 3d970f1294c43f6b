//! Implementations of the CLI subcommands.

pub mod analytic;
pub mod device;
pub mod fit;
pub mod simulate;
