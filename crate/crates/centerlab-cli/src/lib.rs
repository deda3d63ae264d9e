//! Library half of the `centerlab` binary: subcommand drivers and the report shape.

pub mod commands;
pub mod report;
