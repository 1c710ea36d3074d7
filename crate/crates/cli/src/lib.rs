//! File formats, report writers and subcommands behind the `opcalc` binary.

pub mod commands;
pub mod files;
pub mod report;
