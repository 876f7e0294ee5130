//! Library side of the `qmix` command-line tool: spec parsing, report types
//! and the four commands.

pub mod analyze;
pub mod cli;
pub mod error;
pub mod mixing_cmd;
pub mod report;
pub mod reproduce;
pub mod scan;
pub mod spec;
