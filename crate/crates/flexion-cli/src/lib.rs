//! Library surface of the `flexion` command-line tool, split out so the
//! subcommand plumbing is testable without spawning processes.

pub mod config;
pub mod output;
pub mod run;
