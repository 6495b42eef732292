//! The `citnet` pipeline: subcommands that pass native graph files between
//! stages, and the HTTP service behind the explorer.

pub mod commands;
pub mod files;
pub mod server;
