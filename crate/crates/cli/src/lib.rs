//! Command implementations and the session service behind the `spco` binary.

pub mod commands;
pub mod service;
