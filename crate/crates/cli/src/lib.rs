//! Command implementations behind the `slit` binary.

pub mod commands;
pub mod server;

pub use server::{router, AppState};
