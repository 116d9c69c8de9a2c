//! Problem-file parsing and the `solve` / `flow` commands behind the `opseries` binary.

pub mod commands;
pub mod problem;
