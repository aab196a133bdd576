//! Command-line interface and HTTP service over `rebuild-core`.

pub mod api;
pub mod cli;
pub mod jobs;
pub mod ops;
pub mod store;
