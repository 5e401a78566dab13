//! Alert persistence, cohort scoring runs, the HTTP API and the `triad`
//! command-line tool on top of `triad-core`.

pub mod api;
pub mod cli;
pub mod config;
pub mod error;
pub mod runner;
pub mod store;

pub use config::ServiceConfig;
pub use error::{Result, ServiceError};
