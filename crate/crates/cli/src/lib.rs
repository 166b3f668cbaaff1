//! Command-line front end for the slab solver: configuration, field dumps,
//! sampling oracles, report assembly, and mode orchestration.

pub mod config;
pub mod dump;
pub mod oracle;
pub mod report;
pub mod run;

pub use config::{parse_config, RunConfig};
pub use run::{run, Mode, RunArgs};
