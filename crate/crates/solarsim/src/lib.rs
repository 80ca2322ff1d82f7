//! File formats, reports, the HTTP session service and the command-line
//! front end around `solarsim-core`.

pub mod cli;
pub mod formats;
pub mod report;
pub mod scenario;
pub mod service;

pub use solarsim_core as core;
