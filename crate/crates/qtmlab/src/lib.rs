//! File formats, run manifests and the `qtmlab` command line.

pub mod cli;
pub mod formats;
pub mod manifest;
pub mod parallel;
