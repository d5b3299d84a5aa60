//! Experiment drivers and output formats behind the `pca` command-line
//! tool, exposed as a library so integration tests can call them directly.

pub mod experiments;
pub mod pgm;
pub mod report;
