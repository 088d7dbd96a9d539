//! Command-line front end and file formats for the motivic Steenrod algebra
//! computations in `wsteen-core`.

pub mod cache;
pub mod cli;
pub mod error;
pub mod expr;
pub mod preset_file;
pub mod report;
pub mod suites;

pub use error::CliError;
