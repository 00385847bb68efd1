//! Command-line front end for `dsmc-core`: problem files, random problem
//! generation, and the benchmark harness.

pub mod app;
pub mod bench;
pub mod format;
pub mod generate;
