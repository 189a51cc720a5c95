//! Experiment configuration, execution, and output for the subdiff CLI.

pub mod csvout;
pub mod experiments;
pub mod svg;
pub mod validate;
