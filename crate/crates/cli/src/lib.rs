//! Experiment harness for discrete Helmholtz Hodge decompositions with
//! summation-by-parts operators.

pub mod config;
pub mod experiments;
pub mod problems;
