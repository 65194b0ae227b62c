//! Experiment runner and verification suites behind the `dgd` binary.

pub mod config;
pub mod experiment;
pub mod recipes;
pub mod verify;
