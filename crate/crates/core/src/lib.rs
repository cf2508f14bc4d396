//! Population-to-population transformer for multi-objective evolutionary
//! optimization.
//!
//! The crate bundles the classical machinery (problems, non-dominated
//! sorting, variation operators, NSGA-II), a small reverse-mode autodiff
//! engine, the transformer that maps one population to the next, and the
//! pipeline that pre-trains it on recorded optimizer trajectories and keeps
//! updating it inside an NSGA-II run.

pub mod error;
pub mod evolve;
pub mod harness;
pub mod metrics;
pub mod moea;
pub mod mop;
pub mod nn;
pub mod pet;
pub mod problems;
pub mod rng;
pub mod selftest;

pub use error::{Error, Result};
