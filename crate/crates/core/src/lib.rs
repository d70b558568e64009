//! Deterministic network decomposition and its applications, executed on a
//! round-synchronous simulator with LOCAL/CONGEST accounting.

pub mod alt;
pub mod apps;
pub mod cluster;
pub mod engine;
pub mod error;
pub mod graph;
pub mod power;
pub mod ruling;
pub mod strong;
pub mod verify;
pub mod weak;

pub use error::{Error, Result};
pub use graph::Graph;
