//! Entanglement witnesses built from the operator Schmidt decomposition of
//! an observable, with gradient optimizers that lower the critical white-noise
//! visibility of a target state.

extern crate openblas_src;

pub mod basis;
pub mod bipartition;
pub mod bounds;
pub mod error;
pub mod linalg;
pub mod manifest;
pub mod operator;
pub mod optimizer;
pub mod osd;
pub mod reproduce;
pub mod schmidt_number;
pub mod states;
pub mod witness;
