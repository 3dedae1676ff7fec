//! Pulse-level compiler for trapped-ion quantum registers driven by
//! collective rotations, addressed Z rotations and global Mølmer–Sørensen
//! gates.

pub mod ansatz;
pub mod cli;
pub mod errcomp;
pub mod error;
pub mod gateset;
pub mod io;
pub mod linalg;
pub mod localcomp;
pub mod objective;
pub mod optimizer;
pub mod sampler;
pub mod targets;

pub use error::{Error, Result};
