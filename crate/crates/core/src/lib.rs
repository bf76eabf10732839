//! Sharpe-ratio optimization for finite Markov decision processes.
//!
//! The solver is trilevel. The outer loop is a Dinkelbach iteration on the
//! ratio `E{Q²}/ζ`; each linearized problem `max E{Q²} − κζ` is solved
//! globally by the middle loop in [`m2v`], which covers the range of
//! attainable means with domination intervals of auxiliary standard MDPs;
//! those are solved by policy iteration in [`standard_pi`]. [`srpi`] wires the
//! levels together as SRPI and SRPI+, and [`oracle`] enumerates deterministic
//! policies for verification at small sizes.

pub mod bench;
pub mod dinkelbach;
pub mod error;
pub mod eval;
pub mod generator;
pub mod instances;
pub mod intervals;
mod linalg;
pub mod m2v;
pub mod mdp;
pub mod oracle;
pub mod report;
pub mod srpi;
pub mod standard_pi;

pub use error::{Error, Result};
pub use eval::{PolicyMetrics, Setting};
pub use mdp::{MdpSpec, Policy, ValidatedMdp};
pub use srpi::{Algorithm, SolveReport, SolverConfig};
