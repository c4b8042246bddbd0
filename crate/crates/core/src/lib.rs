//! Exact separation machinery for min-knapsack.
//!
//! A min-knapsack instance asks for a cheapest 0/1 selection whose profit
//! reaches a threshold. This crate keeps every number as an exact rational
//! and provides:
//!
//! * [`model`]: the normalized instance, points, inequalities and the closed-form
//!   constructions (pitch, knapsack-cover and canonical pitch-2 inequalities,
//!   pitch reduction, the max-knapsack reduction);
//! * [`knapdp`]: an exact pseudo-polynomial DP and an FPTAS;
//! * [`ratlp`]: exact bounded-variable simplex solvers (dual with warm starts,
//!   and a plain primal one);
//! * [`sep`]: separation oracles for pitch-1/pitch-2, knapsack-cover and
//!   fixed-support inequalities, enumerators and an implication checker;
//! * [`cutloop`]: a cutting-plane driver and the knapsack-cover rounding;
//! * [`gaplab`]: instance generators, the instance file format, experiments
//!   and the command line.

pub mod cutloop;
pub mod error;
pub mod gaplab;
pub mod knapdp;
pub mod model;
pub mod ratlp;
pub mod sep;

pub use error::{Error, Result};
pub use model::{Family, Inequality, Instance, Point, Rational, RawInstance, RawItem};
