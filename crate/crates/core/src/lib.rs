//! Constructive ReLU-network classification theory, made executable.
//!
//! * [`net`]: explicit sparse ReLU networks, accounting and the composition
//!   calculus (stacking, concatenation, masking, padding, output clamping).
//! * [`approx`]: builders for square/product approximators, polynomial
//!   approximators, horizon indicators, piecewise-constant classifiers and
//!   plug-in threshold networks.
//! * [`theory`]: covering-entropy bound, convergence-rate exponents and
//!   architecture schedules.
//! * [`synth`]: synthetic tasks with oracle `η`, Bayes classifier and
//!   boundary distance, plus Monte Carlo risk functionals.
//! * [`learn`]: hinge/logistic losses, budget-constrained ERM and
//!   data-split model selection.
//! * [`harness`]: configuration, study commands and CSV/JSON emission.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod data;
pub mod error;
pub mod harness;
pub mod learn;
pub mod net;
pub mod poly;
pub mod synth;
pub mod theory;

pub use error::{Error, Result};
pub use net::{ArchBudget, NetStats, ReluNetwork};
pub use poly::Polynomial;
