//! Simulation and verification toolkit for branching jump-diffusions.
//!
//! Each cell of a population carries a parasite load that evolves as a
//! jump-diffusion. Cells divide and die at load-dependent rates, and at
//! division the load is shared between the two daughters according to a
//! random fraction drawn from a kernel symmetric about one half.
//!
//! The crate is organised by layer:
//!
//! - [`model`]: rate functions, jump measures, partition kernels and the
//!   structured config format.
//! - [`dynamics`]: Euler–Maruyama integration of a single load trajectory.
//! - [`population`]: the branching particle system and Monte Carlo
//!   estimators of population functionals.
//! - [`auxiliary`]: spinal processes (uniform, weighted, time-inhomogeneous)
//!   and the coupled comparison processes.
//! - [`analysis`]: closed forms, quadratures and condition checkers.
//! - [`harness`]: experiment registry, reporting and the CLI commands.
//!
//! Runnable walkthroughs live in the crate's `examples/` directory.

pub mod analysis;
pub mod auxiliary;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod model;
pub mod population;
pub mod quadrature;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
