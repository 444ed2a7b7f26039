//! Critical branching Brownian motion among mild Poissonian obstacles.
//!
//! The crate has four layers:
//! - [`obstacles`]: lazily sampled, bit-reproducible Poisson fields of
//!   closed balls with O(1) membership queries;
//! - [`branching`]: event-driven particle simulation with killing by
//!   obstacle occupation time, plus exact moment oracles;
//! - [`pde`]: deterministic numerical oracles (1-d exit probability,
//!   blow-up boundary value problem, semilinear semigroup);
//! - [`experiments`]: harnesses that confront the two and emit CSV/JSON.

pub mod branching;
pub mod config;
pub mod error;
pub mod experiments;
pub mod obstacles;
pub mod offspring;
pub mod pde;
pub mod quad;
pub mod rng;
pub mod testfn;

pub use error::{Error, Result};
