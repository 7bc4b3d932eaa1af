//! Simulation and verification toolkit for continuum Gibbs point processes.
//!
//! The crate covers four layers:
//!
//! * [`geometry`]: windows, configurations and fixed-radius neighbor search;
//! * [`interactions`]: energies, conditional energies and Papangelou birth rates;
//! * [`dynamics`]: Poisson sampling, the spatial birth-death chain and a
//!   Metropolis birth-death sampler;
//! * [`observables`], [`estimators`], [`entropy_gap`] and [`empirical_fields`]:
//!   the test functions, Monte Carlo functionals and entropy lower bounds
//!   built on top of the samplers.

pub mod config;
pub mod dynamics;
pub mod empirical_fields;
pub mod entropy_gap;
pub mod estimators;
pub mod experiments;
pub mod geometry;
pub mod interactions;
pub mod observables;
pub mod output;
pub mod stats;

pub use dynamics::RngSeed;
pub use geometry::{Boundary, Point, PointConfiguration, Region, Window};
pub use interactions::{Energy, Interaction};
