//! Exact calculus for radial m-subharmonic functions on the unit ball of `C^n`.
//!
//! A radial function is stored as a piecewise-linear convex profile in an order-`q` radial
//! coordinate. On such profiles Hessian measures are finite sums of point masses on spheres, so
//! energies, the rooftop envelope, the metric `d` and weak geodesics can be evaluated in closed
//! form. The [`oracle`] module recomputes the same quantities by finite differences and
//! quadrature on a radius grid.

pub mod constant;
pub mod coords;
pub mod dual;
pub mod energy;
pub mod error;
pub mod geodesic;
pub mod hte;
pub mod measure;
pub mod metric;
pub mod oracle;
pub mod profile;
pub mod random;
pub mod reparam;
pub mod report;
pub mod reproduce;
pub mod rooftop;
pub mod suite;

pub use constant::{hessian_constant, monge_ampere_constant};
pub use coords::{tau_of_radius, Coordinate, HessianParams};
pub use dual::{legendre, legendre_inverse, DualProfile};
pub use error::{Error, Result};
pub use measure::{dirichlet_solve, e1_energy, hessian_measure, integrate, mixed_measure, AtomicMeasure};
pub use profile::RadialProfile;
