//! Random motion trapped in finite and infinite wells over the interval
//! (-1, 1): Brownian (local Laplacian) and Cauchy (nonlocal fractional)
//! generators, their spectral problems, Feynman-Kac semigroup relaxation,
//! probability transport in the Doob picture, and closed-form approximants
//! for the infinite Cauchy well.
//!
//! Everything is discretized on a uniform symmetric lattice over [-a, a]
//! with the well boundary falling exactly on nodes; see [`grid`].

pub mod approximants;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod kernels;
pub mod numeric;
pub mod operators;
pub mod spectral;
pub mod transport;

pub use error::{Error, Result};
pub use grid::{Field, Grid, NormMode};
pub use operators::{Driver, Hamiltonian, Potential};
