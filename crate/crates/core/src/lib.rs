//! Simulation core for network-based bit-flip correction on 2D lattices.
//!
//! The crate samples edge errors on square or triangular lattices, decodes
//! the resulting plaquette syndromes with minimum-weight perfect matching,
//! scores how many stations end up with a consistent correction and turns
//! the measured fidelities into thresholds and long-distance resource
//! estimates.

pub mod decoder;
pub mod encoder;
pub mod lattice;
pub mod montecarlo;
pub mod noise;
pub mod parallel;
pub mod percolation;
pub mod stream;

pub use lattice::{build_lattice, EdgeSet, Lattice, LatticeKind, LatticeSpec};
