//! rwrange: a workbench for the range of simple random walk on Z^d.
//!
//! Simulates walks with reproducible counter-based RNG streams, computes
//! ranges and inner boundaries, losslessly compresses d=2 ranges through a
//! triadic box hierarchy, estimates range entropy from both sides, checks
//! hitting-probability estimates against the numerical potential kernel,
//! extracts near-uniform bits from range symmetries, and compares the
//! range against fractal percolation.

pub mod codec;
pub mod entropy;
pub mod error;
pub mod extractor;
pub mod geometry;
pub mod harness;
pub mod percolation;
pub mod potential;
pub mod rng;
pub mod stats;
pub mod walk;

pub use error::{Error, Result};
pub use geometry::{inner_boundary, range_of, RangeSet};
pub use rng::{derive_stream, RngStream};
pub use walk::{simulate_walk, LatticePoint, Trajectory};
