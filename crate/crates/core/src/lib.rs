//! Coined discrete-time quantum walks on port-labelled lattices, and the
//! marked-vertex search experiments built on top of them.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`] builds periodic lattices as port graphs and applies site
//!   percolation.
//! * [`coin`] constructs the per-vertex coin unitaries.
//! * [`engine`] holds the walk state and applies coin + shift steps.
//! * [`search`] runs the search protocol and detects the first peak.
//! * [`ensemble`] averages searches over percolated lattices.
//! * [`analysis`] fits scaling laws to experiment tables.

pub mod analysis;
pub mod coin;
pub mod engine;
pub mod ensemble;
mod error;
pub mod graph;
pub mod search;

pub use error::{Error, Result};

pub use num_complex::Complex64 as C64;
