//! Generation and partitioning of lambda-precision unit disk graphs.
//!
//! Graphs are built on a grid over the unit square, adapted into
//! connected bridge-free network models, and partitioned into (soft)
//! domatic sets with an exact branch-and-bound solver.

pub mod adapt;
pub mod error;
pub mod experiment;
pub mod generator;
pub mod graph;
pub mod io;
pub mod lp;
pub mod metrics;
pub mod model;
pub mod seeds;
pub mod solver;

pub use error::{Error, Result};
pub use graph::{Edge, EdgeTag, GeometricGraph, NodeId, Point};
