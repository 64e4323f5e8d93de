//! Crown decompositions, balanced expansions and kernelization algorithms
//! for vertex integrity and component order connectivity.

pub mod bcd;
pub mod dbe;
pub mod graph;
pub mod kernels;
pub mod maxflow;
pub mod oracle;

pub use graph::{ComponentList, VertexId, VertexSet, Weight, WeightedGraph};
