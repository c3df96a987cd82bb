//! Communication-metered simulation of the coordinator model for graph
//! spanner protocols, with a turnstile-streaming spanner, extremal instance
//! generators and brute-force verification oracles.

pub mod analysis;
pub mod error;
pub mod generators;
pub mod graph;
pub mod protocols;
pub mod simnet;
pub mod streaming;

pub use error::{Error, Result};
pub use graph::{Edge, Graph, Vertex};
