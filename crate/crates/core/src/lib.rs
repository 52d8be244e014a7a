//! GraphRNN: autoregressive generation of undirected graphs as sequences of
//! BFS-ordered adjacency rows, plus datasets, baselines and MMD evaluation.

pub mod baselines;
pub mod checkpoint;
pub mod config;
pub mod datasets;
pub mod error;
pub mod eval;
pub mod graph;
pub mod io;
pub mod model;
pub mod nn;
pub mod par;
pub mod pipeline;
pub mod sequence;
pub mod train;

pub use error::{Error, Result};
pub use graph::{bfs_order, verify_frontier_property, verify_parent_frontier_property, BfsResult, Graph, NodeOrdering};
pub use model::{GraphRnn, ModelConfig, SampleTrace, StopReason, Variant};
pub use sequence::{decode, encode, estimate_m, Encoded, GraphSequence};
