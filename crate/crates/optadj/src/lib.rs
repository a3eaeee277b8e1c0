//! Covariate adjustment and efficiency analysis on causal DAGs.
//!
//! - [`graph`]: DAG representation, parsing, ancestry, d-separation.
//! - [`adjustment`]: valid, minimal and optimal time independent adjustment sets.
//! - [`timedep`]: time dependent adjustment sets and their comparison.
//! - [`efficiency`]: pruning, the global efficiency check and symbolic
//!   efficient influence functions.
//! - [`oracle`]: exact computations over finite discrete laws.

pub mod adjustment;
pub mod efficiency;
pub mod error;
pub mod graph;
pub mod oracle;
pub mod timedep;

pub use error::{Error, Result};
pub use graph::{Dag, Query, Vertex, VertexSet};
