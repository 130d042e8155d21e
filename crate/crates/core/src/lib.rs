//! Compiles maximum-independent-set instances on graphs of degree at most
//! six into three-dimensional neutral-atom registers.
//!
//! The pipeline lays the graph out on a cubic lattice, routes every edge as
//! a lattice path, replaces each path by an even chain of ancilla atoms, and
//! assigns detunings so that the classical ground state of the register
//! restricts to a maximum independent set of the input graph. An exact
//! ground-state oracle checks that claim on small instances.

// `!(a < b)` is used on purpose so that NaN fails the test.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bench;
pub mod embed;
pub mod error;
pub mod graph;
pub mod layout;
mod mis;
pub mod numfmt;
pub mod oracle;
pub mod register;
pub mod router;

pub use embed::{embed, EmbedConfig, EmbedStats, Embedding};
pub use error::{EmbedError, GraphError, LayoutError, OracleError, RegisterError, RouteError};
pub use graph::{Graph, VertexSet};
pub use layout::{ContinuousLayout, Layout3D};
pub use oracle::{certify_embedding, ground_states, GroundStateReport, OracleOptions};
pub use register::{AtomRegister, PhysicalParams};
pub use router::{AugmentedGraph, Chain};
