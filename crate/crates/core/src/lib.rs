//! Summarization of W3C PROV provenance graphs by provenance types.
//!
//! A provenance type describes what led to a node: a length-k path of
//! relation labels ending in a base type, such as `used(wat(Agent))`. Nodes
//! whose type sets agree at every level up to k collapse into one summary
//! type, edges aggregate with counts, and the result is a weighted summary
//! graph that acts as a schema for the instance.
//!
//! The crate provides:
//!
//! - [`model`]: the PROV document model and a PROV-JSON subset parser;
//! - [`ptype`]: interned provenance-type terms and per-node signatures;
//! - [`summary`]: node/edge aggregation into weighted summaries;
//! - [`conformance`]: simulation-based conformance of a graph to a summary;
//! - [`metrics`]: MFD, type-count plateaus, compression ratios, thin-edge
//!   outliers, and synthetic generators;
//! - [`dot`]: Graphviz export with weight-scaled nodes and edges.
//!
//! All computations are single-threaded, pure functions of their inputs;
//! serialized outputs are byte-identical across runs.

pub mod conformance;
pub mod dot;
pub mod metrics;
pub mod model;
pub mod ptype;
pub mod summary;

pub use conformance::{
    ConformanceMode, ConformanceVerdict, check_conformance, greatest_simulation,
};
pub use model::{
    CoreKind, NodeId, ParseError, ProvDocument, ProvEdge, ProvNode, RelationLabel,
    infer_core_types,
};
pub use ptype::{Direction, Signature, SignatureTable, TypeLimits, compute_signatures};
pub use summary::{Summary, SummaryEdge, SummaryType, summaries_equivalent, summarize};
