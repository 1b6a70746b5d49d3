//! AMR-based multi-document summarization.
//!
//! The pipeline turns clusters of AMR-annotated sentences into summary
//! AMR graphs: sentence graphs are merged into a connected source graph,
//! a salient bounded subtree is extracted by exact structured-prediction
//! decoding, and the result is serialized back to PENMAN. Companion
//! modules provide training (perceptron and ramp losses), source sentence
//! selection (spectral clustering and reference-based metrics), and
//! evaluation (Smatch, node/edge P/R/F, ROUGE-style scores).

pub mod amr;
pub mod decoder;
pub mod text;
pub mod features;
pub mod metrics;
pub mod selector;
pub mod source_graph;
pub mod trainer;

pub use amr::{parse_penman, serialize_penman, AmrGraph, Concept, ConceptKind, Relation};
pub use source_graph::SourceGraph;
