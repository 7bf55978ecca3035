//! Annotation of one-minute broadcast clips with multimodal models,
//! evaluation against gold labels, and audience analytics over the
//! resulting minute-level annotations.

pub mod agreement;
pub mod audience;
pub mod dataset;
pub mod eval;
pub mod exec;
pub mod frames;
pub mod fsutil;
pub mod gateway;
pub mod names;
pub mod parser;
pub mod prompt;
pub mod speech;
pub mod taxonomy;

pub use dataset::{ClipRecord, EpisodeMetadata};
pub use exec::Execution;
pub use taxonomy::{Annotation, Dimension, Taxonomy, TaxonomySet};
