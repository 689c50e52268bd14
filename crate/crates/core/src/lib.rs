//! Recipes as plans: a structured recipe representation, plain-text ingest,
//! allergen tagging, multi-modal constrained retrieval, and an evaluation
//! harness for retrieval quality.

pub mod allergen;
pub mod corpus;
pub mod eval;
pub mod ingest;
pub mod model;
pub mod plan;
pub mod query;
pub mod text;
pub mod units;
pub mod validate;

pub use corpus::{load_corpus, Corpus, CorpusError};
pub use model::{parse_recipe, to_canonical_json, Recipe};
pub use validate::{validate_recipe, ValidationContext, Violation, ViolationCode};
