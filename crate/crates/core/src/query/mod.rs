//! Constrained retrieval over a corpus.
//!
//! Process constraints ([`QueryKind::LengthAtMost`], [`QueryKind::TimeAtMost`])
//! are exact filters. Outcome constraints compare text by normalized
//! Levenshtein similarity and images by descriptor distance; both scores live
//! in `[0, 1]` and share one threshold.

mod execute;
pub mod image;
mod levenshtein;
mod text;
mod types;

pub use execute::{Match, RetrievalResult, Retriever, SkippedMedia, StepUnit};
pub use image::{
    image_descriptor, image_similarity, Descriptor, DescriptorProvider, GridDescriptor, ImageError,
};
pub use levenshtein::{edit_distance, levenshtein_similarity};
pub use text::{parse_text_query, TextQueryError, SUPPORTED_TEMPLATES};
pub use types::{ImageBytes, Param, Query, QueryError, QueryKind, DEFAULT_THRESHOLD};
