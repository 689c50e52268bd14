//! The allergen lexicon and embedding-based inference for ingredients that
//! are not lexicon members.

mod embedding;
mod lexicon;

pub use embedding::{cosine, EmbeddingError, EmbeddingTable};
pub use lexicon::{AllergenClass, AllergenLexicon, LexiconError, CLASS_COUNT};

#[cfg(test)]
pub(crate) use lexicon::fixtures;

use crate::model::AllergenInfo;
use serde::Serialize;

/// Similarity a lexicon member must reach for its class to be inferred.
pub const DEFAULT_INFER_THRESHOLD: f64 = 0.6;

/// `source_ref` stamped on allergen tags that came from inference rather than
/// lexicon membership.
pub const INFERRED_SOURCE: &str = "inferred:embedding";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InferredAllergen {
    pub info: AllergenInfo,
    pub score: f64,
    /// Lexicon member that produced the best score.
    pub nearest_member: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Inference {
    /// Ordered by score descending, then allergen id ascending.
    pub matches: Vec<InferredAllergen>,
    pub note: Option<InferenceNote>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum InferenceNote {
    OutOfVocabulary,
}

/// Scores every class by its best-matching member and keeps the classes at
/// or above `threshold`.
pub fn infer(
    ingredient: &str,
    lexicon: &AllergenLexicon,
    embeddings: &EmbeddingTable,
    threshold: f64,
) -> Inference {
    let Some(query) = embeddings.phrase_vector(ingredient) else {
        return Inference {
            matches: Vec::new(),
            note: Some(InferenceNote::OutOfVocabulary),
        };
    };
    let mut matches = Vec::new();
    for class in lexicon.classes() {
        let mut best: Option<(f64, &str)> = None;
        // members iterate in sorted order, so equal scores keep the
        // lexicographically first member
        for member in &class.members {
            let Some(v) = embeddings.phrase_vector(member) else {
                continue;
            };
            let score = cosine(&query, &v);
            if best.is_none_or(|(b, _)| score > b) {
                best = Some((score, member));
            }
        }
        if let Some((score, member)) = best {
            if score >= threshold {
                let mut info = class.info();
                info.source_ref = INFERRED_SOURCE.to_owned();
                matches.push(InferredAllergen {
                    info,
                    score,
                    nearest_member: member.to_owned(),
                });
            }
        }
    }
    matches.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.info.allergen_id.cmp(&b.info.allergen_id))
    });
    Inference {
        matches,
        note: None,
    }
}

/// Attaches allergen tags to ingredient names: exact lexicon membership
/// first, embedding inference only for names the lexicon does not know.
#[derive(Debug, Clone, Copy)]
pub struct AllergenTagger<'a> {
    pub lexicon: &'a AllergenLexicon,
    pub embeddings: Option<&'a EmbeddingTable>,
    pub threshold: f64,
}

impl<'a> AllergenTagger<'a> {
    pub fn new(lexicon: &'a AllergenLexicon, embeddings: Option<&'a EmbeddingTable>) -> Self {
        Self {
            lexicon,
            embeddings,
            threshold: DEFAULT_INFER_THRESHOLD,
        }
    }

    pub fn tag(&self, ingredient: &str) -> Vec<AllergenInfo> {
        let exact = self.lexicon.lookup(ingredient);
        if !exact.is_empty() {
            return exact;
        }
        let Some(embeddings) = self.embeddings else {
            return Vec::new();
        };
        let mut tags: Vec<AllergenInfo> =
            infer(ingredient, self.lexicon, embeddings, self.threshold)
                .matches
                .into_iter()
                .map(|m| m.info)
                .collect();
        tags.sort_by_key(|a| a.allergen_id);
        tags
    }
}
