//! Retrieval over the original recipe text, standing in for a system that
//! never built the structured representation.

use super::generate::EvalQuery;
use super::EvalError;
use crate::corpus::json_files;
use crate::ingest::RawRecipe;
use crate::query::QueryKind;
use crate::text::tokens;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

/// Query families a retrieval system may or may not support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum QueryClass {
    Allergen,
    Ingredient,
    Text,
    Image,
    Length,
    Name,
}

impl QueryClass {
    pub const ALL: [QueryClass; 6] = [
        QueryClass::Allergen,
        QueryClass::Ingredient,
        QueryClass::Text,
        QueryClass::Image,
        QueryClass::Length,
        QueryClass::Name,
    ];

    /// Class of a structured query kind. Free-text utterances form the
    /// `Text` class and have no kind of their own.
    pub fn of(kind: QueryKind) -> QueryClass {
        match kind {
            QueryKind::AllergenExcludeExplicit => QueryClass::Allergen,
            QueryKind::IngredientExclude | QueryKind::IngredientInclude => QueryClass::Ingredient,
            QueryKind::ImageIngredient | QueryKind::ImageDish => QueryClass::Image,
            QueryKind::LengthAtMost | QueryKind::TimeAtMost => QueryClass::Length,
            QueryKind::NameMatch | QueryKind::CuisineMatch => QueryClass::Name,
        }
    }
}

impl fmt::Display for QueryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

const STOPWORDS: &[&str] = &[
    "a", "an", "the", "me", "give", "recipe", "recipes", "with", "for", "and", "is", "of", "to",
    "i", "want", "find", "show", "some", "any", "please", "dish", "dishes",
];

/// Original texts keyed by recipe id, each reduced to its token sequence.
#[derive(Debug, Clone, Default)]
pub struct BaselineRetriever {
    texts: BTreeMap<String, Vec<String>>,
}

impl BaselineRetriever {
    /// Text is the title, ingredient lines, steps and cuisine (when the
    /// source states one), case-folded and tokenized.
    pub fn new(raw: &BTreeMap<String, RawRecipe>) -> Self {
        let texts = raw
            .iter()
            .map(|(id, r)| {
                let mut text = vec![r.title.clone()];
                text.extend(r.ingredients.iter().cloned());
                text.extend(r.steps.iter().cloned());
                text.extend(r.cuisine.iter().cloned());
                (id.clone(), tokens(&text.join("\n")))
            })
            .collect();
        Self { texts }
    }

    /// Loads every `<recipe-id>.json` raw file in `dir`.
    pub fn load(dir: &Path) -> Result<Self, EvalError> {
        Ok(Self::new(&load_raw_corpus(dir)?))
    }

    pub fn len(&self) -> usize {
        self.texts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.texts.is_empty()
    }

    /// Plain text search can match words, not structure: allergen classes,
    /// step counts, times and images are out of its reach.
    pub fn supports(class: QueryClass) -> bool {
        matches!(
            class,
            QueryClass::Ingredient | QueryClass::Text | QueryClass::Name
        )
    }

    fn containing(&self, phrase: &[String]) -> BTreeSet<String> {
        self.texts
            .iter()
            .filter(|(_, toks)| contains_phrase(toks, phrase))
            .map(|(id, _)| id.clone())
            .collect()
    }

    /// Unsupported kinds retrieve nothing.
    pub fn retrieve(&self, query: &EvalQuery) -> BTreeSet<String> {
        if !Self::supports(QueryClass::of(query.kind)) {
            return BTreeSet::new();
        }
        let phrase = tokens(query.text().unwrap_or_default());
        if phrase.is_empty() {
            return BTreeSet::new();
        }
        let hits = self.containing(&phrase);
        match query.kind {
            QueryKind::IngredientExclude => self
                .texts
                .keys()
                .filter(|id| !hits.contains(*id))
                .cloned()
                .collect(),
            _ => hits,
        }
    }

    /// Keyword search for a typed utterance: recipes containing every
    /// non-stopword token.
    pub fn retrieve_text(&self, utterance: &str) -> BTreeSet<String> {
        let keywords: Vec<String> = tokens(utterance)
            .into_iter()
            .filter(|t| !STOPWORDS.contains(&t.as_str()))
            .collect();
        if keywords.is_empty() {
            return BTreeSet::new();
        }
        self.texts
            .iter()
            .filter(|(_, toks)| keywords.iter().all(|k| toks.contains(k)))
            .map(|(id, _)| id.clone())
            .collect()
    }
}

fn contains_phrase(haystack: &[String], phrase: &[String]) -> bool {
    !phrase.is_empty() && haystack.windows(phrase.len()).any(|w| w == phrase)
}

/// Raw recipes keyed by file stem, which must be the recipe id.
pub fn load_raw_corpus(dir: &Path) -> Result<BTreeMap<String, RawRecipe>, EvalError> {
    let files = json_files(dir).map_err(|e| EvalError::Raw(e.to_string()))?;
    let mut out = BTreeMap::new();
    for file in files {
        let id = file
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let raw = RawRecipe::load(&file)
            .map_err(|e| EvalError::Raw(format!("{}: {e}", file.display())))?;
        out.insert(id, raw);
    }
    Ok(out)
}
