use crate::model::AllergenInfo;
use crate::text::fold;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashSet};
use std::path::Path;
use thiserror::Error;

/// Number of allergen classes a lexicon must define.
pub const CLASS_COUNT: usize = 17;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read lexicon {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed lexicon at `{path}`: {message}")]
    Malformed { path: String, message: String },
    #[error("lexicon must define exactly {CLASS_COUNT} classes, found {0}")]
    ClassCount(usize),
    #[error("duplicate allergen category `{0}`")]
    DuplicateCategory(String),
    #[error("duplicate allergen id {0}")]
    DuplicateId(u32),
    #[error("allergen class `{0}` has no members")]
    EmptyClass(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AllergenClass {
    pub allergen_id: u32,
    pub category: String,
    pub members: BTreeSet<String>,
    pub source_ref: String,
    #[serde(default)]
    pub kg_ref: String,
}

impl AllergenClass {
    pub fn info(&self) -> AllergenInfo {
        AllergenInfo {
            allergen_id: self.allergen_id,
            category: self.category.clone(),
            source_ref: self.source_ref.clone(),
            kg_ref: self.kg_ref.clone(),
        }
    }
}

/// The allergen classes, ordered by id. Category names and members are
/// case-folded on load.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllergenLexicon {
    classes: Vec<AllergenClass>,
}

impl AllergenLexicon {
    /// Builds a lexicon without enforcing the class count. Used for fixtures
    /// and for validating against partial lexicons.
    pub fn from_classes_unchecked(mut classes: Vec<AllergenClass>) -> Self {
        for c in &mut classes {
            c.category = fold(&c.category);
            c.members = c.members.iter().map(|m| fold(m)).collect();
        }
        classes.sort_by_key(|c| c.allergen_id);
        Self { classes }
    }

    pub fn from_classes(classes: Vec<AllergenClass>) -> Result<Self, LexiconError> {
        let lex = Self::from_classes_unchecked(classes);
        if lex.classes.len() != CLASS_COUNT {
            return Err(LexiconError::ClassCount(lex.classes.len()));
        }
        let mut categories = HashSet::new();
        let mut ids = HashSet::new();
        for c in &lex.classes {
            if !categories.insert(c.category.as_str()) {
                return Err(LexiconError::DuplicateCategory(c.category.clone()));
            }
            if !ids.insert(c.allergen_id) {
                return Err(LexiconError::DuplicateId(c.allergen_id));
            }
            if c.members.is_empty() {
                return Err(LexiconError::EmptyClass(c.category.clone()));
            }
        }
        Ok(lex)
    }

    pub fn from_json(json: &str) -> Result<Self, LexiconError> {
        let de = &mut serde_json::Deserializer::from_str(json);
        let classes: Vec<AllergenClass> =
            serde_path_to_error::deserialize(de).map_err(|e| LexiconError::Malformed {
                path: e.path().to_string(),
                message: e.inner().to_string(),
            })?;
        Self::from_classes(classes)
    }

    pub fn load(path: &Path) -> Result<Self, LexiconError> {
        let text = std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn classes(&self) -> &[AllergenClass] {
        &self.classes
    }

    pub fn class_by_category(&self, category: &str) -> Option<&AllergenClass> {
        let category = fold(category);
        self.classes.iter().find(|c| c.category == category)
    }

    pub fn contains_category(&self, category: &str) -> bool {
        self.class_by_category(category).is_some()
    }

    /// Exact, case-folded membership over all classes. Results are ordered by
    /// allergen id.
    pub fn lookup(&self, ingredient: &str) -> Vec<AllergenInfo> {
        let name = fold(ingredient);
        self.classes
            .iter()
            .filter(|c| c.members.contains(&name))
            .map(AllergenClass::info)
            .collect()
    }

    pub fn is_member(&self, ingredient: &str) -> bool {
        let name = fold(ingredient);
        self.classes.iter().any(|c| c.members.contains(&name))
    }
}
