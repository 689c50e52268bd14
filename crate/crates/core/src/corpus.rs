//! Loading a directory of recipe documents into an immutable, indexed corpus.
//!
//! Layout: `recipes/*.json` (or `*.json` directly in the root when there is
//! no `recipes/` directory), media paths relative to the root, and an
//! optional `lexicon/allergens.json` that allergen tags are checked against.

use crate::allergen::{AllergenLexicon, LexiconError};
use crate::model::{parse_recipe, Recipe};
use crate::validate::{validate_recipe, ValidationContext, Violation};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const LEXICON_FILE: &str = "lexicon/allergens.json";
pub const EMBEDDINGS_FILE: &str = "lexicon/embeddings.txt";
pub const VERBS_FILE: &str = "lexicon/verbs.txt";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("corpus path {0} is not a directory")]
    NotADirectory(PathBuf),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error("{} problem(s) in corpus:\n{}", .0.len(), ProblemList(.0))]
    Invalid(Vec<Problem>),
}

/// One reason a corpus failed to load.
#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Unreadable {
        file: PathBuf,
        message: String,
    },
    Malformed {
        file: PathBuf,
        field_path: String,
        message: String,
    },
    DuplicateId {
        id: String,
        files: Vec<PathBuf>,
    },
    Violation {
        file: PathBuf,
        recipe_id: String,
        violation: Violation,
    },
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Problem::Unreadable { file, message } => write!(f, "{}: {message}", file.display()),
            Problem::Malformed {
                file,
                field_path,
                message,
            } => {
                write!(
                    f,
                    "{}: malformed at `{field_path}`: {message}",
                    file.display()
                )
            }
            Problem::DuplicateId { id, files } => {
                let names: Vec<_> = files.iter().map(|p| p.display().to_string()).collect();
                write!(f, "duplicate recipe id `{id}` in {}", names.join(", "))
            }
            Problem::Violation {
                file,
                recipe_id,
                violation,
            } => {
                write!(f, "{} ({recipe_id}): {violation}", file.display())
            }
        }
    }
}

struct ProblemList<'a>(&'a [Problem]);

impl fmt::Display for ProblemList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in self.0 {
            writeln!(f, "  {p}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Corpus {
    root: Option<PathBuf>,
    lexicon: Option<AllergenLexicon>,
    recipes: Vec<Recipe>,
    by_id: BTreeMap<String, usize>,
    by_ingredient: BTreeMap<String, BTreeSet<String>>,
    by_allergen: BTreeMap<String, BTreeSet<String>>,
    by_step_count: BTreeMap<usize, BTreeSet<String>>,
}

impl Corpus {
    pub fn empty() -> Self {
        Self::index(Vec::new(), None, None)
    }

    /// Builds a corpus from already-parsed recipes. Ids must be unique; no
    /// other validation is performed.
    pub fn from_recipes(
        recipes: Vec<Recipe>,
        root: Option<PathBuf>,
        lexicon: Option<AllergenLexicon>,
    ) -> Result<Self, CorpusError> {
        let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
        for r in &recipes {
            *seen.entry(r.id.as_str()).or_default() += 1;
        }
        let dups: Vec<Problem> = seen
            .into_iter()
            .filter(|(_, n)| *n > 1)
            .map(|(id, _)| Problem::DuplicateId {
                id: id.to_owned(),
                files: Vec::new(),
            })
            .collect();
        if !dups.is_empty() {
            return Err(CorpusError::Invalid(dups));
        }
        Ok(Self::index(recipes, root, lexicon))
    }

    fn index(
        mut recipes: Vec<Recipe>,
        root: Option<PathBuf>,
        lexicon: Option<AllergenLexicon>,
    ) -> Self {
        recipes.sort_by(|a, b| a.id.cmp(&b.id));
        let mut by_id = BTreeMap::new();
        let mut by_ingredient: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let mut by_allergen: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let mut by_step_count: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
        for (i, r) in recipes.iter().enumerate() {
            by_id.insert(r.id.clone(), i);
            for ing in &r.ingredients {
                by_ingredient
                    .entry(ing.name.clone())
                    .or_default()
                    .insert(r.id.clone());
            }
            for cat in r.allergen_categories() {
                by_allergen
                    .entry(cat.to_owned())
                    .or_default()
                    .insert(r.id.clone());
            }
            by_step_count
                .entry(r.task_count())
                .or_default()
                .insert(r.id.clone());
        }
        Self {
            root,
            lexicon,
            recipes,
            by_id,
            by_ingredient,
            by_allergen,
            by_step_count,
        }
    }

    pub fn len(&self) -> usize {
        self.recipes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.recipes.is_empty()
    }

    /// Recipes sorted by id.
    pub fn recipes(&self) -> &[Recipe] {
        &self.recipes
    }

    pub fn get(&self, id: &str) -> Option<&Recipe> {
        self.by_id.get(id).map(|&i| &self.recipes[i])
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.recipes.iter().map(|r| r.id.as_str())
    }

    pub fn root(&self) -> Option<&Path> {
        self.root.as_deref()
    }

    pub fn lexicon(&self) -> Option<&AllergenLexicon> {
        self.lexicon.as_ref()
    }

    /// Resolves a media path stored in a recipe against the corpus root.
    pub fn media_path(&self, media: &str) -> Option<PathBuf> {
        self.root.as_ref().map(|r| r.join(media))
    }

    pub fn with_ingredient(&self, name: &str) -> Option<&BTreeSet<String>> {
        self.by_ingredient.get(name)
    }

    pub fn with_allergen(&self, category: &str) -> Option<&BTreeSet<String>> {
        self.by_allergen.get(category)
    }

    pub fn ingredient_names(&self) -> impl Iterator<Item = &str> {
        self.by_ingredient.keys().map(String::as_str)
    }

    pub fn allergen_categories(&self) -> impl Iterator<Item = &str> {
        self.by_allergen.keys().map(String::as_str)
    }

    pub fn step_counts(&self) -> &BTreeMap<usize, BTreeSet<String>> {
        &self.by_step_count
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.to_owned(),
        source,
    }
}

/// Lists `*.json` files of a directory, sorted by file name.
pub fn json_files(dir: &Path) -> Result<Vec<PathBuf>, CorpusError> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io_err(dir))? {
        let entry = entry.map_err(io_err(dir))?;
        let path = entry.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "json") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Reads, parses and validates every recipe under `path`. All problems found
/// are reported together.
pub fn load_corpus(path: &Path) -> Result<Corpus, CorpusError> {
    if !path.is_dir() {
        return Err(CorpusError::NotADirectory(path.to_owned()));
    }
    let lexicon_path = path.join(LEXICON_FILE);
    let lexicon = if lexicon_path.exists() {
        Some(AllergenLexicon::load(&lexicon_path)?)
    } else {
        None
    };
    let recipe_dir = path.join("recipes");
    let recipe_dir = if recipe_dir.is_dir() {
        recipe_dir
    } else {
        path.to_owned()
    };

    let mut problems = Vec::new();
    let mut parsed: Vec<(PathBuf, Recipe)> = Vec::new();
    for file in json_files(&recipe_dir)? {
        let text = match std::fs::read_to_string(&file) {
            Ok(t) => t,
            Err(e) => {
                problems.push(Problem::Unreadable {
                    file,
                    message: e.to_string(),
                });
                continue;
            }
        };
        match parse_recipe(&text) {
            Ok(r) => parsed.push((file, r)),
            Err(e) => problems.push(Problem::Malformed {
                file,
                field_path: e.field_path,
                message: e.message,
            }),
        }
    }

    let mut files_by_id: BTreeMap<&str, Vec<PathBuf>> = BTreeMap::new();
    for (file, r) in &parsed {
        files_by_id
            .entry(r.id.as_str())
            .or_default()
            .push(file.clone());
    }
    for (id, files) in files_by_id {
        if files.len() > 1 {
            problems.push(Problem::DuplicateId {
                id: id.to_owned(),
                files,
            });
        }
    }

    let ctx = ValidationContext {
        lexicon: lexicon.as_ref(),
        media_root: Some(path),
    };
    for (file, r) in &parsed {
        for violation in validate_recipe(r, &ctx) {
            problems.push(Problem::Violation {
                file: file.clone(),
                recipe_id: r.id.clone(),
                violation,
            });
        }
    }

    if !problems.is_empty() {
        return Err(CorpusError::Invalid(problems));
    }
    let recipes = parsed.into_iter().map(|(_, r)| r).collect();
    Ok(Corpus::index(recipes, Some(path.to_owned()), lexicon))
}
