use crate::corpus::Corpus;
use crate::query::{Query, QueryKind, DEFAULT_THRESHOLD};
use crate::text::fold;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use super::EvalError;

pub const DEFAULT_QUERY_COUNT: usize = 50;

/// A query value drawn from the corpus.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QueryValue {
    Number(u64),
    Text(String),
}

impl fmt::Display for QueryValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QueryValue::Number(n) => write!(f, "{n}"),
            QueryValue::Text(t) => f.write_str(t),
        }
    }
}

/// A generated evaluation query. Image kinds carry the media path of a
/// corpus asset rather than the bytes, so suites stay printable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EvalQuery {
    pub id: String,
    pub kind: QueryKind,
    pub value: QueryValue,
}

impl EvalQuery {
    pub fn new(id: impl Into<String>, kind: QueryKind, value: QueryValue) -> Self {
        Self {
            id: id.into(),
            kind,
            value,
        }
    }

    pub fn text(&self) -> Option<&str> {
        match &self.value {
            QueryValue::Text(t) => Some(t),
            QueryValue::Number(_) => None,
        }
    }

    pub fn number(&self) -> Option<u64> {
        match self.value {
            QueryValue::Number(n) => Some(n),
            QueryValue::Text(_) => None,
        }
    }

    /// Executable form; image assets are read from the corpus media root.
    pub fn to_query(&self, corpus: &Corpus) -> Result<Query, EvalError> {
        use crate::query::Param;
        let mismatch = || EvalError::Value {
            id: self.id.clone(),
            message: format!("{} does not take {:?}", self.kind, self.value),
        };
        let q = match self.kind.param() {
            Param::Numeric => Query::numeric(self.kind, self.number().ok_or_else(mismatch)?),
            Param::Text => Query::text(self.kind, self.text().ok_or_else(mismatch)?),
            Param::Image => {
                let media = self.text().ok_or_else(mismatch)?;
                let path = corpus.media_path(media).ok_or_else(|| EvalError::Value {
                    id: self.id.clone(),
                    message: "corpus has no media root".into(),
                })?;
                let bytes = std::fs::read(&path).map_err(|e| EvalError::Value {
                    id: self.id.clone(),
                    message: format!("cannot read {}: {e}", path.display()),
                })?;
                Query::image(self.kind, bytes)
            }
        };
        Ok(q.with_threshold(DEFAULT_THRESHOLD))
    }
}

impl fmt::Display for EvalQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}({})", self.id, self.kind, self.value)
    }
}

/// Values each query kind can take on a corpus.
pub fn value_pools(corpus: &Corpus) -> BTreeMap<QueryKind, Vec<QueryValue>> {
    let recipes = corpus.recipes();
    let text =
        |items: BTreeSet<String>| items.into_iter().map(QueryValue::Text).collect::<Vec<_>>();
    let mut pools = BTreeMap::new();

    let tasks: Vec<u64> = recipes.iter().map(|r| r.task_count() as u64).collect();
    if let (Some(lo), Some(hi)) = (tasks.iter().min(), tasks.iter().max()) {
        pools.insert(
            QueryKind::LengthAtMost,
            (*lo..=*hi).map(QueryValue::Number).collect(),
        );
    }
    let times: BTreeSet<u64> = recipes.iter().map(|r| r.total_time()).collect();
    pools.insert(
        QueryKind::TimeAtMost,
        times.into_iter().map(QueryValue::Number).collect(),
    );
    let categories = corpus.allergen_categories().map(str::to_owned).collect();
    pools.insert(QueryKind::AllergenExcludeExplicit, text(categories));
    let ingredients: BTreeSet<String> = corpus.ingredient_names().map(str::to_owned).collect();
    pools.insert(QueryKind::IngredientExclude, text(ingredients.clone()));
    pools.insert(QueryKind::IngredientInclude, text(ingredients));
    pools.insert(
        QueryKind::NameMatch,
        text(recipes.iter().map(|r| fold(&r.name)).collect()),
    );
    pools.insert(
        QueryKind::CuisineMatch,
        text(recipes.iter().filter_map(|r| r.cuisine.clone()).collect()),
    );
    pools.insert(
        QueryKind::ImageIngredient,
        text(
            recipes
                .iter()
                .flat_map(|r| r.ingredient_images())
                .map(str::to_owned)
                .collect(),
        ),
    );
    pools.insert(
        QueryKind::ImageDish,
        text(
            recipes
                .iter()
                .flat_map(|r| r.dish_images().iter().cloned())
                .collect(),
        ),
    );
    pools.retain(|_, values| !values.is_empty());
    pools
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedQueries {
    pub seed: u64,
    pub queries: Vec<EvalQuery>,
    /// Set when the pools ran out before the requested count.
    pub warning: Option<String>,
}

/// Draws `n` distinct queries in two stages: a kind uniformly among kinds
/// with a non-empty pool, then a value uniformly from that kind's pool.
/// Repeats are rejected and redrawn. Ids are `q001`, `q002`, ...
pub fn generate_queries(seed: u64, n: usize, corpus: &Corpus) -> GeneratedQueries {
    let pools = value_pools(corpus);
    let kinds: Vec<QueryKind> = pools.keys().copied().collect();
    let available: usize = pools.values().map(Vec::len).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen: HashSet<(QueryKind, QueryValue)> = HashSet::new();
    let mut queries = Vec::new();
    while queries.len() < n && seen.len() < available {
        let kind = kinds[rng.random_range(0..kinds.len())];
        let pool = &pools[&kind];
        let value = pool[rng.random_range(0..pool.len())].clone();
        if seen.insert((kind, value.clone())) {
            queries.push(EvalQuery::new(
                format!("q{:03}", queries.len() + 1),
                kind,
                value,
            ));
        }
    }
    let warning = (queries.len() < n).then(|| {
        format!(
            "only {} distinct queries exist for this corpus; generated {} of {n}",
            available,
            queries.len()
        )
    });
    GeneratedQueries {
        seed,
        queries,
        warning,
    }
}
