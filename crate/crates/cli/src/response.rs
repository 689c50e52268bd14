//! Shapes shared by the CLI's `--json` output and the HTTP API, so the two
//! can be compared byte for byte.

use r3_core::model::Recipe;
use r3_core::query::{parse_text_query, Query, QueryError, Retriever};
use serde::Serialize;
use serde_json::Value;
use std::collections::BTreeSet;

/// Summary of a recipe for result lists.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecipeCard {
    pub id: String,
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cuisine: Option<String>,
    /// Dish image, relative to the corpus root.
    pub image: Option<String>,
    pub allergens: Vec<String>,
    pub step_count: usize,
    pub total_time: u64,
}

impl RecipeCard {
    pub fn new(recipe: &Recipe, retriever: &Retriever) -> Self {
        let allergens: BTreeSet<&str> = recipe.allergen_categories().collect();
        Self {
            id: recipe.id.clone(),
            name: recipe.name.clone(),
            cuisine: recipe.cuisine.clone(),
            image: recipe.dish_images().first().cloned(),
            allergens: allergens.into_iter().map(str::to_owned).collect(),
            step_count: retriever.step_unit().count(recipe),
            total_time: recipe.total_time(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredCard {
    pub score: f64,
    #[serde(flatten)]
    pub card: RecipeCard,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryResponse {
    pub matches: Vec<ScoredCard>,
    /// The executed constraints, one per conjunct.
    pub query: Vec<String>,
}

pub fn run_query(retriever: &Retriever, queries: &[Query]) -> Result<QueryResponse, QueryError> {
    let result = retriever.execute(queries)?;
    let corpus = retriever.corpus();
    let matches = result
        .matches
        .iter()
        .filter_map(|m| {
            corpus.get(&m.id).map(|r| ScoredCard {
                score: m.score,
                card: RecipeCard::new(r, retriever),
            })
        })
        .collect();
    Ok(QueryResponse {
        matches,
        query: result.query_echo.iter().map(ToString::to_string).collect(),
    })
}

/// Parses a JSON request body: a query object, an array of them (a
/// conjunction), or `{"utterance": "...", "threshold": t}` for typed text.
/// Queries without a threshold get `default_threshold`.
pub fn queries_from_json(
    mut value: Value,
    default_threshold: f64,
) -> Result<Vec<Query>, QueryError> {
    if let Some(utterance) = value.get("utterance") {
        let text = utterance
            .as_str()
            .ok_or_else(|| QueryError::Malformed("`utterance` must be a string".into()))?;
        let threshold = match value.get("threshold") {
            Some(t) => t
                .as_f64()
                .ok_or_else(|| QueryError::Malformed("`threshold` must be a number".into()))?,
            None => default_threshold,
        };
        let queries = parse_text_query(text).map_err(|e| QueryError::Malformed(e.to_string()))?;
        return Ok(queries
            .into_iter()
            .map(|q| q.with_threshold(threshold))
            .collect());
    }
    let items: Vec<&mut Value> = match &mut value {
        Value::Array(items) => items.iter_mut().collect(),
        other => vec![other],
    };
    for item in items {
        if let Value::Object(map) = item {
            map.entry("threshold")
                .or_insert(Value::from(default_threshold));
        }
    }
    Query::conjunction_from_json(value)
}
