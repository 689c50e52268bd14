use super::generate::{EvalQuery, QueryValue};
use super::EvalError;
use crate::corpus::Corpus;
use crate::query::QueryKind;
use crate::text::fold;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

/// Hand-checked facts about one recipe, kept apart from the recipe files so
/// that ground truth does not depend on the representation under test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Annotation {
    pub id: String,
    pub name: String,
    #[serde(default)]
    pub cuisine: Option<String>,
    pub allergens: BTreeSet<String>,
    pub ingredients: BTreeSet<String>,
    pub step_count: u64,
    pub total_minutes: u64,
    #[serde(default)]
    pub ingredient_images: BTreeSet<String>,
    #[serde(default)]
    pub dish_images: BTreeSet<String>,
}

impl Annotation {
    /// Exact, case-insensitive reading of a query against the annotation.
    pub fn satisfies(&self, query: &EvalQuery) -> bool {
        let text = query.text().map(fold).unwrap_or_default();
        let n = query.number().unwrap_or_default();
        let has = |set: &BTreeSet<String>| set.iter().any(|v| fold(v) == text);
        match query.kind {
            QueryKind::LengthAtMost => self.step_count <= n,
            QueryKind::TimeAtMost => self.total_minutes <= n,
            QueryKind::AllergenExcludeExplicit => !has(&self.allergens),
            QueryKind::IngredientExclude => !has(&self.ingredients),
            QueryKind::IngredientInclude => has(&self.ingredients),
            QueryKind::NameMatch => fold(&self.name) == text,
            QueryKind::CuisineMatch => self.cuisine.as_deref().map(fold) == Some(text),
            QueryKind::ImageIngredient => self
                .ingredient_images
                .contains(query.text().unwrap_or_default()),
            QueryKind::ImageDish => self.dish_images.contains(query.text().unwrap_or_default()),
        }
    }
}

pub fn load_annotations(path: &Path) -> Result<Vec<Annotation>, EvalError> {
    let text = read(path)?;
    serde_json::from_str(&text).map_err(|e| EvalError::Malformed {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn read(path: &Path) -> Result<String, EvalError> {
    std::fs::read_to_string(path).map_err(|e| EvalError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Expected recipes for one query. The query itself is stored alongside so
/// that a truth file cannot silently be paired with a different suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<QueryKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<QueryValue>,
    pub recipes: BTreeSet<String>,
}

/// Query id to expected recipe ids.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroundTruth {
    pub entries: BTreeMap<String, TruthEntry>,
}

impl GroundTruth {
    pub fn from_json(json: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(json)
    }

    pub fn load(path: &Path) -> Result<Self, EvalError> {
        Self::from_json(&read(path)?).map_err(|e| EvalError::Malformed {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("truth serializes");
        s.push('\n');
        s
    }

    pub fn get(&self, id: &str) -> Option<&TruthEntry> {
        self.entries.get(id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Every referenced recipe must exist in the corpus.
    pub fn check_against(&self, corpus: &Corpus) -> Result<(), EvalError> {
        for (query, entry) in &self.entries {
            if let Some(recipe) = entry.recipes.iter().find(|r| corpus.get(r).is_none()) {
                return Err(EvalError::UnknownRecipe {
                    query: query.clone(),
                    recipe: recipe.clone(),
                });
            }
        }
        Ok(())
    }

    /// Truth for `query`, refusing entries recorded for a different query.
    pub fn expected(&self, query: &EvalQuery) -> Result<&BTreeSet<String>, EvalError> {
        let entry = self
            .get(&query.id)
            .ok_or_else(|| EvalError::MissingTruth(query.id.clone()))?;
        let kind_differs = entry.kind.is_some_and(|k| k != query.kind);
        let value_differs = entry.value.as_ref().is_some_and(|v| *v != query.value);
        if kind_differs || value_differs {
            return Err(EvalError::TruthMismatch {
                id: query.id.clone(),
                query: query.to_string(),
            });
        }
        Ok(&entry.recipes)
    }
}

/// Ground truth for a suite, read off the annotations.
pub fn derive_truth(queries: &[EvalQuery], annotations: &[Annotation]) -> GroundTruth {
    let entries = queries
        .iter()
        .map(|q| {
            let recipes = annotations
                .iter()
                .filter(|a| a.satisfies(q))
                .map(|a| a.id.clone())
                .collect();
            let entry = TruthEntry {
                kind: Some(q.kind),
                value: Some(q.value.clone()),
                recipes,
            };
            (q.id.clone(), entry)
        })
        .collect();
    GroundTruth { entries }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ann(id: &str, allergens: &[&str], ingredients: &[&str], steps: u64) -> Annotation {
        Annotation {
            id: id.into(),
            name: format!("Recipe {id}"),
            cuisine: Some("thai".into()),
            allergens: allergens.iter().map(|s| s.to_string()).collect(),
            ingredients: ingredients.iter().map(|s| s.to_string()).collect(),
            step_count: steps,
            total_minutes: steps * 10,
            ingredient_images: BTreeSet::new(),
            dish_images: BTreeSet::new(),
        }
    }

    fn text(id: &str, kind: QueryKind, v: &str) -> EvalQuery {
        EvalQuery::new(id, kind, QueryValue::Text(v.into()))
    }

    #[test]
    fn derivation_reads_annotations_exactly() {
        let anns = vec![
            ann("a", &["egg"], &["egg", "flour"], 3),
            ann("b", &["maize"], &["corn"], 6),
        ];
        let qs = vec![
            text("q1", QueryKind::AllergenExcludeExplicit, "Maize"),
            text("q2", QueryKind::IngredientInclude, "eggs"),
            EvalQuery::new("q3", QueryKind::LengthAtMost, QueryValue::Number(3)),
            text("q4", QueryKind::NameMatch, "recipe b"),
        ];
        let t = derive_truth(&qs, &anns);
        let ids = |q: &str| {
            t.get(q)
                .unwrap()
                .recipes
                .iter()
                .cloned()
                .collect::<Vec<_>>()
        };
        assert_eq!(ids("q1"), vec!["a"]);
        assert!(ids("q2").is_empty());
        assert_eq!(ids("q3"), vec!["a"]);
        assert_eq!(ids("q4"), vec!["b"]);
    }

    #[test]
    fn plain_map_form_is_accepted() {
        let t = GroundTruth::from_json(r#"{"q001": {"recipes": ["a", "b"]}}"#).unwrap();
        let q = text("q001", QueryKind::NameMatch, "anything");
        assert_eq!(t.expected(&q).unwrap().len(), 2);
    }

    #[test]
    fn mismatched_entry_is_refused() {
        let t = derive_truth(&[text("q001", QueryKind::NameMatch, "x")], &[]);
        let other = text("q001", QueryKind::NameMatch, "y");
        assert!(matches!(
            t.expected(&other),
            Err(EvalError::TruthMismatch { .. })
        ));
        assert!(
            matches!(t.expected(&text("q002", QueryKind::NameMatch, "x")), Err(EvalError::MissingTruth(id)) if id == "q002")
        );
    }

    #[test]
    fn json_round_trip() {
        let t = derive_truth(
            &[EvalQuery::new(
                "q001",
                QueryKind::TimeAtMost,
                QueryValue::Number(30),
            )],
            &[ann("a", &[], &[], 2)],
        );
        assert_eq!(GroundTruth::from_json(&t.to_json()).unwrap(), t);
    }
}
