use super::image::{decode, read_image, Descriptor, DescriptorProvider, GridDescriptor};
use super::levenshtein::levenshtein_similarity;
use super::types::{Query, QueryError, QueryKind};
use crate::corpus::Corpus;
use crate::model::Recipe;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// What "one step" means for length constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepUnit {
    #[default]
    Task,
    Instruction,
}

impl StepUnit {
    pub fn count(self, recipe: &Recipe) -> usize {
        match self {
            StepUnit::Task => recipe.task_count(),
            StepUnit::Instruction => recipe.instructions.len(),
        }
    }
}

impl FromStr for StepUnit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "task" => Ok(StepUnit::Task),
            "instruction" => Ok(StepUnit::Instruction),
            other => Err(format!(
                "step unit must be `task` or `instruction`, found `{other}`"
            )),
        }
    }
}

impl fmt::Display for StepUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StepUnit::Task => "task",
            StepUnit::Instruction => "instruction",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Match {
    pub id: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RetrievalResult {
    /// Score descending, ties by id ascending.
    pub matches: Vec<Match>,
    pub query_echo: Vec<Query>,
}

impl RetrievalResult {
    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.matches.iter().map(|m| m.id.as_str())
    }
}

/// A media file referenced by the corpus that could not be described.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedMedia {
    pub path: String,
    pub reason: String,
}

/// Executes queries over one corpus. Corpus images are described once at
/// construction; media that cannot be read is skipped, not fatal.
pub struct Retriever {
    corpus: Corpus,
    step_unit: StepUnit,
    provider: Box<dyn DescriptorProvider>,
    descriptors: BTreeMap<String, Descriptor>,
    skipped: Vec<SkippedMedia>,
}

impl fmt::Debug for Retriever {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Retriever")
            .field("recipes", &self.corpus.len())
            .field("step_unit", &self.step_unit)
            .field("provider", &self.provider.name())
            .field("descriptors", &self.descriptors.len())
            .finish()
    }
}

impl Retriever {
    pub fn new(corpus: Corpus) -> Self {
        Self::with_provider(corpus, StepUnit::default(), Box::new(GridDescriptor))
    }

    pub fn with_provider(
        corpus: Corpus,
        step_unit: StepUnit,
        provider: Box<dyn DescriptorProvider>,
    ) -> Self {
        let mut descriptors = BTreeMap::new();
        let mut skipped = Vec::new();
        let mut paths: Vec<&str> = Vec::new();
        for r in corpus.recipes() {
            paths.extend(r.ingredient_images());
            paths.extend(r.dish_images().iter().map(String::as_str));
        }
        paths.sort_unstable();
        paths.dedup();
        for media in paths {
            let Some(full) = corpus.media_path(media) else {
                skipped.push(SkippedMedia {
                    path: media.to_owned(),
                    reason: "corpus has no media root".into(),
                });
                continue;
            };
            match read_image(&full).and_then(|img| provider.describe(&img)) {
                Ok(d) => {
                    descriptors.insert(media.to_owned(), d);
                }
                Err(e) => skipped.push(SkippedMedia {
                    path: media.to_owned(),
                    reason: e.to_string(),
                }),
            }
        }
        Self {
            corpus,
            step_unit,
            provider,
            descriptors,
            skipped,
        }
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    pub fn step_unit(&self) -> StepUnit {
        self.step_unit
    }

    pub fn skipped_media(&self) -> &[SkippedMedia] {
        &self.skipped
    }

    pub fn descriptor(&self, media: &str) -> Option<&Descriptor> {
        self.descriptors.get(media)
    }

    /// Runs a conjunction of queries: recipes must satisfy every member, and
    /// their score is the minimum member score.
    pub fn execute(&self, queries: &[Query]) -> Result<RetrievalResult, QueryError> {
        if queries.is_empty() {
            return Err(QueryError::Empty);
        }
        let mut combined: Option<BTreeMap<&str, f64>> = None;
        for q in queries {
            q.check()?;
            let image = match &q.image_param {
                Some(bytes) => Some(
                    decode(&bytes.0)
                        .and_then(|img| self.provider.describe(&img))
                        .map_err(|e| QueryError::Image(e.to_string()))?,
                ),
                None => None,
            };
            let scores: BTreeMap<&str, f64> = self
                .corpus
                .recipes()
                .iter()
                .filter_map(|r| self.score(r, q, image.as_ref()).map(|s| (r.id.as_str(), s)))
                .collect();
            combined = Some(match combined {
                None => scores,
                Some(prev) => prev
                    .into_iter()
                    .filter_map(|(id, s)| scores.get(id).map(|t| (id, s.min(*t))))
                    .collect(),
            });
        }
        let mut matches: Vec<Match> = combined
            .unwrap_or_default()
            .into_iter()
            .map(|(id, score)| Match {
                id: id.to_owned(),
                score,
            })
            .collect();
        matches.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.id.cmp(&b.id)));
        Ok(RetrievalResult {
            matches,
            query_echo: queries.to_vec(),
        })
    }

    /// Score of one recipe under one query, `None` when it does not match.
    fn score(&self, recipe: &Recipe, q: &Query, image: Option<&Descriptor>) -> Option<f64> {
        let t = q.threshold;
        let text = q.text_param.as_deref().unwrap_or_default();
        let limit = q.numeric_param.unwrap_or_default();
        let similar = |field: &str| levenshtein_similarity(field, text) >= t;
        let keep = |ok: bool| ok.then_some(1.0);
        let best = |fields: &mut dyn Iterator<Item = f64>| {
            fields
                .fold(None, |acc: Option<f64>, s| {
                    Some(acc.map_or(s, |a| a.max(s)))
                })
                .filter(|s| *s >= t)
        };
        match q.kind {
            QueryKind::LengthAtMost => keep(self.step_unit.count(recipe) as u64 <= limit),
            QueryKind::TimeAtMost => keep(recipe.total_time() <= limit),
            QueryKind::AllergenExcludeExplicit => keep(!recipe.allergen_categories().any(similar)),
            QueryKind::IngredientExclude => keep(
                !recipe
                    .ingredients
                    .iter()
                    .any(|ing| similar(&ing.name) || ing.alternatives.iter().any(|a| similar(a))),
            ),
            QueryKind::IngredientInclude => best(
                &mut recipe
                    .ingredients
                    .iter()
                    .map(|i| levenshtein_similarity(&i.name, text)),
            ),
            QueryKind::NameMatch => best(&mut std::iter::once(levenshtein_similarity(
                &recipe.name,
                text,
            ))),
            QueryKind::CuisineMatch => best(
                &mut recipe
                    .cuisine
                    .iter()
                    .map(|c| levenshtein_similarity(c, text)),
            ),
            QueryKind::ImageIngredient => {
                let query = image?;
                best(
                    &mut recipe
                        .ingredient_images()
                        .filter_map(|m| self.descriptors.get(m))
                        .map(|d| query.similarity(d)),
                )
            }
            QueryKind::ImageDish => {
                let query = image?;
                best(
                    &mut recipe
                        .dish_images()
                        .iter()
                        .filter_map(|m| self.descriptors.get(m))
                        .map(|d| query.similarity(d)),
                )
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AllergenInfo, Recipe};
    use crate::query::image::synth;
    use crate::validate::fixtures::soup;

    fn variant(id: &str, name: &str, f: impl FnOnce(&mut Recipe)) -> Recipe {
        let mut r = soup();
        r.id = id.into();
        r.name = name.into();
        f(&mut r);
        r
    }

    fn corpus() -> Corpus {
        let a = soup();
        let b = variant("b-omelette", "Cheese Omelette", |r| {
            r.ingredients[1].name = "cheese".into();
            r.ingredients[1].allergens[0] = AllergenInfo {
                allergen_id: 1,
                category: "milk".into(),
                source_ref: "t".into(),
                kg_ref: String::new(),
            };
            r.ingredients[1].alternatives = vec!["parsley".into()];
            r.instructions[1].tasks[0].objects[0].name = "cheese".into();
            r.instructions.truncate(1);
            r.cook_time = 5;
            r.cuisine = Some("french".into());
        });
        let c = variant("c-corn-soup", "Corn Soup", |r| {
            r.ingredients[1].name = "cornstarch".into();
            r.ingredients[1].allergens[0] = AllergenInfo {
                allergen_id: 2,
                category: "maize".into(),
                source_ref: "t".into(),
                kg_ref: String::new(),
            };
            r.instructions[1].tasks[0].objects[0].name = "cornstarch".into();
            r.prep_time = 30;
        });
        Corpus::from_recipes(vec![a, b, c], None, None).unwrap()
    }

    fn ids(r: &RetrievalResult) -> Vec<&str> {
        r.ids().collect()
    }

    #[test]
    fn length_and_time() {
        let ret = Retriever::new(corpus());
        assert_eq!(
            ids(&ret.execute(&[Query::length_at_most(0)]).unwrap()),
            Vec::<&str>::new()
        );
        assert_eq!(
            ids(&ret.execute(&[Query::length_at_most(2)]).unwrap()),
            vec!["b-omelette"]
        );
        assert_eq!(
            ids(&ret.execute(&[Query::time_at_most(20)]).unwrap()),
            vec!["b-omelette", "egg-drop-chicken-noodle-soup"]
        );
    }

    #[test]
    fn instruction_step_unit() {
        let ret =
            Retriever::with_provider(corpus(), StepUnit::Instruction, Box::new(GridDescriptor));
        assert_eq!(
            ids(&ret.execute(&[Query::length_at_most(1)]).unwrap()),
            vec!["b-omelette"]
        );
    }

    #[test]
    fn explicit_allergen_exclusion() {
        let ret = Retriever::new(corpus());
        let q = Query::text(QueryKind::AllergenExcludeExplicit, "Maize");
        assert_eq!(
            ids(&ret.execute(&[q]).unwrap()),
            vec!["b-omelette", "egg-drop-chicken-noodle-soup"]
        );
    }

    #[test]
    fn ingredient_exclusion_checks_alternatives() {
        let ret = Retriever::new(corpus());
        let q = Query::text(QueryKind::IngredientExclude, "parsley");
        assert_eq!(
            ids(&ret.execute(&[q]).unwrap()),
            vec!["c-corn-soup", "egg-drop-chicken-noodle-soup"]
        );
    }

    #[test]
    fn inclusion_scores_and_ordering() {
        let ret = Retriever::new(corpus());
        let res = ret
            .execute(&[Query::text(QueryKind::IngredientInclude, "eggs")])
            .unwrap();
        assert_eq!(res.matches.len(), 3);
        assert!(res.matches.iter().all(|m| m.score == 0.75));
        assert_eq!(
            ids(&res),
            vec!["b-omelette", "c-corn-soup", "egg-drop-chicken-noodle-soup"]
        );

        let res = ret
            .execute(&[Query::text(QueryKind::NameMatch, "corn soup")])
            .unwrap();
        assert_eq!(
            res.matches,
            vec![Match {
                id: "c-corn-soup".into(),
                score: 1.0
            }]
        );

        let res = ret
            .execute(&[Query::text(QueryKind::CuisineMatch, "French")])
            .unwrap();
        assert_eq!(ids(&res), vec!["b-omelette"]);
    }

    #[test]
    fn conjunction_takes_min_and_commutes() {
        let ret = Retriever::new(corpus());
        let a = Query::text(QueryKind::IngredientInclude, "eggs");
        let b = Query::time_at_most(20);
        let ab = ret.execute(&[a.clone(), b.clone()]).unwrap();
        let ba = ret.execute(&[b, a]).unwrap();
        assert_eq!(ab.matches, ba.matches);
        assert_eq!(ids(&ab), vec!["b-omelette", "egg-drop-chicken-noodle-soup"]);
        assert!(ab.matches.iter().all(|m| m.score == 0.75));
    }

    #[test]
    fn empty_and_invalid_queries() {
        let ret = Retriever::new(corpus());
        assert_eq!(ret.execute(&[]), Err(QueryError::Empty));
        let mut q = Query::length_at_most(1);
        q.text_param = Some("x".into());
        assert!(ret.execute(&[q]).is_err());
        let bad_image = Query::image(QueryKind::ImageDish, b"junk".to_vec());
        assert!(matches!(
            ret.execute(&[bad_image]),
            Err(QueryError::Image(_))
        ));
    }

    #[test]
    fn image_queries_without_media_match_nothing() {
        let ret = Retriever::new(corpus());
        let mut png = Vec::new();
        synth::pattern(32, 32, 0, 4)
            .write_to(&mut std::io::Cursor::new(&mut png), image::ImageFormat::Png)
            .unwrap();
        let res = ret
            .execute(&[Query::image(QueryKind::ImageIngredient, png)])
            .unwrap();
        assert!(res.matches.is_empty());
    }

    #[test]
    fn unreadable_media_is_skipped_not_fatal() {
        let mut r = soup();
        r.ingredients[0].image_ref = Some("media/missing.png".into());
        let corpus = Corpus::from_recipes(vec![r], Some(std::env::temp_dir()), None).unwrap();
        let ret = Retriever::new(corpus);
        assert_eq!(ret.skipped_media().len(), 1);
        assert_eq!(ret.skipped_media()[0].path, "media/missing.png");
    }
}
