//! Retrieval quality against hand-checked ground truth: seeded query
//! generation, coverage (CVG) and intersection-over-union (IOU) per query,
//! and a comparison with plain text search over the original recipes.

mod baseline;
mod generate;
mod metrics;
mod truth;

pub use baseline::{load_raw_corpus, BaselineRetriever, QueryClass};
pub use generate::{
    generate_queries, value_pools, EvalQuery, GeneratedQueries, QueryValue, DEFAULT_QUERY_COUNT,
};
pub use metrics::{cvg, iou};
pub use truth::{derive_truth, load_annotations, Annotation, GroundTruth, TruthEntry};

use crate::query::{parse_text_query, QueryError, QueryKind, Retriever};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no ground truth for query {0}")]
    MissingTruth(String),
    #[error("ground truth entry {id} was recorded for a different query than {query}")]
    TruthMismatch { id: String, query: String },
    #[error("ground truth for {query} names unknown recipe {recipe}")]
    UnknownRecipe { query: String, recipe: String },
    #[error("query {id}: {message}")]
    Value { id: String, message: String },
    #[error("query {id}: {source}")]
    Query {
        id: String,
        #[source]
        source: QueryError,
    },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed {path}: {message}")]
    Malformed { path: String, message: String },
    #[error("raw corpus: {0}")]
    Raw(String),
}

/// The system being evaluated.
#[derive(Debug, Clone, Copy)]
pub enum System<'a> {
    Proposed(&'a Retriever),
    Baseline(&'a BaselineRetriever),
}

impl System<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            System::Proposed(_) => "proposed",
            System::Baseline(_) => "baseline",
        }
    }

    pub fn retrieve(&self, query: &EvalQuery) -> Result<BTreeSet<String>, EvalError> {
        match self {
            System::Baseline(b) => Ok(b.retrieve(query)),
            System::Proposed(r) => {
                let q = query.to_query(r.corpus())?;
                let result = r.execute(&[q]).map_err(|source| EvalError::Query {
                    id: query.id.clone(),
                    source,
                })?;
                Ok(result.ids().map(str::to_owned).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryScore {
    pub id: String,
    pub kind: QueryKind,
    pub value: QueryValue,
    pub retrieved: usize,
    pub truth: usize,
    pub correct: usize,
    pub cvg: f64,
    pub iou: f64,
}

/// Means over a group of queries, with the retrieved (R_r), ground-truth
/// (R_gt) and correct (C) counts summed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub queries: usize,
    pub cvg: f64,
    pub iou: f64,
    pub retrieved: usize,
    pub truth: usize,
    pub correct: usize,
}

impl Aggregate {
    pub fn of<'a>(scores: impl IntoIterator<Item = &'a QueryScore>) -> Option<Aggregate> {
        let scores: Vec<&QueryScore> = scores.into_iter().collect();
        if scores.is_empty() {
            return None;
        }
        let n = scores.len() as f64;
        Some(Aggregate {
            queries: scores.len(),
            cvg: scores.iter().map(|s| s.cvg).sum::<f64>() / n,
            iou: scores.iter().map(|s| s.iou).sum::<f64>() / n,
            retrieved: scores.iter().map(|s| s.retrieved).sum(),
            truth: scores.iter().map(|s| s.truth).sum(),
            correct: scores.iter().map(|s| s.correct).sum(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub system: String,
    /// Sorted by query id.
    pub per_query: Vec<QueryScore>,
    pub per_kind: BTreeMap<QueryKind, Aggregate>,
    pub per_class: BTreeMap<QueryClass, Aggregate>,
    /// Absent when there are no queries.
    pub overall: Option<Aggregate>,
    /// Allergen named as a category.
    pub explicit_allergen: Option<Aggregate>,
    /// Allergen named as an ingredient to avoid.
    pub implicit_allergen: Option<Aggregate>,
}

/// Scores a system on a suite. Results do not depend on query order.
pub fn run_eval(
    system: System<'_>,
    queries: &[EvalQuery],
    truth: &GroundTruth,
) -> Result<EvalReport, EvalError> {
    let mut per_query = queries
        .iter()
        .map(|q| {
            let expected = truth.expected(q)?;
            let retrieved = system.retrieve(q)?;
            Ok(QueryScore {
                id: q.id.clone(),
                kind: q.kind,
                value: q.value.clone(),
                retrieved: retrieved.len(),
                truth: expected.len(),
                correct: retrieved.intersection(expected).count(),
                cvg: cvg(&retrieved, expected),
                iou: iou(&retrieved, expected),
            })
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    per_query.sort_by(|a, b| a.id.cmp(&b.id));

    let group =
        |keep: &dyn Fn(&QueryScore) -> bool| Aggregate::of(per_query.iter().filter(|s| keep(s)));
    let per_kind = QueryKind::ALL
        .into_iter()
        .filter_map(|k| group(&|s| s.kind == k).map(|a| (k, a)))
        .collect();
    let per_class = QueryClass::ALL
        .into_iter()
        .filter_map(|c| group(&|s| QueryClass::of(s.kind) == c).map(|a| (c, a)))
        .collect();
    Ok(EvalReport {
        system: system.name().to_owned(),
        overall: group(&|_| true),
        explicit_allergen: group(&|s| s.kind == QueryKind::AllergenExcludeExplicit),
        implicit_allergen: group(&|s| s.kind == QueryKind::IngredientExclude),
        per_kind,
        per_class,
        per_query,
    })
}

fn metric_cells(a: Option<&Aggregate>) -> String {
    match a {
        Some(a) => format!("{:>6.2} {:>6.2}", a.cvg, a.iou),
        None => format!("{:>6} {:>6}", "-", "-"),
    }
}

impl EvalReport {
    /// Per-class results with summed counts.
    pub fn results_table(&self) -> String {
        let mut out = format!("Results ({})\n", self.system);
        let _ = writeln!(
            out,
            "{:<12} {:>6} {:>6} {:>5} {:>5} {:>5} {:>4}",
            "Query", "CVG", "IOU", "R_r", "R_gt", "C", "n"
        );
        let rows = self.per_class.iter().map(|(c, a)| (c.to_string(), a));
        for (label, a) in rows.chain(self.overall.iter().map(|a| ("Overall".to_owned(), a))) {
            let _ = writeln!(
                out,
                "{label:<12} {} {:>5} {:>5} {:>5} {:>4}",
                metric_cells(Some(a)),
                a.retrieved,
                a.truth,
                a.correct,
                a.queries
            );
        }
        out
    }

    pub fn kind_table(&self) -> String {
        let mut out = format!("{:<24} {:>6} {:>6} {:>4}\n", "Kind", "CVG", "IOU", "n");
        for (k, a) in &self.per_kind {
            let _ = writeln!(
                out,
                "{:<24} {} {:>4}",
                k.as_str(),
                metric_cells(Some(a)),
                a.queries
            );
        }
        out
    }
}

/// Overall comparison of the original-text baseline and the proposed system.
pub fn comparison_table(baseline: &EvalReport, proposed: &EvalReport) -> String {
    let mut out = format!("{:<12} {:>6} {:>6}\n", "Approach", "CVG", "IOU");
    let _ = writeln!(
        out,
        "{:<12} {}",
        "Original",
        metric_cells(baseline.overall.as_ref())
    );
    let _ = writeln!(
        out,
        "{:<12} {}",
        "Proposed",
        metric_cells(proposed.overall.as_ref())
    );
    out
}

/// Explicit versus implicit allergen queries for both systems.
pub fn allergen_table(baseline: &EvalReport, proposed: &EvalReport) -> String {
    let mut out = format!(
        "{:<18} {:<10} {:>6} {:>6}\n",
        "Allergen query", "Approach", "CVG", "IOU"
    );
    for (label, pick) in [
        (
            "Explicit allergen",
            (|r: &EvalReport| r.explicit_allergen.clone()) as fn(&EvalReport) -> Option<Aggregate>,
        ),
        ("Implicit allergen", |r: &EvalReport| {
            r.implicit_allergen.clone()
        }),
    ] {
        for (approach, report) in [("Original", baseline), ("Proposed", proposed)] {
            let _ = writeln!(
                out,
                "{label:<18} {approach:<10} {}",
                metric_cells(pick(report).as_ref())
            );
        }
    }
    out
}

/// Whether each system can answer each class of query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Capability {
    pub class: QueryClass,
    pub proposed: bool,
    pub baseline: bool,
}

/// Probes the proposed retriever with one query per class drawn from its
/// corpus; a class is supported when the probe runs without error. The
/// baseline's flags are static.
pub fn capability_matrix(retriever: &Retriever) -> Vec<Capability> {
    let pools = value_pools(retriever.corpus());
    let probe = |kind: QueryKind| -> bool {
        pools
            .get(&kind)
            .and_then(|values| values.first())
            .map(|v| EvalQuery::new("probe", kind, v.clone()))
            .is_some_and(|q| System::Proposed(retriever).retrieve(&q).is_ok())
    };
    let text_probe = || {
        let Some(QueryValue::Text(ingredient)) = pools
            .get(&QueryKind::IngredientInclude)
            .and_then(|v| v.first())
        else {
            return false;
        };
        parse_text_query(&format!("give me a recipe with {ingredient}"))
            .ok()
            .is_some_and(|qs| retriever.execute(&qs).is_ok())
    };
    QueryClass::ALL
        .into_iter()
        .map(|class| {
            let proposed = match class {
                QueryClass::Allergen => probe(QueryKind::AllergenExcludeExplicit),
                QueryClass::Ingredient => {
                    probe(QueryKind::IngredientInclude) && probe(QueryKind::IngredientExclude)
                }
                QueryClass::Text => text_probe(),
                QueryClass::Image => {
                    probe(QueryKind::ImageIngredient) || probe(QueryKind::ImageDish)
                }
                QueryClass::Length => probe(QueryKind::LengthAtMost),
                QueryClass::Name => probe(QueryKind::NameMatch),
            };
            Capability {
                class,
                proposed,
                baseline: BaselineRetriever::supports(class),
            }
        })
        .collect()
}

pub fn capability_table(rows: &[Capability]) -> String {
    let yes = |b: bool| if b { "Yes" } else { "No" };
    let mut out = format!("{:<12} {:<9} {:<8}\n", "Query", "Original", "Proposed");
    for r in rows {
        let _ = writeln!(
            out,
            "{:<12} {:<9} {:<8}",
            r.class.to_string(),
            yes(r.baseline),
            yes(r.proposed)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn score(id: &str, kind: QueryKind, cvg: f64, iou: f64) -> QueryScore {
        QueryScore {
            id: id.into(),
            kind,
            value: QueryValue::Number(0),
            retrieved: 1,
            truth: 1,
            correct: 1,
            cvg,
            iou,
        }
    }

    #[test]
    fn aggregate_is_unweighted_mean() {
        let s = [
            score("a", QueryKind::NameMatch, 1.0, 0.5),
            score("b", QueryKind::NameMatch, 0.0, 0.25),
        ];
        let a = Aggregate::of(&s).unwrap();
        assert_eq!((a.cvg, a.iou, a.queries, a.correct), (0.5, 0.375, 2, 2));
        assert!(Aggregate::of(&[]).is_none());
    }

    #[test]
    fn empty_suite_has_no_aggregates() {
        let b = BaselineRetriever::default();
        let r = run_eval(System::Baseline(&b), &[], &GroundTruth::default()).unwrap();
        assert!(r.per_query.is_empty());
        assert!(r.overall.is_none() && r.per_kind.is_empty());
        assert!(r.results_table().contains("Query"));
    }

    #[test]
    fn missing_truth_names_query() {
        let b = BaselineRetriever::default();
        let q = EvalQuery::new("q007", QueryKind::NameMatch, QueryValue::Text("x".into()));
        let err = run_eval(System::Baseline(&b), &[q], &GroundTruth::default()).unwrap_err();
        assert!(err.to_string().contains("q007"));
    }
}
