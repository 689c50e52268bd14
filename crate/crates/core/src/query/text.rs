//! Template grammar for typed utterances such as
//! "give me a recipe with less than 5 steps and is completed in 20 minutes".

use super::types::{Query, QueryKind};
use crate::text::squish;
use regex::Regex;
use std::sync::LazyLock;
use thiserror::Error;

/// Patterns accepted by [`parse_text_query`], for help and error messages.
pub const SUPPORTED_TEMPLATES: &[&str] = &[
    "without <allergen> allergen",
    "without <ingredient>",
    "with <ingredient>",
    "less than <N> steps",
    "in <N> minutes / completed in <N> minutes",
    "named <recipe name> / recipe for <recipe name>",
    "<cuisine> cuisine",
    "clauses joined by \"and\" (all must hold)",
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TextQueryError {
    #[error("no supported template matches {clause:?}; supported: {}", SUPPORTED_TEMPLATES.join("; "))]
    NoTemplate { clause: String },
    #[error("\"less than {0} steps\" cannot be satisfied")]
    ZeroSteps(u64),
    #[error("number out of range in {0:?}")]
    Number(String),
}

enum Template {
    LessThanSteps,
    InMinutes,
    WithoutAllergen,
    Without,
    Named,
    Cuisine,
    With,
}

static RULES: LazyLock<Vec<(Template, Regex)>> = LazyLock::new(|| {
    let rx = |p: &str| Regex::new(p).expect("template regex");
    vec![
        (Template::LessThanSteps, rx(r"\bless than (\d+) steps?\b")),
        (
            Template::InMinutes,
            rx(r"\b(?:completed )?in (\d+) minutes?\b"),
        ),
        (
            Template::WithoutAllergen,
            rx(r"\bwithout (.+?) allergens?$"),
        ),
        (Template::Without, rx(r"\bwithout (.+)$")),
        (Template::Named, rx(r"\b(?:named|recipe for) (.+)$")),
        (
            Template::Cuisine,
            rx(r"(?:\b(?:from|of) (?:the )?)?\b([\w-]+) cuisine$"),
        ),
        (Template::With, rx(r"\bwith (.+)$")),
    ]
});

static AND: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\s+and\s+").expect("and regex"));

fn strip_article(s: &str) -> String {
    let s = s.trim();
    for article in ["a ", "an ", "the ", "any ", "some "] {
        if let Some(rest) = s.strip_prefix(article) {
            return rest.trim().to_owned();
        }
    }
    s.to_owned()
}

fn number(s: &str) -> Result<u64, TextQueryError> {
    s.parse().map_err(|_| TextQueryError::Number(s.to_owned()))
}

fn parse_clause(clause: &str) -> Result<Option<Query>, TextQueryError> {
    for (template, re) in RULES.iter() {
        let Some(caps) = re.captures(clause) else {
            continue;
        };
        let value = &caps[1];
        let q = match template {
            Template::LessThanSteps => {
                let n = number(value)?;
                if n == 0 {
                    return Err(TextQueryError::ZeroSteps(n));
                }
                Query::length_at_most(n - 1)
            }
            Template::InMinutes => Query::time_at_most(number(value)?),
            Template::WithoutAllergen => {
                Query::text(QueryKind::AllergenExcludeExplicit, strip_article(value))
            }
            Template::Without => Query::text(QueryKind::IngredientExclude, strip_article(value)),
            Template::Named => Query::text(QueryKind::NameMatch, strip_article(value)),
            Template::Cuisine => Query::text(QueryKind::CuisineMatch, strip_article(value)),
            Template::With => Query::text(QueryKind::IngredientInclude, strip_article(value)),
        };
        return Ok(Some(q));
    }
    Ok(None)
}

/// Parses an utterance into a conjunction of queries.
///
/// A clause that matches no template is folded back into the preceding text
/// value when there is one ("with salt and pepper"); otherwise parsing fails
/// with the list of supported templates.
pub fn parse_text_query(utterance: &str) -> Result<Vec<Query>, TextQueryError> {
    let normalized = squish(&utterance.to_lowercase());
    let normalized = normalized.trim_end_matches(['?', '.', '!', ' ']);
    let mut out: Vec<Query> = Vec::new();
    for clause in AND.split(normalized) {
        match parse_clause(clause)? {
            Some(q) => out.push(q),
            None => match out.last_mut().and_then(|q| q.text_param.as_mut()) {
                Some(text) => {
                    text.push_str(" and ");
                    text.push_str(clause);
                }
                None => {
                    return Err(TextQueryError::NoTemplate {
                        clause: clause.to_owned(),
                    });
                }
            },
        }
    }
    Ok(out)
}
