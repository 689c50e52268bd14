//! Semi-automated conversion of plain-text recipes into draft documents.
//!
//! The draft is always structurally complete. Whatever could not be derived
//! from the text gets a placeholder and an entry in
//! [`IngestReport::unresolved`] for a human curator to fill in.

use crate::allergen::{AllergenLexicon, AllergenTagger, EmbeddingTable};
use crate::model::{Ingredient, Instruction, Quantity, Recipe, Role, Task, TaskObject, R3_VERSION};
use crate::text::{fold, slugify, squish};
use crate::units::Unit;
use crate::validate::{validate_recipe, ValidationContext};
use regex::Regex;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashSet};
use std::path::Path;
use std::sync::LazyLock;
use thiserror::Error;

/// Placeholder written into draft fields that need manual curation.
pub const UNRESOLVED: &str = "__unresolved__";
/// Action given to fragments in which no known verb was found.
pub const UNKNOWN_ACTION: &str = "unknown";

const BUILTIN_VERBS: &str = include_str!("../data/verbs.txt");

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("raw recipe has no instructions")]
    NoInstructions,
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed raw recipe: {0}")]
    Malformed(String),
}

/// A recipe as found in plain-text sources.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRecipe {
    pub title: String,
    #[serde(default)]
    pub ingredients: Vec<String>,
    pub steps: Vec<String>,
    /// Images per step, aligned with `steps`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_images: Option<Vec<StepImages>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cuisine: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prep_time: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cook_time: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub servings: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StepImages {
    One(String),
    Many(Vec<String>),
}

impl StepImages {
    fn paths(&self) -> Vec<String> {
        match self {
            StepImages::One(p) => vec![p.clone()],
            StepImages::Many(ps) => ps.clone(),
        }
    }
}

impl RawRecipe {
    pub fn from_json(json: &str) -> Result<Self, IngestError> {
        serde_json::from_str(json).map_err(|e| IngestError::Malformed(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, IngestError> {
        let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Unresolved {
    pub field_path: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestReport {
    pub draft: Recipe,
    /// Sorted by field path.
    pub unresolved: Vec<Unresolved>,
}

/// Known cooking verbs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerbLexicon(BTreeSet<String>);

impl VerbLexicon {
    pub fn parse(text: &str) -> Self {
        Self(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(fold)
                .collect(),
        )
    }

    pub fn builtin() -> Self {
        Self::parse(BUILTIN_VERBS)
    }

    pub fn load(path: &Path) -> Result<Self, IngestError> {
        std::fs::read_to_string(path)
            .map(|t| Self::parse(&t))
            .map_err(|source| IngestError::Io {
                path: path.display().to_string(),
                source,
            })
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, verb: &str) -> bool {
        self.0.contains(verb)
    }

    /// Base verb for an inflected word ("whisked", "chopping", "adds").
    pub fn lemma(&self, word: &str) -> Option<&str> {
        let w = word.to_lowercase();
        let mut candidates = vec![w.clone()];
        for suffix in ["ing", "ed", "es", "s", "d"] {
            if let Some(stem) = w.strip_suffix(suffix) {
                candidates.push(stem.to_owned());
                candidates.push(format!("{stem}e"));
                let chars: Vec<char> = stem.chars().collect();
                if chars.len() >= 2 && chars[chars.len() - 1] == chars[chars.len() - 2] {
                    candidates.push(chars[..chars.len() - 1].iter().collect());
                }
            }
        }
        candidates
            .into_iter()
            .find_map(|c| self.0.get(c.as_str()).map(String::as_str))
    }
}

impl Default for VerbLexicon {
    fn default() -> Self {
        Self::builtin()
    }
}

/// Lexicons consulted during ingest.
#[derive(Debug, Clone, Copy)]
pub struct Lexicons<'a> {
    pub allergens: &'a AllergenLexicon,
    pub embeddings: Option<&'a EmbeddingTable>,
    pub verbs: &'a VerbLexicon,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedLine {
    pub quantity: Quantity,
    pub name: String,
    pub quality_characteristic: Option<String>,
    /// False when no leading number (or no name) could be recognised.
    pub resolved: bool,
}

const VULGAR: &[(char, f64)] = &[
    ('½', 0.5),
    ('⅓', 1.0 / 3.0),
    ('⅔', 2.0 / 3.0),
    ('¼', 0.25),
    ('¾', 0.75),
    ('⅕', 0.2),
    ('⅖', 0.4),
    ('⅗', 0.6),
    ('⅘', 0.8),
    ('⅙', 1.0 / 6.0),
    ('⅚', 5.0 / 6.0),
    ('⅛', 0.125),
    ('⅜', 0.375),
    ('⅝', 0.625),
    ('⅞', 0.875),
];

static NUMBER: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"^(?:(?P<whole>[0-9]+)\s+(?P<mn>[0-9]+)/(?P<md>[0-9]+)|(?P<n>[0-9]+)/(?P<d>[0-9]+)|(?P<dec>[0-9]+(?:\.[0-9]+)?)\s*(?P<vf>[½⅓⅔¼¾⅕⅖⅗⅘⅙⅚⅛⅜⅝⅞])?|(?P<v>[½⅓⅔¼¾⅕⅖⅗⅘⅙⅚⅛⅜⅝⅞]))",
    )
    .expect("number regex")
});

fn vulgar(c: &str) -> f64 {
    let ch = c.chars().next().unwrap_or_default();
    VULGAR
        .iter()
        .find(|(v, _)| *v == ch)
        .map_or(0.0, |(_, x)| *x)
}

fn ratio(n: &str, d: &str) -> Option<f64> {
    let n: f64 = n.parse().ok()?;
    let d: f64 = d.parse().ok()?;
    (d != 0.0).then_some(n / d)
}

fn number(caps: &regex::Captures<'_>) -> Option<f64> {
    if let Some(whole) = caps.name("whole") {
        ratio(&caps["mn"], &caps["md"])
            .and_then(|f| whole.as_str().parse::<f64>().ok().map(|w| w + f))
    } else if caps.name("n").is_some() {
        ratio(&caps["n"], &caps["d"])
    } else if let Some(dec) = caps.name("dec") {
        dec.as_str()
            .parse::<f64>()
            .ok()
            .map(|d| d + caps.name("vf").map_or(0.0, |v| vulgar(v.as_str())))
    } else {
        caps.name("v").map(|v| vulgar(v.as_str()))
    }
}

/// Count nouns that size a portion without being part of the ingredient
/// (`"2 cloves garlic"`, `"3 rashers bacon"`).
const COUNT_NOUNS: &[&str] = &[
    "clove", "cloves", "rasher", "rashers", "sprig", "sprigs", "handful", "handfuls", "stalk",
    "stalks", "can", "cans", "tin", "tins", "bunch", "bunches", "head", "heads", "knob", "knobs",
];

/// Lines that imply a single portion: `"a handful of basil"`, `"pinch of salt"`.
fn implicit_one(line: &str) -> Option<&str> {
    let (first, rest) = line.split_once(' ')?;
    let first = first.to_lowercase();
    if first == "a" || first == "an" {
        return Some(rest.trim_start());
    }
    let bare = first.trim_end_matches(',');
    (Unit::from_alias(bare).is_some() || COUNT_NOUNS.contains(&bare)).then_some(line)
}

/// Splits an ingredient line into quantity, name and trailing state
/// descriptor (`"1/2 cup cheese, grated"`).
pub fn parse_quantity(line: &str) -> ParsedLine {
    let line = squish(line);
    let unresolved = |name: &str| ParsedLine {
        quantity: Quantity::unitless(),
        name: fold(name),
        quality_characteristic: None,
        resolved: false,
    };
    let (measure, mut rest) = match NUMBER.captures(&line) {
        Some(caps) => (
            number(&caps),
            line[caps.get(0).map_or(0, |m| m.end())..].trim_start(),
        ),
        None => match implicit_one(&line) {
            Some(rest) => (Some(1.0), rest),
            None => return unresolved(&line),
        },
    };
    let Some(measure) = measure.filter(|m| m.is_finite()) else {
        return unresolved(&line);
    };
    let mut unit = Unit::Unitless;
    if let Some(token) = rest.split_whitespace().next() {
        let bare = token.trim_end_matches(',');
        if let Some(u) = Unit::from_alias(bare) {
            unit = u;
            rest = rest[token.len()..].trim_start();
        } else if COUNT_NOUNS.contains(&bare.to_lowercase().as_str()) {
            rest = rest[token.len()..].trim_start();
        }
    }
    if let Some(after_of) = rest.strip_prefix("of ") {
        rest = after_of;
    }
    let (name, quality) = match rest.split_once(',') {
        Some((n, q)) => (n, Some(fold(q)).filter(|q| !q.is_empty())),
        None => (rest, None),
    };
    let name = fold(name);
    if name.is_empty() {
        return ParsedLine {
            quantity: Quantity::new(measure, unit),
            name,
            quality_characteristic: quality,
            resolved: false,
        };
    }
    ParsedLine {
        quantity: Quantity::new(measure, unit),
        name,
        quality_characteristic: quality,
        resolved: true,
    }
}

/// Text form accepted back by [`parse_quantity`].
pub fn format_quantity_line(quantity: &Quantity, name: &str) -> String {
    format!("{} {} {}", quantity.measure, quantity.unit, name)
}

static DELIMITER: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)[.!?;]+(?:\s+|$)|,?\s+(?:and\s+then|then|and)\s+|,\s*then\s+")
        .expect("delimiter regex")
});

/// Splits a paragraph into fragments and the delimiters between them, such
/// that interleaving the two reproduces the paragraph exactly.
pub fn split_fragments(paragraph: &str) -> (Vec<&str>, Vec<&str>) {
    let mut fragments = Vec::new();
    let mut delimiters = Vec::new();
    let mut last = 0;
    for m in DELIMITER.find_iter(paragraph) {
        fragments.push(&paragraph[last..m.start()]);
        delimiters.push(m.as_str());
        last = m.end();
    }
    fragments.push(&paragraph[last..]);
    (fragments, delimiters)
}

fn words(s: &str) -> impl Iterator<Item = &str> {
    s.split(|c: char| !(c.is_alphanumeric() || c == '-' || c == '\''))
        .filter(|w| !w.is_empty())
}

/// Ingredient names mentioned in a fragment, longest names first so that
/// "egg noodles" is not also reported as "egg".
fn mentioned(fragment: &str, ingredients: &[String]) -> Vec<String> {
    let mut haystack = fragment.to_lowercase();
    let mut names: Vec<&String> = ingredients.iter().filter(|n| !n.is_empty()).collect();
    names.sort_by(|a, b| b.chars().count().cmp(&a.chars().count()).then(a.cmp(b)));
    let mut found = Vec::new();
    for name in names {
        let Ok(re) = Regex::new(&format!(r"\b{}(?:e?s)?\b", regex::escape(name))) else {
            continue;
        };
        let spans: Vec<_> = re.find_iter(&haystack).map(|m| m.range()).collect();
        if spans.is_empty() {
            continue;
        }
        found.push(name.clone());
        for span in spans.into_iter().rev() {
            let blank = " ".repeat(span.len());
            haystack.replace_range(span, &blank);
        }
    }
    found
}

/// Flag raised while segmenting, with a path relative to the instruction list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentFlag {
    pub field_path: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    pub instructions: Vec<Instruction>,
    pub flags: Vec<SegmentFlag>,
}

/// Breaks paragraphs into instructions of atomic tasks. Each fragment
/// becomes a task whose action is the first known verb in it and whose
/// objects are the declared ingredients it mentions. Blank paragraphs are
/// dropped.
pub fn segment_instructions(
    paragraphs: &[String],
    verbs: &VerbLexicon,
    ingredients: &[String],
) -> Segmentation {
    let mut instructions = Vec::new();
    let mut flags = Vec::new();
    for paragraph in paragraphs.iter().filter(|p| !p.trim().is_empty()) {
        let i = instructions.len();
        let mut tasks: Vec<Task> = Vec::new();
        let (fragments, _) = split_fragments(paragraph);
        for fragment in fragments.iter().filter(|f| !f.trim().is_empty()) {
            let t = tasks.len();
            let path = format!("instructions[{i}].tasks[{t}]");
            let action = words(fragment)
                .find_map(|w| verbs.lemma(w))
                .map(str::to_owned);
            let action = action.unwrap_or_else(|| {
                flags.push(SegmentFlag {
                    field_path: format!("{path}.action"),
                    reason: format!("no known cooking verb in {:?}", fragment.trim()),
                });
                UNKNOWN_ACTION.to_owned()
            });
            let mut objects: Vec<TaskObject> = mentioned(fragment, ingredients)
                .into_iter()
                .map(|n| TaskObject::new(Role::Object, n))
                .collect();
            let pronoun =
                words(fragment).any(|w| matches!(w.to_lowercase().as_str(), "it" | "them"));
            if objects.is_empty() && pronoun {
                if let Some(prev) = tasks.last() {
                    objects = prev.objects.clone();
                }
            }
            if objects.is_empty() {
                flags.push(SegmentFlag {
                    field_path: format!("{path}.objects"),
                    reason: format!("no declared ingredient found in {:?}", fragment.trim()),
                });
                objects.push(TaskObject::new(Role::With, UNRESOLVED));
            }
            tasks.push(Task {
                action,
                objects,
                output_quality: None,
                tools: Vec::new(),
                failures: Vec::new(),
            });
        }
        if tasks.is_empty() {
            // paragraph made only of delimiters
            flags.push(SegmentFlag {
                field_path: format!("instructions[{i}].tasks[0]"),
                reason: "no text to derive a task from".into(),
            });
            tasks.push(Task {
                action: UNKNOWN_ACTION.to_owned(),
                objects: vec![TaskObject::new(Role::With, UNRESOLVED)],
                output_quality: None,
                tools: Vec::new(),
                failures: Vec::new(),
            });
        }
        instructions.push(Instruction {
            original_text: paragraph.clone(),
            input_condition: Vec::new(),
            output_condition: Vec::new(),
            tasks,
            modality: Vec::new(),
        });
    }
    Segmentation {
        instructions,
        flags,
    }
}

/// Converts a raw recipe into a draft plus the list of fields that still
/// need curation.
pub fn ingest(raw: &RawRecipe, lexicons: Lexicons<'_>) -> Result<IngestReport, IngestError> {
    let mut unresolved: BTreeSet<Unresolved> = BTreeSet::new();
    let mut flag = |field_path: String, reason: String| {
        unresolved.insert(Unresolved { field_path, reason });
    };

    let title = squish(&raw.title);
    let name = if title.is_empty() {
        flag("name".into(), "raw recipe has no title".into());
        UNRESOLVED.to_owned()
    } else {
        title
    };

    let tagger = AllergenTagger::new(lexicons.allergens, lexicons.embeddings);
    let mut ingredients: Vec<Ingredient> = Vec::new();
    let mut seen = HashSet::new();
    for line in raw.ingredients.iter().filter(|l| !l.trim().is_empty()) {
        let parsed = parse_quantity(line);
        let name = if parsed.name.is_empty() {
            UNRESOLVED.to_owned()
        } else {
            parsed.name
        };
        if !seen.insert(name.clone()) {
            flag(
                format!("ingredients[{name:?}]"),
                format!("ingredient listed more than once ({:?})", line.trim()),
            );
            continue;
        }
        if !parsed.resolved {
            flag(
                format!("ingredients[{name:?}].quantity"),
                format!("no quantity recognised in {:?}", line.trim()),
            );
        }
        let allergens = if name == UNRESOLVED {
            Vec::new()
        } else {
            tagger.tag(&name)
        };
        ingredients.push(Ingredient {
            name,
            quantity: parsed.quantity,
            allergens,
            alternatives: Vec::new(),
            quality_characteristic: parsed.quality_characteristic,
            image_ref: None,
        });
    }
    if ingredients.is_empty() {
        flag(
            "ingredients".into(),
            "raw recipe lists no ingredients".into(),
        );
        ingredients.push(Ingredient {
            name: UNRESOLVED.to_owned(),
            quantity: Quantity::unitless(),
            allergens: Vec::new(),
            alternatives: Vec::new(),
            quality_characteristic: None,
            image_ref: None,
        });
    }

    // keep step images aligned with the paragraphs that survive
    let kept: Vec<(usize, String)> = raw
        .steps
        .iter()
        .enumerate()
        .filter(|(_, s)| !s.trim().is_empty())
        .map(|(i, s)| (i, s.clone()))
        .collect();
    if kept.is_empty() {
        return Err(IngestError::NoInstructions);
    }
    let names: Vec<String> = ingredients.iter().map(|i| i.name.clone()).collect();
    let paragraphs: Vec<String> = kept.iter().map(|(_, s)| s.clone()).collect();
    let segmented = segment_instructions(&paragraphs, lexicons.verbs, &names);
    let mut instructions = segmented.instructions;
    for f in segmented.flags {
        flag(f.field_path, f.reason);
    }
    if let Some(images) = &raw.step_images {
        for (ins, (orig, _)) in instructions.iter_mut().zip(&kept) {
            if let Some(imgs) = images.get(*orig) {
                ins.modality = imgs
                    .paths()
                    .into_iter()
                    .map(|p| squish(&p))
                    .filter(|p| !p.is_empty())
                    .collect();
            }
        }
    }

    let mut minutes = |value: Option<u32>, field: &str| {
        value.unwrap_or_else(|| {
            flag(field.into(), format!("{field} not stated in the source"));
            0
        })
    };
    let prep_time = minutes(raw.prep_time, "prep_time");
    let cook_time = minutes(raw.cook_time, "cook_time");
    let servings = match raw.servings.filter(|s| *s > 0) {
        Some(s) => s,
        None => {
            flag(
                "servings".into(),
                "servings not stated in the source".into(),
            );
            1
        }
    };

    let mut draft = Recipe {
        r3_version: R3_VERSION,
        id: slugify(&name),
        name,
        cuisine: raw.cuisine.as_deref().map(fold).filter(|c| !c.is_empty()),
        prep_time,
        cook_time,
        servings,
        ingredients,
        instructions,
    };
    draft.normalize();

    let ctx = ValidationContext {
        lexicon: Some(lexicons.allergens),
        media_root: None,
    };
    for v in validate_recipe(&draft, &ctx) {
        flag(v.path, format!("{}: {}", v.code, v.message));
    }

    Ok(IngestReport {
        draft,
        unresolved: unresolved.into_iter().collect(),
    })
}

/// `slug`, or `slug-2`, `slug-3`, ... for the first id not in `taken`.
pub fn unique_id(slug: &str, taken: impl Fn(&str) -> bool) -> String {
    if !taken(slug) {
        return slug.to_owned();
    }
    (2..)
        .map(|n| format!("{slug}-{n}"))
        .find(|c| !taken(c))
        .expect("unbounded suffix search")
}
