//! The recipe-as-plan data model and its JSON document format.
//!
//! A [`Recipe`] is metadata plus an ingredient set and an ordered list of
//! [`Instruction`]s. Each instruction holds the atomic [`Task`]s it is made of;
//! tasks carry the background knowledge (tools, failures and tips) attached to
//! a single cooking action.

use crate::text::{fold, squish};
use crate::units::Unit;
use serde::{Deserialize, Deserializer, Serialize};
use std::fmt;

/// Document format version written to and required in every recipe file.
pub const R3_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Recipe {
    pub r3_version: u32,
    pub id: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cuisine: Option<String>,
    /// Minutes.
    pub prep_time: u32,
    /// Minutes.
    pub cook_time: u32,
    pub servings: u32,
    pub ingredients: Vec<Ingredient>,
    pub instructions: Vec<Instruction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ingredient {
    pub name: String,
    pub quantity: Quantity,
    #[serde(default)]
    pub allergens: Vec<AllergenInfo>,
    #[serde(default)]
    pub alternatives: Vec<String>,
    /// State of the ingredient as used, e.g. `grated` vs `sliced` cheese.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quality_characteristic: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_ref: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quantity {
    pub measure: f64,
    #[serde(deserialize_with = "unit_alias")]
    pub unit: Unit,
}

impl Quantity {
    pub fn new(measure: f64, unit: Unit) -> Self {
        Self { measure, unit }
    }

    pub fn unitless() -> Self {
        Self::new(0.0, Unit::Unitless)
    }
}

fn unit_alias<'de, D: Deserializer<'de>>(d: D) -> Result<Unit, D::Error> {
    let raw = String::deserialize(d)?;
    raw.parse().map_err(serde::de::Error::custom)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AllergenInfo {
    pub allergen_id: u32,
    pub category: String,
    pub source_ref: String,
    #[serde(default)]
    pub kg_ref: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instruction {
    pub original_text: String,
    #[serde(default)]
    pub input_condition: Vec<String>,
    #[serde(default)]
    pub output_condition: Vec<String>,
    pub tasks: Vec<Task>,
    /// Image paths relative to the corpus root.
    #[serde(default)]
    pub modality: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Task {
    pub action: String,
    pub objects: Vec<TaskObject>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_quality: Option<String>,
    #[serde(default)]
    pub tools: Vec<String>,
    #[serde(default)]
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskObject {
    pub role: Role,
    pub name: String,
}

impl TaskObject {
    pub fn new(role: Role, name: impl Into<String>) -> Self {
        Self {
            role,
            name: name.into(),
        }
    }
}

/// Position of an object in a task. `subject` and `object` name ingredients;
/// `with` names anything else the action uses (vessel, tool, intermediate).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Subject,
    Object,
    With,
}

impl Role {
    pub fn references_ingredient(self) -> bool {
        matches!(self, Role::Subject | Role::Object)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Failure {
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workaround: Option<String>,
}

impl Recipe {
    pub fn total_time(&self) -> u64 {
        u64::from(self.prep_time) + u64::from(self.cook_time)
    }

    pub fn task_count(&self) -> usize {
        self.instructions.iter().map(|i| i.tasks.len()).sum()
    }

    pub fn tasks(&self) -> impl Iterator<Item = &Task> {
        self.instructions.iter().flat_map(|i| i.tasks.iter())
    }

    pub fn allergen_categories(&self) -> impl Iterator<Item = &str> {
        self.ingredients
            .iter()
            .flat_map(|ing| ing.allergens.iter().map(|a| a.category.as_str()))
    }

    /// Image of the finished dish: the media attached to the last instruction.
    pub fn dish_images(&self) -> &[String] {
        self.instructions
            .last()
            .map(|i| i.modality.as_slice())
            .unwrap_or(&[])
    }

    pub fn ingredient_images(&self) -> impl Iterator<Item = &str> {
        self.ingredients
            .iter()
            .filter_map(|i| i.image_ref.as_deref())
    }

    /// Brings every string field into canonical form: identifier-like fields
    /// are case-folded, prose fields have whitespace collapsed, and the
    /// instruction's original text is left untouched.
    pub fn normalize(&mut self) {
        self.id = fold(&self.id);
        self.name = squish(&self.name);
        fold_opt(&mut self.cuisine);
        for ing in &mut self.ingredients {
            ing.name = fold(&ing.name);
            fold_all(&mut ing.alternatives);
            fold_opt(&mut ing.quality_characteristic);
            squish_opt(&mut ing.image_ref);
            for a in &mut ing.allergens {
                a.category = fold(&a.category);
                a.source_ref = squish(&a.source_ref);
                a.kg_ref = squish(&a.kg_ref);
            }
        }
        for ins in &mut self.instructions {
            squish_all(&mut ins.input_condition);
            squish_all(&mut ins.output_condition);
            squish_all(&mut ins.modality);
            for task in &mut ins.tasks {
                task.action = fold(&task.action);
                for o in &mut task.objects {
                    o.name = fold(&o.name);
                }
                fold_opt(&mut task.output_quality);
                fold_all(&mut task.tools);
                for f in &mut task.failures {
                    f.description = squish(&f.description);
                    squish_opt(&mut f.workaround);
                }
            }
        }
    }
}

fn fold_opt(v: &mut Option<String>) {
    if let Some(s) = v.as_mut() {
        *s = fold(s);
    }
}

fn squish_opt(v: &mut Option<String>) {
    if let Some(s) = v.as_mut() {
        *s = squish(s);
    }
}

fn fold_all(v: &mut [String]) {
    for s in v {
        *s = fold(s);
    }
}

fn squish_all(v: &mut [String]) {
    for s in v {
        *s = squish(s);
    }
}

/// A structurally malformed recipe document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// Dotted path to the offending field, `.` for the document root.
    pub field_path: String,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at `{}`: {}", self.field_path, self.message)
    }
}

impl std::error::Error for ParseError {}

/// Parses and normalizes one recipe document.
pub fn parse_recipe(json: &str) -> Result<Recipe, ParseError> {
    let de = &mut serde_json::Deserializer::from_str(json);
    let mut recipe: Recipe = serde_path_to_error::deserialize(de).map_err(|e| ParseError {
        field_path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    if recipe.r3_version != R3_VERSION {
        return Err(ParseError {
            field_path: "r3_version".into(),
            message: format!(
                "unsupported version {} (expected {R3_VERSION})",
                recipe.r3_version
            ),
        });
    }
    recipe.normalize();
    Ok(recipe)
}

/// Canonical document text: two-space indented JSON with a trailing newline.
pub fn to_canonical_json(recipe: &Recipe) -> String {
    let mut out = serde_json::to_string_pretty(recipe).expect("recipe serializes");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "r3_version": 1,
        "id": "Boiled-Egg",
        "name": "  Boiled   Egg ",
        "prep_time": 1,
        "cook_time": 9,
        "servings": 1,
        "ingredients": [
            {"name": " Egg ", "quantity": {"measure": 2, "unit": "pieces"}}
        ],
        "instructions": [
            {"original_text": "Boil the egg.",
             "tasks": [{"action": "Boil", "objects": [{"role": "object", "name": "EGG"}]}]}
        ]
    }"#;

    #[test]
    fn parse_normalizes_strings_and_units() {
        let r = parse_recipe(MINIMAL).unwrap();
        assert_eq!(r.id, "boiled-egg");
        assert_eq!(r.name, "Boiled Egg");
        assert_eq!(r.ingredients[0].name, "egg");
        assert_eq!(r.ingredients[0].quantity.unit, Unit::Piece);
        assert_eq!(r.instructions[0].tasks[0].action, "boil");
        assert_eq!(r.instructions[0].tasks[0].objects[0].name, "egg");
        assert_eq!(r.total_time(), 10);
        assert_eq!(r.task_count(), 1);
    }

    #[test]
    fn canonical_text_is_a_fixed_point() {
        let r = parse_recipe(MINIMAL).unwrap();
        let text = to_canonical_json(&r);
        let again = parse_recipe(&text).unwrap();
        assert_eq!(again, r);
        assert_eq!(to_canonical_json(&again), text);
    }

    #[test]
    fn missing_version_reports_path() {
        let err = parse_recipe(r#"{"id": "x"}"#).unwrap_err();
        assert!(err.message.contains("r3_version"), "{err}");
    }

    #[test]
    fn bad_unit_reports_field_path() {
        let doc = MINIMAL.replace("\"pieces\"", "\"furlong\"");
        let err = parse_recipe(&doc).unwrap_err();
        assert_eq!(err.field_path, "ingredients[0].quantity.unit");
    }

    #[test]
    fn bad_role_is_structural() {
        let doc = MINIMAL.replace("\"object\"", "\"victim\"");
        let err = parse_recipe(&doc).unwrap_err();
        assert!(
            err.field_path
                .starts_with("instructions[0].tasks[0].objects[0]"),
            "{err}"
        );
    }

    #[test]
    fn version_two_rejected() {
        let doc = MINIMAL.replace("\"r3_version\": 1", "\"r3_version\": 2");
        assert_eq!(parse_recipe(&doc).unwrap_err().field_path, "r3_version");
    }
}
