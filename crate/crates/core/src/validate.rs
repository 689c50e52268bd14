//! Invariant checks over a parsed [`Recipe`].
//!
//! Violations are values, not errors: [`validate_recipe`] reports every
//! problem it finds. Ingredient paths are keyed by ingredient name rather than
//! position so that reordering the ingredient list yields the same set.

use crate::allergen::AllergenLexicon;
use crate::model::{Recipe, R3_VERSION};
use crate::text::fold;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    UnsupportedVersion,
    MissingId,
    MissingName,
    InvalidServings,
    MissingIngredients,
    MissingInstructions,
    EmptyIngredientName,
    NonCanonicalName,
    DuplicateIngredient,
    SelfAlternative,
    InvalidQuantity,
    UnknownAllergenCategory,
    InconsistentAllergenId,
    EmptyOriginalText,
    MissingTasks,
    EmptyAction,
    NonCanonicalAction,
    MissingObjects,
    EmptyObjectName,
    UndeclaredIngredient,
    EmptyFailureDescription,
    MissingMedia,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::UnsupportedVersion => "UNSUPPORTED_VERSION",
            Self::MissingId => "MISSING_ID",
            Self::MissingName => "MISSING_NAME",
            Self::InvalidServings => "INVALID_SERVINGS",
            Self::MissingIngredients => "MISSING_INGREDIENTS",
            Self::MissingInstructions => "MISSING_INSTRUCTIONS",
            Self::EmptyIngredientName => "EMPTY_INGREDIENT_NAME",
            Self::NonCanonicalName => "NON_CANONICAL_NAME",
            Self::DuplicateIngredient => "DUPLICATE_INGREDIENT",
            Self::SelfAlternative => "SELF_ALTERNATIVE",
            Self::InvalidQuantity => "INVALID_QUANTITY",
            Self::UnknownAllergenCategory => "UNKNOWN_ALLERGEN_CATEGORY",
            Self::InconsistentAllergenId => "INCONSISTENT_ALLERGEN_ID",
            Self::EmptyOriginalText => "EMPTY_ORIGINAL_TEXT",
            Self::MissingTasks => "MISSING_TASKS",
            Self::EmptyAction => "EMPTY_ACTION",
            Self::NonCanonicalAction => "NON_CANONICAL_ACTION",
            Self::MissingObjects => "MISSING_OBJECTS",
            Self::EmptyObjectName => "EMPTY_OBJECT_NAME",
            Self::UndeclaredIngredient => "UNDECLARED_INGREDIENT",
            Self::EmptyFailureDescription => "EMPTY_FAILURE_DESCRIPTION",
            Self::MissingMedia => "MISSING_MEDIA",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.code, self.path, self.message)
    }
}

/// Optional external references a recipe is checked against.
#[derive(Debug, Clone, Copy, Default)]
pub struct ValidationContext<'a> {
    /// When set, allergen categories and ids must agree with it.
    pub lexicon: Option<&'a AllergenLexicon>,
    /// When set, media paths are resolved relative to it and must be readable
    /// files.
    pub media_root: Option<&'a Path>,
}

struct Collector(BTreeSet<Violation>);

impl Collector {
    fn push(&mut self, code: ViolationCode, path: impl Into<String>, message: impl Into<String>) {
        self.0.insert(Violation {
            code,
            path: path.into(),
            message: message.into(),
        });
    }
}

/// Returns every invariant violation of `recipe`, sorted; empty means valid.
pub fn validate_recipe(recipe: &Recipe, ctx: &ValidationContext<'_>) -> Vec<Violation> {
    use ViolationCode::*;
    let mut out = Collector(BTreeSet::new());

    if recipe.r3_version != R3_VERSION {
        out.push(
            UnsupportedVersion,
            "r3_version",
            format!("expected {R3_VERSION}, found {}", recipe.r3_version),
        );
    }
    if recipe.id.trim().is_empty() {
        out.push(MissingId, "id", "recipe id is empty");
    }
    if recipe.name.trim().is_empty() {
        out.push(MissingName, "name", "recipe name is empty");
    }
    if recipe.servings == 0 {
        out.push(InvalidServings, "servings", "servings must be positive");
    }
    if recipe.ingredients.is_empty() {
        out.push(
            MissingIngredients,
            "ingredients",
            "recipe declares no ingredients",
        );
    }
    if recipe.instructions.is_empty() {
        out.push(
            MissingInstructions,
            "instructions",
            "recipe has no instructions",
        );
    }

    let mut seen = HashSet::new();
    let mut category_ids: BTreeMap<&str, BTreeSet<u32>> = BTreeMap::new();
    for ing in &recipe.ingredients {
        let path = format!("ingredients[{:?}]", ing.name);
        if ing.name.trim().is_empty() {
            out.push(EmptyIngredientName, &path, "ingredient name is empty");
        } else if ing.name != fold(&ing.name) {
            out.push(
                NonCanonicalName,
                format!("{path}.name"),
                "ingredient name must be lowercase and whitespace-normalized",
            );
        }
        if !seen.insert(ing.name.as_str()) {
            out.push(
                DuplicateIngredient,
                &path,
                "ingredient declared more than once",
            );
        }
        if ing.alternatives.contains(&ing.name) {
            out.push(
                SelfAlternative,
                format!("{path}.alternatives"),
                "an ingredient cannot be its own alternative",
            );
        }
        let m = ing.quantity.measure;
        if !m.is_finite() || m < 0.0 {
            out.push(
                InvalidQuantity,
                format!("{path}.quantity.measure"),
                format!("measure must be a finite non-negative number, found {m}"),
            );
        }
        if let (Some(root), Some(image)) = (ctx.media_root, ing.image_ref.as_deref()) {
            if !is_readable_file(&root.join(image)) {
                out.push(
                    MissingMedia,
                    format!("{path}.image_ref"),
                    format!("cannot read `{image}`"),
                );
            }
        }
        for a in &ing.allergens {
            let apath = format!("{path}.allergens[{:?}]", a.category);
            category_ids
                .entry(a.category.as_str())
                .or_default()
                .insert(a.allergen_id);
            if let Some(lex) = ctx.lexicon {
                match lex.class_by_category(&a.category) {
                    None => out.push(
                        UnknownAllergenCategory,
                        &apath,
                        format!("lexicon has no allergen class `{}`", a.category),
                    ),
                    Some(class) if class.allergen_id != a.allergen_id => out.push(
                        InconsistentAllergenId,
                        &apath,
                        format!(
                            "category `{}` has id {} in the lexicon, found {}",
                            a.category, class.allergen_id, a.allergen_id
                        ),
                    ),
                    Some(_) => {}
                }
            }
        }
    }
    for (category, ids) in category_ids {
        if ids.len() > 1 {
            out.push(
                InconsistentAllergenId,
                format!("allergens[{category:?}]"),
                format!("category `{category}` appears with ids {ids:?}"),
            );
        }
    }

    let declared: HashSet<&str> = recipe.ingredients.iter().map(|i| i.name.as_str()).collect();
    for (i, ins) in recipe.instructions.iter().enumerate() {
        let ipath = format!("instructions[{i}]");
        if ins.original_text.trim().is_empty() {
            out.push(
                EmptyOriginalText,
                format!("{ipath}.original_text"),
                "original text is empty",
            );
        }
        if ins.tasks.is_empty() {
            out.push(
                MissingTasks,
                format!("{ipath}.tasks"),
                "instruction has no tasks",
            );
        }
        if let Some(root) = ctx.media_root {
            for (m, media) in ins.modality.iter().enumerate() {
                if !is_readable_file(&root.join(media)) {
                    out.push(
                        MissingMedia,
                        format!("{ipath}.modality[{m}]"),
                        format!("cannot read `{media}`"),
                    );
                }
            }
        }
        for (t, task) in ins.tasks.iter().enumerate() {
            let tpath = format!("{ipath}.tasks[{t}]");
            if task.action.trim().is_empty() {
                out.push(EmptyAction, format!("{tpath}.action"), "action is empty");
            } else if task.action != fold(&task.action) {
                out.push(
                    NonCanonicalAction,
                    format!("{tpath}.action"),
                    "action must be lowercase and whitespace-normalized",
                );
            }
            if task.objects.is_empty() {
                out.push(
                    MissingObjects,
                    format!("{tpath}.objects"),
                    "task has no objects",
                );
            }
            for (o, obj) in task.objects.iter().enumerate() {
                let opath = format!("{tpath}.objects[{o}]");
                if obj.name.trim().is_empty() {
                    out.push(EmptyObjectName, opath, "object name is empty");
                } else if obj.role.references_ingredient() && !declared.contains(obj.name.as_str())
                {
                    out.push(
                        UndeclaredIngredient,
                        opath,
                        format!(
                            "recipe `{}` uses ingredient `{}` which is not in its ingredient list",
                            recipe.id, obj.name
                        ),
                    );
                }
            }
            for (f, failure) in task.failures.iter().enumerate() {
                if failure.description.trim().is_empty() {
                    out.push(
                        EmptyFailureDescription,
                        format!("{tpath}.failures[{f}].description"),
                        "failure description is empty",
                    );
                }
            }
        }
    }

    out.0.into_iter().collect()
}

fn is_readable_file(path: &Path) -> bool {
    std::fs::File::open(path)
        .and_then(|f| f.metadata())
        .map(|m| m.is_file())
        .unwrap_or(false)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use crate::model::*;
    use crate::units::Unit;

    fn ingredient(name: &str, measure: f64, unit: Unit) -> Ingredient {
        Ingredient {
            name: name.into(),
            quantity: Quantity::new(measure, unit),
            allergens: Vec::new(),
            alternatives: Vec::new(),
            quality_characteristic: None,
            image_ref: None,
        }
    }

    fn task(action: &str, objects: &[(Role, &str)]) -> Task {
        Task {
            action: action.into(),
            objects: objects
                .iter()
                .map(|(r, n)| TaskObject::new(*r, *n))
                .collect(),
            output_quality: None,
            tools: Vec::new(),
            failures: Vec::new(),
        }
    }

    /// Every optional field populated, no media.
    pub fn soup() -> Recipe {
        let mut egg = ingredient("egg", 2.0, Unit::Piece);
        egg.allergens.push(AllergenInfo {
            allergen_id: 0,
            category: "egg".into(),
            source_ref: "test".into(),
            kg_ref: String::new(),
        });
        let mut noodles = ingredient("noodles", 100.0, Unit::G);
        noodles.allergens.push(AllergenInfo {
            allergen_id: 3,
            category: "wheat/gluten".into(),
            source_ref: "test".into(),
            kg_ref: "kg:wheat".into(),
        });
        noodles.alternatives.push("rice noodles".into());
        let mut stock = ingredient("chicken stock", 1.0, Unit::L);
        stock.quality_characteristic = Some("hot".into());

        let mut whisk = task("whisk", &[(Role::Object, "egg"), (Role::With, "fork")]);
        whisk.tools.push("fork".into());
        whisk.output_quality = Some("beaten".into());
        whisk.failures.push(Failure {
            description: "Egg clumps in the bowl".into(),
            workaround: Some("Add a splash of water".into()),
        });
        Recipe {
            r3_version: R3_VERSION,
            id: "egg-drop-chicken-noodle-soup".into(),
            name: "Egg-drop Chicken Noodle Soup".into(),
            cuisine: Some("chinese".into()),
            prep_time: 5,
            cook_time: 15,
            servings: 2,
            ingredients: vec![egg, noodles, stock],
            instructions: vec![
                Instruction {
                    original_text: "Crack the eggs and whisk them.".into(),
                    input_condition: vec!["available(egg)".into()],
                    output_condition: vec!["beaten(egg)".into()],
                    tasks: vec![task("crack", &[(Role::Object, "egg")]), whisk],
                    modality: Vec::new(),
                },
                Instruction {
                    original_text: "Boil the noodles in the stock, then drizzle in the egg.".into(),
                    input_condition: vec!["beaten(egg)".into()],
                    output_condition: vec!["cooked(soup)".into()],
                    tasks: vec![
                        task(
                            "boil",
                            &[(Role::Object, "noodles"), (Role::With, "chicken stock")],
                        ),
                        task("drizzle", &[(Role::Object, "egg"), (Role::With, "pot")]),
                    ],
                    modality: Vec::new(),
                },
            ],
        }
    }
}
