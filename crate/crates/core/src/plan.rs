//! Export of a recipe as a sequential plan trace.
//!
//! One step per task, in instruction order and then task order. Each step
//! carries the enclosing instruction's input and output conditions as its
//! preconditions and effects. The text form is line-oriented:
//!
//! ```text
//! ; plan egg-drop-chicken-noodle-soup
//! 0: (crack egg) ; pre={"available(egg)"} post={"beaten(egg)"}
//! 1: (boil noodles "chicken stock") ; pre={} post={}
//! ```
//!
//! Parameters that are not plain symbols are double-quoted with `\"` and `\\`
//! escapes; conditions are always quoted.

use crate::model::Recipe;
use crate::validate::{validate_recipe, ValidationContext, Violation};
use serde::Serialize;
use std::fmt::{self, Write as _};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlanStep {
    pub index: usize,
    pub action: String,
    pub parameters: Vec<String>,
    pub preconditions: Vec<String>,
    pub effects: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlanTrace {
    pub recipe_id: String,
    pub steps: Vec<PlanStep>,
}

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("recipe is invalid: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidRecipe(Vec<Violation>),
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("plan line {line}: {message}")]
pub struct PlanParseError {
    pub line: usize,
    pub message: String,
}

pub fn export_plan(recipe: &Recipe) -> Result<PlanTrace, PlanError> {
    let violations = validate_recipe(recipe, &ValidationContext::default());
    if !violations.is_empty() {
        return Err(PlanError::InvalidRecipe(violations));
    }
    let steps = recipe
        .instructions
        .iter()
        .flat_map(|ins| ins.tasks.iter().map(move |t| (ins, t)))
        .enumerate()
        .map(|(index, (ins, task))| PlanStep {
            index,
            action: task.action.clone(),
            parameters: task.objects.iter().map(|o| o.name.clone()).collect(),
            preconditions: ins.input_condition.clone(),
            effects: ins.output_condition.clone(),
        })
        .collect();
    Ok(PlanTrace {
        recipe_id: recipe.id.clone(),
        steps,
    })
}

fn is_symbol(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_alphanumeric() || matches!(c, '-' | '_' | '/' | '.' | '\'' | '&' | '+'))
}

fn write_quoted(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        if matches!(c, '"' | '\\') {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
}

fn write_term(out: &mut String, s: &str) {
    if is_symbol(s) {
        out.push_str(s);
    } else {
        write_quoted(out, s);
    }
}

fn write_set(out: &mut String, items: &[String]) {
    out.push('{');
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_quoted(out, item);
    }
    out.push('}');
}

impl PlanStep {
    fn render(&self) -> String {
        let mut out = format!("{}: (", self.index);
        write_term(&mut out, &self.action);
        for p in &self.parameters {
            out.push(' ');
            write_term(&mut out, p);
        }
        out.push_str(") ; pre=");
        write_set(&mut out, &self.preconditions);
        out.push_str(" post=");
        write_set(&mut out, &self.effects);
        out
    }
}

impl fmt::Display for PlanTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "; plan {}", self.recipe_id)?;
        for step in &self.steps {
            writeln!(f, "{}", step.render())?;
        }
        Ok(())
    }
}

impl PlanTrace {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        write!(s, "{self}").expect("writing to a String");
        s
    }

    /// Parses the text form. Lines starting with `;` are comments; a leading
    /// `; plan <id>` comment sets the recipe id.
    pub fn parse(text: &str) -> Result<Self, PlanParseError> {
        let mut recipe_id = String::new();
        let mut steps = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix(';') {
                if let Some(id) = comment.trim().strip_prefix("plan ") {
                    recipe_id = id.trim().to_owned();
                }
                continue;
            }
            let step = LineParser {
                chars: line.chars().collect(),
                pos: 0,
                line: i + 1,
            }
            .step()?;
            if step.index != steps.len() {
                return Err(PlanParseError {
                    line: i + 1,
                    message: format!("expected step {}, found {}", steps.len(), step.index),
                });
            }
            steps.push(step);
        }
        Ok(Self { recipe_id, steps })
    }
}

struct LineParser {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl LineParser {
    fn err(&self, message: impl Into<String>) -> PlanParseError {
        PlanParseError {
            line: self.line,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, lit: &str) -> Result<(), PlanParseError> {
        self.skip_ws();
        for c in lit.chars() {
            if self.peek() != Some(c) {
                return Err(self.err(format!("expected `{lit}` at column {}", self.pos + 1)));
            }
            self.pos += 1;
        }
        Ok(())
    }

    fn quoted(&mut self) -> Result<String, PlanParseError> {
        self.expect("\"")?;
        let mut s = String::new();
        loop {
            match self.peek() {
                None => return Err(self.err("unterminated string")),
                Some('"') => {
                    self.pos += 1;
                    return Ok(s);
                }
                Some('\\') => {
                    self.pos += 1;
                    let c = self.peek().ok_or_else(|| self.err("dangling escape"))?;
                    s.push(c);
                    self.pos += 1;
                }
                Some(c) => {
                    s.push(c);
                    self.pos += 1;
                }
            }
        }
    }

    fn term(&mut self) -> Result<String, PlanParseError> {
        self.skip_ws();
        if self.peek() == Some('"') {
            return self.quoted();
        }
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|c| !c.is_whitespace() && c != ')' && c != '(')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err(format!("expected a term at column {}", self.pos + 1)));
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn set(&mut self) -> Result<Vec<String>, PlanParseError> {
        self.expect("{")?;
        let mut items = Vec::new();
        self.skip_ws();
        if self.peek() == Some('}') {
            self.pos += 1;
            return Ok(items);
        }
        loop {
            items.push(self.quoted()?);
            self.skip_ws();
            match self.peek() {
                Some(',') => self.pos += 1,
                Some('}') => {
                    self.pos += 1;
                    return Ok(items);
                }
                _ => return Err(self.err("expected `,` or `}`")),
            }
        }
    }

    fn step(mut self) -> Result<PlanStep, PlanParseError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let index: usize = self.chars[start..self.pos]
            .iter()
            .collect::<String>()
            .parse()
            .map_err(|_| self.err("expected a step index"))?;
        self.expect(":")?;
        self.expect("(")?;
        let action = self.term()?;
        let mut parameters = Vec::new();
        loop {
            self.skip_ws();
            if self.peek() == Some(')') {
                self.pos += 1;
                break;
            }
            if self.peek().is_none() {
                return Err(self.err("unclosed `(`"));
            }
            parameters.push(self.term()?);
        }
        self.expect(";")?;
        self.expect("pre=")?;
        let preconditions = self.set()?;
        self.expect("post=")?;
        let effects = self.set()?;
        self.skip_ws();
        if self.pos != self.chars.len() {
            return Err(self.err("trailing characters after step"));
        }
        Ok(PlanStep {
            index,
            action,
            parameters,
            preconditions,
            effects,
        })
    }
}
