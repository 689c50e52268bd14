//! Canonical measurement units and their spelling aliases.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    G,
    Kg,
    Ml,
    L,
    Tsp,
    Tbsp,
    Cup,
    Piece,
    Slice,
    Pinch,
    Unitless,
}

impl Unit {
    pub const ALL: [Unit; 11] = [
        Unit::G,
        Unit::Kg,
        Unit::Ml,
        Unit::L,
        Unit::Tsp,
        Unit::Tbsp,
        Unit::Cup,
        Unit::Piece,
        Unit::Slice,
        Unit::Pinch,
        Unit::Unitless,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Unit::G => "g",
            Unit::Kg => "kg",
            Unit::Ml => "ml",
            Unit::L => "l",
            Unit::Tsp => "tsp",
            Unit::Tbsp => "tbsp",
            Unit::Cup => "cup",
            Unit::Piece => "piece",
            Unit::Slice => "slice",
            Unit::Pinch => "pinch",
            Unit::Unitless => "unitless",
        }
    }

    /// Resolves a canonical name or a known alias (case-insensitive, trailing
    /// period ignored).
    pub fn from_alias(token: &str) -> Option<Unit> {
        let t = token.trim().trim_end_matches('.').to_lowercase();
        let unit = match t.as_str() {
            "g" | "gr" | "gram" | "grams" | "gramme" | "grammes" => Unit::G,
            "kg" | "kgs" | "kilogram" | "kilograms" | "kilo" | "kilos" => Unit::Kg,
            "ml" | "milliliter" | "milliliters" | "millilitre" | "millilitres" => Unit::Ml,
            "l" | "liter" | "liters" | "litre" | "litres" => Unit::L,
            "tsp" | "tsps" | "teaspoon" | "teaspoons" | "t" => Unit::Tsp,
            "tbsp" | "tbsps" | "tbs" | "tablespoon" | "tablespoons" => Unit::Tbsp,
            "cup" | "cups" | "c" => Unit::Cup,
            "piece" | "pieces" | "pc" | "pcs" | "whole" => Unit::Piece,
            "slice" | "slices" => Unit::Slice,
            "pinch" | "pinches" | "dash" | "dashes" => Unit::Pinch,
            "unitless" => Unit::Unitless,
            _ => return None,
        };
        Some(unit)
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownUnit(pub String);

impl fmt::Display for UnknownUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown unit `{}`", self.0)
    }
}

impl std::error::Error for UnknownUnit {}

impl FromStr for Unit {
    type Err = UnknownUnit;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Unit::from_alias(s).ok_or_else(|| UnknownUnit(s.to_owned()))
    }
}
