use base64::Engine as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use thiserror::Error;

/// Single default threshold shared by string and image similarity.
pub const DEFAULT_THRESHOLD: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum QueryKind {
    LengthAtMost,
    TimeAtMost,
    AllergenExcludeExplicit,
    IngredientExclude,
    IngredientInclude,
    NameMatch,
    CuisineMatch,
    ImageIngredient,
    ImageDish,
}

/// Which parameter a kind consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Param {
    Numeric,
    Text,
    Image,
}

impl QueryKind {
    pub const ALL: [QueryKind; 9] = [
        QueryKind::LengthAtMost,
        QueryKind::TimeAtMost,
        QueryKind::AllergenExcludeExplicit,
        QueryKind::IngredientExclude,
        QueryKind::IngredientInclude,
        QueryKind::NameMatch,
        QueryKind::CuisineMatch,
        QueryKind::ImageIngredient,
        QueryKind::ImageDish,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            QueryKind::LengthAtMost => "LengthAtMost",
            QueryKind::TimeAtMost => "TimeAtMost",
            QueryKind::AllergenExcludeExplicit => "AllergenExcludeExplicit",
            QueryKind::IngredientExclude => "IngredientExclude",
            QueryKind::IngredientInclude => "IngredientInclude",
            QueryKind::NameMatch => "NameMatch",
            QueryKind::CuisineMatch => "CuisineMatch",
            QueryKind::ImageIngredient => "ImageIngredient",
            QueryKind::ImageDish => "ImageDish",
        }
    }

    pub fn from_name(name: &str) -> Option<QueryKind> {
        Self::ALL.into_iter().find(|k| k.as_str() == name)
    }

    pub fn param(self) -> Param {
        match self {
            QueryKind::LengthAtMost | QueryKind::TimeAtMost => Param::Numeric,
            QueryKind::ImageIngredient | QueryKind::ImageDish => Param::Image,
            _ => Param::Text,
        }
    }

    /// Process constraints restrict how a recipe is prepared; everything
    /// else constrains the outcome.
    pub fn is_process(self) -> bool {
        self.param() == Param::Numeric
    }

    /// Kinds whose result depends on the similarity threshold.
    pub fn is_similarity_based(self) -> bool {
        !self.is_process()
    }

    /// Exclusion kinds keep recipes that have *no* similar field, so raising
    /// their threshold can only grow the result.
    pub fn is_exclusion(self) -> bool {
        matches!(
            self,
            QueryKind::AllergenExcludeExplicit | QueryKind::IngredientExclude
        )
    }
}

impl fmt::Display for QueryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Raw image payload; base64 in JSON.
#[derive(Clone, PartialEq, Eq)]
pub struct ImageBytes(pub Vec<u8>);

impl fmt::Debug for ImageBytes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ImageBytes({} bytes)", self.0.len())
    }
}

impl Serialize for ImageBytes {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&base64::engine::general_purpose::STANDARD.encode(&self.0))
    }
}

impl<'de> Deserialize<'de> for ImageBytes {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        base64::engine::general_purpose::STANDARD
            .decode(s.as_bytes())
            .map(ImageBytes)
            .map_err(serde::de::Error::custom)
    }
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Query {
    pub kind: QueryKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text_param: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numeric_param: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_param: Option<ImageBytes>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QueryError {
    #[error("unknown query kind `{0}`")]
    UnknownKind(String),
    #[error("{kind} query: {message}")]
    Parameters { kind: QueryKind, message: String },
    #[error("threshold must lie in [0, 1], found {0}")]
    Threshold(f64),
    #[error("empty query: at least one constraint is required")]
    Empty,
    #[error("malformed query: {0}")]
    Malformed(String),
    #[error("query image: {0}")]
    Image(String),
}

impl Query {
    fn bare(kind: QueryKind) -> Self {
        Self {
            kind,
            text_param: None,
            numeric_param: None,
            image_param: None,
            threshold: DEFAULT_THRESHOLD,
        }
    }

    pub fn numeric(kind: QueryKind, value: u64) -> Self {
        Self {
            numeric_param: Some(value),
            ..Self::bare(kind)
        }
    }

    pub fn text(kind: QueryKind, value: impl Into<String>) -> Self {
        Self {
            text_param: Some(value.into()),
            ..Self::bare(kind)
        }
    }

    pub fn image(kind: QueryKind, bytes: Vec<u8>) -> Self {
        Self {
            image_param: Some(ImageBytes(bytes)),
            ..Self::bare(kind)
        }
    }

    pub fn length_at_most(steps: u64) -> Self {
        Self::numeric(QueryKind::LengthAtMost, steps)
    }

    pub fn time_at_most(minutes: u64) -> Self {
        Self::numeric(QueryKind::TimeAtMost, minutes)
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    /// Checks that exactly the parameter the kind demands is present.
    pub fn check(&self) -> Result<(), QueryError> {
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(QueryError::Threshold(self.threshold));
        }
        let want = self.kind.param();
        let have = [
            (Param::Numeric, self.numeric_param.is_some()),
            (Param::Text, self.text_param.is_some()),
            (Param::Image, self.image_param.is_some()),
        ];
        for (param, present) in have {
            let name = match param {
                Param::Numeric => "numeric_param",
                Param::Text => "text_param",
                Param::Image => "image_param",
            };
            if param == want && !present {
                return Err(QueryError::Parameters {
                    kind: self.kind,
                    message: format!("`{name}` is required"),
                });
            }
            if param != want && present {
                return Err(QueryError::Parameters {
                    kind: self.kind,
                    message: format!("`{name}` is not accepted"),
                });
            }
        }
        if want == Param::Text
            && self
                .text_param
                .as_deref()
                .is_some_and(|t| t.trim().is_empty())
        {
            return Err(QueryError::Parameters {
                kind: self.kind,
                message: "`text_param` is empty".into(),
            });
        }
        Ok(())
    }

    /// Parses a JSON query: one object, or an array meaning a conjunction.
    pub fn conjunction_from_json(value: serde_json::Value) -> Result<Vec<Query>, QueryError> {
        let items = match value {
            serde_json::Value::Array(items) => items,
            other => vec![other],
        };
        if items.is_empty() {
            return Err(QueryError::Empty);
        }
        items
            .into_iter()
            .map(|item| {
                if let Some(kind) = item.get("kind").and_then(|k| k.as_str()) {
                    if QueryKind::from_name(kind).is_none() {
                        return Err(QueryError::UnknownKind(kind.to_owned()));
                    }
                }
                let q: Query = serde_json::from_value(item)
                    .map_err(|e| QueryError::Malformed(e.to_string()))?;
                q.check()?;
                Ok(q)
            })
            .collect()
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.text_param, self.numeric_param, &self.image_param) {
            (Some(t), _, _) => write!(f, "{}({t:?})", self.kind),
            (_, Some(n), _) => write!(f, "{}({n})", self.kind),
            (_, _, Some(img)) => write!(f, "{}(<image {} bytes>)", self.kind, img.0.len()),
            _ => write!(f, "{}()", self.kind),
        }
    }
}
