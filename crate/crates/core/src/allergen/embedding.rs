use crate::text::tokens;
use std::collections::HashMap;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("cannot read embeddings {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("embedding table is empty")]
    Empty,
}

/// Precomputed token vectors, one fixed dimension for the whole table.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dimension: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    /// Parses the `token v1 v2 ... vd` line format. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self, EmbeddingError> {
        let mut dimension = None;
        let mut vectors = HashMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split_whitespace();
            let token = fields.next().unwrap_or_default().to_lowercase();
            let values = fields
                .map(|f| {
                    f.parse::<f64>().map_err(|e| EmbeddingError::Malformed {
                        line: line_no,
                        message: format!("`{f}`: {e}"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            if values.is_empty() {
                return Err(EmbeddingError::Malformed {
                    line: line_no,
                    message: format!("token `{token}` has no components"),
                });
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(EmbeddingError::Malformed {
                    line: line_no,
                    message: format!("token `{token}` has a non-finite component"),
                });
            }
            match dimension {
                None => dimension = Some(values.len()),
                Some(d) if d != values.len() => {
                    return Err(EmbeddingError::Malformed {
                        line: line_no,
                        message: format!("expected {d} components, found {}", values.len()),
                    })
                }
                Some(_) => {}
            }
            if vectors.insert(token.clone(), values).is_some() {
                return Err(EmbeddingError::Malformed {
                    line: line_no,
                    message: format!("duplicate token `{token}`"),
                });
            }
        }
        let dimension = dimension.ok_or(EmbeddingError::Empty)?;
        Ok(Self { dimension, vectors })
    }

    pub fn load(path: &Path) -> Result<Self, EmbeddingError> {
        let text = std::fs::read_to_string(path).map_err(|source| EmbeddingError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(token).map(Vec::as_slice)
    }

    /// Mean of the in-vocabulary token vectors of a (possibly multi-word)
    /// name. `None` when no token is in the table.
    pub fn phrase_vector(&self, phrase: &str) -> Option<Vec<f64>> {
        let mut sum = vec![0.0; self.dimension];
        let mut count = 0usize;
        for tok in tokens(phrase) {
            if let Some(v) = self.vectors.get(&tok) {
                for (s, x) in sum.iter_mut().zip(v) {
                    *s += x;
                }
                count += 1;
            }
        }
        if count == 0 {
            return None;
        }
        let n = count as f64;
        Some(sum.into_iter().map(|s| s / n).collect())
    }
}

/// Cosine similarity clamped to `[-1, 1]`. Zero vectors score 0; identical
/// vectors score exactly 1.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let norm_a = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let norm_b = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm_a == 0.0 || norm_b == 0.0 {
        return 0.0;
    }
    if a == b {
        return 1.0;
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    (dot / (norm_a * norm_b)).clamp(-1.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TABLE: &str = "# test\negg 1 0 0\nyolk 0.9 0.1 0\nwhites 0.8 0.2 0.1\nwater 0 0 1\n";

    #[test]
    fn parse_and_phrase_mean() {
        let t = EmbeddingTable::parse(TABLE).unwrap();
        assert_eq!(t.dimension(), 3);
        assert_eq!(t.len(), 4);
        let v = t.phrase_vector("Egg Whites").unwrap();
        assert_eq!(v, vec![0.9, 0.1, 0.05]);
        assert!(t.phrase_vector("zzxqv").is_none());
    }

    #[test]
    fn rejects_ragged_and_non_finite() {
        assert!(matches!(
            EmbeddingTable::parse("a 1 2\nb 1\n"),
            Err(EmbeddingError::Malformed { line: 2, .. })
        ));
        assert!(EmbeddingTable::parse("a 1 NaN\n").is_err());
        assert!(EmbeddingTable::parse("a 1 inf\n").is_err());
        assert!(matches!(
            EmbeddingTable::parse("\n# only\n"),
            Err(EmbeddingError::Empty)
        ));
    }

    #[test]
    fn cosine_basics() {
        assert_eq!(cosine(&[1.0, 2.0], &[1.0, 2.0]), 1.0);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]), 0.0);
        assert_eq!(cosine(&[1.0, 0.0], &[-1.0, 0.0]), -1.0);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 0.0]), 0.0);
    }

    fn vec3() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-100.0f64..100.0, 3)
    }

    proptest! {
        #[test]
        fn cosine_self_is_one(v in vec3()) {
            prop_assume!(v.iter().any(|x| *x != 0.0));
            prop_assert_eq!(cosine(&v, &v), 1.0);
        }

        #[test]
        fn cosine_symmetric_and_bounded(a in vec3(), b in vec3()) {
            let ab = cosine(&a, &b);
            prop_assert_eq!(ab, cosine(&b, &a));
            prop_assert!((-1.0..=1.0).contains(&ab));
        }

        #[test]
        fn cosine_scale_invariant(a in vec3(), b in vec3(), k in 0.1f64..10.0) {
            let scaled: Vec<f64> = a.iter().map(|x| x * k).collect();
            prop_assert!((cosine(&a, &b) - cosine(&scaled, &b)).abs() < 1e-9);
        }
    }
}
