//! String normalization shared by parsing, matching and ingest.

/// Collapses runs of whitespace to a single space and trims both ends.
pub fn squish(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Case-folds and whitespace-normalizes an identifier-like string.
pub fn fold(s: &str) -> String {
    squish(&s.to_lowercase())
}

/// Lowercase alphanumeric tokens, splitting on everything else.
pub fn tokens(s: &str) -> Vec<String> {
    s.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Lowercase slug: alphanumerics kept, runs of anything else become one `-`.
pub fn slugify(s: &str) -> String {
    let slug = tokens(s).join("-");
    if slug.is_empty() {
        "recipe".to_owned()
    } else {
        slug
    }
}
