use anyhow::{bail, Context, Result};
use r3_core::query::{StepUnit, DEFAULT_THRESHOLD};
use serde::Deserialize;
use std::path::{Path, PathBuf};

pub const DEFAULT_BIND: &str = "127.0.0.1:8080";
pub const DEFAULT_MAX_UPLOAD: usize = 5 * 1024 * 1024;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ServiceConfig {
    pub corpus_path: PathBuf,
    pub bind_address: String,
    pub default_threshold: f64,
    pub step_unit: StepUnit,
    pub max_upload_bytes: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            corpus_path: PathBuf::from("corpus"),
            bind_address: DEFAULT_BIND.to_owned(),
            default_threshold: DEFAULT_THRESHOLD,
            step_unit: StepUnit::Task,
            max_upload_bytes: DEFAULT_MAX_UPLOAD,
        }
    }
}

impl ServiceConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).context("invalid service config")?;
        config.check()?;
        Ok(config)
    }

    /// Reads `path` when given, then applies `R3_*` environment overrides.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut config = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("cannot read {}", p.display()))?;
                Self::from_toml(&text)?
            }
            None => Self::default(),
        };
        config.apply_env(|k| std::env::var(k).ok())?;
        Ok(config)
    }

    pub fn apply_env(&mut self, var: impl Fn(&str) -> Option<String>) -> Result<()> {
        if let Some(v) = var("R3_CORPUS") {
            self.corpus_path = v.into();
        }
        if let Some(v) = var("R3_BIND") {
            self.bind_address = v;
        }
        if let Some(v) = var("R3_THRESHOLD") {
            self.default_threshold = v.parse().with_context(|| format!("R3_THRESHOLD={v:?}"))?;
        }
        if let Some(v) = var("R3_STEP_UNIT") {
            self.step_unit = v.parse().map_err(anyhow::Error::msg)?;
        }
        if let Some(v) = var("R3_MAX_UPLOAD_BYTES") {
            self.max_upload_bytes = v
                .parse()
                .with_context(|| format!("R3_MAX_UPLOAD_BYTES={v:?}"))?;
        }
        self.check()
    }

    pub fn check(&self) -> Result<()> {
        if !(self.default_threshold > 0.0 && self.default_threshold <= 1.0) {
            bail!(
                "default_threshold must lie in (0, 1], found {}",
                self.default_threshold
            );
        }
        if self.max_upload_bytes == 0 {
            bail!("max_upload_bytes must be positive");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_and_env() {
        let mut c =
            ServiceConfig::from_toml("corpus_path = \"x\"\nstep_unit = \"instruction\"\n").unwrap();
        assert_eq!(c.corpus_path, PathBuf::from("x"));
        assert_eq!(c.step_unit, StepUnit::Instruction);
        assert_eq!(c.default_threshold, DEFAULT_THRESHOLD);
        c.apply_env(|k| (k == "R3_THRESHOLD").then(|| "0.9".to_owned()))
            .unwrap();
        assert_eq!(c.default_threshold, 0.9);
    }

    #[test]
    fn invariants() {
        assert!(ServiceConfig::from_toml("default_threshold = 0.0").is_err());
        assert!(ServiceConfig::from_toml("default_threshold = 1.5").is_err());
        assert!(ServiceConfig::from_toml("max_upload_bytes = 0").is_err());
        assert!(ServiceConfig::from_toml("bogus = 1").is_err());
    }
}
