//! Run configuration: defaults, flat key=value config files, CLI-flag
//! overrides, and the cache-directory environment override.

use ntlab::families::FamilySpec;
use ntlab::{Error, Result};
use std::path::{Path, PathBuf};

pub const CACHE_ENV: &str = "NTLAB_CACHE";

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub limit: u64,
    /// family id, e.g. "phi_ratio"
    pub family: String,
    /// alpha in the CLI grammar, e.g. "1" or "0.5+0.5i"
    pub alpha: String,
    pub out: PathBuf,
    pub seed: u64,
    /// 0 = let the thread pool decide
    pub threads: usize,
    pub cache: PathBuf,
    /// modulus parameter for exponential-sum windows
    pub q: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let cache = std::env::var_os(CACHE_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(".ntlab-cache"));
        RunConfig {
            limit: 100_000,
            family: "phi_ratio".into(),
            alpha: "1".into(),
            out: PathBuf::from("out"),
            seed: 42,
            threads: 0,
            cache,
            q: 1e9,
        }
    }
}

impl RunConfig {
    /// Applies `key=value` lines from a config file; unknown keys and
    /// malformed lines are usage errors. Blank lines and `#` comments are
    /// skipped.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Usage(format!("{}:{}: expected key=value", path.display(), lineno + 1)))?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::Usage(format!("config key {key}: invalid {what} '{value}'"));
        match key {
            "limit" => self.limit = value.parse().map_err(|_| bad("integer"))?,
            "family" => self.family = value.to_string(),
            "alpha" => self.alpha = value.to_string(),
            "out" => self.out = PathBuf::from(value),
            "seed" => self.seed = value.parse().map_err(|_| bad("integer"))?,
            "threads" => self.threads = value.parse().map_err(|_| bad("integer"))?,
            "cache" => self.cache = PathBuf::from(value),
            "q" => self.q = value.parse().map_err(|_| bad("number"))?,
            _ => return Err(Error::Usage(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.limit < 1_000 {
            return Err(Error::Usage(format!("limit must be >= 1000, got {}", self.limit)));
        }
        if !(self.q >= 4.0) {
            return Err(Error::Usage(format!("q must be >= 4, got {}", self.q)));
        }
        Ok(())
    }

    pub fn family_spec(&self) -> Result<FamilySpec> {
        format!("{}:alpha={}", self.family, self.alpha).parse()
    }
}
