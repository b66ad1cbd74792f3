use std::path::Path;

use anyhow::{Context, Result};
use serde::Deserialize;

/// Optional TOML defaults; command-line flags win.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub tol: Option<f64>,
    pub depth: Option<usize>,
    pub window: Option<i64>,
    pub emit: Option<String>,
    pub threads: Option<usize>,
    pub iters: Option<usize>,
    pub n: Option<usize>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flag_names() {
        let c: Config = toml::from_str("tol = 1e-8\ndepth = 3\nemit = \"csv\"\n").unwrap();
        assert_eq!(c.tol, Some(1e-8));
        assert_eq!(c.depth, Some(3));
        assert_eq!(c.emit.as_deref(), Some("csv"));
        assert!(toml::from_str::<Config>("depht = 3").is_err());
    }
}
