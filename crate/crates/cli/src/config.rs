use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

/// Merged run configuration: `key = value` file entries overlaid by flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

fn normalize(key: &str) -> String {
    let key = key.trim().replace('-', "_");
    match key.as_str() {
        "omega_c" => "omega".to_string(),
        _ => key,
    }
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`, got `{raw}`", n + 1))?;
            values.insert(normalize(k), v.trim().to_string());
        }
        Ok(Settings { values })
    }

    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Settings::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                Self::parse(&text).with_context(|| format!("parsing config {}", p.display()))
            }
        }
    }

    /// Overrides `key` when the flag was given.
    pub fn set<T: ToString>(&mut self, key: &str, value: Option<T>) {
        if let Some(v) = value {
            self.values.insert(normalize(key), v.to_string());
        }
    }

    pub fn set_path(&mut self, key: &str, value: Option<&PathBuf>) {
        self.set(key, value.map(|p| p.display().to_string()));
    }

    pub fn get<T: FromStr>(&self, key: &str, domain: &str) -> Result<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|_| {
                anyhow!("key `{key}` = `{raw}` is not valid; accepted domain {domain}")
            }),
        }
    }

    pub fn require<T: FromStr>(&self, key: &str, domain: &str) -> Result<T> {
        match self.get(key, domain)? {
            Some(v) => Ok(v),
            None => bail!("missing required key `{key}`; accepted domain {domain}"),
        }
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.values.get(key).map(PathBuf::from)
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let mut s = Settings::parse("eta = 0.3\n# comment\nsigma-w2=2 # trailing\n").unwrap();
        s.set("eta", Some(0.5));
        s.set::<f64>("sigma_w2", None);
        assert_eq!(s.require::<f64>("eta", "(0, 1)").unwrap(), 0.5);
        assert_eq!(s.require::<f64>("sigma_w2", "[0, inf)").unwrap(), 2.0);
        let err = s.require::<f64>("alpha", "(0, 1)").unwrap_err().to_string();
        assert!(err.contains("`alpha`") && err.contains("(0, 1)"));
    }

    #[test]
    fn malformed_line() {
        assert!(Settings::parse("eta 0.5").is_err());
    }
}
