//! Flat key=value configuration with flag > file > default precedence.

use std::collections::BTreeMap;
use std::path::Path;

use nlkbe::{Error, Result};

pub struct Settings {
    map: BTreeMap<String, String>,
}

/// The resolved physical parameter triple.
pub struct Physical {
    pub sigma: f64,
    pub tau: f64,
    pub eps: f64,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut map = BTreeMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    Error::Parse(format!(
                        "config line {}: expected key=value, got '{line}'",
                        lineno + 1
                    ))
                })?;
                map.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(Self { map })
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.map.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|_| {
                Error::Parse(format!("config key '{key}': cannot parse '{raw}'"))
            }),
        }
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>> {
        self.parsed(key)
    }

    pub fn resolve_f64(&self, key: &str, flag: Option<f64>, default: f64) -> Result<f64> {
        Ok(flag.or(self.parsed(key)?).unwrap_or(default))
    }

    pub fn resolve_opt_f64(&self, key: &str, flag: Option<f64>) -> Result<Option<f64>> {
        Ok(flag.or(self.parsed(key)?))
    }

    pub fn resolve_usize(&self, key: &str, flag: Option<usize>, default: usize) -> Result<usize> {
        Ok(flag.or(self.parsed(key)?).unwrap_or(default))
    }

    pub fn resolve_string(&self, key: &str, flag: Option<String>, default: &str) -> String {
        flag.or_else(|| self.map.get(key).cloned())
            .unwrap_or_else(|| default.to_string())
    }

    pub fn physical(
        &self,
        sigma: Option<f64>,
        tau: Option<f64>,
        eps: Option<f64>,
    ) -> Result<Physical> {
        let p = Physical {
            sigma: self.resolve_f64("sigma", sigma, 1.0)?,
            tau: self.resolve_f64("tau", tau, 1.0)?,
            eps: self.resolve_f64("eps", eps, 0.05)?,
        };
        if !(p.sigma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be positive, got {}",
                p.sigma
            )));
        }
        if !(p.tau > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tau must be positive, got {}",
                p.tau
            )));
        }
        if !(p.eps >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "eps must be nonnegative, got {}",
                p.eps
            )));
        }
        Ok(p)
    }
}
