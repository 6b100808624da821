//! Flat key-value experiment files.
//!
//! One setting per line, `key value...` or `key = value`, `#` comments.
//! `sigma <word> <coeff>` may repeat; every other key keeps its last value.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use sigmal::brownian::MCConfig;
use sigmal::greeks::ModelSpec;

/// A bad or missing setting. The binary exits with status 2 on these.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub type ConfigResult<T> = std::result::Result<T, ConfigError>;

const KNOWN: &[&str] = &[
    "sigma", "rho", "S0", "s0", "T", "N", "paths", "steps", "seed", "antithetic", "payoff", "strike", "weights", "weight_form",
    "localization", "eps", "truncation", "fd", "kappa", "theta", "inner_paths", "random_functionals", "d", "bins",
];

#[derive(Clone, Debug, Default)]
pub struct Config {
    text: String,
    values: BTreeMap<String, Vec<String>>,
}

impl Config {
    pub fn parse(text: &str) -> ConfigResult<Self> {
        let mut values = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").replace('=', " ");
            let mut toks = line.split_whitespace();
            let Some(key) = toks.next() else { continue };
            if !KNOWN.contains(&key) {
                return Err(ConfigError(format!("line {}: unknown key `{key}`", k + 1)));
            }
            let rest: Vec<String> = toks.map(str::to_string).collect();
            if rest.is_empty() {
                return Err(ConfigError(format!("line {}: `{key}` has no value", k + 1)));
            }
            if key != "sigma" {
                values.insert(key.to_string(), rest);
            }
        }
        Ok(Config { text: text.to_string(), values })
    }

    pub fn load(path: &Path) -> ConfigResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn str_or(&self, key: &str, default: &str) -> String {
        self.values.get(key).map(|v| v.join(" ")).unwrap_or_else(|| default.to_string())
    }

    pub fn num_or<T: std::str::FromStr>(&self, key: &str, default: T) -> ConfigResult<T> {
        match self.values.get(key) {
            None => Ok(default),
            Some(v) if v.len() == 1 => v[0].parse().map_err(|_| ConfigError(format!("`{key}`: cannot parse `{}`", v[0]))),
            Some(v) => Err(ConfigError(format!("`{key}` takes one value, got {}", v.len()))),
        }
    }

    pub fn list_or(&self, key: &str, default: &[f64]) -> ConfigResult<Vec<f64>> {
        match self.values.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .iter()
                .flat_map(|s| s.split(','))
                .filter(|s| !s.is_empty())
                .map(|s| s.parse().map_err(|_| ConfigError(format!("`{key}`: cannot parse `{s}`"))))
                .collect(),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> ConfigResult<bool> {
        match self.str_or(key, if default { "true" } else { "false" }).as_str() {
            "true" | "yes" | "1" | "on" => Ok(true),
            "false" | "no" | "0" | "off" => Ok(false),
            other => Err(ConfigError(format!("`{key}`: expected a boolean, got `{other}`"))),
        }
    }

    pub fn model(&self) -> ConfigResult<ModelSpec> {
        ModelSpec::from_config_text(&self.text).map_err(|e| ConfigError(format!("model: {e}")))
    }
}

/// Command line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub paths: Option<usize>,
    pub steps: Option<usize>,
    pub level: Option<usize>,
}

impl Overrides {
    pub fn level(&self, cfg: &Config, default: usize) -> ConfigResult<usize> {
        let n = match self.level {
            Some(n) => n,
            None => cfg.num_or("N", default)?,
        };
        if n == 0 {
            return Err(ConfigError("truncation level must be at least 1".into()));
        }
        Ok(n)
    }

    pub fn seed(&self, cfg: &Config) -> ConfigResult<u64> {
        self.seed.map_or_else(|| cfg.num_or("seed", 0), Ok)
    }

    pub fn mc(&self, cfg: &Config, default_paths: usize, default_steps: usize) -> ConfigResult<MCConfig> {
        let mc = MCConfig {
            n_paths: self.paths.map_or_else(|| cfg.num_or("paths", default_paths), Ok)?,
            n_steps: self.steps.map_or_else(|| cfg.num_or("steps", default_steps), Ok)?,
            horizon: cfg.num_or("T", 1.0)?,
            seed: self.seed(cfg)?,
            antithetic: cfg.bool_or("antithetic", false)?,
        };
        mc.validate().map_err(|e| ConfigError(e.to_string()))?;
        Ok(mc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_overrides() {
        let c = Config::parse("sigma e 0.2\nsigma 1 0.1\nrho = -0.5 # comment\nS0 100\npaths 500\nkappa 1,0.5\n").unwrap();
        let m = c.model().unwrap();
        assert_eq!(m.rho(), -0.5);
        assert_eq!(m.s0(), 100.0);
        assert_eq!(c.list_or("kappa", &[]).unwrap(), vec![1.0, 0.5]);
        let o = Overrides { paths: Some(40), ..Default::default() };
        let mc = o.mc(&c, 10, 500).unwrap();
        assert_eq!((mc.n_paths, mc.n_steps), (40, 500));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_numbers() {
        assert!(Config::parse("volatility 3\n").is_err());
        let c = Config::parse("paths many\n").unwrap();
        assert!(c.num_or("paths", 1usize).is_err());
    }

    #[test]
    fn shipped_configs_parse() {
        let files = [
            include_str!("../../../configs/stochvol.cfg"),
            include_str!("../../../configs/perfect_correlation.cfg"),
            include_str!("../../../configs/asian.cfg"),
            include_str!("../../../configs/instability.cfg"),
            include_str!("../../../configs/black_scholes.cfg"),
        ];
        for text in files {
            let c = Config::parse(text).unwrap();
            c.model().unwrap();
            Overrides::default().mc(&c, 10, 10).unwrap();
        }
        Config::parse(include_str!("../../../configs/ou.cfg")).unwrap();
    }
}
