use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::tabu::SearchParams;

/// Algorithm run on each instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Tabu search without strategic oscillation.
    Ts,
    /// Tabu search with strategic oscillation.
    TsSo,
    /// Clarke-Wright savings construction only.
    ClarkeWright,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Ts => "ts",
            Variant::TsSo => "ts_so",
            Variant::ClarkeWright => "cw",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ts" => Ok(Variant::Ts),
            "ts_so" | "ts-so" | "so" => Ok(Variant::TsSo),
            "cw" | "clarke_wright" | "clarke-wright" => Ok(Variant::ClarkeWright),
            other => Err(ConfigError::BadValue {
                key: "variant".into(),
                value: other.into(),
            }),
        }
    }
}

/// QUBO solver used for route re-sequencing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SamplerChoice {
    #[default]
    Sa,
    /// Remote endpoint with local annealing as fallback.
    Remote,
    /// Exhaustive permutation search.
    Brute,
}

impl FromStr for SamplerChoice {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sa" => Ok(SamplerChoice::Sa),
            "remote" => Ok(SamplerChoice::Remote),
            "brute" => Ok(SamplerChoice::Brute),
            other => Err(ConfigError::BadValue {
                key: "sampler".into(),
                value: other.into(),
            }),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`")]
    BadValue { key: String, value: String },
    #[error("repetitions must be at least 1")]
    ZeroReps,
}

/// Everything needed to run a benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub instances: Vec<PathBuf>,
    pub variant: Variant,
    pub search: SearchParams,
    pub sampler: SamplerChoice,
    /// Runs per instance, seeded `seed, seed + 1, ...`.
    pub repetitions: usize,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            instances: Vec::new(),
            variant: Variant::TsSo,
            search: SearchParams::default(),
            sampler: SamplerChoice::Sa,
            repetitions: 3,
            seed: 0,
            out_dir: None,
        }
    }
}

/// Parses flat `key = value` text; `#` starts a comment.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
        let key = k.trim().to_ascii_lowercase().replace('-', "_");
        if key.is_empty() {
            return Err(ConfigError::Syntax { line: i + 1 });
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue {
        key: key.into(),
        value: value.into(),
    })
}

impl RunConfig {
    /// Overlays settings from `key = value` pairs onto `self`.
    pub fn apply_key_values(&mut self, pairs: &BTreeMap<String, String>) -> Result<(), ConfigError> {
        for (k, v) in pairs {
            match k.as_str() {
                "variant" => self.variant = v.parse()?,
                "sampler" => self.sampler = v.parse()?,
                "seed" => self.seed = parse(k, v)?,
                "reps" | "repetitions" => self.repetitions = parse(k, v)?,
                "out" | "out_dir" => self.out_dir = Some(PathBuf::from(v)),
                "time_limit" | "time_limit_seconds" => self.search.time_limit_seconds = parse(k, v)?,
                "fleet" => self.search.fleet = Some(parse(k, v)?),
                "tenure" => self.search.tenure = parse(k, v)?,
                "x_low" => self.search.x_low = parse(k, v)?,
                "x_high" => self.search.x_high = parse(k, v)?,
                "non_improve_stop" => self.search.non_improve_stop = parse(k, v)?,
                "resequence_trigger" => self.search.resequence_trigger = parse(k, v)?,
                "max_iterations" => self.search.max_iterations = Some(parse(k, v)?),
                _ => return Err(ConfigError::UnknownKey(k.clone())),
            }
        }
        if self.repetitions == 0 {
            return Err(ConfigError::ZeroReps);
        }
        Ok(())
    }
}
