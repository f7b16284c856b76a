// Copyright 2026 The robq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Flat `key = value` configuration with command-line overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robq::oracles::{OracleSpec, WorkModel};

/// A configuration problem tied to one field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config field `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

pub type ConfigResult<T> = std::result::Result<T, ConfigError>;

fn err<T>(field: &str, message: impl Into<String>) -> ConfigResult<T> {
    Err(ConfigError { field: field.to_string(), message: message.into() })
}

pub const KEYS: &[&str] = &[
    "N", "m", "f", "biases", "work_model", "eps", "M", "ell_max", "trials", "seed", "k", "clamp",
    "rotation", "eps_list", "N_list",
];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> ConfigResult<Self> {
        let mut c = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return err(&format!("line {}", i + 1), format!("expected `key = value`, got `{line}`"));
            };
            c.set(k.trim(), v.trim())?;
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> ConfigResult<Self> {
        let text = std::fs::read_to_string(path)
            .or_else(|e| err("--config", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies one `key=value` override.
    pub fn apply_override(&mut self, kv: &str) -> ConfigResult<()> {
        match kv.split_once('=') {
            Some((k, v)) => self.set(k.trim(), v.trim()),
            None => err(kv, "override must look like key=value"),
        }
    }

    pub fn set(&mut self, key: &str, value: &str) -> ConfigResult<()> {
        if !KEYS.contains(&key) {
            return err(key, format!("unknown key (known: {})", KEYS.join(", ")));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> ConfigResult<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).or_else(|e| err(key, format!("cannot parse `{v}`: {e}"))),
        }
    }

    pub fn require<T: FromStr>(&self, key: &str) -> ConfigResult<T>
    where
        T::Err: fmt::Display,
    {
        self.get(key)?.map_or_else(|| err(key, "required for this scenario"), Ok)
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> ConfigResult<T>
    where
        T::Err: fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn list<T: FromStr>(&self, key: &str) -> ConfigResult<Vec<T>>
    where
        T::Err: fmt::Display,
    {
        let v = self.raw(key).map_or_else(|| err(key, "required for this scenario"), Ok)?;
        let items = parse_list(key, v)?;
        if items.is_empty() {
            return err(key, "list is empty");
        }
        items
            .iter()
            .map(|s| s.parse().or_else(|e| err(key, format!("cannot parse `{s}`: {e}"))))
            .collect()
    }

    /// Validated eps in (0, 1/2].
    pub fn eps(&self) -> ConfigResult<f64> {
        let e: f64 = self.require("eps")?;
        if !(e > 0.0 && e <= 0.5) {
            return err("eps", format!("{e} is outside (0, 1/2]"));
        }
        Ok(e)
    }

    pub fn positive(&self, key: &str, default: Option<usize>) -> ConfigResult<usize> {
        let v = match default {
            Some(d) => self.get_or(key, d)?,
            None => self.require(key)?,
        };
        if v == 0 {
            return err(key, "must be positive");
        }
        Ok(v)
    }

    pub fn recipe(&self) -> ConfigResult<OracleRecipe> {
        let n: usize = self.require("N")?;
        if n == 0 {
            return err("N", "must be positive");
        }
        let m: usize = self.require("m")?;
        if m == 0 {
            return err("m", "must be at least 1");
        }
        let f = TableSource::parse(self.raw("f").map_or_else(|| err("f", "required"), Ok)?, n)?;
        let biases =
            BiasSource::parse(self.raw("biases").map_or_else(|| err("biases", "required"), Ok)?, n)?;
        let work = WorkSource::parse(self.raw("work_model").unwrap_or("clean"))?;
        Ok(OracleRecipe { n, m, f, biases, work })
    }
}

fn parse_list(key: &str, v: &str) -> ConfigResult<Vec<String>> {
    let v = v.trim();
    let inner = match (v.strip_prefix('['), v.strip_suffix(']')) {
        (Some(_), Some(_)) => &v[1..v.len() - 1],
        (None, None) => v,
        _ => return err(key, format!("unbalanced brackets in `{v}`")),
    };
    Ok(inner.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect())
}

/// `name(a, b, ...)` → (name, args).
fn call<'a>(v: &'a str) -> Option<(&'a str, Vec<&'a str>)> {
    let open = v.find('(')?;
    let body = v[open + 1..].strip_suffix(')')?;
    Some((v[..open].trim(), body.split(',').map(str::trim).collect()))
}

fn num<T: FromStr>(field: &str, s: &str) -> ConfigResult<T>
where
    T::Err: fmt::Display,
{
    s.parse().or_else(|e| err(field, format!("cannot parse `{s}`: {e}")))
}

#[derive(Clone, Debug, PartialEq)]
pub enum TableSource {
    Explicit(Vec<bool>),
    Random { seed: u64 },
}

impl TableSource {
    pub fn parse(v: &str, n: usize) -> ConfigResult<Self> {
        if let Some((name, args)) = call(v) {
            return match (name, args.as_slice()) {
                ("random", [s]) => Ok(Self::Random { seed: num("f", s)? }),
                _ => err("f", format!("expected an explicit list or random(seed), got `{v}`")),
            };
        }
        let bits = parse_list("f", v)?
            .iter()
            .map(|b| match b.as_str() {
                "0" | "false" => Ok(false),
                "1" | "true" => Ok(true),
                other => err("f", format!("`{other}` is not a bit")),
            })
            .collect::<ConfigResult<Vec<_>>>()?;
        if bits.len() != n {
            return err("f", format!("has {} entries but N = {n}", bits.len()));
        }
        Ok(Self::Explicit(bits))
    }

    fn build(&self, n: usize, offset: u64) -> Vec<bool> {
        match self {
            Self::Explicit(b) => b.clone(),
            Self::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(offset));
                (0..n).map(|_| rng.random_bool(0.5)).collect()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BiasSource {
    Explicit(Vec<f64>),
    Uniform { lo: f64, hi: f64, seed: u64 },
    Constant(f64),
}

fn check_bias(v: f64) -> ConfigResult<f64> {
    if v > 0.0 && v <= 0.5 {
        Ok(v)
    } else {
        err("biases", format!("bias {v} is outside (0, 1/2]"))
    }
}

impl BiasSource {
    pub fn parse(v: &str, n: usize) -> ConfigResult<Self> {
        if let Some((name, args)) = call(v) {
            return match (name, args.as_slice()) {
                ("constant", [c]) => Ok(Self::Constant(check_bias(num("biases", c)?)?)),
                ("uniform", [lo, hi, s]) => {
                    let lo = check_bias(num("biases", lo)?)?;
                    let hi = check_bias(num("biases", hi)?)?;
                    if lo > hi {
                        return err("biases", format!("uniform range is empty ({lo} > {hi})"));
                    }
                    Ok(Self::Uniform { lo, hi, seed: num("biases", s)? })
                }
                _ => err(
                    "biases",
                    format!("expected a list, uniform(lo, hi, seed) or constant(v), got `{v}`"),
                ),
            };
        }
        let b = parse_list("biases", v)?
            .iter()
            .map(|s| num("biases", s).and_then(check_bias))
            .collect::<ConfigResult<Vec<f64>>>()?;
        if b.len() != n {
            return err("biases", format!("has {} entries but N = {n}", b.len()));
        }
        Ok(Self::Explicit(b))
    }

    fn build(&self, n: usize, offset: u64) -> Vec<f64> {
        match self {
            Self::Explicit(b) => b.clone(),
            Self::Constant(c) => vec![*c; n],
            Self::Uniform { lo, hi, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(offset));
                (0..n).map(|_| rng.random_range(*lo..=*hi)).collect()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum WorkSource {
    Clean,
    Garbage { seed: u64 },
}

impl WorkSource {
    pub fn parse(v: &str) -> ConfigResult<Self> {
        if v == "clean" {
            return Ok(Self::Clean);
        }
        match call(v) {
            Some(("garbage", args)) if args.len() == 1 => {
                Ok(Self::Garbage { seed: num("work_model", args[0])? })
            }
            _ => err("work_model", format!("expected clean or garbage(seed), got `{v}`")),
        }
    }
}

/// How to build the oracle of each trial. Generator seeds are shifted by
/// the trial index, so trial 0 uses them verbatim.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleRecipe {
    pub n: usize,
    pub m: usize,
    pub f: TableSource,
    pub biases: BiasSource,
    pub work: WorkSource,
}

impl OracleRecipe {
    pub fn build(&self, trial: u64) -> ConfigResult<OracleSpec> {
        let work_model = match self.work {
            WorkSource::Clean => WorkModel::Clean,
            WorkSource::Garbage { seed } => WorkModel::Garbage { seed: seed.wrapping_add(trial) },
        };
        OracleSpec::new(self.f.build(self.n, trial), self.biases.build(self.n, trial), self.m, work_model)
            .or_else(|e| err("m", e.to_string()))
    }
}

/// Writes an oracle spec in the configuration format, with explicit lists.
pub fn format_oracle_spec(spec: &OracleSpec) -> String {
    let f: Vec<&str> = spec.f.iter().map(|&b| if b { "1" } else { "0" }).collect();
    let b: Vec<String> = spec.biases.iter().map(|v| format!("{v:?}")).collect();
    let w = match spec.work_model {
        WorkModel::Clean => "clean".to_string(),
        WorkModel::Garbage { seed } => format!("garbage({seed})"),
    };
    format!(
        "N = {}\nm = {}\nf = {}\nbiases = {}\nwork_model = {w}\n",
        spec.n(),
        spec.m,
        f.join(","),
        b.join(",")
    )
}

/// Reads an oracle spec back from configuration text.
#[cfg(test)]
pub fn parse_oracle_spec(text: &str) -> ConfigResult<OracleSpec> {
    Config::parse(text)?.recipe()?.build(0)
}
