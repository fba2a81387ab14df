//! `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::generate::{FamilySpec, WeightScheme};
use crate::buckets::RandomBucketingParams;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgorithmChoice {
    /// Random bucketing with a derived aided promise; sample-based.
    Full,
    /// One fixed `(τ, Δ)` bucketing; sample-based.
    BucketingFixed(RandomBucketingParams),
    /// Full algorithm behind both reductions; random order only.
    AidedWrapped,
    /// Single-choice `1/e` rule; random order only.
    ClassicalBaseline,
}

impl AlgorithmChoice {
    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmChoice::Full => "full",
            AlgorithmChoice::BucketingFixed(_) => "bucketing-fixed",
            AlgorithmChoice::AidedWrapped => "aided-wrapped",
            AlgorithmChoice::ClassicalBaseline => "classical-baseline",
        }
    }

    pub fn needs_random_order(&self) -> bool {
        matches!(self, AlgorithmChoice::AidedWrapped | AlgorithmChoice::ClassicalBaseline)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderChoice {
    Random,
    Increasing,
    Decreasing,
    /// Minimum `w(T)` over `k` resampled random orders and both monotone
    /// orders, for the same sample and coins.
    WorstOf(usize),
}

impl OrderChoice {
    pub fn label(&self) -> String {
        match self {
            OrderChoice::Random => "random".into(),
            OrderChoice::Increasing => "increasing".into(),
            OrderChoice::Decreasing => "decreasing".into(),
            OrderChoice::WorstOf(k) => format!("worst-of-{k}-pessimistic"),
        }
    }
}

impl FromStr for OrderChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(OrderChoice::Random),
            "increasing" => Ok(OrderChoice::Increasing),
            "decreasing" => Ok(OrderChoice::Decreasing),
            _ => {
                let k = s
                    .strip_prefix("worst-of-")
                    .and_then(|k| k.parse::<usize>().ok())
                    .filter(|&k| k >= 1)
                    .ok_or_else(|| Error::Config(format!("unknown order `{s}`")))?;
                Ok(OrderChoice::WorstOf(k))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub family: FamilySpec,
    pub weights: WeightScheme,
    pub algorithm: AlgorithmChoice,
    pub order: OrderChoice,
    pub trials: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub workers: Option<usize>,
    /// Overrides the declared sampling probability of sample-based runs.
    pub sampling_probability: Option<f64>,
}

/// Raw settings: config file entries overlaid with command-line flags.
/// Keys are normalized to lowercase with `_` in place of `-`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Settings(BTreeMap<String, String>);

fn normalize(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

impl Settings {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = Self::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, "expected `key = value`"))?;
            let key = normalize(key);
            if key.is_empty() {
                return Err(Error::parse(i + 1, "empty key"));
            }
            out.0.insert(key, value.trim().to_string());
        }
        Ok(out)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.0.insert(normalize(key), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(&normalize(key)).map(String::as_str)
    }

    /// Entries of `other` replace entries of `self`.
    pub fn overlay(&mut self, other: &Settings) {
        for (k, v) in &other.0 {
            self.0.insert(k.clone(), v.clone());
        }
    }

    fn number<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::Config(format!("`{key}` expects a number, got `{v}`")))
            })
            .transpose()
    }

    fn positive(&self, key: &str) -> Result<Option<usize>> {
        match self.number::<usize>(key)? {
            Some(0) => Err(Error::Config(format!("`{key}` must be positive"))),
            other => Ok(other),
        }
    }

    fn required(&self, key: &str) -> Result<usize> {
        self.positive(key)?
            .ok_or_else(|| Error::Config(format!("`{key}` is required")))
    }

    pub fn to_config(&self) -> Result<ExperimentConfig> {
        const KNOWN: [&str; 19] = [
            "family", "n", "k", "blocks", "vertices", "left", "degree", "instance", "weights",
            "base", "algorithm", "tau", "delta", "order", "trials", "seed", "output", "workers",
            "p_s",
        ];
        if let Some(key) = self.0.keys().find(|k| !KNOWN.contains(&k.as_str())) {
            return Err(Error::Config(format!("unknown setting `{key}`")));
        }
        let family_name = self
            .get("family")
            .unwrap_or(if self.get("instance").is_some() { "file" } else { "" });
        let family = match family_name {
            "file" => FamilySpec::File(
                self.get("instance")
                    .ok_or_else(|| Error::Config("family `file` needs `instance`".into()))?
                    .into(),
            ),
            "uniform" => FamilySpec::Uniform {
                n: self.required("n")?,
                k: self.required("k")?,
            },
            "partition" => FamilySpec::Partition {
                n: self.required("n")?,
                blocks: self.required("blocks")?,
                k: self.positive("k")?.unwrap_or(1),
            },
            "graphic" => FamilySpec::Graphic {
                n: self.required("n")?,
                vertices: self.required("vertices")?,
            },
            "laminar" => FamilySpec::Laminar {
                n: self.required("n")?,
                k: self.required("k")?,
            },
            "transversal" => FamilySpec::Transversal {
                n: self.required("n")?,
                left: self.required("left")?,
                degree: self.required("degree")?,
            },
            "" => return Err(Error::Config("`family` is required".into())),
            other => return Err(Error::Config(format!("unknown family `{other}`"))),
        };
        let weights = match self.get("weights").unwrap_or("uniform-random") {
            "uniform-random" => WeightScheme::UniformRandom,
            "exponential-spread" => WeightScheme::ExponentialSpread {
                base: self.number::<f64>("base")?.unwrap_or(2.0),
            },
            "adversarial-geometric" => WeightScheme::AdversarialGeometric,
            path => WeightScheme::FromFile(path.strip_prefix("file:").unwrap_or(path).into()),
        };
        if let WeightScheme::ExponentialSpread { base } = weights {
            if !(base > 1.0 && base.is_finite()) {
                return Err(Error::Config(format!("`base` must exceed 1, got {base}")));
            }
        }
        let algorithm = match self.get("algorithm").unwrap_or("full") {
            "full" => AlgorithmChoice::Full,
            "bucketing-fixed" => {
                let tau = self.number::<u32>("tau")?.unwrap_or(0);
                let delta = self.number::<u64>("delta")?.unwrap_or(0);
                AlgorithmChoice::BucketingFixed(RandomBucketingParams { tau, delta })
            }
            "aided-wrapped" => AlgorithmChoice::AidedWrapped,
            "classical-baseline" => AlgorithmChoice::ClassicalBaseline,
            other => return Err(Error::Config(format!("unknown algorithm `{other}`"))),
        };
        if !matches!(algorithm, AlgorithmChoice::BucketingFixed(_))
            && (self.get("tau").is_some() || self.get("delta").is_some())
        {
            return Err(Error::Config("`tau`/`delta` apply only to bucketing-fixed".into()));
        }
        let order: OrderChoice = self.get("order").unwrap_or("random").parse()?;
        if algorithm.needs_random_order() && order != OrderChoice::Random {
            return Err(Error::Config(format!(
                "{} runs in random order only",
                algorithm.name()
            )));
        }
        let sampling_probability = self.number::<f64>("p_s")?;
        if let Some(p) = sampling_probability {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::Config(format!("`p_s` must lie in (0, 1], got {p}")));
            }
            if algorithm.needs_random_order() {
                return Err(Error::Config(format!(
                    "`p_s` does not apply to {}",
                    algorithm.name()
                )));
            }
        }
        Ok(ExperimentConfig {
            family,
            weights,
            algorithm,
            order,
            trials: self.number::<usize>("trials")?.unwrap_or(100),
            seed: self
                .number::<u64>("seed")?
                .ok_or_else(|| Error::Config("`seed` is required".into()))?,
            output: self.get("output").map(PathBuf::from),
            workers: self.positive("workers")?,
            sampling_probability,
        })
    }
}
