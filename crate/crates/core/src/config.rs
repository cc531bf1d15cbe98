//! System description: workers, EPR link budget, shots, seed and mode.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::NoiseModel;

pub const DEFAULT_SHOTS: u64 = 8192;
pub const DEFAULT_RESERVE: usize = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkerConfig {
    pub name: String,
    pub qubits: usize,
    #[serde(default)]
    pub p1: f64,
    #[serde(default)]
    pub p2: f64,
}

impl WorkerConfig {
    pub fn new(name: impl Into<String>, qubits: usize, p1: f64, p2: f64) -> Self {
        WorkerConfig {
            name: name.into(),
            qubits,
            p1,
            p2,
        }
    }

    pub fn noise(&self, success_rate: f64) -> NoiseModel {
        NoiseModel {
            p1: self.p1,
            p2: self.p2,
            epr_failure: 1.0 - success_rate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EprConfig {
    pub budget: usize,
    pub success_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Exact,
    Sampled,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "sampled" => Ok(Mode::Sampled),
            other => Err(Error::Config(format!("unknown mode `{other}`"))),
        }
    }
}

/// How many EPR pairs to spend: a fixed count, or the cheapest count up to
/// the budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "EChoiceRepr", into = "EChoiceRepr")]
pub enum EChoice {
    Fixed(usize),
    #[default]
    Auto,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum EChoiceRepr {
    Count(usize),
    Word(String),
}

impl TryFrom<EChoiceRepr> for EChoice {
    type Error = String;

    fn try_from(r: EChoiceRepr) -> std::result::Result<Self, String> {
        match r {
            EChoiceRepr::Count(n) => Ok(EChoice::Fixed(n)),
            EChoiceRepr::Word(w) if w == "auto" => Ok(EChoice::Auto),
            EChoiceRepr::Word(w) => Err(format!("expected an integer or \"auto\", got \"{w}\"")),
        }
    }
}

impl From<EChoice> for EChoiceRepr {
    fn from(e: EChoice) -> Self {
        match e {
            EChoice::Fixed(n) => EChoiceRepr::Count(n),
            EChoice::Auto => EChoiceRepr::Word("auto".into()),
        }
    }
}

impl std::str::FromStr for EChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(EChoice::Auto);
        }
        s.parse()
            .map(EChoice::Fixed)
            .map_err(|_| Error::Config(format!("--e expects an integer or `auto`, got `{s}`")))
    }
}

fn default_shots() -> u64 {
    DEFAULT_SHOTS
}

fn default_reserve() -> usize {
    DEFAULT_RESERVE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub workers: Vec<WorkerConfig>,
    pub epr: EprConfig,
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub e: EChoice,
    /// Qubits kept free on each worker for EPR ancillas when cutting.
    #[serde(default = "default_reserve")]
    pub reserve: usize,
    /// Also run a seeded random-merge baseline and record it in the report.
    #[serde(default)]
    pub compare_random: bool,
    /// Record wall-clock time; off by default so reports stay reproducible.
    #[serde(default)]
    pub timing: bool,
}

impl SystemConfig {
    /// `n` identical workers.
    pub fn uniform(n: usize, qubits: usize, p1: f64, p2: f64, budget: usize, success_rate: f64) -> Self {
        SystemConfig {
            workers: (0..n).map(|i| WorkerConfig::new(format!("w{i}"), qubits, p1, p2)).collect(),
            epr: EprConfig { budget, success_rate },
            shots: DEFAULT_SHOTS,
            seed: 0,
            mode: Mode::Exact,
            e: EChoice::Auto,
            reserve: DEFAULT_RESERVE,
            compare_random: false,
            timing: false,
        }
    }

    pub fn capacities(&self) -> Vec<usize> {
        self.workers.iter().map(|w| w.qubits).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers.is_empty() {
            return Err(Error::Config("at least one worker is required".into()));
        }
        for (i, w) in self.workers.iter().enumerate() {
            if w.qubits == 0 {
                return Err(Error::Config(format!("workers[{i}].qubits must be >= 1")));
            }
            for (name, p) in [("p1", w.p1), ("p2", w.p2)] {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Config(format!("workers[{i}].{name} = {p} outside [0, 1]")));
                }
            }
        }
        let sr = self.epr.success_rate;
        if !(sr > 0.0 && sr <= 1.0) {
            return Err(Error::Config(format!("epr.success_rate = {sr} outside (0, 1]")));
        }
        let n = self.workers.len();
        if self.epr.budget > n * (n - 1) / 2 {
            return Err(Error::Config(format!(
                "epr.budget = {} exceeds the {} worker pairs",
                self.epr.budget,
                n * (n - 1) / 2
            )));
        }
        if let EChoice::Fixed(e) = self.e {
            if e > self.epr.budget {
                return Err(Error::Config(format!("e = {e} exceeds epr.budget = {}", self.epr.budget)));
            }
        }
        if self.shots == 0 {
            return Err(Error::Config("shots must be >= 1".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: SystemConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Config(format!("at `{path}`: {}", e.inner()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
