//! Flat `key = value` scenario configuration.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::calculus::DefectStrategy;
use crate::engine::FamilyDescriptor;
use crate::error::{Error, Result};
use crate::group::DEFAULT_CLOSURE_CAP;
use crate::phase::PolynomialSpec;
use crate::ring::{build_ring, RingSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    RingInfo,
    Frobenius,
    PhaseAnalyze,
    PhaseDerive,
    ModelExtract,
    ModelVerify,
    ModelBoundary,
    ModelCompare,
    Suite,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::RingInfo,
        Command::Frobenius,
        Command::PhaseAnalyze,
        Command::PhaseDerive,
        Command::ModelExtract,
        Command::ModelVerify,
        Command::ModelBoundary,
        Command::ModelCompare,
        Command::Suite,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::RingInfo => "ring-info",
            Command::Frobenius => "frobenius",
            Command::PhaseAnalyze => "phase-analyze",
            Command::PhaseDerive => "phase-derive",
            Command::ModelExtract => "model-extract",
            Command::ModelVerify => "model-verify",
            Command::ModelBoundary => "model-boundary",
            Command::ModelCompare => "model-compare",
            Command::Suite => "suite",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s.trim())
            .ok_or_else(|| Error::Parse(format!("unknown command {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Json,
    Text,
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Json => "json",
            ReportFormat::Text => "text",
        })
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "json" => Ok(ReportFormat::Json),
            "text" => Ok(ReportFormat::Text),
            other => Err(Error::Parse(format!("unknown report format {other:?}"))),
        }
    }
}

/// A labelled extra phase, written `label:poly`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtraPhase {
    pub label: String,
    pub poly: PolynomialSpec,
}

pub fn parse_extras(s: &str) -> Result<Vec<ExtraPhase>> {
    s.split(';')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .enumerate()
        .map(|(i, part)| {
            let (label, poly) = match part.split_once(':') {
                Some((l, p)) => (l.trim().to_string(), p),
                None => (format!("extra{}", i + 1), part),
            };
            if label.is_empty() || !label.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return Err(Error::Parse(format!("bad extra label {label:?}")));
            }
            Ok(ExtraPhase {
                label,
                poly: poly.parse()?,
            })
        })
        .collect()
}

fn format_extras(extras: &[ExtraPhase]) -> String {
    extras
        .iter()
        .map(|e| format!("{}:{}", e.label, e.poly))
        .collect::<Vec<_>>()
        .join(";")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScenarioConfig {
    pub command: Command,
    pub ring: RingSpec,
    pub n: usize,
    pub family: FamilyDescriptor,
    pub strategies: Vec<DefectStrategy>,
    pub cap: usize,
    /// Worker threads; 0 lets the pool pick.
    pub workers: usize,
    pub seed: u64,
    pub samples: usize,
    pub weak: bool,
    pub extra: Vec<ExtraPhase>,
    pub input: Option<PathBuf>,
    pub increments: Vec<usize>,
    pub out: Option<PathBuf>,
    pub format: ReportFormat,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            command: Command::ModelVerify,
            ring: RingSpec::Chain { p: 2, k: 2 },
            n: 1,
            family: FamilyDescriptor::DegreeAtMost(2),
            strategies: vec![DefectStrategy::Default],
            cap: DEFAULT_CLOSURE_CAP,
            workers: 0,
            seed: 0,
            samples: 1500,
            weak: false,
            extra: Vec::new(),
            input: None,
            increments: Vec::new(),
            out: None,
            format: ReportFormat::Json,
        }
    }
}

/// Keys in emission order.
pub const CONFIG_KEYS: [&str; 15] = [
    "command", "ring", "n", "family", "strategy", "cap", "workers", "seed", "samples", "weak",
    "extra", "input", "increments", "out", "format",
];

/// Keys that do not affect results and are left out of the digest.
const UNDIGESTED: [&str; 3] = ["workers", "out", "format"];

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Parse(format!("{key}: {v:?} is not a valid number")))
}

impl ScenarioConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "command" => self.command = v.parse()?,
            "ring" => {
                let spec: RingSpec = v.parse()?;
                build_ring(&spec)?;
                self.ring = spec;
            }
            "n" => {
                self.n = parse_num(key, v)?;
                if self.n == 0 {
                    return Err(Error::Parse("n must be positive".into()));
                }
            }
            "family" => self.family = v.parse()?,
            "strategy" => {
                self.strategies = v
                    .split(',')
                    .map(|s| s.parse())
                    .collect::<Result<_>>()?;
                if self.strategies.is_empty() {
                    return Err(Error::Parse("empty strategy list".into()));
                }
            }
            "cap" => {
                self.cap = parse_num(key, v)?;
                if self.cap == 0 {
                    return Err(Error::Parse("cap must be positive".into()));
                }
            }
            "workers" => self.workers = parse_num(key, v)?,
            "seed" => self.seed = parse_num(key, v)?,
            "samples" => self.samples = parse_num(key, v)?,
            "weak" => {
                self.weak = match v {
                    "true" => true,
                    "false" => false,
                    _ => return Err(Error::Parse(format!("weak: expected true or false, got {v:?}"))),
                }
            }
            "extra" => self.extra = parse_extras(v)?,
            "input" => self.input = (!v.is_empty()).then(|| PathBuf::from(v)),
            "increments" => {
                self.increments = v
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| parse_num(key, s))
                    .collect::<Result<_>>()?
            }
            "out" => self.out = (!v.is_empty()).then(|| PathBuf::from(v)),
            "format" => self.format = v.parse()?,
            other => return Err(Error::Parse(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    fn value(&self, key: &str) -> String {
        match key {
            "command" => self.command.to_string(),
            "ring" => self.ring.to_string(),
            "n" => self.n.to_string(),
            "family" => self.family.to_string(),
            "strategy" => self
                .strategies
                .iter()
                .map(|s| s.name())
                .collect::<Vec<_>>()
                .join(","),
            "cap" => self.cap.to_string(),
            "workers" => self.workers.to_string(),
            "seed" => self.seed.to_string(),
            "samples" => self.samples.to_string(),
            "weak" => self.weak.to_string(),
            "extra" => format_extras(&self.extra),
            "input" => self
                .input
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default(),
            "increments" => self
                .increments
                .iter()
                .map(|h| h.to_string())
                .collect::<Vec<_>>()
                .join(","),
            "out" => self
                .out
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default(),
            "format" => self.format.to_string(),
            _ => unreachable!("unknown key {key}"),
        }
    }

    /// Parses a config file; defaults fill absent keys.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ScenarioConfig::default();
        let mut seen = std::collections::HashSet::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
            if !seen.insert(k.trim().to_string()) {
                return Err(Error::Parse(format!("line {}: duplicate key {:?}", lineno + 1, k.trim())));
            }
            cfg.set(k, v)
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(cfg)
    }

    /// Every key in canonical order.
    pub fn emit(&self) -> String {
        CONFIG_KEYS
            .iter()
            .map(|k| format!("{k} = {}\n", self.value(k)))
            .collect()
    }

    /// Key/value pairs that determine results.
    pub fn digested_pairs(&self) -> Vec<(String, String)> {
        CONFIG_KEYS
            .iter()
            .filter(|k| !UNDIGESTED.contains(k))
            .map(|k| (k.to_string(), self.value(k)))
            .collect()
    }

    /// sha256 of the result-determining settings.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in self.digested_pairs() {
            h.update(format!("{k}={v}\n"));
        }
        hex::encode(h.finalize())
    }
}
