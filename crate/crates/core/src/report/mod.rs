//! Scenario configuration, report records and their JSON/text emission.

pub mod config;
pub mod scenario;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engine::Verdict;
use crate::error::{Error, Result};

pub use config::{Command, ExtraPhase, ReportFormat, ScenarioConfig};
pub use scenario::{run_scenario, run_suite};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckVerdict {
    Pass,
    Capacity,
    Fail,
}

impl CheckVerdict {
    pub fn name(&self) -> &'static str {
        match self {
            CheckVerdict::Pass => "pass",
            CheckVerdict::Capacity => "capacity",
            CheckVerdict::Fail => "fail",
        }
    }

    /// Process exit code for an overall verdict.
    pub fn exit_code(&self) -> i32 {
        match self {
            CheckVerdict::Pass => 0,
            CheckVerdict::Fail => 1,
            CheckVerdict::Capacity => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub verdict: CheckVerdict,
    pub witnesses: Vec<String>,
    pub counts: BTreeMap<String, u64>,
    pub notes: Vec<String>,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, pass: bool) -> Self {
        CheckRecord {
            name: name.into(),
            verdict: if pass { CheckVerdict::Pass } else { CheckVerdict::Fail },
            witnesses: Vec::new(),
            counts: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn from_verdict(prefix: &str, v: &Verdict) -> Self {
        let name = if prefix.is_empty() {
            v.name.clone()
        } else {
            format!("{prefix}/{}", v.name)
        };
        let mut rec = CheckRecord::new(name, v.pass);
        if !v.detail.is_empty() {
            rec.notes.push(v.detail.clone());
        }
        rec.witnesses = v.witnesses.clone();
        rec
    }

    /// A check that could not run within capacity limits.
    pub fn capacity(name: impl Into<String>, note: impl Into<String>) -> Self {
        let mut rec = CheckRecord::new(name, false);
        rec.verdict = CheckVerdict::Capacity;
        rec.notes.push(note.into());
        rec
    }

    pub fn count(mut self, key: impl Into<String>, value: impl TryInto<u64>) -> Self {
        self.counts
            .insert(key.into(), value.try_into().unwrap_or(u64::MAX));
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn witness(mut self, w: impl Into<String>) -> Self {
        self.witnesses.push(w.into());
        self
    }
}

/// The part of a report that must be byte-identical across reruns.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StableSection {
    pub tool_version: String,
    pub config_digest: String,
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub checks: Vec<CheckRecord>,
    pub overall: CheckVerdict,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimingSection {
    pub total_ms: u64,
    pub workers: usize,
    pub cache_hits: usize,
    /// Milliseconds per top-level step, in execution order.
    pub steps: Vec<(String, u64)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub stable: StableSection,
    pub timing: TimingSection,
}

/// Fail beats capacity beats pass; an empty list passes.
pub fn overall(checks: &[CheckRecord]) -> CheckVerdict {
    checks
        .iter()
        .map(|c| c.verdict)
        .max()
        .unwrap_or(CheckVerdict::Pass)
}

impl Report {
    pub fn new(config: &ScenarioConfig, checks: Vec<CheckRecord>, timing: TimingSection) -> Self {
        Report {
            stable: StableSection {
                tool_version: TOOL_VERSION.to_string(),
                config_digest: config.digest(),
                command: config.command.to_string(),
                config: config.digested_pairs().into_iter().collect(),
                overall: overall(&checks),
                checks,
            },
            timing,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.stable.overall.exit_code()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Canonical JSON of the stable section only.
    pub fn stable_json(&self) -> String {
        serde_json::to_string_pretty(&self.stable).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let s = &self.stable;
        let mut out = String::new();
        writeln!(out, "phaseforge {}  command={}", s.tool_version, s.command).unwrap();
        writeln!(out, "config digest {}", s.config_digest).unwrap();
        for c in &s.checks {
            writeln!(out, "[{}] {}", c.verdict.name(), c.name).unwrap();
            if !c.counts.is_empty() {
                let counts: Vec<String> = c.counts.iter().map(|(k, v)| format!("{k}={v}")).collect();
                writeln!(out, "    counts: {}", counts.join(" ")).unwrap();
            }
            for n in &c.notes {
                writeln!(out, "    note: {n}").unwrap();
            }
            for w in &c.witnesses {
                writeln!(out, "    witness: {w}").unwrap();
            }
        }
        writeln!(out, "overall: {}", s.overall.name()).unwrap();
        writeln!(out, "elapsed: {} ms on {} workers", self.timing.total_ms, self.timing.workers).unwrap();
        out
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Json => self.to_json(),
            ReportFormat::Text => self.to_text(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("report: {e}")))
    }
}

pub fn emit_report(report: &Report, format: ReportFormat, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, report.render(format)).map_err(|e| Error::io(path, e))
}

/// `(name, verdict)` pairs read back from the text rendering.
pub fn parse_text_verdicts(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| {
            let rest = l.strip_prefix('[')?;
            let (verdict, name) = rest.split_once("] ")?;
            Some((name.to_string(), verdict.to_string()))
        })
        .collect()
}

/// Differences between the stable sections of two reports, one per line.
pub fn diff_reports(a: &Report, b: &Report) -> Vec<String> {
    let mut out = Vec::new();
    let (sa, sb) = (&a.stable, &b.stable);
    for (field, x, y) in [
        ("tool_version", &sa.tool_version, &sb.tool_version),
        ("config_digest", &sa.config_digest, &sb.config_digest),
        ("command", &sa.command, &sb.command),
    ] {
        if x != y {
            out.push(format!("{field}: {x} != {y}"));
        }
    }
    if sa.overall != sb.overall {
        out.push(format!("overall: {} != {}", sa.overall.name(), sb.overall.name()));
    }
    let index = |s: &StableSection| -> BTreeMap<String, CheckRecord> {
        s.checks.iter().map(|c| (c.name.clone(), c.clone())).collect()
    };
    let (ia, ib) = (index(sa), index(sb));
    for (name, ca) in &ia {
        match ib.get(name) {
            None => out.push(format!("check {name}: only in first")),
            Some(cb) if cb != ca => {
                if ca.verdict != cb.verdict {
                    out.push(format!(
                        "check {name}: verdict {} != {}",
                        ca.verdict.name(),
                        cb.verdict.name()
                    ));
                } else {
                    out.push(format!("check {name}: details differ"));
                }
            }
            _ => {}
        }
    }
    for name in ib.keys().filter(|n| !ia.contains_key(*n)) {
        out.push(format!("check {name}: only in second"));
    }
    if out.is_empty() && sa.checks != sb.checks {
        out.push("check order differs".into());
    }
    out
}
