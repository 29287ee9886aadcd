//! Seeded property sweeps over randomized instances.
//!
//! Every named property draws its instances from a child RNG derived from
//! `(master seed, property name, trial index)` with SHA-256, so a failing trial
//! can be reproduced from those three values alone ([`check_trial`]). Trials
//! run on the rayon pool and are collected in index order, which keeps the
//! report byte-identical across runs and thread counts.
//!
//! | Kind | Slack | Passes when |
//! |------|-------|-------------|
//! | identity | `(lhs - rhs) / scale` | `|slack| <= identity_tol` |
//! | inequality | `rhs - lhs` for `lhs <= rhs` | `slack >= -inequality_tol` |
//!
//! The identity scale is the largest magnitude among `lhs` and the terms of
//! `rhs` (at least 1 for entropy and divergence values), so scalar identities
//! are compared relatively and bounded quantities absolutely.

mod properties;
mod trial;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::RngSeed;
use crate::error::{Error, Result};
use properties::{Property, REGISTRY};
use trial::Trial;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PropertyKind {
    Identity,
    Inequality,
}

/// Registry entry as exposed to callers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropertyInfo {
    pub name: &'static str,
    pub module: &'static str,
    pub statement: &'static str,
    pub kind: PropertyKind,
}

pub fn list_properties() -> Vec<PropertyInfo> {
    REGISTRY
        .iter()
        .map(|p| PropertyInfo { name: p.name, module: p.module, statement: p.statement, kind: p.kind })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub seed: RngSeed,
    pub trials: usize,
    /// Inclusive bounds on the size of each sampled alphabet.
    pub size_range: (usize, usize),
    pub k_range: (f64, f64),
    pub r_range: (f64, f64),
    pub identity_tol: f64,
    pub inequality_tol: f64,
    /// Property names to run; empty means all.
    pub properties: Vec<String>,
    /// Failing results kept per property in the report.
    pub max_failures: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            seed: RngSeed(0),
            trials: 100,
            size_range: (1, 16),
            k_range: (0.05, 0.5),
            r_range: (0.05, 2.0),
            identity_tol: 1e-12,
            inequality_tol: 1e-9,
            properties: Vec::new(),
            max_failures: 20,
        }
    }
}

impl SweepConfig {
    pub fn with_properties<S: AsRef<str>>(mut self, names: &[S]) -> Self {
        self.properties = names.iter().map(|s| s.as_ref().to_string()).collect();
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        let (lo, hi) = self.size_range;
        if lo == 0 || lo > hi {
            return bad(format!("size_range ({lo}, {hi}) must satisfy 1 <= min <= max"));
        }
        let (klo, khi) = self.k_range;
        if !(klo > 0.0 && klo <= khi && khi <= 0.5) {
            return bad(format!("k_range ({klo}, {khi}) must lie in (0, 0.5] with min <= max"));
        }
        let (rlo, rhi) = self.r_range;
        if !(rlo > 0.0 && rlo <= rhi && rhi.is_finite()) {
            return bad(format!("r_range ({rlo}, {rhi}) must lie in (0, inf) with min <= max"));
        }
        for (name, tol) in [("identity_tol", self.identity_tol), ("inequality_tol", self.inequality_tol)] {
            if !(tol > 0.0 && tol.is_finite()) {
                return bad(format!("{name} must be positive, got {tol}"));
            }
        }
        self.selected().map(|_| ())
    }

    fn selected(&self) -> Result<Vec<&'static Property>> {
        if self.properties.is_empty() {
            return Ok(REGISTRY.iter().collect());
        }
        let mut out: Vec<&'static Property> = Vec::new();
        for name in &self.properties {
            let prop = properties::find(name).ok_or_else(|| Error::Config(format!("unknown property '{name}'")))?;
            if !out.iter().any(|p| p.name == prop.name) {
                out.push(prop);
            }
        }
        Ok(out)
    }
}

/// Outcome of one trial of one property.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub property: String,
    pub trial_index: usize,
    pub passed: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    /// Child seed and every sampled size and parameter of the trial.
    pub instance_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub name: String,
    pub kind: PropertyKind,
    pub pass: usize,
    pub fail: usize,
    /// Largest `|slack|` for identities, smallest slack for inequalities.
    pub worst_slack: f64,
    pub failures: Vec<CheckResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub config: SweepConfig,
    pub properties: Vec<PropertyReport>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.properties.iter().all(|p| p.fail == 0)
    }

    pub fn property(&self, name: &str) -> Option<&PropertyReport> {
        self.properties.iter().find(|p| p.name == name)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report fields are always serializable")
    }
}

fn evaluate(config: &SweepConfig, prop: &Property, index: usize) -> CheckResult {
    let mut trial = Trial::new(config, prop.name, index);
    let outcome = (prop.check)(&mut trial);
    let digest = trial.digest();
    match outcome {
        Ok(o) => {
            let passed = match prop.kind {
                PropertyKind::Identity => o.slack.abs() <= config.identity_tol,
                PropertyKind::Inequality => o.slack >= -config.inequality_tol,
            };
            CheckResult {
                property: prop.name.to_string(),
                trial_index: index,
                passed,
                lhs: o.lhs,
                rhs: o.rhs,
                slack: o.slack,
                instance_digest: digest,
                error: None,
            }
        }
        Err(e) => CheckResult {
            property: prop.name.to_string(),
            trial_index: index,
            passed: false,
            lhs: f64::NAN,
            rhs: f64::NAN,
            slack: f64::NAN,
            instance_digest: digest,
            error: Some(e.to_string()),
        },
    }
}

fn aggregate(config: &SweepConfig, prop: &Property, results: Vec<CheckResult>) -> PropertyReport {
    let pass = results.iter().filter(|r| r.passed).count();
    let worst_slack = match prop.kind {
        PropertyKind::Identity => results.iter().map(|r| r.slack.abs()).fold(0.0, f64::max),
        PropertyKind::Inequality => results.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min),
    };
    let failures: Vec<CheckResult> = results.iter().filter(|r| !r.passed).take(config.max_failures).cloned().collect();
    PropertyReport {
        name: prop.name.to_string(),
        kind: prop.kind,
        pass,
        fail: results.len() - pass,
        worst_slack,
        failures,
    }
}

/// Runs every selected property for `config.trials` trials.
pub fn run_suite(config: &SweepConfig) -> Result<VerificationReport> {
    config.validate()?;
    let properties = config
        .selected()?
        .into_iter()
        .map(|prop| {
            let results: Vec<CheckResult> =
                (0..config.trials).into_par_iter().map(|i| evaluate(config, prop, i)).collect();
            log::debug!("{}: {} trials evaluated", prop.name, results.len());
            aggregate(config, prop, results)
        })
        .collect();
    Ok(VerificationReport { config: config.clone(), properties })
}

/// Re-evaluates a single `(property, trial)` pair.
pub fn check_trial(config: &SweepConfig, property: &str, trial_index: usize) -> Result<CheckResult> {
    config.validate()?;
    let prop = properties::find(property).ok_or_else(|| Error::Config(format!("unknown property '{property}'")))?;
    Ok(evaluate(config, prop, trial_index))
}
