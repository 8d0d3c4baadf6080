//! Experiment reports.
//!
//! Every metric stores the rule it is judged by, so `pass` can be recomputed
//! from the stored numbers alone.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::stats::Fit;

/// Acceptance rule of a metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Check {
    /// Recorded for information; always passes.
    Info,
    AtLeast {
        bound: f64,
    },
    AtMost {
        bound: f64,
    },
    /// `lo <= estimate <= hi`.
    Between {
        lo: f64,
        hi: f64,
    },
    /// `|estimate - target| <= k * se`.
    WithinSe {
        target: f64,
        k: f64,
    },
    /// Fitted slope in `[lo, hi]` with `R^2 >= min_r2`.
    FitBetween {
        lo: f64,
        hi: f64,
        min_r2: f64,
    },
    /// Fitted slope at least `bound` with `R^2 >= min_r2`.
    FitAtLeast {
        bound: f64,
        min_r2: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    pub estimate: f64,
    pub se: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub slope: Option<Fit>,
    /// 95% interval for `estimate` (normal approximation).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ci: Option<[f64; 2]>,
    pub check: Check,
    pub pass: bool,
}

/// Minimum `R^2` of every slope fit.
pub const MIN_R2: f64 = 0.9;

impl Metric {
    pub fn new(name: impl Into<String>, estimate: f64, se: Option<f64>, check: Check) -> Self {
        let mut m = Metric {
            name: name.into(),
            estimate,
            se,
            slope: None,
            ci: se.map(|s| [estimate - 1.96 * s, estimate + 1.96 * s]),
            check,
            pass: false,
        };
        m.pass = m.evaluate();
        m
    }

    /// Metric on a fitted slope; `estimate` is the slope.
    pub fn fit(name: impl Into<String>, fit: Fit, check: Check) -> Self {
        let se = fit.slope_se;
        let mut m = Metric {
            name: name.into(),
            estimate: fit.slope,
            se: Some(se),
            ci: Some([fit.slope - 1.96 * se, fit.slope + 1.96 * se]),
            slope: Some(fit),
            check,
            pass: false,
        };
        m.pass = m.evaluate();
        m
    }

    pub fn info(name: impl Into<String>, estimate: f64, se: Option<f64>) -> Self {
        Metric::new(name, estimate, se, Check::Info)
    }

    /// Recomputes the pass flag from the stored numbers.
    pub fn evaluate(&self) -> bool {
        let x = self.estimate;
        let r2 = self.slope.as_ref().map_or(f64::NAN, |f| f.r2);
        match self.check {
            Check::Info => true,
            Check::AtLeast { bound } => x >= bound,
            Check::AtMost { bound } => x <= bound,
            Check::Between { lo, hi } => lo <= x && x <= hi,
            Check::WithinSe { target, k } => self.se.is_some_and(|se| (x - target).abs() <= k * se),
            Check::FitBetween { lo, hi, min_r2 } => lo <= x && x <= hi && r2 >= min_r2,
            Check::FitAtLeast { bound, min_r2 } => x >= bound && r2 >= min_r2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    pub name: String,
    pub config_hash: String,
    pub seed: u64,
    pub samples: usize,
    pub metrics: Vec<Metric>,
    pub pass: bool,
}

impl Report {
    pub fn new(
        experiment: &str,
        name: &str,
        config_hash: &str,
        seed: u64,
        samples: usize,
        metrics: Vec<Metric>,
    ) -> Self {
        let pass = metrics.iter().all(|m| m.pass);
        Report {
            experiment: experiment.into(),
            name: name.into(),
            config_hash: config_hash.into(),
            seed,
            samples,
            metrics,
            pass,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Metric> {
        self.metrics.iter().filter(|m| !m.pass)
    }

    /// Whether every stored pass flag matches its recomputation.
    pub fn is_consistent(&self) -> bool {
        self.metrics.iter().all(|m| m.pass == m.evaluate()) && self.pass == self.metrics.iter().all(|m| m.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| LabError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}
