//! Run configuration shared by every stochastic operation and recorded in
//! every output artifact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const WORKERS_ENV: &str = "GRAPHONLAB_WORKERS";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    /// Monte Carlo samples for plain density estimates.
    pub samples: u64,
    /// Extension samples per root tuple in constraint checks.
    pub ext_samples: u64,
    /// Feasible root tuples per constraint.
    pub tuples: u64,
    /// Absolute tolerance override for constraint checks.
    pub tol: Option<f64>,
    /// Slack added to the statistical tolerance.
    pub abs_slack: f64,
    /// Family-wise false alarm rate per constraint.
    pub alpha: f64,
    pub workers: usize,
    /// Truncation depth of checker levels and dyadic orders.
    pub depth: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            samples: 1_000_000,
            ext_samples: 4096,
            tuples: 64,
            tol: None,
            abs_slack: 1e-3,
            alpha: 1e-6,
            workers: default_workers(),
            depth: crate::graphon::DEFAULT_DEPTH,
        }
    }
}

/// Worker count from the environment, else 1.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&w: &usize| w > 0)
        .unwrap_or(1)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Range(format!("{what} must be positive")));
        if self.samples == 0 {
            return bad("samples");
        }
        if self.ext_samples < 2 {
            return bad("extension samples (at least 2)");
        }
        if self.tuples == 0 {
            return bad("tuples");
        }
        if self.workers == 0 {
            return bad("workers");
        }
        if self.depth == 0 || self.depth > 60 {
            return Err(Error::Range("depth must be in 1..=60".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Range("alpha must be in (0,1)".into()));
        }
        if !(self.abs_slack >= 0.0) || self.tol.is_some_and(|t| !(t > 0.0)) {
            return Err(Error::Range("tolerances must be positive".into()));
        }
        Ok(())
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("serializable")
    }
}
