use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sheet::InitialDataKind;

/// Definition of a simulation run, loaded from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub kind: InitialDataKind,
    /// Number of vortices `N + 1`.
    pub n_nodes: usize,
    pub eps: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub t_final: f64,
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: f64,
    /// Spacing of invariant records; defaults to `snapshot_every`.
    #[serde(default)]
    pub invariant_every: Option<f64>,
    #[serde(default = "default_drift_tol")]
    pub drift_tol: f64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Worker threads for the velocity sums; 0 picks the machine default.
    #[serde(default)]
    pub threads: usize,
}

fn default_dt() -> f64 {
    0.005
}

fn default_snapshot_every() -> f64 {
    0.1
}

fn default_drift_tol() -> f64 {
    5e-4
}

fn default_output_dir() -> PathBuf {
    PathBuf::from(".")
}

impl SimulationConfig {
    pub fn new(kind: InitialDataKind, n_nodes: usize, eps: f64, t_final: f64) -> Self {
        SimulationConfig {
            kind,
            n_nodes,
            eps,
            dt: default_dt(),
            t_final,
            snapshot_every: default_snapshot_every(),
            invariant_every: None,
            drift_tol: default_drift_tol(),
            output_dir: default_output_dir(),
            threads: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: SimulationConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.n_nodes < 2 {
            return fail(format!("n_nodes must be >= 2, got {}", self.n_nodes));
        }
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return fail(format!("eps must be positive, got {}", self.eps));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return fail(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return fail(format!("t_final must be nonnegative, got {}", self.t_final));
        }
        if !(self.drift_tol > 0.0) {
            return fail(format!(
                "drift_tol must be positive, got {}",
                self.drift_tol
            ));
        }
        self.step_count()?;
        self.stride("snapshot_every", self.snapshot_every)?;
        if let Some(every) = self.invariant_every {
            self.stride("invariant_every", every)?;
        }
        Ok(())
    }

    /// Number of time steps to reach `t_final`.
    pub fn step_count(&self) -> Result<usize> {
        whole_steps(self.t_final, self.dt).ok_or_else(|| {
            Error::Config(format!(
                "t_final = {} is not a whole number of steps dt = {}",
                self.t_final, self.dt
            ))
        })
    }

    pub(crate) fn snapshot_stride(&self) -> Result<usize> {
        self.stride("snapshot_every", self.snapshot_every)
    }

    pub(crate) fn invariant_stride(&self) -> Result<usize> {
        self.stride(
            "invariant_every",
            self.invariant_every.unwrap_or(self.snapshot_every),
        )
    }

    fn stride(&self, name: &str, every: f64) -> Result<usize> {
        match whole_steps(every, self.dt) {
            Some(s) if s >= 1 => Ok(s),
            _ => Err(Error::Config(format!(
                "{name} = {every} must be a positive whole number of steps dt = {}",
                self.dt
            ))),
        }
    }
}

fn whole_steps(span: f64, dt: f64) -> Option<usize> {
    if !(span >= 0.0) || !span.is_finite() {
        return None;
    }
    let steps = (span / dt).round();
    if (steps * dt - span).abs() <= 1e-9 * span.max(1.0) {
        Some(steps as usize)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_defaults() {
        let c = SimulationConfig::from_json(
            r#"{"kind": "loaded_wing", "n_nodes": 2001, "eps": 0.1, "t_final": 1.6}"#,
        )
        .unwrap();
        assert_eq!(c.dt, 0.005);
        assert_eq!(c.drift_tol, 5e-4);
        assert_eq!(c.snapshot_every, 0.1);
        assert_eq!(c.step_count().unwrap(), 320);
        assert_eq!(c.snapshot_stride().unwrap(), 20);
        assert_eq!(c.invariant_stride().unwrap(), 20);
    }

    #[test]
    fn rejects_invalid() {
        let bad = [
            r#"{"kind": "loaded_wing", "n_nodes": 2001, "eps": 0.0, "t_final": 1.6}"#,
            r#"{"kind": "loaded_wing", "n_nodes": 1, "eps": 0.1, "t_final": 1.6}"#,
            r#"{"kind": "loaded_wing", "n_nodes": 11, "eps": 0.1, "t_final": -1}"#,
            r#"{"kind": "loaded_wing", "n_nodes": 11, "eps": 0.1, "t_final": 0.0012}"#,
            r#"{"kind": "delta_wing", "n_nodes": 11, "eps": 0.1, "t_final": 1}"#,
            r#"{"kind": "loaded_wing", "n_nodes": 11, "eps": 0.1, "t_final": 1, "extra": 2}"#,
            r#"{"kind": "loaded_wing", "n_nodes": 11, "eps": 0.1, "t_final": 1, "snapshot_every": 0}"#,
        ];
        for text in bad {
            assert!(
                matches!(SimulationConfig::from_json(text), Err(Error::Config(_))),
                "{text}"
            );
        }
    }
}
