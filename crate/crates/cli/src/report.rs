//! Assembly of `report.json`. Field order in [`RunReport`] is the key order
//! in the file, and every entry is deterministic for fixed inputs, so a
//! rerun produces a byte-identical report. Wall-clock measurements go to a
//! separate `timings.json` sidecar and never into the report.

use std::path::Path;

use serde::Serialize;

use rbe_slab_core::collision::ContinuityReport;
use rbe_slab_core::norms::NormReport;
use rbe_slab_core::steady::ConvergenceTrace;

use crate::config::RunConfig;
use crate::oracle::OracleRow;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Coercivity {
    /// Min over the grid of `Lf / (p0)^(1/2)`.
    pub c_l_hat: f64,
    /// Max over the grid of `Lf / (p0)^(1/2)`.
    pub c_u_hat: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub mode: String,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compatibility: Option<[f64; 5]>,
    /// `(left, right)` empirical loss floors of the boundary profiles.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary_loss_floor: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<ConvergenceTrace<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coercivity: Option<Coercivity>,
    /// Lipschitz ratios of the converged field against the lower envelope.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub continuity: Option<ContinuityReport<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norms: Option<NormReport<f64>>,
    /// Collision-invariant residuals of the mid-slab slice.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moment_residuals: Option<[f64; 5]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<Vec<OracleRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunReport {
    pub fn new(mode: &str, config: RunConfig) -> Self {
        Self {
            schema_version: 1,
            mode: mode.into(),
            config,
            compatibility: None,
            boundary_loss_floor: None,
            trace: None,
            coercivity: None,
            continuity: None,
            norms: None,
            moment_residuals: None,
            oracle: None,
            error: None,
        }
    }
}

pub fn write_report(path: &Path, report: &RunReport) -> Result<(), String> {
    let mut text = serde_json::to_string_pretty(report).map_err(|e| e.to_string())?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

/// Named wall-clock phase durations, kept out of the report so the report
/// stays bit-reproducible.
#[derive(Debug, Default, Serialize)]
pub struct Timings {
    pub phases: Vec<(String, f64)>,
}

impl Timings {
    pub fn push(&mut self, name: &str, seconds: f64) {
        self.phases.push((name.into(), seconds));
    }

    pub fn time<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let t0 = std::time::Instant::now();
        let out = f();
        self.push(name, t0.elapsed().as_secs_f64());
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), String> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| e.to_string())?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
    }
}
