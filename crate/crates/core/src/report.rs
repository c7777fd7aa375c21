//! Per-solve diagnostics shared by all solvers.

use std::time::Duration;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub solver: String,
    pub m: usize,
    pub iterations: usize,
    /// `||A0 + (A1 + A2 G) G||_inf`.
    pub residual_g: f64,
    /// `||R^2 A0 + R A1 + A2||_inf`.
    pub residual_r: f64,
    /// Residuals divided by `||A0|| + ||A1|| + ||A2||`.
    pub relative_residual_g: f64,
    pub relative_residual_r: f64,
    #[serde(with = "duration_ms")]
    pub wall_time: Duration,
    pub converged: bool,
    pub diagnostics: Vec<String>,
}

impl SolveReport {
    pub fn new(solver: &str, m: usize) -> Self {
        Self {
            solver: solver.to_string(),
            m,
            iterations: 0,
            residual_g: f64::NAN,
            residual_r: f64::NAN,
            relative_residual_g: f64::NAN,
            relative_residual_r: f64::NAN,
            wall_time: Duration::ZERO,
            converged: false,
            diagnostics: Vec::new(),
        }
    }

    pub fn note(&mut self, msg: impl Into<String>) {
        self.diagnostics.push(msg.into());
    }
}

mod duration_ms {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64() * 1e3)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let ms = f64::deserialize(d)?;
        Ok(Duration::from_secs_f64((ms / 1e3).max(0.0)))
    }
}
