//! Gauss--Markov source model `s_t = alpha_t s_{t-1} + w_t` (with `s_0 = 0`)
//! and its second-moment evolution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-step process coefficients `alpha_t` and innovation variances `W_t`,
/// one entry per `t in [1, T]`.
///
/// Invariants, enforced at construction: `|alpha_t| < 1`, `W_t > 0`, and both
/// sequences have the same length `T >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSchedule {
    alphas: Vec<f64>,
    ws: Vec<f64>,
}

impl SourceSchedule {
    pub fn new(alphas: Vec<f64>, ws: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::Schedule {
                index: 1,
                reason: "horizon must be at least 1".into(),
            });
        }
        if alphas.len() != ws.len() {
            return Err(Error::LengthMismatch {
                expected: alphas.len(),
                got: ws.len(),
            });
        }
        for (i, &a) in alphas.iter().enumerate() {
            if !a.is_finite() || a.abs() >= 1.0 {
                return Err(Error::Schedule {
                    index: i + 1,
                    reason: format!("|alpha| must be < 1, got {a}"),
                });
            }
        }
        for (i, &w) in ws.iter().enumerate() {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::Schedule {
                    index: i + 1,
                    reason: format!("W must be > 0, got {w}"),
                });
            }
        }
        Ok(Self { alphas, ws })
    }

    /// Stationary specialization `alpha_t == alpha`, `W_t == W`, expanded to
    /// `horizon` entries.
    pub fn constant(alpha: f64, w: f64, horizon: usize) -> Result<Self> {
        Self::new(vec![alpha; horizon], vec![w; horizon])
    }

    pub fn horizon(&self) -> usize {
        self.alphas.len()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn ws(&self) -> &[f64] {
        &self.ws
    }

    pub fn is_constant(&self) -> bool {
        self.alphas.iter().all(|&a| a == self.alphas[0])
            && self.ws.iter().all(|&w| w == self.ws[0])
    }
}

/// Source powers `S_1..S_T` with `S_t = alpha_t^2 S_{t-1} + W_t`, `S_0 = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerTrace {
    pub values: Vec<f64>,
}

/// Evolves the source power recursion over the whole schedule.
pub fn power_trace(schedule: &SourceSchedule) -> PowerTrace {
    let mut values = Vec::with_capacity(schedule.horizon());
    let mut s = 0.0;
    for (&a, &w) in schedule.alphas().iter().zip(schedule.ws()) {
        s = a * a * s + w;
        values.push(s);
    }
    PowerTrace { values }
}

/// Steady-state source power `W / (1 - alpha^2)` of the stationary source.
pub fn steady_power(alpha: f64, w: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha.abs() >= 1.0 {
        return Err(Error::Domain(format!("|alpha| must be < 1, got {alpha}")));
    }
    if !w.is_finite() || w <= 0.0 {
        return Err(Error::Domain(format!("W must be > 0, got {w}")));
    }
    Ok(w / (1.0 - alpha * alpha))
}
