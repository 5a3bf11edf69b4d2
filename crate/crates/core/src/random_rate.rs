//! Distortion traces under independent random rate budgets, packet erasures
//! with instantaneous feedback, and multi-packet frame splitting.
//!
//! The whole module revolves around the per-step contraction factor
//! `B = E[2^{-2 r_t}]`: the random-rate recursion is the deterministic one
//! with `2^{-2R}` replaced by `B`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gm_source::SourceSchedule;
use crate::rd_region::DistortionTrace;

const MAX_PACKETS: u32 = 64;

/// Per-step rate process `r_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RatePolicy {
    /// Degenerate distribution at `rate`.
    Deterministic { rate: f64 },
    /// Arbitrary finite support of `(rate, probability)` pairs.
    Discrete { support: Vec<(f64, f64)> },
    /// One packet of rate `rate`, delivered with probability `beta`
    /// (`r_t = b_t R`).
    Erasure { beta: f64, rate: f64 },
    /// `packets` packets of rate `rate / packets` each, with i.i.d. per-packet
    /// erasures, so the arrival count is Binomial(`packets`, `beta`).
    MultiPacket { beta: f64, rate: f64, packets: u32 },
}

fn check_rate(r: f64) -> Result<()> {
    if !r.is_finite() || r < 0.0 {
        return Err(Error::Policy(format!("rates must be >= 0, got {r}")));
    }
    Ok(())
}

fn check_beta(beta: f64) -> Result<()> {
    if !beta.is_finite() || !(0.0..=1.0).contains(&beta) {
        return Err(Error::Policy(format!("beta must be in [0,1], got {beta}")));
    }
    Ok(())
}

impl RatePolicy {
    pub fn validate(&self) -> Result<()> {
        match self {
            RatePolicy::Deterministic { rate } => check_rate(*rate),
            RatePolicy::Discrete { support } => {
                if support.is_empty() {
                    return Err(Error::Policy("discrete support must be non-empty".into()));
                }
                let mut total = 0.0;
                for &(r, p) in support {
                    check_rate(r)?;
                    if !p.is_finite() || p < 0.0 {
                        return Err(Error::Policy(format!("probabilities must be >= 0, got {p}")));
                    }
                    total += p;
                }
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::Policy(format!(
                        "probabilities must sum to 1 within 1e-12, got {total}"
                    )));
                }
                Ok(())
            }
            RatePolicy::Erasure { beta, rate } => {
                check_beta(*beta)?;
                check_rate(*rate)
            }
            RatePolicy::MultiPacket { beta, rate, packets } => {
                check_beta(*beta)?;
                check_rate(*rate)?;
                if *packets < 1 || *packets > MAX_PACKETS {
                    return Err(Error::Policy(format!(
                        "packet count must be in [1, {MAX_PACKETS}], got {packets}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// `E[2^{-c r_t}]` for `c > 0`; the analytic recursions use `c = 2`.
    fn exp_moment(&self, c: f64) -> f64 {
        match self {
            RatePolicy::Deterministic { rate } => 2f64.powf(-c * rate),
            RatePolicy::Discrete { support } => support
                .iter()
                .map(|&(r, p)| p * 2f64.powf(-c * r))
                .sum(),
            RatePolicy::Erasure { beta, rate } => 1.0 - beta * (1.0 - 2f64.powf(-c * rate)),
            RatePolicy::MultiPacket { beta, rate, packets } => {
                let n = *packets;
                (0..=n)
                    .map(|k| {
                        binomial_pmf(n, k, *beta) * 2f64.powf(-c * f64::from(k) * rate / f64::from(n))
                    })
                    .sum()
            }
        }
    }

    pub fn mean_rate(&self) -> f64 {
        match self {
            RatePolicy::Deterministic { rate } => *rate,
            RatePolicy::Discrete { support } => support.iter().map(|&(r, p)| p * r).sum(),
            RatePolicy::Erasure { beta, rate } => beta * rate,
            RatePolicy::MultiPacket { beta, rate, .. } => beta * rate,
        }
    }
}

/// Exact binomial coefficient; integer arithmetic up to n = 30, log-space
/// above (n is capped at 64 by policy validation).
fn binomial_coefficient(n: u32, k: u32) -> f64 {
    debug_assert!(k <= n && n <= MAX_PACKETS);
    if n <= 30 {
        let mut c: u128 = 1;
        for i in 0..k.min(n - k) {
            c = c * u128::from(n - i) / u128::from(i + 1);
        }
        c as f64
    } else {
        let ln_fact = |m: u32| -> f64 { (2..=m).map(|i| f64::from(i).ln()).sum() };
        (ln_fact(n) - ln_fact(k) - ln_fact(n - k)).exp()
    }
}

fn binomial_pmf(n: u32, k: u32, beta: f64) -> f64 {
    // powi(0) == 1 keeps the beta = 0 and beta = 1 endpoints exact.
    binomial_coefficient(n, k)
        * beta.powi(k as i32)
        * (1.0 - beta).powi((n - k) as i32)
}

/// Explicit binomial support of a [`RatePolicy::MultiPacket`] policy, as
/// `(rate, probability)` pairs usable for a [`RatePolicy::Discrete`].
pub fn binomial_support(packets: u32, beta: f64, rate: f64) -> Result<Vec<(f64, f64)>> {
    let policy = RatePolicy::MultiPacket { beta, rate, packets };
    policy.validate()?;
    Ok((0..=packets)
        .map(|k| {
            (
                f64::from(k) * rate / f64::from(packets),
                binomial_pmf(packets, k, beta),
            )
        })
        .collect())
}

/// Per-step contraction factor `B = E[2^{-2 r_t}] in (0, 1]`.
pub fn rate_factor(policy: &RatePolicy) -> Result<f64> {
    policy.validate()?;
    Ok(policy.exp_moment(2.0))
}

/// Single-exponent moment `E[2^{-r_t}]`, an alternative splitting objective
/// kept for side-by-side comparison.
pub fn rate_factor_single(policy: &RatePolicy) -> Result<f64> {
    policy.validate()?;
    Ok(policy.exp_moment(1.0))
}

/// `D*_t = (alpha_t^2 D*_{t-1} + W_t) E[2^{-2 r_t}]` with `D*_0 = 0`.
///
/// Rates must be independent across time; that is the caller's modeling
/// responsibility.
pub fn random_rate_trace(schedule: &SourceSchedule, policies: &[RatePolicy]) -> Result<DistortionTrace> {
    if policies.len() != schedule.horizon() {
        return Err(Error::LengthMismatch {
            expected: schedule.horizon(),
            got: policies.len(),
        });
    }
    let mut values = Vec::with_capacity(schedule.horizon());
    let mut d = 0.0;
    for ((&a, &w), policy) in schedule.alphas().iter().zip(schedule.ws()).zip(policies) {
        let b = rate_factor(policy)?;
        d = (a * a * d + w) * b;
        values.push(d);
    }
    let steady = if schedule.is_constant() && policies.iter().all(|p| p == &policies[0]) {
        Some(steady_random(
            schedule.alphas()[0],
            schedule.ws()[0],
            rate_factor(&policies[0])?,
        )?)
    } else {
        None
    };
    Ok(DistortionTrace { values, steady })
}

/// Stationary fixed point `B W / (1 - alpha^2 B)` for i.i.d. rates.
pub fn steady_random(alpha: f64, w: f64, b: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha.abs() >= 1.0 {
        return Err(Error::Domain(format!("|alpha| must be < 1, got {alpha}")));
    }
    if !w.is_finite() || w <= 0.0 {
        return Err(Error::Domain(format!("W must be > 0, got {w}")));
    }
    if !b.is_finite() || b <= 0.0 || b > 1.0 {
        return Err(Error::Domain(format!("rate factor must be in (0,1], got {b}")));
    }
    Ok(b * w / (1.0 - alpha * alpha * b))
}

/// Objective for the packet-count optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PacketObjective {
    /// `E[2^{-2 r_t}]`, the factor entering the distortion recursion (default).
    SquaredExponent,
    /// `E[2^{-r_t}]`, the single-exponent alternative.
    SingleExponent,
}

/// Minimizes the configured moment over the packet count `n in [1, n_max]`.
///
/// Returns the minimizing count (ties broken toward smaller `n`) and every
/// evaluated factor, so callers can inspect the full table.
pub fn optimize_packets(
    rate: f64,
    beta: f64,
    n_max: u32,
    objective: PacketObjective,
) -> Result<(u32, Vec<f64>)> {
    if n_max < 1 {
        return Err(Error::Domain(format!("n_max must be >= 1, got {n_max}")));
    }
    let exponent = match objective {
        PacketObjective::SquaredExponent => 2.0,
        PacketObjective::SingleExponent => 1.0,
    };
    let mut factors = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        let policy = RatePolicy::MultiPacket { beta, rate, packets: n };
        policy.validate()?;
        factors.push(policy.exp_moment(exponent));
    }
    let mut best = 0;
    for (i, &f) in factors.iter().enumerate() {
        if f < factors[best] {
            best = i;
        }
    }
    Ok((best as u32 + 1, factors))
}
