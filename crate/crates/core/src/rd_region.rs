//! Optimal distortion--rate region boundary for deterministic rate tuples,
//! its steady state, and the entropy-power lower bound for non-Gaussian
//! innovations.
//!
//! The region is reported through its boundary `D*_1..D*_T`; any achievable
//! tuple dominates the boundary componentwise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gm_source::SourceSchedule;

/// Mean-square distortions `D_1..D_T`, plus the stationary fixed point when
/// the driving parameters are constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionTrace {
    pub values: Vec<f64>,
    pub steady: Option<f64>,
}

fn validate_rates(rates: &[f64], horizon: usize) -> Result<()> {
    if rates.len() != horizon {
        return Err(Error::LengthMismatch {
            expected: horizon,
            got: rates.len(),
        });
    }
    for (i, &r) in rates.iter().enumerate() {
        if !r.is_finite() || r < 0.0 {
            return Err(Error::Domain(format!("rate at t={} must be >= 0, got {r}", i + 1)));
        }
    }
    Ok(())
}

fn recursion(schedule: &SourceSchedule, noise_vars: &[f64], rates: &[f64]) -> Vec<f64> {
    let mut values = Vec::with_capacity(schedule.horizon());
    let mut d = 0.0;
    for ((&a, &v), &r) in schedule.alphas().iter().zip(noise_vars).zip(rates) {
        d = (a * a * d + v) * 2f64.powf(-2.0 * r);
        values.push(d);
    }
    values
}

/// Region boundary `D*_t = (alpha_t^2 D*_{t-1} + W_t) 2^{-2 R_t}`, `D*_0 = 0`.
///
/// The boundary is simultaneously achievable by the greedy predictive scheme
/// and a lower bound on any causal scheme, in the large-frame limit.
pub fn distortion_trace(schedule: &SourceSchedule, rates: &[f64]) -> Result<DistortionTrace> {
    validate_rates(rates, schedule.horizon())?;
    let values = recursion(schedule, schedule.ws(), rates);
    let steady = if schedule.is_constant() && rates.iter().all(|&r| r == rates[0]) {
        Some(steady_distortion(schedule.alphas()[0], schedule.ws()[0], rates[0])?)
    } else {
        None
    };
    Ok(DistortionTrace { values, steady })
}

/// Stationary fixed point `W 2^{-2R} / (1 - alpha^2 2^{-2R})`.
///
/// At rate zero this degenerates to the steady source power.
pub fn steady_distortion(alpha: f64, w: f64, rate: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha.abs() >= 1.0 {
        return Err(Error::Domain(format!("|alpha| must be < 1, got {alpha}")));
    }
    if !w.is_finite() || w <= 0.0 {
        return Err(Error::Domain(format!("W must be > 0, got {w}")));
    }
    if !rate.is_finite() || rate < 0.0 {
        return Err(Error::Domain(format!("rate must be >= 0, got {rate}")));
    }
    let factor = 2f64.powf(-2.0 * rate);
    Ok(w * factor / (1.0 - alpha * alpha * factor))
}

/// Lower-bound recursion for independent non-Gaussian innovations, with the
/// innovation variance replaced by its entropy power
/// `EP(w_t) = 2^{2 h(w_t)} / (2 pi e)`, supplied by the caller per step.
pub fn distortion_trace_ep(
    schedule: &SourceSchedule,
    entropy_powers: &[f64],
    rates: &[f64],
) -> Result<DistortionTrace> {
    validate_rates(rates, schedule.horizon())?;
    if entropy_powers.len() != schedule.horizon() {
        return Err(Error::LengthMismatch {
            expected: schedule.horizon(),
            got: entropy_powers.len(),
        });
    }
    for (i, (&ep, &w)) in entropy_powers.iter().zip(schedule.ws()).enumerate() {
        if !ep.is_finite() || ep <= 0.0 {
            return Err(Error::Domain(format!(
                "entropy power at t={} must be > 0, got {ep}",
                i + 1
            )));
        }
        // Entropy power never exceeds variance; the Gaussian case saturates it.
        if ep > w * (1.0 + 1e-12) {
            return Err(Error::Domain(format!(
                "entropy power at t={} exceeds the innovation variance ({ep} > {w})",
                i + 1
            )));
        }
    }
    let values = recursion(schedule, entropy_powers, rates);
    Ok(DistortionTrace { values, steady: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gm_source::{power_trace, steady_power};
    use approx::assert_abs_diff_eq;

    /// Fixed-point iteration oracle for the distortion recursion.
    fn iterate_to_steady(alpha: f64, noise: f64, rate: f64) -> f64 {
        let factor = 2f64.powf(-2.0 * rate);
        let mut d = 0.0;
        for _ in 0..1_000_000 {
            let next = (alpha * alpha * d + noise) * factor;
            if (next - d).abs() < 1e-14 {
                return next;
            }
            d = next;
        }
        d
    }

    #[test]
    fn zero_rate_reduces_to_power_trace() {
        let sched = SourceSchedule::constant(0.7, 1.0, 5).unwrap();
        let d = distortion_trace(&sched, &[0.0; 5]).unwrap();
        assert_eq!(d.values, power_trace(&sched).values);
    }

    #[test]
    fn first_step_is_scaled_innovation() {
        let sched = SourceSchedule::constant(0.3, 1.0, 1).unwrap();
        let d = distortion_trace(&sched, &[2.0]).unwrap();
        assert_abs_diff_eq!(d.values[0], 1.0 / 16.0, epsilon = 1e-15);
    }

    #[test]
    fn long_trace_matches_steady_distortion() {
        let sched = SourceSchedule::constant(0.7, 1.0, 50).unwrap();
        let d = distortion_trace(&sched, &[2.0; 50]).unwrap();
        let oracle = iterate_to_steady(0.7, 1.0, 2.0);
        assert_abs_diff_eq!(oracle, 0.064_474_5, epsilon = 1e-6);
        assert_abs_diff_eq!(*d.values.last().unwrap(), oracle, epsilon = 1e-12);
        assert_abs_diff_eq!(d.steady.unwrap(), oracle, epsilon = 1e-12);
    }

    #[test]
    fn steady_distortion_examples() {
        assert_abs_diff_eq!(steady_distortion(0.0, 3.0, 1.0).unwrap(), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(
            steady_distortion(0.7, 1.0, 2.0).unwrap(),
            0.0625 / 0.969_375,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            steady_distortion(0.7, 1.0, 0.0).unwrap(),
            steady_power(0.7, 1.0).unwrap(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn gaussian_entropy_power_recovers_plain_trace() {
        let sched = SourceSchedule::constant(0.6, 2.0, 10).unwrap();
        let rates = [1.5; 10];
        let plain = distortion_trace(&sched, &rates).unwrap();
        let ep = distortion_trace_ep(&sched, &[2.0; 10], &rates).unwrap();
        assert_eq!(plain.values, ep.values);
    }

    #[test]
    fn memoryless_entropy_power_bound() {
        let sched = SourceSchedule::constant(0.0, 1.0, 4).unwrap();
        let ep = distortion_trace_ep(&sched, &[0.8; 4], &[1.0; 4]).unwrap();
        for &v in &ep.values {
            assert_abs_diff_eq!(v, 0.2, epsilon = 1e-15);
        }
    }

    #[test]
    fn entropy_power_fixed_point() {
        let sched = SourceSchedule::constant(0.5, 1.0, 40).unwrap();
        let ep = distortion_trace_ep(&sched, &[0.5; 40], &[1.0; 40]).unwrap();
        // Oracle: fixed point of the EP recursion.
        let oracle = {
            let mut d = 0.0;
            for _ in 0..10_000 {
                d = (0.25 * d + 0.5) * 0.25;
            }
            d
        };
        assert_abs_diff_eq!(oracle, 0.133_333_333, epsilon = 1e-9);
        assert_abs_diff_eq!(*ep.values.last().unwrap(), oracle, epsilon = 1e-12);
    }

    #[test]
    fn contraction_ratio_is_exact() {
        let (alpha, w, rate) = (0.7, 1.0, 1.0);
        let sched = SourceSchedule::constant(alpha, w, 30).unwrap();
        let d = distortion_trace(&sched, &[rate; 30]).unwrap();
        let dinf = steady_distortion(alpha, w, rate).unwrap();
        let factor = 2f64.powf(-2.0 * rate);
        let mut checked = 0;
        for pair in d.values.windows(2) {
            // Past this point the gap is below float noise and the ratio
            // is meaningless.
            if (pair[0] - dinf).abs() < 1e-7 {
                break;
            }
            let ratio = (pair[1] - dinf) / (pair[0] - dinf);
            assert_abs_diff_eq!(ratio, alpha * alpha * factor, epsilon = 1e-9);
            checked += 1;
        }
        assert!(checked >= 5);
    }

    #[test]
    fn causality_and_monotonicity_in_rates() {
        let sched = SourceSchedule::constant(0.7, 1.0, 6).unwrap();
        let base = distortion_trace(&sched, &[1.0; 6]).unwrap();
        // Bumping R_3 strictly lowers D_t for t >= 3 and leaves t < 3 alone.
        let mut rates = [1.0; 6];
        rates[2] += 0.25;
        let bumped = distortion_trace(&sched, &rates).unwrap();
        for t in 0..2 {
            assert_eq!(base.values[t], bumped.values[t]);
        }
        for t in 2..6 {
            assert!(bumped.values[t] < base.values[t]);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let sched = SourceSchedule::constant(0.7, 1.0, 3).unwrap();
        assert!(matches!(
            distortion_trace(&sched, &[1.0; 4]).unwrap_err(),
            Error::LengthMismatch { .. }
        ));
        assert!(distortion_trace(&sched, &[1.0, -0.5, 1.0]).is_err());
        assert!(distortion_trace_ep(&sched, &[1.0, 0.0, 1.0], &[1.0; 3]).is_err());
        assert!(distortion_trace_ep(&sched, &[1.5, 1.0, 1.0], &[1.0; 3]).is_err());
        assert!(steady_distortion(1.2, 1.0, 1.0).is_err());
    }
}
