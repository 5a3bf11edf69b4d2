//! Sample-path Monte Carlo for the analytical distortion recursions.
//!
//! Every scheme here is simulated with an additive forward test channel, so
//! the joint law stays Gaussian given the erasure pattern and the empirical
//! squared errors are unbiased estimates of the matching recursion values.
//! Agreement within sampling error is the cross-check that the averaged
//! recursions were derived correctly.
//!
//! Determinism: each path owns a counter-mode generator stream derived from
//! the run seed, and the per-path results are reduced sequentially in path
//! order with compensated summation. Reports are bit-identical across thread
//! counts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::delayed_fb::{baseline_best_case, baseline_no_prediction, baseline_worst_case};
use crate::error::{Error, Result};
use crate::gm_source::SourceSchedule;
use crate::random_rate::{random_rate_trace, RatePolicy};

/// What the encoder learns about packet arrivals, and when.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Feedback {
    /// The encoder knows `b_t` before producing frame `t + 1`.
    Instantaneous,
    /// The encoder knows `b_t` only before producing frame `t + 2`.
    DelayedOneStep,
}

/// Coding policy to simulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// Predictive coding against the decoder's true state (instantaneous
    /// feedback); with `beta = 1` this is the deterministic-rate scheme.
    Greedy,
    /// Memoryless coding of the source sample itself; erasures reconstruct 0.
    NoPrediction,
    /// Delayed feedback, encoder always assumes the previous packet was lost.
    WorstCase,
    /// Delayed feedback, encoder always assumes the previous packet arrived;
    /// the decoder discards frames whose premise failed.
    BestCase,
}

impl Scheme {
    pub fn feedback(self) -> Feedback {
        match self {
            Scheme::Greedy => Feedback::Instantaneous,
            Scheme::NoPrediction => Feedback::Instantaneous,
            Scheme::WorstCase | Scheme::BestCase => Feedback::DelayedOneStep,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub alpha: f64,
    pub w: f64,
    pub rate: f64,
    /// Arrival probability; 1 disables erasures.
    pub beta: f64,
    pub scheme: Scheme,
    pub horizon: usize,
    pub paths: u64,
    pub seed: u64,
}

impl SimConfig {
    fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() || self.alpha.abs() >= 1.0 {
            return Err(Error::Domain(format!("|alpha| must be < 1, got {}", self.alpha)));
        }
        if !self.w.is_finite() || self.w <= 0.0 {
            return Err(Error::Domain(format!("W must be > 0, got {}", self.w)));
        }
        if !self.rate.is_finite() || self.rate < 0.0 {
            return Err(Error::Domain(format!("rate must be >= 0, got {}", self.rate)));
        }
        if !self.beta.is_finite() || !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::Domain(format!("beta must be in [0,1], got {}", self.beta)));
        }
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be >= 1".into()));
        }
        if self.paths < 2 {
            return Err(Error::Config("need at least 2 paths for a standard error".into()));
        }
        Ok(())
    }
}

/// Simulation output: per-step empirical mean squared error across paths,
/// its standard error (computed across path means, which absorbs any
/// within-path correlation), and the matching analytical trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub config: SimConfig,
    pub empirical: Vec<f64>,
    pub standard_error: Vec<f64>,
    pub theory: Vec<f64>,
    /// Generator identification, recorded so reports are reproducible.
    pub rng: String,
    pub normal_sampler: String,
}

impl SimReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,theory,empirical,stderr,sigmas\n");
        for t in 0..self.empirical.len() {
            let se = self.standard_error[t];
            let sigmas = if se > 0.0 {
                (self.empirical[t] - self.theory[t]).abs() / se
            } else {
                0.0
            };
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                t + 1,
                self.theory[t],
                self.empirical[t],
                se,
                sigmas
            ));
        }
        out
    }
}

/// Forward test channel realizing distortion `power * 2^(-2 rate)` on a
/// zero-mean input of variance `power`. `rate = 0` reproduces nothing.
pub fn test_channel<R: Rng + ?Sized>(x: f64, power: f64, rate: f64, rng: &mut R) -> f64 {
    if rate <= 0.0 {
        return 0.0;
    }
    let d = power * 2f64.powf(-2.0 * rate);
    let gain = (power - d) / power;
    let noise_sd = (power * d / (power - d)).sqrt();
    let n: f64 = rng.sample(StandardNormal);
    gain * (x + noise_sd * n)
}

struct PathCtx<'c> {
    cfg: &'c SimConfig,
    rng: ChaCha8Rng,
}

impl PathCtx<'_> {
    fn innovation(&mut self) -> f64 {
        let n: f64 = self.rng.sample(StandardNormal);
        self.cfg.w.sqrt() * n
    }

    fn arrives(&mut self) -> bool {
        self.rng.gen::<f64>() < self.cfg.beta
    }
}

/// Squared reconstruction errors along one sample path.
fn run_path(cfg: &SimConfig, path: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(path + 1);
    let mut ctx = PathCtx { cfg, rng };
    let (alpha, w, rate) = (cfg.alpha, cfg.w, cfg.rate);
    let a2 = alpha * alpha;
    let factor = 2f64.powf(-2.0 * rate);
    let mut errs = Vec::with_capacity(cfg.horizon);

    let mut s = 0.0;
    match cfg.scheme {
        Scheme::Greedy => {
            // Encoder and decoder share the reconstruction state; the
            // quantizer power follows the realized-erasure recursion.
            let mut shat = 0.0;
            let mut d_theory = 0.0;
            for _ in 0..cfg.horizon {
                s = alpha * s + ctx.innovation();
                let p = a2 * d_theory + w;
                let x = s - alpha * shat;
                let xhat = test_channel(x, p, rate, &mut ctx.rng);
                if ctx.arrives() {
                    shat = alpha * shat + xhat;
                    d_theory = p * factor;
                } else {
                    shat *= alpha;
                    d_theory = p;
                }
                errs.push((s - shat) * (s - shat));
            }
        }
        Scheme::NoPrediction => {
            let mut s_power = 0.0;
            for _ in 0..cfg.horizon {
                s = alpha * s + ctx.innovation();
                s_power = a2 * s_power + w;
                let xhat = test_channel(s, s_power, rate, &mut ctx.rng);
                let shat = if ctx.arrives() { xhat } else { 0.0 };
                errs.push((s - shat) * (s - shat));
            }
        }
        Scheme::WorstCase => {
            // The frame at t is coded against the two-step prediction
            // alpha^2 shat_{t-2}, which the decoder always knows, so every
            // arrival is applicable regardless of b_{t-1}.
            let (mut sd_prev, mut sd_prevprev) = (0.0, 0.0);
            let (mut d_prev, mut d_prevprev) = (0.0, 0.0);
            for t in 1..=cfg.horizon {
                s = alpha * s + ctx.innovation();
                let (base, p) = if t == 1 {
                    (0.0, w)
                } else {
                    (a2 * sd_prevprev, a2 * a2 * d_prevprev + (1.0 + a2) * w)
                };
                let xhat = test_channel(s - base, p, rate, &mut ctx.rng);
                let (sd, d) = if ctx.arrives() {
                    (base + xhat, p * factor)
                } else {
                    (alpha * sd_prev, a2 * d_prev + w)
                };
                sd_prevprev = sd_prev;
                sd_prev = sd;
                d_prevprev = d_prev;
                d_prev = d;
                errs.push((s - sd) * (s - sd));
            }
        }
        Scheme::BestCase => {
            // The encoder codes against the decoder state implied by
            // "b_{t-1} = 1"; the decoder applies a frame only when that
            // premise held and the frame itself arrived.
            let (mut sd_prev, mut sd_prevprev) = (0.0, 0.0);
            let (mut d_prev, mut d_prevprev) = (0.0, 0.0);
            let mut xhat_prev = 0.0;
            let (mut b_prev, mut b_prevprev) = (true, true);
            for t in 1..=cfg.horizon {
                s = alpha * s + ctx.innovation();
                let (shat_hyp, v_hyp) = if t == 1 {
                    (0.0, 0.0)
                } else if b_prevprev {
                    // Previous frame was applicable if it arrived.
                    (alpha * sd_prevprev + xhat_prev, (a2 * d_prevprev + w) * factor)
                } else {
                    // Previous frame was discarded even on arrival.
                    (alpha * sd_prevprev, a2 * d_prevprev + w)
                };
                let p = a2 * v_hyp + w;
                let xhat = test_channel(s - alpha * shat_hyp, p, rate, &mut ctx.rng);
                let b_t = ctx.arrives();
                let (sd, d) = if b_t && b_prev {
                    // Premise held: shat_hyp equals the decoder state.
                    (alpha * sd_prev + xhat, p * factor)
                } else {
                    (alpha * sd_prev, a2 * d_prev + w)
                };
                sd_prevprev = sd_prev;
                sd_prev = sd;
                d_prevprev = d_prev;
                d_prev = d;
                b_prevprev = b_prev;
                b_prev = b_t;
                xhat_prev = xhat;
                errs.push((s - sd) * (s - sd));
            }
        }
    }
    errs
}

/// Analytical trace the simulation is compared against.
fn theory_trace(cfg: &SimConfig) -> Result<Vec<f64>> {
    let schedule = SourceSchedule::constant(cfg.alpha, cfg.w, cfg.horizon)?;
    match cfg.scheme {
        Scheme::Greedy => {
            let policy = if cfg.beta == 1.0 {
                RatePolicy::Deterministic { rate: cfg.rate }
            } else {
                RatePolicy::Erasure { beta: cfg.beta, rate: cfg.rate }
            };
            let policies = vec![policy; cfg.horizon];
            Ok(random_rate_trace(&schedule, &policies)?.values)
        }
        Scheme::NoPrediction => {
            Ok(baseline_no_prediction(cfg.alpha, cfg.w, cfg.rate, cfg.beta, cfg.horizon)?.values)
        }
        Scheme::WorstCase => {
            Ok(baseline_worst_case(cfg.alpha, cfg.w, cfg.rate, cfg.beta, cfg.horizon)?.values)
        }
        Scheme::BestCase => {
            Ok(baseline_best_case(cfg.alpha, cfg.w, cfg.rate, cfg.beta, cfg.horizon)?.values)
        }
    }
}

#[derive(Default, Clone, Copy)]
struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    fn add(&mut self, v: f64) {
        let y = v - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Runs the simulation. Paths are generated in parallel but reduced in path
/// order, so the report only depends on the configuration.
pub fn simulate(cfg: &SimConfig) -> Result<SimReport> {
    cfg.validate()?;
    let theory = theory_trace(cfg)?;
    let per_path: Vec<Vec<f64>> = (0..cfg.paths)
        .into_par_iter()
        .map(|p| run_path(cfg, p))
        .collect();

    let t_len = cfg.horizon;
    let mut sums = vec![Kahan::default(); t_len];
    let mut sq_sums = vec![Kahan::default(); t_len];
    for path in &per_path {
        for (t, &e) in path.iter().enumerate() {
            sums[t].add(e);
            sq_sums[t].add(e * e);
        }
    }
    let n = cfg.paths as f64;
    let empirical: Vec<f64> = sums.iter().map(|k| k.sum / n).collect();
    let standard_error = sq_sums
        .iter()
        .zip(&empirical)
        .map(|(k, &mean)| {
            let var = ((k.sum - n * mean * mean) / (n - 1.0)).max(0.0);
            (var / n).sqrt()
        })
        .collect();
    Ok(SimReport {
        config: *cfg,
        empirical,
        standard_error,
        theory,
        rng: "chacha8 (per-path streams)".into(),
        normal_sampler: "ziggurat standard normal".into(),
    })
}

/// Outcome of checking a report against its analytical trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareSummary {
    pub k_sigmas: f64,
    /// Steps (1-based) where the deviation exceeds `k_sigmas` standard errors.
    pub violations: Vec<usize>,
    pub max_sigma: f64,
    pub pass: bool,
}

pub fn compare(report: &SimReport, k_sigmas: f64) -> CompareSummary {
    let mut violations = Vec::new();
    let mut max_sigma: f64 = 0.0;
    for t in 0..report.empirical.len() {
        let se = report.standard_error[t];
        let dev = (report.empirical[t] - report.theory[t]).abs();
        let sigma = if se > 0.0 { dev / se } else if dev == 0.0 { 0.0 } else { f64::INFINITY };
        max_sigma = max_sigma.max(sigma);
        if sigma > k_sigmas {
            violations.push(t + 1);
        }
    }
    CompareSummary { k_sigmas, violations: violations.clone(), max_sigma, pass: violations.is_empty() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;

    fn cfg(scheme: Scheme, beta: f64) -> SimConfig {
        SimConfig {
            alpha: 0.7,
            w: 1.0,
            rate: 2.0,
            beta,
            scheme,
            horizon: 12,
            paths: 20_000,
            seed: 1234,
        }
    }

    #[test]
    fn test_channel_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (power, rate) = (2.5, 1.5);
        let d = power * 2f64.powf(-2.0 * rate);
        let n = 200_000;
        let (mut err_sq, mut cross) = (0.0, 0.0);
        for _ in 0..n {
            let x = power.sqrt() * rng.sample::<f64, _>(StandardNormal);
            let xhat = test_channel(x, power, rate, &mut rng);
            err_sq += (x - xhat) * (x - xhat);
            cross += (x - xhat) * xhat;
        }
        // Distortion matches the design value and the error is orthogonal
        // to the reproduction.
        assert_abs_diff_eq!(err_sq / n as f64, d, epsilon = 0.01 * d);
        assert!((cross / n as f64).abs() < 0.01 * power);
    }

    #[test]
    fn test_channel_zero_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        assert_eq!(test_channel(3.0, 1.0, 0.0, &mut rng), 0.0);
    }

    #[test]
    fn greedy_deterministic_tracks_theory() {
        let report = simulate(&cfg(Scheme::Greedy, 1.0)).unwrap();
        let summary = compare(&report, 4.0);
        assert!(summary.pass, "max sigma {}", summary.max_sigma);
    }

    #[test]
    fn greedy_erasure_tracks_theory() {
        let report = simulate(&cfg(Scheme::Greedy, 0.5)).unwrap();
        let summary = compare(&report, 4.0);
        assert!(summary.pass, "max sigma {}", summary.max_sigma);
    }

    #[test]
    fn no_prediction_tracks_theory() {
        let report = simulate(&cfg(Scheme::NoPrediction, 0.5)).unwrap();
        let summary = compare(&report, 4.0);
        assert!(summary.pass, "max sigma {}", summary.max_sigma);
    }

    #[test]
    fn worst_case_tracks_theory() {
        let report = simulate(&cfg(Scheme::WorstCase, 0.5)).unwrap();
        let summary = compare(&report, 4.0);
        assert!(summary.pass, "max sigma {}", summary.max_sigma);
    }

    #[test]
    fn best_case_tracks_theory() {
        let report = simulate(&cfg(Scheme::BestCase, 0.5)).unwrap();
        let summary = compare(&report, 4.0);
        assert!(summary.pass, "max sigma {}", summary.max_sigma);
    }

    #[test]
    fn reports_are_bit_identical_across_thread_counts() {
        let config = cfg(Scheme::Greedy, 0.5);
        let a = simulate(&config).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| simulate(&config).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn stderr_scales_with_path_count() {
        let mut base = cfg(Scheme::Greedy, 0.5);
        base.paths = 4_000;
        let small = simulate(&base).unwrap();
        base.paths = 16_000;
        let large = simulate(&base).unwrap();
        // Quadrupling the paths should roughly halve the standard error.
        let t = base.horizon - 1;
        let ratio = small.standard_error[t] / large.standard_error[t];
        assert!((1.6..2.6).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn csv_has_header_and_rows() {
        let mut c = cfg(Scheme::NoPrediction, 1.0);
        c.paths = 8;
        c.horizon = 3;
        let report = simulate(&c).unwrap();
        let csv = report.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "t,theory,empirical,stderr,sigmas");
        assert!(lines[1].starts_with("1,"));
    }

    #[test]
    fn rejects_single_path() {
        let mut c = cfg(Scheme::Greedy, 1.0);
        c.paths = 1;
        assert!(simulate(&c).is_err());
    }
}
