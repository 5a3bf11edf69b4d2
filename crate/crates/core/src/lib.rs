//! Analytic distortion--rate traces for sequential coding of Gauss--Markov
//! sources over rate-constrained and packet-erasure channels, together with a
//! seeded sample-path Monte Carlo simulator that validates every recursion.
//!
//! The crate is organized around the channel knowledge available to the
//! encoder:
//!
//! * [`rd_region`] -- deterministic per-step rate budgets,
//! * [`random_rate`] -- independent random rate budgets, packet erasures with
//!   instantaneous feedback, and multi-packet frame splitting,
//! * [`kaspi`] -- the Gaussian two-sided side-information rate function and
//!   its numerical inversion,
//! * [`delayed_fb`] -- the Kaspi-based scheme for delayed-by-one feedback and
//!   its three simple baselines,
//! * [`mc_sim`] -- the Monte Carlo oracle with ideal Gaussian test channels.

pub mod delayed_fb;
pub mod error;
pub mod gm_source;
pub mod kaspi;
pub mod mc_sim;
pub mod random_rate;
pub mod rd_region;

pub use delayed_fb::{
    average_trace, baseline_best_case, baseline_no_prediction, baseline_worst_case, pattern_trace,
    AlphaConvention, AverageMethod, AveragedTrace, DelayedState, ErasurePattern,
    EXACT_HORIZON_CAP,
};
pub use error::{Error, Result};
pub use gm_source::{power_trace, steady_power, PowerTrace, SourceSchedule};
pub use kaspi::{
    classify_case, harmonic_mean, invert_weighted, kaspi_delta, kaspi_rate, KaspiCase, KaspiPoint,
    KaspiSolution,
};
pub use mc_sim::{compare, simulate, test_channel, CompareSummary, Feedback, Scheme, SimConfig, SimReport};
pub use random_rate::{
    binomial_support, optimize_packets, rate_factor, rate_factor_single, random_rate_trace,
    steady_random, PacketObjective, RatePolicy,
};
pub use rd_region::{distortion_trace, distortion_trace_ep, steady_distortion, DistortionTrace};
