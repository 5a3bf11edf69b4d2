//! Gaussian two-sided side-information rate function and its numerical
//! inversion.
//!
//! The source is `s = y + z` with the side information `y` known at the
//! encoder and possibly at the decoder; `S` is the source power and `Z` the
//! residual power without the side information. `D-` and `D+` are the
//! distortion targets without and with the side information at the decoder.
//! All rates are in bits per sample, matching the `2^{-2R}` convention used
//! by the distortion recursions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Operating point of the two-sided side-information problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KaspiPoint {
    /// Source power `S`.
    pub s: f64,
    /// Residual power `Z` with the side information (`s = y + z`).
    pub z: f64,
    /// Distortion target without the side information.
    pub d_minus: f64,
    /// Distortion target with the side information.
    pub d_plus: f64,
}

impl KaspiPoint {
    /// Inputs are taken literally (in particular `d_plus > d_minus` is
    /// allowed) and classified by the rate-function cases as given.
    pub fn new(s: f64, z: f64, d_minus: f64, d_plus: f64) -> Result<Self> {
        for (name, v) in [("S", s), ("Z", z), ("D-", d_minus), ("D+", d_plus)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Domain(format!("{name} must be > 0, got {v}")));
            }
        }
        if z > s {
            return Err(Error::Domain(format!(
                "Z must not exceed S (z is independent of y), got Z={z} > S={s}"
            )));
        }
        Ok(Self { s, z, d_minus, d_plus })
    }
}

/// Which constraint pattern is active at an operating point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KaspiCase {
    /// Both targets above the respective powers; zero rate suffices.
    Zero,
    /// Only the no-side-information decoder binds.
    NoSiBinding,
    /// Only the side-information decoder binds.
    SiBinding,
    /// Both decoders bind; the coupling term enters the rate.
    Coupled,
}

/// Harmonic mean `ab / (a + b)`.
pub fn harmonic_mean(a: f64, b: f64) -> Result<f64> {
    if !a.is_finite() || a <= 0.0 || !b.is_finite() || b <= 0.0 {
        return Err(Error::Domain(format!(
            "harmonic mean requires positive arguments, got ({a}, {b})"
        )));
    }
    Ok(a * b / (a + b))
}

/// Classifies an operating point by evaluating the case conditions in their
/// listed order and returning the first match. The rate function is
/// continuous across the boundaries, so the tie-break only pins determinism.
pub fn classify_case(p: &KaspiPoint) -> Result<KaspiCase> {
    let KaspiPoint { s, z, d_minus, d_plus } = *p;
    if d_minus >= s && d_plus >= z {
        return Ok(KaspiCase::Zero);
    }
    let hm_plus = harmonic_mean(d_plus, s)?;
    let hm_minus = harmonic_mean(d_minus, z)?;
    if d_minus < s && hm_plus >= hm_minus {
        return Ok(KaspiCase::NoSiBinding);
    }
    // `d_minus - s >= d_plus - z` is `d_minus >= d_plus + s - z` rearranged
    // to avoid catastrophic cancellation when the slacks nearly coincide.
    if d_plus < z && d_minus - s >= d_plus - z {
        return Ok(KaspiCase::SiBinding);
    }
    if d_minus < s && hm_plus < hm_minus && d_minus - s < d_plus - z {
        return Ok(KaspiCase::Coupled);
    }
    Err(Error::Unclassifiable(format!("{p:?}")))
}

/// Coupling term of the fourth rate-function case. Its sign is preserved for
/// regression against the closed form even though only its square enters the
/// rate.
pub fn kaspi_delta(p: &KaspiPoint) -> Result<f64> {
    let KaspiPoint { s, z, d_minus, d_plus } = *p;
    let rad1 = (s - z) * (s - d_minus);
    let rad2 = (z - d_plus) * (d_minus - d_plus);
    if rad1 < 0.0 || rad2 < 0.0 {
        return Err(Error::Domain(format!(
            "negative radicand in the coupling term: ({rad1}, {rad2}) at {p:?}"
        )));
    }
    if s == d_plus {
        return Err(Error::Domain(format!("S = D+ makes the coupling term singular at {p:?}")));
    }
    Ok((rad1.sqrt() * d_plus - rad2.sqrt() * s) / (z.sqrt() * (s - d_plus)))
}

fn gaussian_rate(var: f64, dist: f64) -> f64 {
    0.5 * (var / dist).log2()
}

/// Smallest rate (bits per sample) achieving the point's distortion pair.
pub fn kaspi_rate(p: &KaspiPoint) -> Result<f64> {
    let rate = match classify_case(p)? {
        KaspiCase::Zero => 0.0,
        KaspiCase::NoSiBinding => gaussian_rate(p.s, p.d_minus),
        KaspiCase::SiBinding => gaussian_rate(p.z, p.d_plus),
        KaspiCase::Coupled => {
            let delta = kaspi_delta(p)?;
            gaussian_rate(p.s, p.d_minus - delta * delta)
        }
    };
    Ok(rate.max(0.0))
}

/// Solver output of [`invert_weighted`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KaspiSolution {
    pub d_minus: f64,
    pub d_plus: f64,
    /// `beta * d_plus + (1 - beta) * d_minus` at the optimum.
    pub weighted: f64,
    pub case: KaspiCase,
    /// Rate of the returned point; within solver tolerance of the requested
    /// rate unless the case is `Zero`.
    pub achieved_rate: f64,
}

// Absolute tolerances of the contour tracer (rate in bits, d_plus in the
// caller's variance units).
const RATE_TOL: f64 = 1e-11;
const DPLUS_TOL: f64 = 1e-10;
const FALLBACK_GRID: usize = 4096;

/// Smallest `d_minus` on the rate contour for a fixed `d_plus`, found by
/// monotone bisection of the (nonincreasing) rate in `d_minus`.
fn solve_d_minus(s: f64, z: f64, rate: f64, d_plus: f64) -> Result<f64> {
    let rate_at = |d_minus: f64| -> Result<f64> {
        kaspi_rate(&KaspiPoint { s, z, d_minus, d_plus })
    };
    let mut lo = s * 2f64.powf(-2.0 * rate - 2.0);
    let mut hi = s;
    let rate_lo = rate_at(lo)?;
    let rate_hi = rate_at(hi)?;
    if rate_lo <= rate || rate_hi > rate + RATE_TOL {
        return Err(Error::Solver(format!(
            "cannot bracket the rate contour in D-: R(D-={lo}) = {rate_lo}, R(D-={hi}) = {rate_hi}, target {rate} (S={s}, Z={z}, D+={d_plus})"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if rate_at(mid)? > rate {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * s {
            break;
        }
    }
    let achieved = rate_at(hi)?;
    if (achieved - rate).abs() > 1e-9 {
        return Err(Error::Solver(format!(
            "contour bisection stalled: achieved rate {achieved}, target {rate} (S={s}, Z={z}, D+={d_plus})"
        )));
    }
    Ok(hi)
}

fn golden_section_minimize<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > tol {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 < f2 { (x1, f1) } else { (x2, f2) })
}

/// Minimizes `beta D+ + (1 - beta) D-` over the rate-`R` contour of the rate
/// function, for the source/residual powers `(S, Z)` taken verbatim.
///
/// The endpoints are exact: `beta = 0` returns `D- = S 2^{-2R}` and `beta = 1`
/// returns `D+ = Z 2^{-2R}` with the cheapest feasible `D-`. In between, an
/// outer golden-section search on `d_plus` wraps the contour bisection; a
/// dense-grid fallback covers any non-unimodal objective the search misses.
pub fn invert_weighted(s: f64, z: f64, rate: f64, beta: f64) -> Result<KaspiSolution> {
    if !s.is_finite() || s <= 0.0 || !z.is_finite() || z <= 0.0 || z > s {
        return Err(Error::Domain(format!("need 0 < Z <= S, got S={s}, Z={z}")));
    }
    if !rate.is_finite() || rate <= 0.0 {
        return Err(Error::Domain(format!("infeasible: rate must be > 0, got {rate}")));
    }
    if !beta.is_finite() || !(0.0..=1.0).contains(&beta) {
        return Err(Error::Domain(format!("beta must be in [0,1], got {beta}")));
    }
    let factor = 2f64.powf(-2.0 * rate);

    let finish = |d_minus: f64, d_plus: f64| -> Result<KaspiSolution> {
        let point = KaspiPoint { s, z, d_minus, d_plus };
        Ok(KaspiSolution {
            d_minus,
            d_plus,
            weighted: beta * d_plus + (1.0 - beta) * d_minus,
            case: classify_case(&point)?,
            achieved_rate: kaspi_rate(&point)?,
        })
    };

    if beta == 0.0 {
        // Only the no-side-information decoder matters.
        let d_minus = s * factor;
        return finish(d_minus, d_minus.min(z));
    }
    if beta == 1.0 {
        // Only the side-information decoder matters; the cheapest feasible
        // D- sits on the boundary where its constraint stops binding.
        let d_plus = z * factor;
        return finish(s - z + d_plus, d_plus);
    }

    let lo = z * factor;
    let hi = z;
    let mut objective = |d_plus: f64| -> Result<f64> {
        let d_minus = solve_d_minus(s, z, rate, d_plus)?;
        Ok(beta * d_plus + (1.0 - beta) * d_minus)
    };

    let (golden_x, golden_f) = golden_section_minimize(&mut objective, lo, hi, DPLUS_TOL)?;

    // Non-unimodality guard: a coarse scan that beats the golden-section
    // result triggers a dense grid with local refinement.
    let scan_points = 33;
    let mut scan_best = (golden_x, golden_f);
    for i in 0..=scan_points {
        let x = lo + (hi - lo) * i as f64 / scan_points as f64;
        let fx = objective(x)?;
        if fx < scan_best.1 {
            scan_best = (x, fx);
        }
    }
    let (mut best_x, mut best_f) = (golden_x, golden_f);
    if scan_best.1 < golden_f - 1e-12 * s {
        let step = (hi - lo) / FALLBACK_GRID as f64;
        let mut grid_best = scan_best;
        for i in 0..=FALLBACK_GRID {
            let x = lo + step * i as f64;
            let fx = objective(x)?;
            if fx < grid_best.1 {
                grid_best = (x, fx);
            }
        }
        // Local refinement inside the winning cell.
        let a = (grid_best.0 - step).max(lo);
        let b = (grid_best.0 + step).min(hi);
        let refined = golden_section_minimize(&mut objective, a, b, DPLUS_TOL)?;
        (best_x, best_f) = if refined.1 < grid_best.1 { refined } else { grid_best };
    }
    let _ = best_f;

    let d_minus = solve_d_minus(s, z, rate, best_x)?;
    finish(d_minus, best_x)
}
