//! Covertness-constrained power allocation and the achievable `(r_c, r_b)` region.
//!
//! For each cover power `p_ac` on a grid, the covert power is pushed as high as the
//! warden's averaged error sum allows, then both rates are maximized under their outage
//! caps. Grid points are independent and evaluated in parallel; output order follows the
//! grid.

use rayon::prelude::*;

use crate::detection::average_detection_error;
use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::outage::{max_rate, outage_bob_h1, outage_carol_h1, Hypothesis, Receiver};
use crate::scalar::{lit, tolerance, Real};

/// Outage caps for Carol and Bob.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageCaps<T = f64> {
    pub delta_c: T,
    pub delta_b: T,
}

impl<T: Real> Default for OutageCaps<T> {
    fn default() -> Self {
        OutageCaps {
            delta_c: lit(0.1),
            delta_b: lit(0.1),
        }
    }
}

/// A rate pair with the power split that achieves it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionPoint<T = f64> {
    pub r_c: T,
    pub r_b: T,
    pub p_ac: T,
    pub p_ab: T,
    /// Averaged error sum minus `1 - epsilon`.
    pub covert_margin: T,
}

/// Slack allowed on the covertness constraint when re-checking a point.
pub const MARGIN_SLACK: f64 = 1e-9;

/// Relative tolerance of the covert-power bisection.
pub const POWER_TOL: f64 = 1e-9;

/// Number of increasing covert powers at which monotonicity is spot-checked.
pub const MONOTONE_PROBES: usize = 64;

/// Default number of cover-power grid points.
pub const DEFAULT_GRID_SIZE: usize = 200;

/// Averaged warden error sum, taking the silent limit of 1 at `p_ab = 0`.
pub fn detection_error_at<T: Real>(params: &SystemParams<T>) -> Result<T> {
    if params.p_ab == T::zero() {
        params.validate()?;
        return Ok(T::one());
    }
    average_detection_error(params)
}

/// `detection_error_at(params) - (1 - epsilon)`.
pub fn covert_margin<T: Real>(params: &SystemParams<T>) -> Result<T> {
    Ok(detection_error_at(params)? - (T::one() - params.epsilon))
}

fn ensure_monotone<T: Real>(template: &SystemParams<T>, budget: T) -> Result<()> {
    let mut previous = T::one();
    let slack = T::epsilon() * lit(16.0);
    for i in 0..MONOTONE_PROBES {
        let frac = lit::<T>(10.0)
            .powf(lit::<T>(-8.0) * lit::<T>((MONOTONE_PROBES - 1 - i) as f64) / lit((MONOTONE_PROBES - 1) as f64));
        let p_ab = budget * frac;
        let value = detection_error_at(&SystemParams { p_ab, ..*template })?;
        if value > previous + slack {
            return Err(Error::NonMonotone(format!(
                "p_ac = {}: error sum rises from {previous} to {value} at p_ab = {p_ab}",
                template.p_ac
            )));
        }
        previous = value;
    }
    Ok(())
}

/// Largest covert power in `[0, p_total - p_ac]` that keeps the averaged error sum at or
/// above `1 - epsilon`. The incoming `p_ab` is ignored.
///
/// Bisects on the strictly decreasing error sum to 1e-9 relative. Returns the whole
/// remaining budget when even that is covert. Monotonicity is spot-checked first and a
/// violation is reported as [`Error::NonMonotone`].
pub fn max_covert_power<T: Real>(params: &SystemParams<T>) -> Result<T> {
    let template = SystemParams {
        p_ab: T::zero(),
        ..*params
    };
    template.validate()?;
    let budget = (params.p_total - params.p_ac).max(T::zero());
    if budget == T::zero() {
        return Ok(T::zero());
    }
    ensure_monotone(&template, budget)?;

    let target = T::one() - params.epsilon;
    let covert = |p_ab: T| -> Result<bool> { Ok(detection_error_at(&SystemParams { p_ab, ..template })? >= target) };
    if covert(budget)? {
        return Ok(budget);
    }
    let (mut lo, mut hi) = (T::zero(), budget);
    let tol = tolerance::<T>(POWER_TOL);
    for _ in 0..2000 {
        if hi - lo <= tol * hi {
            break;
        }
        let mid = lo + (hi - lo) * lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        if covert(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Rates and margin at one power split.
pub fn evaluate_split<T: Real>(
    template: &SystemParams<T>,
    caps: &OutageCaps<T>,
    p_ac: T,
    p_ab: T,
) -> Result<RegionPoint<T>> {
    let params = template.with_powers(p_ac, p_ab);
    params.validate()?;
    let r_c = max_rate(&params, Receiver::Carol, Hypothesis::H1, caps.delta_c)?;
    let r_b = max_rate(&params, Receiver::Bob, Hypothesis::H1, caps.delta_b)?;
    Ok(RegionPoint {
        r_c,
        r_b,
        p_ac,
        p_ab,
        covert_margin: covert_margin(&params)?,
    })
}

/// `count` log-spaced cover powers from `min` to `max` inclusive.
pub fn log_grid<T: Real>(min: T, max: T, count: usize) -> Vec<T> {
    match count {
        0 => Vec::new(),
        1 => vec![max],
        _ => {
            let (a, b) = (min.ln(), max.ln());
            let steps = lit::<T>((count - 1) as f64);
            (0..count)
                .map(|i| {
                    if i + 1 == count {
                        max
                    } else {
                        (a + (b - a) * lit::<T>(i as f64) / steps).exp()
                    }
                })
                .collect()
        }
    }
}

/// Default cover-power grid: `grid_size` log-spaced points over `[p_total / 1000, p_total]`.
pub fn default_cover_grid<T: Real>(p_total: T, grid_size: usize) -> Vec<T> {
    log_grid(p_total * lit(1e-3), p_total, grid_size)
}

fn check_grid<T: Real>(template: &SystemParams<T>, grid: &[T]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::argument("grid_size", "need at least 2 grid points"));
    }
    if let Some(bad) = grid.iter().find(|&&p| !(p > T::zero() && p <= template.p_total)) {
        return Err(Error::argument(
            "p_ac",
            format!("grid value {bad} outside (0, p_total = {}]", template.p_total),
        ));
    }
    Ok(())
}

/// The covert region swept over the default log-spaced cover-power grid.
pub fn region_boundary<T: Real>(
    template: &SystemParams<T>,
    caps: &OutageCaps<T>,
    grid_size: usize,
) -> Result<Vec<RegionPoint<T>>> {
    region_boundary_on(template, caps, &default_cover_grid(template.p_total, grid_size))
}

/// The covert region at the given cover powers.
pub fn region_boundary_on<T: Real>(
    template: &SystemParams<T>,
    caps: &OutageCaps<T>,
    grid: &[T],
) -> Result<Vec<RegionPoint<T>>> {
    check_grid(template, grid)?;
    grid.par_iter()
        .map(|&p_ac| {
            let p_ab = max_covert_power(&template.with_powers(p_ac, T::zero()))?;
            evaluate_split(template, caps, p_ac, p_ab)
        })
        .collect()
}

/// The region without a covertness requirement: all remaining power goes to Bob.
pub fn no_covert_baseline<T: Real>(
    template: &SystemParams<T>,
    caps: &OutageCaps<T>,
    grid_size: usize,
) -> Result<Vec<RegionPoint<T>>> {
    no_covert_baseline_on(template, caps, &default_cover_grid(template.p_total, grid_size))
}

pub fn no_covert_baseline_on<T: Real>(
    template: &SystemParams<T>,
    caps: &OutageCaps<T>,
    grid: &[T],
) -> Result<Vec<RegionPoint<T>>> {
    check_grid(template, grid)?;
    grid.par_iter()
        .map(|&p_ac| {
            let p_ab = (template.p_total - p_ac).max(T::zero());
            evaluate_split(template, caps, p_ac, p_ab)
        })
        .collect()
}

/// Re-checks a covert point against the detection and outage models: budget, the
/// covertness constraint up to [`MARGIN_SLACK`], and both outage caps.
pub fn certify<T: Real>(template: &SystemParams<T>, caps: &OutageCaps<T>, point: &RegionPoint<T>) -> Result<()> {
    check_point(template, caps, point, true)
}

/// As [`certify`] without the covertness constraint, for baseline points.
pub fn certify_rates<T: Real>(template: &SystemParams<T>, caps: &OutageCaps<T>, point: &RegionPoint<T>) -> Result<()> {
    check_point(template, caps, point, false)
}

fn check_point<T: Real>(
    template: &SystemParams<T>,
    caps: &OutageCaps<T>,
    point: &RegionPoint<T>,
    covert: bool,
) -> Result<()> {
    let params = template.with_powers(point.p_ac, point.p_ab);
    params.validate()?;
    let margin = covert_margin(&params)?;
    if covert && margin < -lit::<T>(MARGIN_SLACK) {
        return Err(Error::argument(
            "covert_margin",
            format!("split violates covertness by {}", -margin),
        ));
    }
    if (margin - point.covert_margin).abs() > lit(MARGIN_SLACK) {
        return Err(Error::argument(
            "covert_margin",
            format!("recorded {} but recomputed {margin}", point.covert_margin),
        ));
    }
    let oc = outage_carol_h1(&params, point.r_c);
    if oc > caps.delta_c {
        return Err(Error::argument(
            "r_c",
            format!("outage {oc} exceeds cap {}", caps.delta_c),
        ));
    }
    if point.r_b > T::zero() {
        let ob = outage_bob_h1(&params, point.r_b);
        if ob > caps.delta_b {
            return Err(Error::argument(
                "r_b",
                format!("outage {ob} exceeds cap {}", caps.delta_b),
            ));
        }
    }
    Ok(())
}

/// Points of `points` not weakly dominated by any other point.
pub fn pareto_frontier<T: Real>(points: &[RegionPoint<T>]) -> Vec<RegionPoint<T>> {
    points
        .iter()
        .filter(|p| {
            !points
                .iter()
                .any(|q| q.r_c >= p.r_c && q.r_b >= p.r_b && (q.r_c > p.r_c || q.r_b > p.r_b))
        })
        .copied()
        .collect()
}
