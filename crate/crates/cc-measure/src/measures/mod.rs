//! Dimensioned measures along curves: k-length, interpolation complexity,
//! metric entropy, constructive Hausdorff/spherical upper bounds, density
//! profiles and the four-way verification harness.

pub mod chains;
pub mod covers;
pub mod density;
pub mod length;
pub mod verify;

pub use chains::{
    interpolation_complexity, interpolation_complexity_bruteforce, metric_entropy,
    ChainCertificate, EntropyResult,
};
pub use covers::{covers, hausdorff_upper, spherical_upper, CoverPiece, CoverRecord};
pub use density::{
    ball_preimage, density_profile, holder_bounds_estimate, DensityProfile, DensitySide,
    HolderBounds, PreimageInterval,
};
pub use length::{length_k, LengthEstimate};
pub use verify::{verify_main_theorem, EpsRow, MeasureReport, VerifyOptions};

use crate::curves::{ParametricCurve, ScaleLadder};
use crate::error::{Error, Result};
use crate::spaces::{MetricSpaceModel, Point};

/// Knobs shared by the measᵏ-based operations.
#[derive(Debug, Clone)]
pub struct EstimatorOptions {
    /// Ladder depth for measᵏ estimates.
    pub ladder_count: usize,
    /// Relative agreement demanded of the last three ladder levels.
    pub rel_tol: f64,
    /// Use the closed-form Carnot measᵏ when the curve carries derivatives.
    pub use_analytic: bool,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        EstimatorOptions {
            ladder_count: 12,
            rel_tol: 0.02,
            use_analytic: false,
        }
    }
}

impl EstimatorOptions {
    pub fn ladder_for(&self, curve: &ParametricCurve) -> ScaleLadder {
        ScaleLadder::deep_for(curve, self.ladder_count)
    }
}

pub(crate) fn dist(space: &MetricSpaceModel, p: &Point, q: &Point) -> Result<(f64, f64)> {
    let d = space.distance(p, q)?;
    Ok((d.value, d.gap_estimate))
}

/// Largest `t` in `[from, t_max]` whose curve point stays within `threshold`
/// of `gamma(from)` on the connected reachable set. Returns `None` when the
/// whole tail is within the threshold. `hint` is the expected parameter
/// advance and speeds up the bracketing march.
pub(crate) fn first_crossing(
    space: &MetricSpaceModel,
    curve: &ParametricCurve,
    from: f64,
    threshold: f64,
    t_max: f64,
    hint: Option<f64>,
) -> Result<Option<f64>> {
    let base = curve.eval(from)?;
    let span = t_max - from;
    if span <= 0.0 {
        return Ok(None);
    }
    let probe = |t: f64| -> Result<f64> {
        let p = curve.eval(t)?;
        Ok(space.distance(&base, &p)?.value)
    };

    // bracket the crossing: last in-threshold probe and first above it
    let mut lo = from;
    let mut step = hint
        .filter(|h| *h > 0.0 && h.is_finite())
        .map(|h| (0.5 * h).min(span))
        .unwrap_or(span * 1e-4)
        .max(span * 1e-9);
    let mut hi = None;
    let mut t = from;
    for _ in 0..200 {
        let next = (t + step).min(t_max);
        let d = probe(next)?;
        if d > threshold {
            hi = Some(next);
            break;
        }
        lo = next;
        t = next;
        if next >= t_max {
            return Ok(None);
        }
        step *= 1.6;
    }
    let Some(mut hi) = hi else {
        // marched 200 expansions without crossing; treat the tail as inside
        return Ok(None);
    };

    // bisect to the last parameter still within the threshold
    for _ in 0..80 {
        if hi - lo <= 1e-13 * span.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if probe(mid)? <= threshold {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo <= from + 1e-15 * span.max(1.0) {
        return Err(Error::invalid(
            "bisection stalled: distance not locally controllable at this scale",
        ));
    }
    Ok(Some(lo))
}

/// Samples separated parameter pairs looking for image collisions; used to
/// gate the non-injective cover handling and the verification harness.
pub(crate) fn has_parameter_collisions(
    space: &MetricSpaceModel,
    curve: &ParametricCurve,
) -> Result<bool> {
    let (a, b) = curve.domain();
    let n = 48;
    let times: Vec<f64> = (0..n)
        .map(|i| a + (b - a) * (i as f64 + 0.5) / n as f64)
        .collect();
    let points: Vec<Point> = times
        .iter()
        .map(|t| curve.eval(*t))
        .collect::<Result<_>>()?;
    let sep = (b - a) / 16.0;
    let mut scale: f64 = 0.0;
    for i in 1..n {
        let (d, _) = dist(space, &points[0], &points[i])?;
        scale = scale.max(d);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if times[j] - times[i] < sep {
                continue;
            }
            let (d, gap) = dist(space, &points[i], &points[j])?;
            if d < (10.0 * gap).max(1e-9 * scale.max(1.0)) {
                return Ok(true);
            }
        }
    }
    Ok(false)
}
