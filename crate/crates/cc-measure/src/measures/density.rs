//! Ball preimages, density profiles and empirical bi-Holder bounds.

use crate::curves::{self, ParametricCurve};
use crate::error::{Error, Result};
use crate::measures::{dist, EstimatorOptions};
use crate::spaces::{MetricSpaceModel, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensitySide {
    Interior,
    LeftEndpoint,
    RightEndpoint,
}

impl DensitySide {
    pub fn label(&self) -> &'static str {
        match self {
            DensitySide::Interior => "interior",
            DensitySide::LeftEndpoint => "left_endpoint",
            DensitySide::RightEndpoint => "right_endpoint",
        }
    }
}

/// Connected parameter interval {s : d(gamma(s), gamma(t)) <= r}.
#[derive(Debug, Clone)]
pub struct PreimageInterval {
    pub lo: f64,
    pub hi: f64,
    /// False when the scan beyond the boundary found the distance dipping
    /// back under r; the interval is then the connected component only.
    pub monotone_ok: bool,
}

/// Boundary of the connected sublevel set by outward scan plus bisection.
pub fn ball_preimage(
    space: &MetricSpaceModel,
    curve: &ParametricCurve,
    center_time: f64,
    r: f64,
) -> Result<PreimageInterval> {
    if r <= 0.0 {
        return Err(Error::invalid("preimage radius must be positive"));
    }
    let (a, b) = curve.domain();
    let span = b - a;
    let center = curve.eval(center_time)?;
    let probe = |t: f64| -> Result<f64> {
        Ok(space.distance(&center, &curve.eval(t)?)?.value)
    };

    let step = span / 4096.0;
    let mut monotone_ok = true;

    let mut solve_side = |dir: f64, limit: f64| -> Result<f64> {
        let mut inside = center_time;
        let mut outside = None;
        let mut t = center_time;
        loop {
            let next = if dir > 0.0 {
                (t + step).min(limit)
            } else {
                (t + dir * step).max(limit)
            };
            if (next - t).abs() < 1e-18 * span {
                break;
            }
            let d = probe(next)?;
            if d > r {
                outside = Some(next);
                break;
            }
            inside = next;
            t = next;
            if (dir > 0.0 && next >= limit) || (dir < 0.0 && next <= limit) {
                break;
            }
        }
        let Some(mut out) = outside else {
            return Ok(limit);
        };
        let mut lo = inside;
        for _ in 0..70 {
            let mid = 0.5 * (lo + out);
            if probe(mid)? <= r {
                lo = mid;
            } else {
                out = mid;
            }
            if (out - lo).abs() <= 1e-13 * span {
                break;
            }
        }
        // look past the boundary for re-entries of the sublevel set
        let mut t = out;
        let look = 10;
        for _ in 0..look {
            t += dir * step;
            if t < a || t > b {
                break;
            }
            let d = probe(t)?;
            if d <= r {
                if d <= 0.95 * r {
                    return Err(Error::invalid(
                        "radius is above the locality scale of the curve; use a smaller radius",
                    ));
                }
                monotone_ok = false;
            }
        }
        Ok(lo)
    };

    let hi = solve_side(1.0, b)?;
    let lo = solve_side(-1.0, a)?;
    Ok(PreimageInterval {
        lo,
        hi,
        monotone_ok,
    })
}

/// Ratios H^k(C cap B(q, r)) / (2 r^k) along a decreasing radius schedule,
/// the ball measure computed as the k-length over the preimage interval.
#[derive(Debug, Clone)]
pub struct DensityProfile {
    pub center_time: f64,
    pub center: Point,
    pub radii: Vec<f64>,
    pub ratios: Vec<f64>,
    pub side: DensitySide,
    /// Relative distance-engine gap carried by each ratio.
    pub gaps: Vec<f64>,
}

pub fn density_profile(
    space: &MetricSpaceModel,
    curve: &ParametricCurve,
    k: f64,
    center_time: f64,
    radii: &[f64],
    opts: &EstimatorOptions,
) -> Result<DensityProfile> {
    if radii.is_empty() || !radii.windows(2).all(|w| w[0] > w[1]) {
        return Err(Error::invalid("radii must be a decreasing schedule"));
    }
    let (a, b) = curve.domain();
    let span = b - a;
    let side = if (center_time - a).abs() < 1e-9 * span {
        DensitySide::LeftEndpoint
    } else if (center_time - b).abs() < 1e-9 * span {
        DensitySide::RightEndpoint
    } else {
        DensitySide::Interior
    };
    let center = curve.eval(center_time)?;
    let mut ratios = Vec::with_capacity(radii.len());
    let mut gaps = Vec::with_capacity(radii.len());
    for r in radii {
        let pre = ball_preimage(space, curve, center_time, *r)?;
        let grid = curves::uniform_grid(pre.lo, pre.hi, 9);
        let piece = super::length_k(space, curve, k, &grid, opts)?;
        ratios.push(piece.value / (2.0 * r.powf(k)));
        gaps.push(piece.gap_rel);
    }
    Ok(DensityProfile {
        center_time,
        center,
        radii: radii.to_vec(),
        ratios,
        side,
        gaps,
    })
}

/// Empirical bi-Holder constants of exponent 1/k over a window of scales.
#[derive(Debug, Clone, Copy)]
pub struct HolderBounds {
    pub delta_minus: f64,
    pub delta_plus: f64,
    /// Set when delta_minus hit the resolution floor (degenerate curve).
    pub degenerate: bool,
}

pub fn holder_bounds_estimate(
    space: &MetricSpaceModel,
    curve: &ParametricCurve,
    k: f64,
    window: f64,
) -> Result<HolderBounds> {
    let (a, b) = curve.domain();
    let span = b - a;
    if !(window > 0.0 && window < span) {
        return Err(Error::invalid("window must lie inside the domain length"));
    }
    let t_grid = curves::uniform_grid(a, b, 40);
    let s_values: Vec<f64> = (0..12)
        .map(|i| window * 0.5_f64.powi(i))
        .collect();
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    let mut floor_hit = false;
    for t in &t_grid {
        let p = curve.eval(*t)?;
        for s in &s_values {
            for signed in [*s, -*s] {
                let ts = t + signed;
                if ts < a || ts > b {
                    continue;
                }
                let q = curve.eval(ts)?;
                let (d, gap) = dist(space, &p, &q)?;
                if d < 10.0 * gap {
                    floor_hit = true;
                }
                let ratio = d / s.powf(1.0 / k);
                lo = lo.min(ratio);
                hi = hi.max(ratio);
            }
        }
    }
    Ok(HolderBounds {
        delta_minus: lo.min(hi),
        delta_plus: hi,
        degenerate: floor_hit || lo == 0.0,
    })
}
