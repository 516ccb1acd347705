//! Epsilon-chain interpolation complexity and metric entropy.

use rayon::prelude::*;

use crate::curves::ParametricCurve;
use crate::error::{Error, Result};
use crate::measures::{dist, first_crossing};
use crate::spaces::{MetricSpaceModel, Point};

/// A validated epsilon-chain along the curve, endpoints included.
#[derive(Debug, Clone)]
pub struct ChainCertificate {
    pub epsilon: f64,
    pub times: Vec<f64>,
    pub points: Vec<Point>,
    /// Number of chain points (hops + 1).
    pub count: usize,
}

impl ChainCertificate {
    /// Re-checks every consecutive hop against `epsilon` plus the engine gap.
    pub fn validate(&self, space: &MetricSpaceModel) -> Result<()> {
        if self.points.len() != self.times.len() || self.count != self.points.len() {
            return Err(Error::invalid("chain certificate is inconsistent"));
        }
        for i in 0..self.points.len() - 1 {
            let (d, gap) = dist(space, &self.points[i], &self.points[i + 1])?;
            if d > self.epsilon + gap + 1e-12 * self.epsilon {
                return Err(Error::invalid(format!(
                    "chain hop {i} has length {d} above epsilon {}",
                    self.epsilon
                )));
            }
        }
        Ok(())
    }

    pub fn hops(&self) -> usize {
        self.count.saturating_sub(1)
    }
}

fn check_epsilon_scale(space: &MetricSpaceModel, curve: &ParametricCurve, eps: f64) -> Result<()> {
    if eps <= 0.0 {
        return Err(Error::invalid("epsilon must be positive"));
    }
    let (a, b) = curve.domain();
    let d = space.distance(&curve.eval(a)?, &curve.eval(b)?)?;
    // gaps scale with the query, so the endpoint query is a fair proxy
    if eps <= 10.0 * d.gap_estimate * (eps / d.value.max(eps)) {
        return Err(Error::invalid(
            "epsilon is below 10x the distance-engine gap at this scale",
        ));
    }
    Ok(())
}

/// Greedy farthest-step chain: from each chain point, advance to the largest
/// parameter still within `eps` on the connected reachable set. The result
/// is an upper bound on the interpolation complexity; the grid oracle below
/// bounds its optimality gap.
pub fn interpolation_complexity(
    space: &MetricSpaceModel,
    curve: &ParametricCurve,
    eps: f64,
) -> Result<ChainCertificate> {
    check_epsilon_scale(space, curve, eps)?;
    let (a, b) = curve.domain();
    let mut times = vec![a];
    let mut points = vec![curve.eval(a)?];
    let mut hint: Option<f64> = None;
    let mut t = a;
    loop {
        let endpoint = curve.eval(b)?;
        let (d_end, _) = dist(space, points.last().unwrap(), &endpoint)?;
        if d_end <= eps {
            if t < b {
                times.push(b);
                points.push(endpoint);
            }
            break;
        }
        let next = first_crossing(space, curve, t, eps, b, hint)?
            .ok_or_else(|| Error::invalid("chain march found no crossing before the endpoint"))?;
        hint = Some(next - t);
        t = next;
        times.push(t);
        points.push(curve.eval(t)?);
        if times.len() > 20_000_000 {
            return Err(Error::invalid("chain exceeded the desk-scale budget"));
        }
    }
    let count = times.len();
    let cert = ChainCertificate {
        epsilon: eps,
        times,
        points,
        count,
    };
    cert.validate(space)?;
    Ok(cert)
}

/// Shortest chain restricted to a uniform parameter grid, by breadth-first
/// jumps over contiguous reachable blocks. Returns the number of chain
/// points. Lower-bounds the interpolation complexity only among
/// grid-restricted chains with connected reach, the same model the greedy
/// uses.
pub fn interpolation_complexity_bruteforce(
    space: &MetricSpaceModel,
    curve: &ParametricCurve,
    eps: f64,
    grid_size: usize,
) -> Result<usize> {
    if grid_size < 2 || grid_size > 100_000 {
        return Err(Error::invalid("oracle grid size must be in [2, 1e5]"));
    }
    check_epsilon_scale(space, curve, eps)?;
    let (a, b) = curve.domain();
    let n = grid_size;
    let times: Vec<f64> = (0..=n)
        .map(|i| a + (b - a) * i as f64 / n as f64)
        .collect();
    let points: Vec<Point> = times
        .par_iter()
        .map(|t| curve.eval(*t))
        .collect::<Result<_>>()?;

    // furthest grid index reachable from i through the first crossing
    let reach_from = |i: usize, start: usize| -> Result<usize> {
        let mut j = start.max(i + 1);
        if j > n {
            return Ok(n);
        }
        // fall back to scanning from i+1 when the fast start is already out
        let (d, _) = dist(space, &points[i], &points[j.min(n)])?;
        if d > eps {
            j = i + 1;
        }
        let mut last = i;
        while j <= n {
            let (d, _) = dist(space, &points[i], &points[j])?;
            if d > eps {
                break;
            }
            last = j;
            j += 1;
        }
        Ok(last)
    };

    // jump-game breadth-first search over [0, n]
    let mut hops = 0usize;
    let mut cur_end = 0usize;
    let mut far = reach_from(0, 1)?;
    if far == 0 {
        return Err(Error::invalid("grid too coarse: no step fits under epsilon"));
    }
    let mut i = 1;
    hops += 1;
    while cur_end < n {
        cur_end = far;
        if cur_end >= n {
            break;
        }
        let mut next_far = far;
        while i <= cur_end {
            next_far = next_far.max(reach_from(i, far + 1)?);
            i += 1;
        }
        if next_far <= far {
            return Err(Error::invalid("grid chain cannot progress"));
        }
        far = next_far;
        hops += 1;
    }
    Ok(hops + 1)
}

/// Greedy epsilon-net along the parameter.
#[derive(Debug, Clone)]
pub struct EntropyResult {
    pub epsilon: f64,
    pub count: usize,
    pub center_times: Vec<f64>,
}

/// Marches the parameter: each round covers the first uncovered point by a
/// ball centred as far ahead as that point allows, extending the covered
/// prefix maximally.
pub fn metric_entropy(
    space: &MetricSpaceModel,
    curve: &ParametricCurve,
    eps: f64,
) -> Result<EntropyResult> {
    check_epsilon_scale(space, curve, eps)?;
    let (a, b) = curve.domain();
    let span = b - a;
    let mut covered = a;
    let mut centers = Vec::new();
    let mut hint: Option<f64> = None;
    let mut first_round = true;
    while first_round || covered < b - 1e-12 * span {
        first_round = false;
        // farthest admissible centre still covering gamma(covered)
        let center = match first_crossing(space, curve, covered, eps, b, hint)? {
            Some(t) => t,
            None => b,
        };
        // coverage extends to the last point within eps of the centre
        let reach = match first_crossing(space, curve, center, eps, b, hint)? {
            Some(t) => t,
            None => b,
        };
        if reach <= covered + 1e-15 * span && reach < b {
            return Err(Error::invalid("entropy march cannot progress"));
        }
        hint = Some((reach - covered).max(span * 1e-9));
        covered = reach;
        centers.push(center);
        if centers.len() > 20_000_000 {
            return Err(Error::invalid("net exceeded the desk-scale budget"));
        }
    }
    Ok(EntropyResult {
        epsilon: eps,
        count: centers.len(),
        center_times: centers,
    })
}
