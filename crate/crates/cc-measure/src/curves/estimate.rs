//! Scale-ladder estimators for the metric derivative of degree `k`.
//!
//! The degree-`k` infinitesimal measure at `t` is the `k`-th power of
//! `lim d(gamma(t+s), gamma(t)) / |s|^{1/k}` as `s -> 0` with `t + s` in the
//! domain. The limit is extracted from a two-sided geometric ladder of
//! scales. Three regimes are told apart:
//!
//! * the last three ladder levels agree within the declared relative
//!   tolerance: the limit is their average,
//! * the levels decay geometrically (positive log-log slope): the limit is
//!   zero, which still counts as convergence since the derivative exists,
//! * the levels grow as `s` shrinks (negative slope): the ratio diverges,
//!   the curve is not m-differentiable of this degree and the estimate is
//!   flagged with an infinite value.
//!
//! No extrapolation order is assumed; the level spread is reported instead.

use rayon::prelude::*;

use crate::curves::ParametricCurve;
use crate::error::{Error, Result};
use crate::spaces::{MetricSpaceModel, Point};

/// Geometric ladder of probe scales.
#[derive(Debug, Clone)]
pub struct ScaleLadder {
    /// Largest step.
    pub s0: f64,
    /// Level-to-level shrink factor in (0, 1).
    pub ratio: f64,
    /// Number of levels.
    pub count: usize,
}

impl ScaleLadder {
    pub fn default_for(curve: &ParametricCurve) -> Self {
        ScaleLadder {
            s0: 0.1 * curve.domain_len(),
            ratio: 0.5,
            count: 12,
        }
    }

    /// Deeper ladder for slowly converging curves.
    pub fn deep_for(curve: &ParametricCurve, count: usize) -> Self {
        ScaleLadder {
            s0: 0.1 * curve.domain_len(),
            ratio: 0.5,
            count,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s0 > 0.0 && self.ratio > 0.0 && self.ratio < 1.0 && self.count >= 3) {
            return Err(Error::invalid(
                "ladder needs s0 > 0, ratio in (0,1) and at least 3 levels",
            ));
        }
        Ok(())
    }

    pub fn steps(&self) -> Vec<f64> {
        (0..self.count)
            .map(|j| self.s0 * self.ratio.powi(j as i32))
            .collect()
    }
}

/// Result of one measᵏ evaluation, with its ladder diagnostics.
#[derive(Debug, Clone)]
pub struct DerivativeEstimate {
    pub k: f64,
    /// Estimated k-dimensional infinitesimal measure; infinite when the
    /// ladder diverges upward.
    pub value: f64,
    /// (signed s, d(gamma(t+s), gamma(t)) / |s|^{1/k}) pairs, both signs.
    pub ladder_ratios: Vec<(f64, f64)>,
    pub converged: bool,
    /// Relative spread of the last three ladder levels.
    pub spread: f64,
    /// Largest relative distance-engine gap seen along the ladder.
    pub gap_rel: f64,
}

impl DerivativeEstimate {
    pub fn diverged(&self) -> bool {
        self.value.is_infinite()
    }
}

const ZERO_SLOPE_THRESHOLD: f64 = 0.04;

struct LadderData {
    ratios: Vec<(f64, f64)>,
    /// Per-level mean ratio and scale, levels ordered by decreasing s.
    levels: Vec<(f64, f64)>,
    gap_rel: f64,
    any_resolved: bool,
}

fn collect_ladder(
    space: &MetricSpaceModel,
    curve: &ParametricCurve,
    t: f64,
    k: f64,
    ladder: &ScaleLadder,
) -> Result<LadderData> {
    let (a, b) = curve.domain();
    let grace = 1e-12 * (b - a);
    let center = curve.eval(t)?;
    let mut ratios = Vec::new();
    let mut levels = Vec::new();
    let mut gap_rel: f64 = 0.0;
    let mut any_resolved = false;
    for s in ladder.steps() {
        let mut level_vals = Vec::new();
        for signed in [s, -s] {
            let ts = t + signed;
            if ts < a - grace || ts > b + grace {
                continue;
            }
            let p = curve.eval(ts.clamp(a, b))?;
            let d = space.distance(&center, &p)?;
            let ratio = d.value / s.powf(1.0 / k);
            ratios.push((signed, ratio));
            level_vals.push(ratio);
            if d.value > 0.0 {
                gap_rel = gap_rel.max(d.gap_estimate / d.value);
                if d.value >= 10.0 * d.gap_estimate {
                    any_resolved = true;
                }
            }
        }
        if !level_vals.is_empty() {
            let mean = level_vals.iter().sum::<f64>() / level_vals.len() as f64;
            levels.push((s, mean));
        }
    }
    if levels.is_empty() {
        return Err(Error::invalid("ladder produced no in-domain probes"));
    }
    Ok(LadderData {
        ratios,
        levels,
        gap_rel,
        any_resolved,
    })
}

fn log_log_slope(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let data: Vec<(f64, f64)> = points
        .iter()
        .filter(|(s, r)| *s > 0.0 && *r > 0.0)
        .map(|(s, r)| (s.ln(), r.ln()))
        .collect();
    if data.len() < 3 {
        return None;
    }
    let n = data.len() as f64;
    let mx = data.iter().map(|(x, _)| x).sum::<f64>() / n;
    let my = data.iter().map(|(_, y)| y).sum::<f64>() / n;
    let sxx: f64 = data.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let sxy: f64 = data.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let resid = data
        .iter()
        .map(|(x, y)| {
            let fit = my + slope * (x - mx);
            (y - fit) * (y - fit)
        })
        .sum::<f64>()
        / n;
    Some((slope, resid.sqrt()))
}

/// Estimates measᵏ at time `t` from a two-sided scale ladder.
pub fn meas_k_estimate(
    space: &MetricSpaceModel,
    curve: &ParametricCurve,
    t: f64,
    k: f64,
    ladder: &ScaleLadder,
    rel_tol: f64,
) -> Result<DerivativeEstimate> {
    if k < 1.0 {
        return Err(Error::invalid("degree k must be at least 1"));
    }
    ladder.validate()?;
    let data = collect_ladder(space, curve, t, k, ladder)?;

    // locally constant curve: every probe distance vanished
    if data.ratios.iter().all(|(_, r)| *r == 0.0) {
        return Ok(DerivativeEstimate {
            k,
            value: 0.0,
            ladder_ratios: data.ratios,
            converged: true,
            spread: 0.0,
            gap_rel: data.gap_rel,
        });
    }

    if !data.any_resolved {
        return Err(Error::invalid(
            "degenerate ladder: all probe distances below the engine resolution",
        ));
    }

    let levels = &data.levels;
    let last3: Vec<f64> = levels.iter().rev().take(3).map(|(_, m)| *m).collect();
    let hi = last3.iter().cloned().fold(f64::MIN, f64::max);
    let lo = last3.iter().cloned().fold(f64::MAX, f64::min);
    let mean = last3.iter().sum::<f64>() / last3.len() as f64;
    let spread = if mean.abs() > 0.0 { (hi - lo) / mean.abs() } else { 0.0 };

    if last3.len() == 3 && spread <= rel_tol && mean > 0.0 {
        return Ok(DerivativeEstimate {
            k,
            value: mean.powf(k),
            ladder_ratios: data.ratios,
            converged: true,
            spread,
            gap_rel: data.gap_rel,
        });
    }

    match log_log_slope(levels) {
        Some((slope, _res)) if slope >= ZERO_SLOPE_THRESHOLD => Ok(DerivativeEstimate {
            k,
            value: 0.0,
            ladder_ratios: data.ratios,
            converged: true,
            spread,
            gap_rel: data.gap_rel,
        }),
        Some((slope, _res)) if slope <= -ZERO_SLOPE_THRESHOLD => Ok(DerivativeEstimate {
            k,
            value: f64::INFINITY,
            ladder_ratios: data.ratios,
            converged: false,
            spread,
            gap_rel: data.gap_rel,
        }),
        _ => Ok(DerivativeEstimate {
            k,
            value: mean.max(0.0).powf(k),
            ladder_ratios: data.ratios,
            converged: false,
            spread,
            gap_rel: data.gap_rel,
        }),
    }
}

/// Least-squares degree detector: fits `log d` against `log |s|` over the
/// ladder and returns `(1 / slope, fit residual)`. A locally constant curve
/// yields an infinite degree marker.
pub fn degree_estimate(
    space: &MetricSpaceModel,
    curve: &ParametricCurve,
    t: f64,
    ladder: &ScaleLadder,
) -> Result<(f64, f64)> {
    ladder.validate()?;
    let (a, b) = curve.domain();
    let grace = 1e-12 * (b - a);
    let center = curve.eval(t)?;
    let mut pts = Vec::new();
    let mut zeros = 0usize;
    for s in ladder.steps() {
        for signed in [s, -s] {
            let ts = t + signed;
            if ts < a - grace || ts > b + grace {
                continue;
            }
            let p = curve.eval(ts.clamp(a, b))?;
            let d = space.distance(&center, &p)?;
            if d.value > 0.0 {
                pts.push((s, d.value));
            } else {
                zeros += 1;
            }
        }
    }
    if pts.len() < 3 || zeros > pts.len() {
        return Ok((f64::INFINITY, 0.0));
    }
    match log_log_slope(&pts) {
        Some((slope, resid)) if slope > 1e-9 => Ok((1.0 / slope, resid)),
        _ => Ok((f64::INFINITY, 0.0)),
    }
}

/// measᵏ profile over a grid, with the continuity gate of the m-C1_k class.
#[derive(Debug, Clone)]
pub struct Mc1kReport {
    pub k: f64,
    pub times: Vec<f64>,
    pub profile: Vec<f64>,
    pub passed: bool,
    pub offending_times: Vec<f64>,
    /// Largest relative jump between adjacent grid values.
    pub max_jump_rel: f64,
    /// Largest relative distance gap seen by the underlying estimates.
    pub gap_rel: f64,
}

pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Checks that measᵏ exists at each grid time and that the profile varies
/// continuously at the grid resolution.
pub fn mc1k_check(
    space: &MetricSpaceModel,
    curve: &ParametricCurve,
    k: f64,
    grid: &[f64],
    rel_tol: f64,
    ladder: &ScaleLadder,
) -> Result<Mc1kReport> {
    if grid.len() < 2 || !grid.windows(2).all(|w| w[0] <= w[1]) {
        return Err(Error::invalid("mc1k grid must be sorted with >= 2 times"));
    }
    let estimates: Vec<Result<DerivativeEstimate>> = grid
        .par_iter()
        .map(|t| meas_k_estimate(space, curve, *t, k, ladder, rel_tol))
        .collect();
    let mut profile = Vec::with_capacity(grid.len());
    let mut offending = Vec::new();
    let mut gap_rel: f64 = 0.0;
    for (t, est) in grid.iter().zip(estimates) {
        let est = est?;
        gap_rel = gap_rel.max(est.gap_rel);
        if !est.converged {
            offending.push(*t);
        }
        profile.push(est.value);
    }
    // continuity proxy: adjacent jumps relative to the profile scale, with
    // the tolerance inflated by the accumulated distance gaps
    let scale = profile.iter().cloned().fold(0.0, f64::max).max(1e-12);
    let mut max_jump: f64 = 0.0;
    for w in profile.windows(2) {
        max_jump = max_jump.max((w[1] - w[0]).abs() / scale);
    }
    let effective_tol = rel_tol + k * gap_rel;
    let passed = offending.is_empty() && max_jump <= effective_tol;
    Ok(Mc1kReport {
        k,
        times: grid.to_vec(),
        profile,
        passed,
        offending_times: offending,
        max_jump_rel: max_jump,
        gap_rel,
    })
}

/// Carnot-group measᵏ in closed form for C1 curves: keeps the weight-k
/// components of the velocity in privileged coordinates at `gamma(t)` and
/// returns `d(0, x(t))^k`. Exact on Heisenberg and Euclidean, an upper bound
/// on Engel.
pub fn carnot_analytic_meas(
    space: &MetricSpaceModel,
    curve: &ParametricCurve,
    t: f64,
    k: u32,
) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("degree k must be a positive integer"));
    }
    let v = curve
        .velocity(t)
        .ok_or_else(|| Error::invalid("curve carries no coordinate derivatives"))?;
    let p = curve.eval(t)?;
    let ldd = space.left_log_derivative(&p, &v)?;
    let weights = space.weights();
    let x: Vec<f64> = ldd
        .iter()
        .zip(&weights)
        .map(|(c, w)| if *w == k { *c } else { 0.0 })
        .collect();
    let xp = Point::new(x);
    if xp.is_origin() {
        return Ok(0.0);
    }
    let d = space.distance(&space.identity(), &xp)?;
    Ok(d.value.powi(k as i32))
}

/// Reparameterizes by arc-of-k-length so that measᵏ is 1 on the new
/// parameter; the new domain length equals the k-length of the original.
pub fn reparam_by_k_length(
    space: &MetricSpaceModel,
    curve: &ParametricCurve,
    k: f64,
    grid: &[f64],
) -> Result<ParametricCurve> {
    if grid.len() < 2 || !grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::invalid("reparameterization grid must be increasing"));
    }
    let use_analytic = curve.has_velocity() && k.fract() == 0.0 && k >= 1.0;
    let ladder = ScaleLadder::default_for(curve);
    let meas: Vec<f64> = grid
        .par_iter()
        .map(|t| -> Result<f64> {
            if use_analytic {
                carnot_analytic_meas(space, curve, *t, k as u32)
            } else {
                let est = meas_k_estimate(space, curve, *t, k, &ladder, 0.05)?;
                if !est.converged {
                    return Err(Error::NotConverged { times: vec![*t] });
                }
                Ok(est.value)
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    if meas.iter().any(|m| *m <= 1e-12) {
        return Err(Error::invalid(
            "measᵏ vanishes on the grid; k-length reparameterization undefined",
        ));
    }
    let mut cumulative = Vec::with_capacity(grid.len());
    cumulative.push(0.0);
    for i in 1..grid.len() {
        let dt = grid[i] - grid[i - 1];
        let inc = 0.5 * (meas[i] + meas[i - 1]) * dt;
        cumulative.push(cumulative[i - 1] + inc);
    }
    let total = *cumulative.last().unwrap();
    Ok(ParametricCurve {
        domain: (0.0, total),
        evaluator: super::Evaluator::KLengthReparam {
            inner: Box::new(curve.clone()),
            grid: grid.to_vec(),
            cumulative,
        },
        space_kind: curve.space_kind(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::ParametricCurve;
    use crate::spaces::MetricSpaceModel;
    use std::f64::consts::PI;

    #[test]
    fn vertical_heisenberg_meas2_is_4pi() {
        let space = MetricSpaceModel::heisenberg();
        let curve = ParametricCurve::heisenberg_vertical((0.0, 1.0)).unwrap();
        let ladder = ScaleLadder::default_for(&curve);
        let est = meas_k_estimate(&space, &curve, 0.5, 2.0, &ladder, 0.01).unwrap();
        assert!(est.converged);
        assert!((est.value - 4.0 * PI).abs() < 1e-6 * 4.0 * PI, "{}", est.value);
    }

    #[test]
    fn vertical_heisenberg_meas3_vanishes() {
        let space = MetricSpaceModel::heisenberg();
        let curve = ParametricCurve::heisenberg_vertical((0.0, 1.0)).unwrap();
        let ladder = ScaleLadder::default_for(&curve);
        let est = meas_k_estimate(&space, &curve, 0.5, 3.0, &ladder, 0.01).unwrap();
        assert!(est.converged);
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn vertical_heisenberg_k_three_halves_diverges() {
        let space = MetricSpaceModel::heisenberg();
        let curve = ParametricCurve::heisenberg_vertical((0.0, 1.0)).unwrap();
        let ladder = ScaleLadder::default_for(&curve);
        let est = meas_k_estimate(&space, &curve, 0.5, 1.5, &ladder, 0.01).unwrap();
        assert!(!est.converged);
        assert!(est.diverged());
    }

    #[test]
    fn segment_meas1_is_speed() {
        let space = MetricSpaceModel::euclidean(2).unwrap();
        let curve = ParametricCurve::euclidean_segment(vec![3.0, 4.0], (0.0, 1.0)).unwrap();
        let ladder = ScaleLadder::default_for(&curve);
        let est = meas_k_estimate(&space, &curve, 0.3, 1.0, &ladder, 0.01).unwrap();
        assert!(est.converged);
        assert!((est.value - 5.0).abs() < 1e-9);
    }

    #[test]
    fn endpoint_uses_one_sided_ladder() {
        let space = MetricSpaceModel::heisenberg();
        let curve = ParametricCurve::heisenberg_vertical((0.0, 1.0)).unwrap();
        let ladder = ScaleLadder::default_for(&curve);
        let est = meas_k_estimate(&space, &curve, 0.0, 2.0, &ladder, 0.01).unwrap();
        assert!(est.converged);
        assert!((est.value - 4.0 * PI).abs() < 1e-6 * 4.0 * PI);
        assert!(est.ladder_ratios.iter().all(|(s, _)| *s > 0.0));
    }

    #[test]
    fn degree_detects_vertical_as_two() {
        let space = MetricSpaceModel::heisenberg();
        let curve = ParametricCurve::heisenberg_vertical((0.0, 1.0)).unwrap();
        let ladder = ScaleLadder::default_for(&curve);
        let (k_hat, resid) = degree_estimate(&space, &curve, 0.5, &ladder).unwrap();
        assert!((k_hat - 2.0).abs() < 1e-6, "{k_hat}");
        assert!(resid < 1e-9);
    }

    #[test]
    fn degree_of_segment_is_one() {
        let space = MetricSpaceModel::euclidean(2).unwrap();
        let curve = ParametricCurve::euclidean_segment(vec![1.0, 1.0], (0.0, 1.0)).unwrap();
        let ladder = ScaleLadder::default_for(&curve);
        let (k_hat, _) = degree_estimate(&space, &curve, 0.5, &ladder).unwrap();
        assert!((k_hat - 1.0).abs() < 1e-9);
    }

    #[test]
    fn locally_constant_curve_has_infinite_degree_marker() {
        let space = MetricSpaceModel::euclidean(2).unwrap();
        let curve = ParametricCurve::euclidean_segment(vec![0.0, 0.0], (0.0, 1.0)).unwrap();
        let ladder = ScaleLadder::default_for(&curve);
        let (k_hat, _) = degree_estimate(&space, &curve, 0.5, &ladder).unwrap();
        assert!(k_hat.is_infinite());
        let est = meas_k_estimate(&space, &curve, 0.5, 2.0, &ladder, 0.01).unwrap();
        assert!(est.converged);
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn mc1k_on_vertical_is_constant_4pi() {
        let space = MetricSpaceModel::heisenberg();
        let curve = ParametricCurve::heisenberg_vertical((0.0, 1.0)).unwrap();
        let grid = uniform_grid(0.0, 1.0, 21);
        let ladder = ScaleLadder::default_for(&curve);
        let report = mc1k_check(&space, &curve, 2.0, &grid, 0.01, &ladder).unwrap();
        assert!(report.passed, "{report:?}");
        for v in &report.profile {
            assert!((v - 4.0 * PI).abs() < 1e-6 * 4.0 * PI);
        }
    }

    #[test]
    fn mc1k_on_segment_at_k2_passes_with_zero_profile() {
        let space = MetricSpaceModel::euclidean(2).unwrap();
        let curve = ParametricCurve::euclidean_segment(vec![1.0, 0.0], (0.0, 1.0)).unwrap();
        let grid = uniform_grid(0.0, 1.0, 9);
        let ladder = ScaleLadder::default_for(&curve);
        let report = mc1k_check(&space, &curve, 2.0, &grid, 0.01, &ladder).unwrap();
        assert!(report.passed);
        assert!(report.profile.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn analytic_meas_matches_estimates_on_heisenberg() {
        let space = MetricSpaceModel::heisenberg();
        let curve = ParametricCurve::heisenberg_vertical((0.0, 1.0)).unwrap();
        let v = carnot_analytic_meas(&space, &curve, 0.5, 2).unwrap();
        assert!((v - 4.0 * PI).abs() < 1e-9);
        // horizontal segment t -> (t, 0, 0) at k = 1
        let seg = ParametricCurve::coordinate_polynomials(
            crate::spaces::SpaceKind::Heisenberg,
            vec![vec![0.0, 1.0], vec![0.0], vec![0.0]],
            (0.0, 1.0),
        )
        .unwrap();
        let v = carnot_analytic_meas(&space, &seg, 0.5, 1).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        // velocity in the lower stratum: weight-2 component vanishes
        let v = carnot_analytic_meas(&space, &seg, 0.5, 2).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn reparam_vertical_to_unit_meas() {
        let space = MetricSpaceModel::heisenberg();
        let curve = ParametricCurve::heisenberg_vertical((0.0, 1.0)).unwrap();
        let grid = uniform_grid(0.0, 1.0, 33);
        let re = reparam_by_k_length(&space, &curve, 2.0, &grid).unwrap();
        let (a, b) = re.domain();
        assert!(a == 0.0 && (b - 4.0 * PI).abs() < 1e-6 * 4.0 * PI, "{b}");
        let ladder = ScaleLadder::default_for(&re);
        let est = meas_k_estimate(&space, &re, 0.5 * b, 2.0, &ladder, 0.02).unwrap();
        assert!(est.converged);
        assert!((est.value - 1.0).abs() < 0.02, "{}", est.value);
    }

    #[test]
    fn reparam_of_unit_speed_segment_is_identity() {
        let space = MetricSpaceModel::euclidean(2).unwrap();
        let curve = ParametricCurve::euclidean_segment(vec![1.0, 0.0], (0.0, 1.0)).unwrap();
        let grid = uniform_grid(0.0, 1.0, 17);
        let re = reparam_by_k_length(&space, &curve, 1.0, &grid).unwrap();
        let (a, b) = re.domain();
        assert!(a.abs() < 1e-12 && (b - 1.0).abs() < 1e-12);
        for t in [0.1, 0.5, 0.9] {
            let p = re.eval(t).unwrap();
            let q = curve.eval(t).unwrap();
            assert!((p[0] - q[0]).abs() < 1e-9);
        }
    }

    #[test]
    fn reparam_rejects_vanishing_meas() {
        let space = MetricSpaceModel::euclidean(2).unwrap();
        let curve = ParametricCurve::euclidean_segment(vec![1.0, 0.0], (0.0, 1.0)).unwrap();
        let grid = uniform_grid(0.0, 1.0, 9);
        assert!(reparam_by_k_length(&space, &curve, 2.0, &grid).is_err());
    }
}
