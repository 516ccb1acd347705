//! Constructive upper bounds for the Hausdorff and spherical measures.
//!
//! The parameter interval is partitioned into maximal arcs of sampled
//! diameter at most epsilon. The closed-cover cost sums diameter^k over the
//! pieces. The ball-cover cost encloses each arc in a near-minimal ball
//! found by a minimax center search and sums (2 radius)^k; centers are free
//! to leave the curve, which is what makes the ball cost approach the
//! closed-cover cost for degrees k > 1.
//!
//! Arc shapes repeat along dilation-homogeneous curves, so both the center
//! searches and the refined diameters are cached on the translated and
//! rescaled arc signature; per piece only anchor distances are re-evaluated.
//! Diameters and radii come from finite samples and are flagged as sampled
//! estimates rather than certified suprema.

use std::collections::HashMap;

use crate::curves::ParametricCurve;
use crate::error::{Error, Result};
use crate::measures::has_parameter_collisions;
use crate::spaces::{MetricSpaceModel, Point, SpaceKind};

#[derive(Debug, Clone)]
pub struct CoverPiece {
    pub t0: f64,
    pub t1: f64,
    /// Arc diameter estimate, or ball diameter (2 radius) for ball pieces.
    pub diameter: f64,
    /// True when the diameter is a finite-sample estimate.
    pub sampled: bool,
}

#[derive(Debug, Clone)]
pub struct CoverRecord {
    pub epsilon: f64,
    pub pieces: Vec<CoverPiece>,
    /// Sum of diameter^k over the pieces.
    pub cost: f64,
}

fn chebyshev_times(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    // Chebyshev nodes plus both endpoints
    let mut ts: Vec<f64> = (0..n)
        .map(|i| {
            let theta = std::f64::consts::PI * (2.0 * i as f64 + 1.0) / (2.0 * n as f64);
            0.5 * (t0 + t1) + 0.5 * (t1 - t0) * theta.cos()
        })
        .collect();
    ts.push(t0);
    ts.push(t1);
    ts.sort_by(f64::total_cmp);
    ts
}

fn arc_points(curve: &ParametricCurve, times: &[f64]) -> Result<Vec<Point>> {
    times.iter().map(|t| curve.eval(*t)).collect()
}

fn max_pairwise(space: &MetricSpaceModel, pts: &[Point]) -> Result<f64> {
    let mut best: f64 = 0.0;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let d = space.distance(&pts[i], &pts[j])?;
            best = best.max(d.value + d.gap_estimate);
        }
    }
    Ok(best)
}

/// An arc in translated, dilation-normalized coordinates, plus the rounded
/// shape signature used as a cache key.
struct ArcView {
    mid: Point,
    lambda: f64,
    normalized: Vec<Point>,
}

fn arc_view(
    space: &MetricSpaceModel,
    curve: &ParametricCurve,
    t0: f64,
    t1: f64,
    n: usize,
) -> Result<ArcView> {
    let times = chebyshev_times(t0, t1, n);
    let raw = arc_points(curve, &times)?;
    let mid = curve.eval(0.5 * (t0 + t1))?;
    let is_group = space.is_carnot_group();
    let shift = if is_group {
        space.inverse(&mid)?
    } else {
        mid.clone()
    };
    let translated: Vec<Point> = raw
        .iter()
        .map(|p| {
            if is_group {
                space.compose(&shift, p)
            } else {
                Ok(Point::new(
                    p.coords()
                        .iter()
                        .zip(shift.coords())
                        .map(|(a, b)| a - b)
                        .collect(),
                ))
            }
        })
        .collect::<Result<_>>()?;
    let lambda = translated
        .iter()
        .map(|p| space.box_norm(p))
        .fold(0.0, f64::max);
    let normalized: Vec<Point> = if lambda == 0.0 {
        translated
    } else {
        translated
            .iter()
            .map(|p| space.dilate(1.0 / lambda, p))
            .collect::<Result<_>>()?
    };
    Ok(ArcView {
        mid,
        lambda,
        normalized,
    })
}

fn signature(samples: &[Point]) -> Vec<i64> {
    let idx = [
        0,
        samples.len() / 4,
        samples.len() / 2,
        3 * samples.len() / 4,
        samples.len() - 1,
    ];
    let mut sig = Vec::new();
    for i in idx {
        for c in samples[i].coords() {
            sig.push((c / 0.02).round() as i64);
        }
    }
    sig
}

/// Shared caches for one cover construction.
struct CoverContext<'a> {
    space: &'a MetricSpaceModel,
    /// signature -> normalized minimax center
    ball_cache: HashMap<Vec<i64>, Vec<f64>>,
    /// signature -> refined normalized diameter
    diam_cache: HashMap<Vec<i64>, f64>,
}

impl<'a> CoverContext<'a> {
    fn new(space: &'a MetricSpaceModel) -> Self {
        CoverContext {
            space,
            ball_cache: HashMap::new(),
            diam_cache: HashMap::new(),
        }
    }

    /// Cheap boundary-search probe: endpoints plus three interior samples.
    fn probe_diameter(&self, curve: &ParametricCurve, t0: f64, t1: f64) -> Result<f64> {
        max_pairwise(self.space, &arc_points(curve, &chebyshev_times(t0, t1, 3))?)
    }

    /// Max pairwise distance over Chebyshev samples, doubling the count
    /// until the estimate moves by less than 1%. Refinements run once per
    /// arc shape and are replayed through the signature cache.
    fn certified_diameter(
        &mut self,
        curve: &ParametricCurve,
        t0: f64,
        t1: f64,
    ) -> Result<f64> {
        let view = arc_view(self.space, curve, t0, t1, 15)?;
        if view.lambda == 0.0 {
            return Ok(0.0);
        }
        let sig = signature(&view.normalized);
        if let Some(dn) = self.diam_cache.get(&sig) {
            // re-anchor on the endpoint pair of this very arc
            let ends = self
                .space
                .distance(&view.normalized[0], view.normalized.last().unwrap())?;
            return Ok(view.lambda * dn.max(ends.value + ends.gap_estimate));
        }
        let mut n = 15;
        let mut prev = max_pairwise(self.space, &view.normalized)?;
        for _ in 0..2 {
            n *= 2;
            let finer = arc_view(self.space, curve, t0, t1, n)?;
            let next = max_pairwise(self.space, &finer.normalized)? * finer.lambda
                / view.lambda;
            let done = (next - prev).abs() <= 0.01 * next.max(1e-300);
            prev = prev.max(next);
            if done {
                break;
            }
        }
        self.diam_cache.insert(sig, prev);
        Ok(view.lambda * prev)
    }

    /// Near-minimal enclosing ball of the arc as (center, radius). The
    /// center search runs once per arc shape; the radius is re-certified on
    /// this arc's normalized samples.
    fn enclosing_ball(
        &mut self,
        curve: &ParametricCurve,
        t0: f64,
        t1: f64,
    ) -> Result<(Point, f64)> {
        let space = self.space;
        let view = arc_view(space, curve, t0, t1, 15)?;
        if view.lambda == 0.0 {
            return Ok((view.mid, 0.0));
        }
        let sig = signature(&view.normalized);
        let center_norm = match self.ball_cache.get(&sig) {
            Some(c) => c.clone(),
            None => {
                let c = search_center(space, &view.normalized)?;
                self.ball_cache.insert(sig, c.clone());
                c
            }
        };

        let cpt = Point::new(center_norm);
        let mut radius: f64 = 0.0;
        for p in &view.normalized {
            let d = space.distance(&cpt, p)?;
            radius = radius.max(d.value + d.gap_estimate);
        }
        // the arc midpoint is always an admissible centre; fall back if the
        // search went astray
        let mut best_center = cpt;
        let fallback = view.normalized[view.normalized.len() / 2].clone();
        let mut r: f64 = 0.0;
        for p in &view.normalized {
            let d = space.distance(&fallback, p)?;
            r = r.max(d.value + d.gap_estimate);
        }
        if r < radius {
            radius = r;
            best_center = fallback;
        }

        let center_real = {
            let scaled = space.dilate(view.lambda, &best_center)?;
            if space.is_carnot_group() {
                space.compose(&view.mid, &scaled)?
            } else {
                Point::new(
                    scaled
                        .coords()
                        .iter()
                        .zip(view.mid.coords())
                        .map(|(a, b)| a + b)
                        .collect(),
                )
            }
        };
        Ok((center_real, view.lambda * radius))
    }
}

// ---------------------------------------------------------------------------
// minimax center search

fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    scale: f64,
    iters: usize,
) -> (Vec<f64>, f64) {
    let dim = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let v0 = f(x0);
    simplex.push((x0.to_vec(), v0));
    for j in 0..dim {
        let mut x = x0.to_vec();
        x[j] += scale;
        let v = f(&x);
        simplex.push((x, v));
    }
    for _ in 0..iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let worst = simplex[dim].clone();
        let mut centroid = vec![0.0; dim];
        for item in simplex.iter().take(dim) {
            for j in 0..dim {
                centroid[j] += item.0[j] / dim as f64;
            }
        }
        let lerp = |alpha: f64| -> Vec<f64> {
            (0..dim)
                .map(|j| centroid[j] + alpha * (centroid[j] - worst.0[j]))
                .collect()
        };
        let refl = lerp(1.0);
        let fr = f(&refl);
        if fr < simplex[0].1 {
            let exp = lerp(2.0);
            let fe = f(&exp);
            simplex[dim] = if fe < fr { (exp, fe) } else { (refl, fr) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (refl, fr);
        } else {
            let con = lerp(-0.5);
            let fc = f(&con);
            if fc < worst.1 {
                simplex[dim] = (con, fc);
            } else {
                let best = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = item
                        .0
                        .iter()
                        .zip(&best)
                        .map(|(xi, bi)| bi + 0.5 * (xi - bi))
                        .collect();
                    item.1 = f(&x);
                    item.0 = x;
                }
            }
        }
        let spread = simplex.iter().map(|s| s.1).fold(f64::MIN, f64::max)
            - simplex.iter().map(|s| s.1).fold(f64::MAX, f64::min);
        if spread < 1e-10 * simplex[0].1.abs().max(1e-12) {
            break;
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex[0].clone().into()
}

fn search_center(space: &MetricSpaceModel, normalized: &[Point]) -> Result<Vec<f64>> {
    let dim = space.dim();
    let sub: Vec<&Point> = [
        0,
        normalized.len() / 4,
        normalized.len() / 2,
        3 * normalized.len() / 4,
        normalized.len() - 1,
    ]
    .iter()
    .map(|i| &normalized[*i])
    .collect();
    let objective = |c: &[f64]| -> f64 {
        let cp = Point::from_slice(c);
        let mut worst: f64 = 0.0;
        for p in &sub {
            match space.distance_fast(&cp, p) {
                Ok(d) => worst = worst.max(d.value),
                Err(_) => return f64::INFINITY,
            }
        }
        worst
    };

    let mut centroid = vec![0.0; dim];
    for p in normalized {
        for (j, c) in p.coords().iter().enumerate() {
            centroid[j] += c / normalized.len() as f64;
        }
    }
    let r0 = objective(&centroid);
    let engel = space.kind() == SpaceKind::Engel;
    let (iters, axes) = if engel { (60, 2.min(dim)) } else { (140, dim) };

    let mut inits = vec![centroid.clone()];
    for j in 0..axes {
        for sgn in [1.0, -1.0] {
            let mut x = centroid.clone();
            x[j] += sgn * 0.64 * r0.max(0.1);
            inits.push(x);
        }
    }
    let mut best: Option<(Vec<f64>, f64)> = None;
    for init in inits {
        let (x, v) = nelder_mead(objective, &init, 0.25 * r0.max(0.1), iters);
        if best.as_ref().map(|(_, bv)| v < *bv).unwrap_or(true) {
            best = Some((x, v));
        }
    }
    Ok(best.expect("at least one init").0)
}

/// Maximal arcs of sampled diameter <= eps covering the domain.
fn partition(
    ctx: &CoverContext,
    curve: &ParametricCurve,
    k: f64,
    eps: f64,
) -> Result<Vec<(f64, f64)>> {
    let (a, b) = curve.domain();
    let mut pieces = Vec::new();
    let mut t = a;
    let mut hint: Option<f64> = None;
    while t < b - 1e-14 * (b - a) {
        if ctx.probe_diameter(curve, t, b)? <= eps {
            pieces.push((t, b));
            break;
        }
        let mut len = match hint {
            Some(h) => h.min(b - t),
            None => {
                // endpoint distance crossing as a first guess
                let cross =
                    super::first_crossing(ctx.space, curve, t, eps, b, None)?.unwrap_or(b);
                (cross - t).max(1e-12 * (b - a))
            }
        };
        let mut ok = false;
        for _ in 0..18 {
            let d = ctx.probe_diameter(curve, t, t + len)?;
            if d > eps {
                len *= 0.92 * (eps / d).powf(k).min(0.98);
            } else if d < 0.985 * eps && t + len < b {
                let grow = (eps / d.max(1e-300)).powf(k).min(1.25);
                let next = (len * grow * 1.001).min(b - t);
                if next <= len * 1.0001 {
                    ok = true;
                    break;
                }
                len = next;
            } else {
                ok = true;
                break;
            }
        }
        if !ok {
            // conservative bisection fallback
            let mut lo = 0.0;
            let mut hi = len.min(b - t);
            for _ in 0..50 {
                let mid = 0.5 * (lo + hi);
                if ctx.probe_diameter(curve, t, t + mid)? <= eps {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            len = lo;
            if len <= 1e-14 * (b - a) {
                return Err(Error::invalid(
                    "cover piece cannot be brought under epsilon by refinement",
                ));
            }
        }
        let end = (t + len).min(b);
        pieces.push((t, end));
        hint = Some(len);
        t = end;
    }
    if pieces.is_empty() {
        pieces.push((a, b));
    }
    Ok(pieces)
}

/// Drops pieces whose image coincides with already kept pieces, so covers of
/// self-retracing curves are charged once. A cheap collision scan gates the
/// quadratic pass; injective curves skip it entirely.
fn dedup_pieces(
    space: &MetricSpaceModel,
    curve: &ParametricCurve,
    eps: f64,
    pieces: &[(f64, f64)],
) -> Result<Vec<(f64, f64)>> {
    if !has_parameter_collisions(space, curve)? {
        return Ok(pieces.to_vec());
    }
    let mut kept: Vec<(f64, f64)> = Vec::new();
    let mut kept_points: Vec<Point> = Vec::new();
    let tol = 1e-7 * eps;
    for (t0, t1) in pieces {
        let probes = arc_points(curve, &chebyshev_times(*t0, *t1, 7))?;
        let mut redundant = !kept_points.is_empty();
        'probe: for p in &probes {
            let mut covered = false;
            for q in &kept_points {
                let d = space.distance(p, q)?;
                if d.value <= tol + d.gap_estimate {
                    covered = true;
                    break;
                }
            }
            if !covered {
                redundant = false;
                break 'probe;
            }
        }
        if !redundant {
            kept.push((*t0, *t1));
            kept_points.extend(probes);
        }
    }
    Ok(kept)
}

/// Both cover costs on one shared partition: (closed cover, ball cover).
pub fn covers(
    space: &MetricSpaceModel,
    curve: &ParametricCurve,
    k: f64,
    eps: f64,
) -> Result<(CoverRecord, CoverRecord)> {
    if eps <= 0.0 || k < 1.0 {
        return Err(Error::invalid("cover needs eps > 0 and k >= 1"));
    }
    let mut ctx = CoverContext::new(space);
    let mut spans = partition(&ctx, curve, k, eps)?;
    spans = dedup_pieces(space, curve, eps, &spans)?;

    // ball pieces must also fit under the epsilon diameter bound; split
    // until they do
    let mut pieces: Vec<(f64, f64, f64)> = Vec::new(); // (t0, t1, ball diam)
    let mut queue: Vec<(f64, f64)> = spans.clone();
    queue.reverse();
    let mut splits = 0;
    while let Some((t0, t1)) = queue.pop() {
        let (_, radius) = ctx.enclosing_ball(curve, t0, t1)?;
        let bd = 2.0 * radius;
        if bd > eps * 1.02 && splits < 4 * spans.len() + 64 {
            let mid = 0.5 * (t0 + t1);
            queue.push((mid, t1));
            queue.push((t0, mid));
            splits += 1;
        } else {
            pieces.push((t0, t1, bd));
        }
    }

    let mut hausdorff = CoverRecord {
        epsilon: eps,
        pieces: Vec::with_capacity(pieces.len()),
        cost: 0.0,
    };
    let mut spherical = CoverRecord {
        epsilon: eps,
        pieces: Vec::with_capacity(pieces.len()),
        cost: 0.0,
    };
    for (t0, t1, bd) in &pieces {
        let diam = ctx.certified_diameter(curve, *t0, *t1)?;
        hausdorff.pieces.push(CoverPiece {
            t0: *t0,
            t1: *t1,
            diameter: diam,
            sampled: true,
        });
        hausdorff.cost += diam.powf(k);
        spherical.pieces.push(CoverPiece {
            t0: *t0,
            t1: *t1,
            diameter: *bd,
            sampled: true,
        });
        spherical.cost += bd.powf(k);
    }
    Ok((hausdorff, spherical))
}

/// Closed-set cover cost; see [`covers`].
pub fn hausdorff_upper(
    space: &MetricSpaceModel,
    curve: &ParametricCurve,
    k: f64,
    eps: f64,
) -> Result<CoverRecord> {
    Ok(covers(space, curve, k, eps)?.0)
}

/// Ball cover cost on the same partition; see [`covers`].
pub fn spherical_upper(
    space: &MetricSpaceModel,
    curve: &ParametricCurve,
    k: f64,
    eps: f64,
) -> Result<CoverRecord> {
    Ok(covers(space, curve, k, eps)?.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn segment_costs_match_length() {
        let space = MetricSpaceModel::euclidean(2).unwrap();
        let curve = ParametricCurve::euclidean_segment(vec![1.0, 0.0], (0.0, 1.0)).unwrap();
        let (h, s) = covers(&space, &curve, 1.0, 0.3).unwrap();
        assert!((h.cost - 1.0).abs() < 0.02, "hausdorff {}", h.cost);
        assert!((s.cost - 1.0).abs() < 0.04, "spherical {}", s.cost);
        assert!(s.cost >= h.cost - 1e-12);
        for p in &h.pieces {
            assert!(p.diameter <= 0.3 * 1.001);
        }
    }

    #[test]
    fn vertical_hausdorff_cost_near_4pi() {
        let space = MetricSpaceModel::heisenberg();
        let curve = ParametricCurve::heisenberg_vertical((0.0, 1.0)).unwrap();
        let (h, s) = covers(&space, &curve, 2.0, 0.25).unwrap();
        let target = 4.0 * PI;
        assert!(
            h.cost >= target * 0.98 && h.cost <= target * 1.06,
            "hausdorff {} vs {target}",
            h.cost
        );
        // ball covers lose nothing for k = 2 thanks to off-curve centres
        assert!(
            s.cost >= h.cost - 1e-9 && s.cost <= target * 1.20,
            "spherical {} vs {target}",
            s.cost
        );
    }

    #[test]
    fn degenerate_point_curve_costs_nothing() {
        let space = MetricSpaceModel::euclidean(2).unwrap();
        let curve = ParametricCurve::euclidean_segment(vec![0.0, 0.0], (0.0, 1.0)).unwrap();
        let (h, s) = covers(&space, &curve, 1.0, 0.5).unwrap();
        assert_eq!(h.cost, 0.0);
        assert_eq!(s.cost, 0.0);
    }

    #[test]
    fn doubled_back_segment_is_charged_once() {
        // gamma(t) = (min(t, 2-t), 0): image is the unit segment, Length_1 = 2
        let space = MetricSpaceModel::euclidean(2).unwrap();
        let times: Vec<f64> = (0..=400).map(|i| i as f64 / 200.0).collect();
        let pts: Vec<Point> = times
            .iter()
            .map(|t| Point::from_slice(&[t.min(2.0 - t), 0.0]))
            .collect();
        let curve = ParametricCurve::polyline(&space, times, pts, 1.0, 1.0).unwrap();
        let h = hausdorff_upper(&space, &curve, 1.0, 0.2).unwrap();
        assert!(
            h.cost < 2.0 - 0.5,
            "retraced image should be charged once: {}",
            h.cost
        );
        assert!(h.cost > 0.9, "but the image itself is covered: {}", h.cost);
    }

    #[test]
    fn refining_the_scale_moves_cost_within_sampling_tolerance() {
        let space = MetricSpaceModel::heisenberg();
        let curve = ParametricCurve::heisenberg_vertical((0.0, 1.0)).unwrap();
        let coarse = hausdorff_upper(&space, &curve, 2.0, 0.3).unwrap();
        let fine = hausdorff_upper(&space, &curve, 2.0, 0.15).unwrap();
        assert!(
            (fine.cost - coarse.cost).abs() <= 0.02 * coarse.cost,
            "coarse {} fine {}",
            coarse.cost,
            fine.cost
        );
    }
}
