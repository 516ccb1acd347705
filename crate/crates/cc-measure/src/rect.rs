//! Finite families of curves with continuous degree-k derivatives, a desk
//! scale model of rectifiable sets, and the empirical density bounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::curves::{self, ParametricCurve};
use crate::error::{Error, Result};
use crate::measures::{ball_preimage, length_k, EstimatorOptions};
use crate::spaces::{MetricSpaceModel, Point};

/// One piece of the family: a curve plus the parameter subsets kept after
/// disjointification.
#[derive(Debug, Clone)]
pub struct RectPiece {
    pub curve: ParametricCurve,
    pub subsets: Vec<(f64, f64)>,
}

/// A finite family of curves with pairwise disjoint selected images.
#[derive(Debug)]
pub struct RectifiableSet {
    k: f64,
    pieces: Vec<RectPiece>,
}

impl RectifiableSet {
    /// Validates the family: each piece passes the degree-k continuity
    /// check, the disjointified images stay at positive distance under a
    /// collision scan, and the total measure is finite.
    pub fn new(
        space: &MetricSpaceModel,
        k: f64,
        pieces: Vec<RectPiece>,
        opts: &EstimatorOptions,
    ) -> Result<Self> {
        if pieces.is_empty() {
            return Ok(RectifiableSet { k, pieces });
        }
        for (i, piece) in pieces.iter().enumerate() {
            let (a, b) = piece.curve.domain();
            if piece.subsets.is_empty() {
                return Err(Error::invalid(format!("piece {i} has no parameter subsets")));
            }
            for (lo, hi) in &piece.subsets {
                if !(a - 1e-12 <= *lo && lo < hi && *hi <= b + 1e-12) {
                    return Err(Error::invalid(format!(
                        "piece {i}: subset [{lo}, {hi}] outside domain [{a}, {b}]"
                    )));
                }
            }
            let grid = curves::uniform_grid(a, b, 16);
            let ladder = opts.ladder_for(&piece.curve);
            let report =
                curves::mc1k_check(space, &piece.curve, k, &grid, 0.1 + opts.rel_tol, &ladder)?;
            if !report.passed {
                return Err(Error::invalid(format!(
                    "piece {i} fails the degree-{k} continuity check at t = {:?}",
                    report.offending_times
                )));
            }
        }
        let set = RectifiableSet { k, pieces };
        set.collision_scan(space)?;
        Ok(set)
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn pieces(&self) -> &[RectPiece] {
        &self.pieces
    }

    fn sample_points(&self, per_subset: usize) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        for (i, piece) in self.pieces.iter().enumerate() {
            for (lo, hi) in &piece.subsets {
                let margin = 0.05 * (hi - lo);
                for j in 0..per_subset {
                    let t = lo
                        + margin
                        + (hi - lo - 2.0 * margin) * j as f64 / (per_subset.max(2) - 1) as f64;
                    out.push((i, t));
                }
            }
        }
        out
    }

    fn collision_scan(&self, space: &MetricSpaceModel) -> Result<()> {
        let samples = self.sample_points(24);
        let points: Vec<(usize, Point)> = samples
            .iter()
            .map(|(i, t)| Ok((*i, self.pieces[*i].curve.eval(*t)?)))
            .collect::<Result<_>>()?;
        let mut scale: f64 = 0.0;
        for w in points.windows(2) {
            let d = space.distance(&w[0].1, &w[1].1)?;
            scale = scale.max(d.value);
        }
        for a in 0..points.len() {
            for b in (a + 1)..points.len() {
                if points[a].0 == points[b].0 {
                    continue;
                }
                let d = space.distance(&points[a].1, &points[b].1)?;
                if d.value < (10.0 * d.gap_estimate).max(1e-9 * scale.max(1.0)) {
                    return Err(Error::invalid(format!(
                        "pieces {} and {} collide at sampled points; refine the disjointification",
                        points[a].0, points[b].0
                    )));
                }
            }
        }
        Ok(())
    }

    /// Measure of one piece's preimage of the ball B(q, r), restricted to
    /// the piece's subsets.
    fn piece_ball_measure(
        &self,
        space: &MetricSpaceModel,
        piece_idx: usize,
        q: &Point,
        q_on_piece: Option<f64>,
        r: f64,
        opts: &EstimatorOptions,
    ) -> Result<f64> {
        let piece = &self.pieces[piece_idx];
        let mut total = 0.0;
        for (lo, hi) in &piece.subsets {
            let intervals: Vec<(f64, f64)> = match q_on_piece {
                Some(t) if *lo <= t && t <= *hi => {
                    let pre = ball_preimage(space, &piece.curve, t, r)?;
                    vec![(pre.lo.max(*lo), pre.hi.min(*hi))]
                }
                _ => scan_preimage(space, &piece.curve, q, r, *lo, *hi)?,
            };
            for (ilo, ihi) in intervals {
                if ihi - ilo <= 1e-14 * (hi - lo) {
                    continue;
                }
                let grid = curves::uniform_grid(ilo, ihi, 9);
                total += length_k(space, &piece.curve, self.k, &grid, opts)?.value;
            }
        }
        Ok(total)
    }
}

/// Parameter runs of `{t in [lo, hi] : d(gamma(t), q) <= r}` for a ball
/// centred off the curve, located by a fine scan with bisected boundaries.
fn scan_preimage(
    space: &MetricSpaceModel,
    curve: &ParametricCurve,
    q: &Point,
    r: f64,
    lo: f64,
    hi: f64,
) -> Result<Vec<(f64, f64)>> {
    let n = 512;
    let d_at = |t: f64| -> Result<f64> { Ok(space.distance(q, &curve.eval(t)?)?.value) };
    let mut runs = Vec::new();
    let mut run_start: Option<f64> = None;
    let mut prev_t = lo;
    for i in 0..=n {
        let t = lo + (hi - lo) * i as f64 / n as f64;
        let inside = d_at(t)? <= r;
        match (inside, run_start) {
            (true, None) => {
                // refine the entry boundary between prev_t and t
                let mut a = prev_t;
                let mut b = t;
                if i > 0 {
                    for _ in 0..40 {
                        let m = 0.5 * (a + b);
                        if d_at(m)? <= r {
                            b = m;
                        } else {
                            a = m;
                        }
                    }
                }
                run_start = Some(if i == 0 { lo } else { b });
            }
            (false, Some(s)) => {
                let mut a = prev_t;
                let mut b = t;
                for _ in 0..40 {
                    let m = 0.5 * (a + b);
                    if d_at(m)? <= r {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                runs.push((s, a));
                run_start = None;
            }
            _ => {}
        }
        prev_t = t;
    }
    if let Some(s) = run_start {
        runs.push((s, hi));
    }
    Ok(runs)
}

/// Sum of the k-lengths of the pieces over their disjointified subsets.
pub fn set_measure_k(
    space: &MetricSpaceModel,
    set: &RectifiableSet,
    opts: &EstimatorOptions,
) -> Result<f64> {
    let mut total = 0.0;
    for piece in set.pieces() {
        for (lo, hi) in &piece.subsets {
            let grid = curves::uniform_grid(*lo, *hi, 17);
            total += length_k(space, &piece.curve, set.k(), &grid, opts)?.value;
        }
    }
    Ok(total)
}

#[derive(Debug, Clone)]
pub struct DensitySample {
    pub piece: usize,
    pub time: f64,
    /// Empirical density extremes over the two smallest radii, already
    /// divided by r^k.
    pub lower: f64,
    pub upper: f64,
    pub ok: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct DensityCheckReport {
    pub k: f64,
    pub rel_tol: f64,
    pub samples: Vec<DensitySample>,
    pub verdict: bool,
}

/// Draws interior samples on each piece and checks the empirical density
/// H^k(S cap B(q, r)) / r^k against the rectifiability bounds
/// `[2 (1 - tol), 2^k (1 + tol)]`. Failed samples are reported, not
/// dropped.
pub fn density_bounds_check(
    space: &MetricSpaceModel,
    set: &RectifiableSet,
    sample_count: usize,
    radii: &[f64],
    rel_tol: f64,
    seed: u64,
    opts: &EstimatorOptions,
) -> Result<DensityCheckReport> {
    if radii.len() < 2 || !radii.windows(2).all(|w| w[0] > w[1]) {
        return Err(Error::invalid("radius schedule must be decreasing, n >= 2"));
    }
    if radii[0] / *radii.last().unwrap() < 10.0 - 1e-9 {
        return Err(Error::invalid("radius schedule must span at least one decade"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws: Vec<(usize, f64)> = Vec::new();
    for (i, piece) in set.pieces().iter().enumerate() {
        let weights: Vec<f64> = piece.subsets.iter().map(|(lo, hi)| hi - lo).collect();
        let total: f64 = weights.iter().sum();
        for _ in 0..sample_count {
            let mut x = rng.gen_range(0.0..total);
            let mut chosen = piece.subsets[0];
            for ((lo, hi), w) in piece.subsets.iter().zip(&weights) {
                if x <= *w {
                    chosen = (*lo, *hi);
                    break;
                }
                x -= w;
            }
            let (lo, hi) = chosen;
            let margin = 0.05 * (hi - lo);
            let t = rng.gen_range(lo + margin..hi - margin);
            draws.push((i, t));
        }
    }

    let smallest = &radii[radii.len() - 2..];
    let samples: Vec<DensitySample> = draws
        .par_iter()
        .map(|(piece_idx, t)| {
            let q = match set.pieces()[*piece_idx].curve.eval(*t) {
                Ok(q) => q,
                Err(e) => {
                    return DensitySample {
                        piece: *piece_idx,
                        time: *t,
                        lower: f64::NAN,
                        upper: f64::NAN,
                        ok: false,
                        error: Some(e.to_string()),
                    }
                }
            };
            let mut lower = f64::INFINITY;
            let mut upper: f64 = 0.0;
            for r in smallest {
                let mut total = 0.0;
                for j in 0..set.pieces().len() {
                    let on_piece = if j == *piece_idx { Some(*t) } else { None };
                    match set.piece_ball_measure(space, j, &q, on_piece, *r, opts) {
                        Ok(m) => total += m,
                        Err(e) => {
                            return DensitySample {
                                piece: *piece_idx,
                                time: *t,
                                lower: f64::NAN,
                                upper: f64::NAN,
                                ok: false,
                                error: Some(e.to_string()),
                            }
                        }
                    }
                }
                let ratio = total / r.powf(set.k());
                lower = lower.min(ratio);
                upper = upper.max(ratio);
            }
            let lo_bound = 2.0 * (1.0 - rel_tol);
            let hi_bound = 2.0_f64.powf(set.k()) * (1.0 + rel_tol);
            DensitySample {
                piece: *piece_idx,
                time: *t,
                lower,
                upper,
                ok: lower >= lo_bound && upper <= hi_bound,
                error: None,
            }
        })
        .collect();

    let verdict = samples.iter().all(|s| s.ok);
    Ok(DensityCheckReport {
        k: set.k(),
        rel_tol,
        samples,
        verdict,
    })
}
