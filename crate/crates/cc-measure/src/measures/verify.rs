//! Four-way comparison harness: k-length, closed-cover cost, ball-cover
//! cost and the epsilon-chain complexity limit.

use crate::curves::{self, ParametricCurve};
use crate::error::{Error, Result};
use crate::measures::{
    chains, covers, density, has_parameter_collisions, length, EstimatorOptions,
};
use crate::spaces::MetricSpaceModel;

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Decreasing epsilon schedule for covers and chains.
    pub eps_schedule: Vec<f64>,
    /// Quadrature grid size for the k-length.
    pub meas_grid: usize,
    /// Base relative tolerance of the pairwise agreement checks.
    pub rel_tol: f64,
    pub estimator: EstimatorOptions,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            eps_schedule: vec![0.16, 0.08, 0.04, 0.02, 0.01],
            meas_grid: 33,
            rel_tol: 0.05,
            estimator: EstimatorOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EpsRow {
    pub epsilon: f64,
    pub chain_points: usize,
    /// epsilon^k times the hop count.
    pub eps_k_hops: f64,
    pub hausdorff_cost: f64,
    pub spherical_cost: f64,
}

#[derive(Debug, Clone)]
pub struct ToleranceRecord {
    pub length: f64,
    pub hausdorff: f64,
    pub spherical: f64,
    pub complexity: f64,
    /// Slack granted to the cover-ordering checks.
    pub ordering: f64,
}

#[derive(Debug, Clone)]
pub struct MeasureReport {
    pub k: f64,
    pub length_k: f64,
    pub hausdorff_upper: f64,
    pub spherical_upper: f64,
    /// Last epsilon^k sigma_int value of the schedule.
    pub complexity_extrapolation: f64,
    pub tolerances: ToleranceRecord,
    pub verdict: bool,
    pub rows: Vec<EpsRow>,
    /// Failed pairwise or ordering checks, empty on a passing verdict.
    pub failures: Vec<String>,
}

/// Computes the four quantities over a decreasing epsilon schedule and
/// checks their pairwise agreement and the cover-ordering constraints.
/// The curve must be injective; the hypothesis is checked by sampling.
pub fn verify_main_theorem(
    space: &MetricSpaceModel,
    curve: &ParametricCurve,
    k: f64,
    opts: &VerifyOptions,
) -> Result<MeasureReport> {
    if opts.eps_schedule.len() < 2 || !opts.eps_schedule.windows(2).all(|w| w[0] > w[1]) {
        return Err(Error::invalid("epsilon schedule must be decreasing, n >= 2"));
    }
    if has_parameter_collisions(space, curve)? {
        return Err(Error::invalid(
            "curve fails the injectivity scan; the four-way equality assumes injectivity",
        ));
    }

    let (a, b) = curve.domain();
    let grid = curves::uniform_grid(a, b, opts.meas_grid);
    let len = length::length_k(space, curve, k, &grid, &opts.estimator)?;

    let mut rows = Vec::with_capacity(opts.eps_schedule.len());
    for eps in &opts.eps_schedule {
        let cert = chains::interpolation_complexity(space, curve, *eps)?;
        let (h, s) = covers::covers(space, curve, k, *eps)?;
        rows.push(EpsRow {
            epsilon: *eps,
            chain_points: cert.count,
            eps_k_hops: eps.powf(k) * cert.hops() as f64,
            hausdorff_cost: h.cost,
            spherical_cost: s.cost,
        });
    }

    let last = rows.last().unwrap();
    let prev = &rows[rows.len() - 2];
    let complexity = last.eps_k_hops;
    let hausdorff = last.hausdorff_cost;
    let spherical = last.spherical_cost;
    let eps_min = last.epsilon;

    let reference = len.value.max(1e-12);
    let gap_infl = k * len.gap_rel * reference;
    let tol = ToleranceRecord {
        length: opts.rel_tol * reference + len.refinement_error + gap_infl,
        hausdorff: opts.rel_tol * reference
            + (last.hausdorff_cost - prev.hausdorff_cost).abs()
            + gap_infl,
        spherical: opts.rel_tol * reference
            + (last.spherical_cost - prev.spherical_cost).abs()
            + gap_infl,
        complexity: opts.rel_tol * reference
            + (last.eps_k_hops - prev.eps_k_hops).abs()
            + eps_min.powf(k)
            + gap_infl,
        ordering: 0.02 * reference + gap_infl,
    };

    let mut failures = Vec::new();
    let mut check_pair = |name: &str, x: f64, tol_x: f64, y: f64, tol_y: f64| {
        if (x - y).abs() > tol_x + tol_y {
            failures.push(format!("{name}: |{x:.6} - {y:.6}| > {:.6}", tol_x + tol_y));
        }
    };
    check_pair("length vs hausdorff", len.value, tol.length, hausdorff, tol.hausdorff);
    check_pair("length vs spherical", len.value, tol.length, spherical, tol.spherical);
    check_pair("length vs complexity", len.value, tol.length, complexity, tol.complexity);
    check_pair("hausdorff vs spherical", hausdorff, tol.hausdorff, spherical, tol.spherical);
    check_pair("hausdorff vs complexity", hausdorff, tol.hausdorff, complexity, tol.complexity);
    check_pair("spherical vs complexity", spherical, tol.spherical, complexity, tol.complexity);

    // cover ordering on the matched partitions, for every scheduled epsilon
    for row in &rows {
        if row.hausdorff_cost > row.spherical_cost + tol.ordering {
            failures.push(format!(
                "cover ordering at eps {}: hausdorff {} > spherical {}",
                row.epsilon, row.hausdorff_cost, row.spherical_cost
            ));
        }
        if row.spherical_cost > 2.0_f64.powf(k) * row.hausdorff_cost + tol.ordering {
            failures.push(format!(
                "cover ordering at eps {}: spherical {} > 2^k hausdorff {}",
                row.epsilon, row.spherical_cost, row.hausdorff_cost
            ));
        }
    }

    // bi-Holder sandwich for the chain counts at every scheduled epsilon
    let window = 0.25 * (b - a);
    let hb = density::holder_bounds_estimate(space, curve, k, window)?;
    if !hb.degenerate {
        let t_len = b - a;
        for row in &rows {
            let lo = hb.delta_minus.powf(k) * t_len - tol.complexity;
            let hi = hb.delta_plus.powf(k) * t_len + row.epsilon.powf(k) + tol.complexity;
            if row.eps_k_hops < lo || row.eps_k_hops > hi {
                failures.push(format!(
                    "chain sandwich at eps {}: {} outside [{}, {}]",
                    row.epsilon, row.eps_k_hops, lo, hi
                ));
            }
        }
    }

    Ok(MeasureReport {
        k,
        length_k: len.value,
        hausdorff_upper: hausdorff,
        spherical_upper: spherical,
        complexity_extrapolation: complexity,
        tolerances: tol,
        verdict: failures.is_empty(),
        rows,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::Point;
    use std::f64::consts::PI;

    #[test]
    fn euclidean_segment_all_four_equal_length() {
        let space = MetricSpaceModel::euclidean(2).unwrap();
        let curve = ParametricCurve::euclidean_segment(vec![1.0, 0.0], (0.0, 1.0)).unwrap();
        let opts = VerifyOptions {
            rel_tol: 0.005,
            ..VerifyOptions::default()
        };
        let report = verify_main_theorem(&space, &curve, 1.0, &opts).unwrap();
        assert!(report.verdict, "failures: {:?}", report.failures);
        for v in [
            report.length_k,
            report.hausdorff_upper,
            report.spherical_upper,
            report.complexity_extrapolation,
        ] {
            assert!((v - 1.0).abs() < 0.005 + 0.02, "{v}");
        }
    }

    #[test]
    fn vertical_heisenberg_verifies_at_4pi() {
        let space = MetricSpaceModel::heisenberg();
        let curve = ParametricCurve::heisenberg_vertical((0.0, 1.0)).unwrap();
        let opts = VerifyOptions {
            eps_schedule: vec![0.2, 0.1, 0.05],
            ..VerifyOptions::default()
        };
        let report = verify_main_theorem(&space, &curve, 2.0, &opts).unwrap();
        assert!(report.verdict, "failures: {:?}", report.failures);
        let target = 4.0 * PI;
        for v in [
            report.length_k,
            report.hausdorff_upper,
            report.spherical_upper,
            report.complexity_extrapolation,
        ] {
            assert!((v - target).abs() < 0.06 * target, "{v} vs {target}");
        }
    }

    #[test]
    fn non_injective_curve_is_refused() {
        let space = MetricSpaceModel::euclidean(2).unwrap();
        let times: Vec<f64> = (0..=200).map(|i| i as f64 / 100.0).collect();
        let pts: Vec<Point> = times
            .iter()
            .map(|t| Point::from_slice(&[t.min(2.0 - t), 0.0]))
            .collect();
        let curve = ParametricCurve::polyline(&space, times, pts, 1.0, 1.0).unwrap();
        let err = verify_main_theorem(&space, &curve, 1.0, &VerifyOptions::default());
        assert!(err.is_err());
    }
}
