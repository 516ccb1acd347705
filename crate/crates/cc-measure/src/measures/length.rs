//! The k-dimensional length: the integral of measᵏ over the parameter.

use rayon::prelude::*;

use crate::curves::{self, ParametricCurve};
use crate::error::{Error, Result};
use crate::measures::EstimatorOptions;
use crate::spaces::MetricSpaceModel;

#[derive(Debug, Clone)]
pub struct LengthEstimate {
    pub value: f64,
    /// |full-grid value - half-grid value| from one refinement comparison.
    pub refinement_error: f64,
    /// (t, measᵏ) pairs on the quadrature grid.
    pub profile: Vec<(f64, f64)>,
    /// Largest relative distance-engine gap seen by the estimates.
    pub gap_rel: f64,
}

/// Composite trapezoid integral of the measᵏ profile over the grid.
pub fn length_k(
    space: &MetricSpaceModel,
    curve: &ParametricCurve,
    k: f64,
    grid: &[f64],
    opts: &EstimatorOptions,
) -> Result<LengthEstimate> {
    if grid.len() < 3 || !grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::invalid("quadrature grid must be increasing, n >= 3"));
    }
    let ladder = opts.ladder_for(curve);
    let analytic_ok = opts.use_analytic && curve.has_velocity() && k.fract() == 0.0;
    let evals: Vec<Result<(f64, f64)>> = grid
        .par_iter()
        .map(|t| {
            if analytic_ok {
                Ok((curves::carnot_analytic_meas(space, curve, *t, k as u32)?, 0.0))
            } else {
                let est = curves::meas_k_estimate(space, curve, *t, k, &ladder, opts.rel_tol)?;
                if !est.converged {
                    return Err(Error::NotConverged { times: vec![*t] });
                }
                Ok((est.value, est.gap_rel))
            }
        })
        .collect();

    let mut profile = Vec::with_capacity(grid.len());
    let mut bad_times = Vec::new();
    let mut gap_rel: f64 = 0.0;
    for (t, ev) in grid.iter().zip(evals) {
        match ev {
            Ok((v, g)) => {
                profile.push((*t, v));
                gap_rel = gap_rel.max(g);
            }
            Err(Error::NotConverged { .. }) => bad_times.push(*t),
            Err(e) => return Err(e),
        }
    }
    if !bad_times.is_empty() {
        return Err(Error::NotConverged { times: bad_times });
    }

    let trapz = |pts: &[(f64, f64)]| -> f64 {
        pts.windows(2)
            .map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0))
            .sum()
    };
    let value = trapz(&profile);
    let half: Vec<(f64, f64)> = profile.iter().step_by(2).cloned().collect();
    let refinement_error = if half.len() >= 2 {
        (value - trapz(&half)).abs()
    } else {
        0.0
    };
    Ok(LengthEstimate {
        value,
        refinement_error,
        profile,
        gap_rel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{uniform_grid, ParametricCurve};
    use std::f64::consts::PI;

    #[test]
    fn vertical_length2_is_4pi() {
        let space = MetricSpaceModel::heisenberg();
        let curve = ParametricCurve::heisenberg_vertical((0.0, 1.0)).unwrap();
        let grid = uniform_grid(0.0, 1.0, 17);
        let l = length_k(&space, &curve, 2.0, &grid, &EstimatorOptions::default()).unwrap();
        assert!((l.value - 4.0 * PI).abs() < 1e-6 * 4.0 * PI, "{}", l.value);
        assert!(l.refinement_error < 1e-9);
    }

    #[test]
    fn degree_above_curve_degree_gives_zero_length() {
        let space = MetricSpaceModel::heisenberg();
        let curve = ParametricCurve::heisenberg_vertical((0.0, 1.0)).unwrap();
        let grid = uniform_grid(0.0, 1.0, 9);
        let l = length_k(&space, &curve, 3.0, &grid, &EstimatorOptions::default()).unwrap();
        assert_eq!(l.value, 0.0);
    }

    #[test]
    fn segment_length1_scales_with_domain() {
        let space = MetricSpaceModel::euclidean(3).unwrap();
        let curve =
            ParametricCurve::euclidean_segment(vec![1.0, 2.0, 2.0], (0.5, 2.5)).unwrap();
        let grid = uniform_grid(0.5, 2.5, 9);
        let l = length_k(&space, &curve, 1.0, &grid, &EstimatorOptions::default()).unwrap();
        // |v| (b - a) = 3 * 2
        assert!((l.value - 6.0).abs() < 1e-8, "{}", l.value);
    }

    #[test]
    fn diverging_degree_reports_offending_times() {
        let space = MetricSpaceModel::heisenberg();
        let curve = ParametricCurve::heisenberg_vertical((0.0, 1.0)).unwrap();
        let grid = uniform_grid(0.0, 1.0, 5);
        let err = length_k(&space, &curve, 1.5, &grid, &EstimatorOptions::default());
        assert!(matches!(err, Err(Error::NotConverged { .. })));
    }

    #[test]
    fn analytic_route_matches_estimates() {
        let space = MetricSpaceModel::heisenberg();
        let curve = ParametricCurve::heisenberg_vertical((0.0, 1.0)).unwrap();
        let grid = uniform_grid(0.0, 1.0, 9);
        let analytic = length_k(
            &space,
            &curve,
            2.0,
            &grid,
            &EstimatorOptions {
                use_analytic: true,
                ..EstimatorOptions::default()
            },
        )
        .unwrap();
        assert!((analytic.value - 4.0 * PI).abs() < 1e-9);
    }
}
