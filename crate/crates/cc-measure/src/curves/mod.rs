//! Curve representations and the metric-derivative estimators.

pub mod estimate;
pub mod weierstrass;

pub use estimate::{
    carnot_analytic_meas, degree_estimate, meas_k_estimate, mc1k_check, reparam_by_k_length,
    uniform_grid, DerivativeEstimate, Mc1kReport, ScaleLadder,
};
pub use weierstrass::WeierstrassParams;

use crate::error::{Error, Result};
use crate::spaces::{MetricSpaceModel, Point, SpaceKind};

/// Linear inner clock for the Engel Weierstrass curve: `phi(t) = c0 + c1 t`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPhi {
    pub c0: f64,
    pub c1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Evaluator {
    /// `t -> base + t v` in Euclidean coordinates.
    EuclideanSegment { base: Vec<f64>, velocity: Vec<f64> },
    /// `t -> (0, 0, t)` in the Heisenberg group.
    HeisenbergVertical,
    /// `t -> (0, 0, t, 0)` in the Engel group.
    EngelZAxis,
    /// `t -> (0, 0, 0, t)` in the Engel group.
    EngelWAxis,
    /// `t -> (0, 0, W(t), phi(t))` in the Engel group.
    EngelWeierstrass {
        params: WeierstrassParams,
        phi: LinearPhi,
    },
    /// Polynomial coordinate functions, one coefficient list (low to high
    /// degree) per coordinate.
    CoordinatePolynomials { coeffs: Vec<Vec<f64>> },
    /// Sampled polyline with coordinate-linear interpolation and a declared
    /// Holder modulus.
    Polyline {
        times: Vec<f64>,
        points: Vec<Point>,
        holder_const: f64,
        holder_k: f64,
    },
    /// Precomposition with the inverse of a monotone piecewise-linear
    /// parameter map (arc-of-k-length reparameterization).
    KLengthReparam {
        inner: Box<ParametricCurve>,
        grid: Vec<f64>,
        cumulative: Vec<f64>,
    },
}

/// A continuous map from a closed interval into a space.
#[derive(Debug, Clone, PartialEq)]
pub struct ParametricCurve {
    domain: (f64, f64),
    evaluator: Evaluator,
    space_kind: SpaceKind,
}

fn check_domain(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::invalid("curve domain must satisfy a < b"));
    }
    Ok(())
}

impl ParametricCurve {
    pub fn euclidean_segment(velocity: Vec<f64>, domain: (f64, f64)) -> Result<Self> {
        check_domain(domain.0, domain.1)?;
        if velocity.is_empty() {
            return Err(Error::invalid("segment velocity must be nonempty"));
        }
        let n = velocity.len();
        Ok(ParametricCurve {
            domain,
            evaluator: Evaluator::EuclideanSegment {
                base: vec![0.0; n],
                velocity,
            },
            space_kind: SpaceKind::Euclidean(n),
        })
    }

    pub fn heisenberg_vertical(domain: (f64, f64)) -> Result<Self> {
        check_domain(domain.0, domain.1)?;
        Ok(ParametricCurve {
            domain,
            evaluator: Evaluator::HeisenbergVertical,
            space_kind: SpaceKind::Heisenberg,
        })
    }

    pub fn engel_z_axis(domain: (f64, f64)) -> Result<Self> {
        check_domain(domain.0, domain.1)?;
        Ok(ParametricCurve {
            domain,
            evaluator: Evaluator::EngelZAxis,
            space_kind: SpaceKind::Engel,
        })
    }

    pub fn engel_w_axis(domain: (f64, f64)) -> Result<Self> {
        check_domain(domain.0, domain.1)?;
        Ok(ParametricCurve {
            domain,
            evaluator: Evaluator::EngelWAxis,
            space_kind: SpaceKind::Engel,
        })
    }

    /// The nowhere differentiable Engel curve `(0, 0, W(t), phi(t))`.
    ///
    /// The Holder exponent `xi` of `W` must exceed 2/3 so the curve has a
    /// continuous metric derivative of degree 3; this is validated here.
    pub fn engel_weierstrass(
        params: WeierstrassParams,
        phi: LinearPhi,
        domain: (f64, f64),
    ) -> Result<Self> {
        check_domain(domain.0, domain.1)?;
        let xi = params.xi();
        if xi <= 2.0 / 3.0 {
            return Err(Error::invalid(format!(
                "engel weierstrass needs xi > 2/3, got xi = {xi:.4}"
            )));
        }
        Ok(ParametricCurve {
            domain,
            evaluator: Evaluator::EngelWeierstrass { params, phi },
            space_kind: SpaceKind::Engel,
        })
    }

    pub fn coordinate_polynomials(
        space_kind: SpaceKind,
        coeffs: Vec<Vec<f64>>,
        domain: (f64, f64),
    ) -> Result<Self> {
        check_domain(domain.0, domain.1)?;
        if coeffs.len() != space_kind.dim() {
            return Err(Error::DimensionMismatch {
                expected: space_kind.dim(),
                got: coeffs.len(),
            });
        }
        Ok(ParametricCurve {
            domain,
            evaluator: Evaluator::CoordinatePolynomials { coeffs },
            space_kind,
        })
    }

    /// Builds a polyline and validates the declared modulus bound
    /// `d(P_i, P_{i+1}) <= C |t_{i+1} - t_i|^{1/k}` on consecutive samples.
    pub fn polyline(
        space: &MetricSpaceModel,
        times: Vec<f64>,
        points: Vec<Point>,
        holder_const: f64,
        holder_k: f64,
    ) -> Result<Self> {
        if times.len() != points.len() || times.len() < 2 {
            return Err(Error::invalid("polyline needs matching times and points"));
        }
        if !times.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::invalid("polyline times must be strictly increasing"));
        }
        if holder_const <= 0.0 || holder_k < 1.0 {
            return Err(Error::invalid("polyline modulus must have C > 0, k >= 1"));
        }
        for p in &points {
            space.check_point(p)?;
        }
        for i in 0..times.len() - 1 {
            let d = space.distance(&points[i], &points[i + 1])?;
            let bound = holder_const * (times[i + 1] - times[i]).powf(1.0 / holder_k);
            if d.value > bound + d.gap_estimate + 1e-12 {
                return Err(Error::invalid(format!(
                    "polyline violates its modulus bound between samples {i} and {}",
                    i + 1
                )));
            }
        }
        Ok(ParametricCurve {
            domain: (times[0], *times.last().unwrap()),
            evaluator: Evaluator::Polyline {
                times,
                points,
                holder_const,
                holder_k,
            },
            space_kind: space.kind(),
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn domain_len(&self) -> f64 {
        self.domain.1 - self.domain.0
    }

    pub fn space_kind(&self) -> SpaceKind {
        self.space_kind
    }

    pub fn evaluator(&self) -> &Evaluator {
        &self.evaluator
    }

    fn check_time(&self, t: f64) -> Result<f64> {
        let (a, b) = self.domain;
        let grace = 1e-12 * (b - a).max(1.0);
        if t < a - grace || t > b + grace {
            return Err(Error::invalid(format!(
                "time {t} outside curve domain [{a}, {b}]"
            )));
        }
        Ok(t.clamp(a, b))
    }

    pub fn eval(&self, t: f64) -> Result<Point> {
        let t = self.check_time(t)?;
        Ok(match &self.evaluator {
            Evaluator::EuclideanSegment { base, velocity } => Point::new(
                base.iter()
                    .zip(velocity)
                    .map(|(b, v)| b + t * v)
                    .collect(),
            ),
            Evaluator::HeisenbergVertical => Point::new(vec![0.0, 0.0, t]),
            Evaluator::EngelZAxis => Point::new(vec![0.0, 0.0, t, 0.0]),
            Evaluator::EngelWAxis => Point::new(vec![0.0, 0.0, 0.0, t]),
            Evaluator::EngelWeierstrass { params, phi } => {
                Point::new(vec![0.0, 0.0, params.eval(t), phi.c0 + phi.c1 * t])
            }
            Evaluator::CoordinatePolynomials { coeffs } => Point::new(
                coeffs
                    .iter()
                    .map(|c| c.iter().rev().fold(0.0, |acc, ci| acc * t + ci))
                    .collect(),
            ),
            Evaluator::Polyline { times, points, .. } => {
                let idx = match times.binary_search_by(|x| x.total_cmp(&t)) {
                    Ok(i) => return Ok(points[i].clone()),
                    Err(i) => i.clamp(1, times.len() - 1),
                };
                let (t0, t1) = (times[idx - 1], times[idx]);
                let w = (t - t0) / (t1 - t0);
                Point::new(
                    points[idx - 1]
                        .coords()
                        .iter()
                        .zip(points[idx].coords())
                        .map(|(a, b)| a + w * (b - a))
                        .collect(),
                )
            }
            Evaluator::KLengthReparam {
                inner,
                grid,
                cumulative,
            } => {
                let s = t;
                let idx = match cumulative.binary_search_by(|x| x.total_cmp(&s)) {
                    Ok(i) => return inner.eval(grid[i]),
                    Err(i) => i.clamp(1, cumulative.len() - 1),
                };
                let (c0, c1) = (cumulative[idx - 1], cumulative[idx]);
                let w = if c1 > c0 { (s - c0) / (c1 - c0) } else { 0.0 };
                let tt = grid[idx - 1] + w * (grid[idx] - grid[idx - 1]);
                return inner.eval(tt);
            }
        })
    }

    /// Coordinate velocity where the curve carries one; builtins are
    /// evaluated in closed form, polylines and the Weierstrass curve have
    /// none.
    pub fn velocity(&self, t: f64) -> Option<Vec<f64>> {
        let t = self.check_time(t).ok()?;
        match &self.evaluator {
            Evaluator::EuclideanSegment { velocity, .. } => Some(velocity.clone()),
            Evaluator::HeisenbergVertical => Some(vec![0.0, 0.0, 1.0]),
            Evaluator::EngelZAxis => Some(vec![0.0, 0.0, 1.0, 0.0]),
            Evaluator::EngelWAxis => Some(vec![0.0, 0.0, 0.0, 1.0]),
            Evaluator::EngelWeierstrass { .. } => None,
            Evaluator::CoordinatePolynomials { coeffs } => Some(
                coeffs
                    .iter()
                    .map(|c| {
                        c.iter()
                            .enumerate()
                            .skip(1)
                            .rev()
                            .fold(0.0, |acc, (j, ci)| acc * t + j as f64 * ci)
                    })
                    .collect(),
            ),
            Evaluator::Polyline { .. } => None,
            Evaluator::KLengthReparam { .. } => None,
        }
    }

    pub fn has_velocity(&self) -> bool {
        !matches!(
            self.evaluator,
            Evaluator::EngelWeierstrass { .. }
                | Evaluator::Polyline { .. }
                | Evaluator::KLengthReparam { .. }
        )
    }
}
