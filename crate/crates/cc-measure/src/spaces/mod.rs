//! Distance engines, dilations and group operations for the supported
//! Carnot-Caratheodory spaces and the Euclidean baseline.
//!
//! Heisenberg coordinates follow the frame `X1 = (1, 0, -y/2)`,
//! `X2 = (0, 1, x/2)`; Engel coordinates follow `X1 = (1, 0, 0, 0)`,
//! `X2 = (0, 1, x, x^2/2)`. Group laws, inverses and dilations below are the
//! ones left-invariant for these frames.

pub mod engel;
pub mod heisenberg;
pub mod transcription;

use crate::error::{Error, Result};

/// Which space a model describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    Euclidean(usize),
    Heisenberg,
    Engel,
}

impl SpaceKind {
    pub fn dim(&self) -> usize {
        match self {
            SpaceKind::Euclidean(n) => *n,
            SpaceKind::Heisenberg => 3,
            SpaceKind::Engel => 4,
        }
    }

    pub fn label(&self) -> String {
        match self {
            SpaceKind::Euclidean(n) => format!("euclidean:{n}"),
            SpaceKind::Heisenberg => "heisenberg".to_string(),
            SpaceKind::Engel => "engel".to_string(),
        }
    }
}

/// Named bilinear correction rule for the group product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupLaw {
    Heisenberg,
    Engel,
}

/// Dilation weights, group law and horizontal frame of a Carnot group.
#[derive(Debug, Clone)]
pub struct CarnotStructure {
    pub n: usize,
    pub weights: Vec<u32>,
    pub group_law: GroupLaw,
    pub horizontal_frame: &'static str,
}

/// A point in group coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point { coords }
    }

    pub fn from_slice(coords: &[f64]) -> Self {
        Point {
            coords: coords.to_vec(),
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_origin(&self) -> bool {
        self.coords.iter().all(|c| *c == 0.0)
    }
}

impl std::ops::Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.coords[i]
    }
}

/// Whether a distance value is exact or a certified upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceKind {
    Exact,
    UpperBound,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverStats {
    pub iterations: usize,
    pub residual: f64,
}

/// A distance value together with its uncertainty.
///
/// `Exact` results carry a gap no larger than the engine's stated tolerance;
/// `UpperBound` results promise the true distance lies in
/// `[value - gap_estimate, value]`.
#[derive(Debug, Clone)]
pub struct DistanceResult {
    pub value: f64,
    pub kind: DistanceKind,
    pub gap_estimate: f64,
    pub solver_stats: Option<SolverStats>,
}

impl DistanceResult {
    fn exact(value: f64, gap: f64) -> Self {
        DistanceResult {
            value,
            kind: DistanceKind::Exact,
            gap_estimate: gap,
            solver_stats: None,
        }
    }
}

/// Settings for the Engel direct-transcription solver.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Control discretization count.
    pub nodes: usize,
    /// Random restarts per query.
    pub restarts: usize,
    /// Initial endpoint penalty weight; continuation multiplies it by 10 per
    /// stage over 4 stages.
    pub penalty_weight: f64,
    /// Admissible Euclidean endpoint residual on the normalized target.
    pub tolerance: f64,
    /// Total gradient iterations, split across the continuation stages.
    pub max_iterations: usize,
    /// Seed for the restart sampler.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            nodes: 40,
            restarts: 8,
            penalty_weight: 10.0,
            tolerance: 1e-5,
            max_iterations: 2400,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 10 {
            return Err(Error::invalid("solver nodes must be >= 10"));
        }
        if self.tolerance <= 0.0 {
            return Err(Error::invalid("solver tolerance must be positive"));
        }
        if self.restarts == 0 || self.max_iterations == 0 {
            return Err(Error::invalid(
                "solver restarts and max_iterations must be positive",
            ));
        }
        if self.penalty_weight <= 0.0 {
            return Err(Error::invalid("penalty weight must be positive"));
        }
        Ok(())
    }
}

/// A named metric space carrying its Carnot structure and distance engine.
#[derive(Debug)]
pub struct MetricSpaceModel {
    kind: SpaceKind,
    carnot: Option<CarnotStructure>,
    engel: Option<engel::EngelEngine>,
}

impl MetricSpaceModel {
    pub fn euclidean(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("Euclidean dimension must be positive"));
        }
        Ok(MetricSpaceModel {
            kind: SpaceKind::Euclidean(n),
            carnot: None,
            engel: None,
        })
    }

    pub fn heisenberg() -> Self {
        MetricSpaceModel {
            kind: SpaceKind::Heisenberg,
            carnot: Some(CarnotStructure {
                n: 3,
                weights: vec![1, 1, 2],
                group_law: GroupLaw::Heisenberg,
                horizontal_frame: "X1 = (1, 0, -y/2), X2 = (0, 1, x/2)",
            }),
            engel: None,
        }
    }

    pub fn engel(cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(MetricSpaceModel {
            kind: SpaceKind::Engel,
            carnot: Some(CarnotStructure {
                n: 4,
                weights: vec![1, 1, 2, 3],
                group_law: GroupLaw::Engel,
                horizontal_frame: "X1 = (1, 0, 0, 0), X2 = (0, 1, x, x^2/2)",
            }),
            engel: Some(engel::EngelEngine::new(cfg)),
        })
    }

    pub fn engel_default() -> Self {
        Self::engel(SolverConfig::default()).expect("default config is valid")
    }

    pub fn from_kind(kind: SpaceKind) -> Result<Self> {
        match kind {
            SpaceKind::Euclidean(n) => Self::euclidean(n),
            SpaceKind::Heisenberg => Ok(Self::heisenberg()),
            SpaceKind::Engel => Ok(Self::engel_default()),
        }
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn carnot(&self) -> Option<&CarnotStructure> {
        self.carnot.as_ref()
    }

    pub fn engel_solver_cfg(&self) -> Option<&SolverConfig> {
        self.engel.as_ref().map(|e| e.cfg())
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn is_carnot_group(&self) -> bool {
        self.carnot.is_some()
    }

    /// Dilation weights; Euclidean coordinates all have weight 1.
    pub fn weights(&self) -> Vec<u32> {
        match &self.carnot {
            Some(c) => c.weights.clone(),
            None => vec![1; self.dim()],
        }
    }

    pub fn identity(&self) -> Point {
        Point::new(vec![0.0; self.dim()])
    }

    pub fn check_point(&self, p: &Point) -> Result<()> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: p.dim(),
            });
        }
        Ok(())
    }

    /// Scale of distance uncertainty for this engine, used by estimators to
    /// set their resolution floor.
    pub fn gap_scale(&self) -> f64 {
        match self.kind {
            SpaceKind::Euclidean(_) => 1e-14,
            SpaceKind::Heisenberg => heisenberg::ROOT_TOLERANCE,
            SpaceKind::Engel => self
                .engel
                .as_ref()
                .map(|e| e.gap_scale())
                .unwrap_or(1e-3),
        }
    }

    /// Carnot-Caratheodory (or Euclidean) distance between two points.
    ///
    /// Euclidean and Heisenberg results are exact; Engel results are
    /// certified upper bounds with a gap estimate. `distance(p, p)` is an
    /// exact zero without invoking any solver.
    pub fn distance(&self, p: &Point, q: &Point) -> Result<DistanceResult> {
        self.check_point(p)?;
        self.check_point(q)?;
        if p == q {
            return Ok(DistanceResult::exact(0.0, 0.0));
        }
        match self.kind {
            SpaceKind::Euclidean(_) => {
                let value = p
                    .coords()
                    .iter()
                    .zip(q.coords())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                Ok(DistanceResult::exact(value, 4.0 * f64::EPSILON * value))
            }
            SpaceKind::Heisenberg => {
                // Canonicalize by left translation so the result is symmetric
                // and left-invariant by construction.
                let g = self.compose(&self.inverse(p)?, q)?;
                let value = heisenberg::distance_origin(g[0], g[1], g[2]);
                Ok(DistanceResult::exact(
                    value,
                    heisenberg::ROOT_TOLERANCE * value.max(1.0),
                ))
            }
            SpaceKind::Engel => {
                let engine = self.engel.as_ref().ok_or_else(|| {
                    Error::invalid("Engel space constructed without a solver config")
                })?;
                engine.distance(self, p, q, Effort::Certified)
            }
        }
    }

    /// Reduced-effort distance for inner search loops (ball center searches).
    /// Same contract as [`Self::distance`] but Engel queries use a cheaper
    /// solver profile and a coarser cache.
    pub fn distance_fast(&self, p: &Point, q: &Point) -> Result<DistanceResult> {
        match self.kind {
            SpaceKind::Engel => {
                self.check_point(p)?;
                self.check_point(q)?;
                if p == q {
                    return Ok(DistanceResult::exact(0.0, 0.0));
                }
                let engine = self.engel.as_ref().unwrap();
                engine.distance(self, p, q, Effort::Search)
            }
            _ => self.distance(p, q),
        }
    }

    /// Anisotropic dilation: coordinate `i` is multiplied by `lambda^{w_i}`.
    pub fn dilate(&self, lambda: f64, p: &Point) -> Result<Point> {
        self.check_point(p)?;
        if lambda < 0.0 || !lambda.is_finite() {
            return Err(Error::invalid("dilation factor must be nonnegative"));
        }
        let weights = self.weights();
        let coords = p
            .coords()
            .iter()
            .zip(&weights)
            .map(|(c, w)| c * lambda.powi(*w as i32))
            .collect();
        Ok(Point::new(coords))
    }

    /// Group product `p * q`. Euclidean spaces use vector addition (the
    /// abelian case).
    pub fn compose(&self, p: &Point, q: &Point) -> Result<Point> {
        self.check_point(p)?;
        self.check_point(q)?;
        let a = p.coords();
        let b = q.coords();
        let coords = match self.kind {
            SpaceKind::Euclidean(_) => a.iter().zip(b).map(|(x, y)| x + y).collect(),
            SpaceKind::Heisenberg => vec![
                a[0] + b[0],
                a[1] + b[1],
                a[2] + b[2] + 0.5 * (a[0] * b[1] - b[0] * a[1]),
            ],
            SpaceKind::Engel => vec![
                a[0] + b[0],
                a[1] + b[1],
                a[2] + b[2] + a[0] * b[1],
                a[3] + b[3] + a[0] * b[2] + 0.5 * a[0] * a[0] * b[1],
            ],
        };
        Ok(Point::new(coords))
    }

    /// Group inverse: `compose(p, inverse(p))` is the identity.
    pub fn inverse(&self, p: &Point) -> Result<Point> {
        self.check_point(p)?;
        let c = p.coords();
        let coords = match self.kind {
            SpaceKind::Euclidean(_) | SpaceKind::Heisenberg => {
                c.iter().map(|x| -x).collect()
            }
            SpaceKind::Engel => vec![
                -c[0],
                -c[1],
                -c[2] + c[0] * c[1],
                -c[3] + c[0] * c[2] - 0.5 * c[0] * c[0] * c[1],
            ],
        };
        Ok(Point::new(coords))
    }

    /// Homogeneous box norm `max_i |p_i|^{1/w_i}`.
    pub fn box_norm(&self, p: &Point) -> f64 {
        let weights = self.weights();
        p.coords()
            .iter()
            .zip(&weights)
            .map(|(c, w)| c.abs().powf(1.0 / *w as f64))
            .fold(0.0, f64::max)
    }

    /// Splits `p != 0` as `p = dilate(lambda, unit)` with
    /// `max_i |unit_i|^{1/w_i} = 1`.
    pub fn normalize_homogeneous(&self, p: &Point) -> Result<(f64, Point)> {
        self.check_point(p)?;
        let lambda = self.box_norm(p);
        if lambda == 0.0 {
            return Err(Error::invalid(
                "normalize_homogeneous is undefined at the identity",
            ));
        }
        let unit = self.dilate(1.0 / lambda, p)?;
        Ok((lambda, unit))
    }

    /// Derivative at `s = 0` of `s -> p^{-1} * gamma(s)` for a curve through
    /// `p` with velocity `v`, expressed in group coordinates. This is the
    /// velocity seen in privileged coordinates centred at `p`.
    pub fn left_log_derivative(&self, p: &Point, v: &[f64]) -> Result<Vec<f64>> {
        self.check_point(p)?;
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        let c = p.coords();
        Ok(match self.kind {
            SpaceKind::Euclidean(_) => v.to_vec(),
            SpaceKind::Heisenberg => vec![
                v[0],
                v[1],
                v[2] + 0.5 * (c[1] * v[0] - c[0] * v[1]),
            ],
            SpaceKind::Engel => vec![
                v[0],
                v[1],
                v[2] - c[0] * v[1],
                v[3] - c[0] * v[2] + 0.5 * c[0] * c[0] * v[1],
            ],
        })
    }
}

/// Engel solve effort, see [`MetricSpaceModel::distance_fast`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Effort {
    Certified,
    Search,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(c: &[f64]) -> Point {
        Point::from_slice(c)
    }

    #[test]
    fn heisenberg_group_law_matches_formula() {
        let h = MetricSpaceModel::heisenberg();
        let p = h.compose(&pt(&[1.0, 0.0, 0.0]), &pt(&[0.0, 1.0, 0.0])).unwrap();
        assert_eq!(p.coords(), &[1.0, 1.0, 0.5]);
    }

    #[test]
    fn compose_with_identity_is_identity_map() {
        for space in [
            MetricSpaceModel::heisenberg(),
            MetricSpaceModel::engel_default(),
            MetricSpaceModel::euclidean(3).unwrap(),
        ] {
            let p = pt(&vec![0.3, -1.2, 0.7, 2.0][..space.dim()]);
            let e = space.identity();
            assert_eq!(space.compose(&p, &e).unwrap(), p);
            assert_eq!(space.compose(&e, &p).unwrap(), p);
        }
    }

    #[test]
    fn heisenberg_inverse_is_negation() {
        let h = MetricSpaceModel::heisenberg();
        let inv = h.inverse(&pt(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(inv.coords(), &[-1.0, -2.0, -3.0]);
        let prod = h.compose(&pt(&[1.0, 2.0, 3.0]), &inv).unwrap();
        assert!(prod.coords().iter().all(|c| c.abs() < 1e-15));
    }

    #[test]
    fn engel_inverse_composes_to_identity() {
        let e = MetricSpaceModel::engel_default();
        let p = pt(&[0.7, -1.3, 2.1, -0.4]);
        let prod = e.compose(&p, &e.inverse(&p).unwrap()).unwrap();
        assert!(prod.coords().iter().all(|c| c.abs() < 1e-12), "{prod:?}");
        // the plane {x = y = 0} is an abelian subgroup
        let q = pt(&[0.0, 0.0, 1.5, -2.5]);
        assert_eq!(e.inverse(&q).unwrap().coords(), &[0.0, 0.0, -1.5, 2.5]);
    }

    #[test]
    fn engel_group_law_is_associative_on_samples() {
        let e = MetricSpaceModel::engel_default();
        let pts = [
            pt(&[0.5, 1.0, -0.3, 0.2]),
            pt(&[-1.1, 0.4, 0.8, -0.6]),
            pt(&[2.0, -0.7, 0.1, 1.3]),
        ];
        let left = e
            .compose(&e.compose(&pts[0], &pts[1]).unwrap(), &pts[2])
            .unwrap();
        let right = e
            .compose(&pts[0], &e.compose(&pts[1], &pts[2]).unwrap())
            .unwrap();
        for (a, b) in left.coords().iter().zip(right.coords()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn dilation_weights() {
        let h = MetricSpaceModel::heisenberg();
        let d = h.dilate(2.0, &pt(&[1.0, 1.0, 1.0])).unwrap();
        assert_eq!(d.coords(), &[2.0, 2.0, 4.0]);

        let e = MetricSpaceModel::engel_default();
        let d = e.dilate(2.0, &pt(&[1.0, 1.0, 1.0, 1.0])).unwrap();
        assert_eq!(d.coords(), &[2.0, 2.0, 4.0, 8.0]);

        // lambda = 1 is the identity map on any space
        let eu = MetricSpaceModel::euclidean(2).unwrap();
        let d = eu.dilate(1.0, &pt(&[3.0, -4.0])).unwrap();
        assert_eq!(d.coords(), &[3.0, -4.0]);

        assert!(h.dilate(-1.0, &pt(&[1.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn dilate_composes_multiplicatively() {
        let e = MetricSpaceModel::engel_default();
        let p = pt(&[1.3, -0.2, 0.9, -1.7]);
        let a = e.dilate(1.5, &e.dilate(2.0, &p).unwrap()).unwrap();
        let b = e.dilate(3.0, &p).unwrap();
        for (x, y) in a.coords().iter().zip(b.coords()) {
            assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }

    #[test]
    fn dilation_is_group_morphism() {
        let e = MetricSpaceModel::engel_default();
        let p = pt(&[0.5, 1.0, -0.3, 0.2]);
        let q = pt(&[-1.1, 0.4, 0.8, -0.6]);
        for lambda in [0.25, 0.5, 2.0, 4.0] {
            let lhs = e.dilate(lambda, &e.compose(&p, &q).unwrap()).unwrap();
            let rhs = e
                .compose(&e.dilate(lambda, &p).unwrap(), &e.dilate(lambda, &q).unwrap())
                .unwrap();
            for (a, b) in lhs.coords().iter().zip(rhs.coords()) {
                assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn normalize_homogeneous_examples() {
        let h = MetricSpaceModel::heisenberg();
        let (l, u) = h.normalize_homogeneous(&pt(&[0.0, 0.0, 4.0])).unwrap();
        assert!((l - 2.0).abs() < 1e-15);
        assert_eq!(u.coords(), &[0.0, 0.0, 1.0]);

        let (l, u) = h.normalize_homogeneous(&pt(&[3.0, 0.0, 0.0])).unwrap();
        assert!((l - 3.0).abs() < 1e-15);
        assert_eq!(u.coords(), &[1.0, 0.0, 0.0]);

        let e = MetricSpaceModel::engel_default();
        let (l, u) = e.normalize_homogeneous(&pt(&[0.0, 0.0, 0.0, 8.0])).unwrap();
        assert!((l - 2.0).abs() < 1e-15);
        assert_eq!(u.coords(), &[0.0, 0.0, 0.0, 1.0]);

        assert!(h.normalize_homogeneous(&h.identity()).is_err());
    }

    #[test]
    fn dimension_mismatch_is_an_input_error() {
        let h = MetricSpaceModel::heisenberg();
        let err = h.distance(&pt(&[0.0, 0.0]), &pt(&[0.0, 0.0, 1.0]));
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn left_log_derivative_matches_finite_differences() {
        let e = MetricSpaceModel::engel_default();
        let p = pt(&[0.8, -0.5, 0.3, 1.1]);
        let v = [0.4, 1.2, -0.7, 0.9];
        let analytic = e.left_log_derivative(&p, &v).unwrap();
        let h = 1e-6;
        let q = pt(&[
            p[0] + h * v[0],
            p[1] + h * v[1],
            p[2] + h * v[2],
            p[3] + h * v[3],
        ]);
        let moved = e.compose(&e.inverse(&p).unwrap(), &q).unwrap();
        for i in 0..4 {
            let fd = moved[i] / h;
            assert!(
                (fd - analytic[i]).abs() < 1e-5,
                "coord {i}: fd {fd} vs {}",
                analytic[i]
            );
        }
    }
}
