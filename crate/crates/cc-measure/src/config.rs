//! Experiment configuration: spec strings for spaces and curves, the
//! sectioned config file, and the flag-over-file merge.

use serde::Deserialize;

use crate::curves::{LinearPhi, ParametricCurve, WeierstrassParams};
use crate::error::{Error, Result};
use crate::rect::RectPiece;
use crate::spaces::{MetricSpaceModel, Point, SolverConfig, SpaceKind};

/// `[space]` section: kind plus Engel solver settings.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSection {
    pub kind: Option<String>,
    pub nodes: Option<usize>,
    pub restarts: Option<usize>,
    pub penalty_weight: Option<f64>,
    pub tolerance: Option<f64>,
    pub max_iterations: Option<usize>,
}

/// `[curve]` section: builtin name with parameters, or a polyline path.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSection {
    pub name: Option<String>,
    pub domain: Option<[f64; 2]>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    /// Slope of the linear clock in the Engel Weierstrass curve.
    pub phi: Option<f64>,
    pub holder_const: Option<f64>,
    pub holder_k: Option<f64>,
}

/// `[operation]` section: degree, schedules, grids and tolerances.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperationSection {
    pub k: Option<f64>,
    pub eps: Option<Vec<f64>>,
    pub radii: Option<Vec<f64>>,
    pub grid: Option<usize>,
    pub rel_tol: Option<f64>,
    pub t: Option<f64>,
    pub samples: Option<usize>,
    pub dp_grid: Option<usize>,
    pub ladder: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub csv: Option<String>,
    pub json: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RectPieceSpec {
    pub curve: String,
    pub domain: [f64; 2],
    pub subsets: Vec<[f64; 2]>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub phi: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RectSection {
    pub k: Option<f64>,
    pub pieces: Vec<RectPieceSpec>,
}

/// The whole config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub space: SpaceSection,
    #[serde(default)]
    pub curve: CurveSection,
    #[serde(default)]
    pub operation: OperationSection,
    #[serde(default)]
    pub output: OutputSection,
    pub rect: Option<RectSection>,
    pub seed: Option<u64>,
}

impl ExperimentConfig {
    pub fn from_file(path: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{path}: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        for sched in [&self.operation.eps, &self.operation.radii] {
            if let Some(s) = sched {
                if s.iter().any(|v| *v <= 0.0) {
                    return Err(Error::Config("schedules must be positive".into()));
                }
                if !(s.windows(2).all(|w| w[0] > w[1]) || s.windows(2).all(|w| w[0] < w[1])) {
                    return Err(Error::Config("schedules must be sorted".into()));
                }
            }
        }
        if let Some(rt) = self.operation.rel_tol {
            if rt <= 0.0 {
                return Err(Error::Config("tolerances must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Builds a space from a spec like `heisenberg`, `engel`, `euclidean:3`.
pub fn build_space(spec: &str, section: &SpaceSection, seed: u64) -> Result<MetricSpaceModel> {
    let spec = spec.trim().to_lowercase();
    if let Some(rest) = spec.strip_prefix("euclidean") {
        let n = rest
            .trim_start_matches(':')
            .parse::<usize>()
            .map_err(|_| Error::invalid(format!("bad Euclidean dimension in '{spec}'")))?;
        return MetricSpaceModel::euclidean(n);
    }
    match spec.as_str() {
        "heisenberg" => Ok(MetricSpaceModel::heisenberg()),
        "engel" => {
            let default = SolverConfig::default();
            MetricSpaceModel::engel(SolverConfig {
                nodes: section.nodes.unwrap_or(default.nodes),
                restarts: section.restarts.unwrap_or(default.restarts),
                penalty_weight: section.penalty_weight.unwrap_or(default.penalty_weight),
                tolerance: section.tolerance.unwrap_or(default.tolerance),
                max_iterations: section.max_iterations.unwrap_or(default.max_iterations),
                seed,
            })
        }
        other => Err(Error::invalid(format!(
            "unknown space '{other}'; expected euclidean:N, heisenberg or engel"
        ))),
    }
}

fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad number '{p}'")))
        })
        .collect()
}

/// Builds a curve from a spec string.
///
/// Supported forms: `vertical`, `z-axis`, `w-axis`,
/// `segment:vx,vy[,...]`, `weierstrass[:alpha=A,beta=B,phi=C]`,
/// `poly:c0,c1|c0|c0,c1,c2` (coefficient lists per coordinate, low degree
/// first) and `polyline:PATH` (CSV rows `t,x1,...,xn`).
pub fn build_curve(
    spec: &str,
    space: &MetricSpaceModel,
    section: &CurveSection,
    domain: (f64, f64),
) -> Result<ParametricCurve> {
    let spec = spec.trim();
    let lower = spec.to_lowercase();
    let curve = if lower == "vertical" || lower == "heisenberg_vertical" {
        ParametricCurve::heisenberg_vertical(domain)?
    } else if lower == "z-axis" || lower == "engel_z_axis" {
        ParametricCurve::engel_z_axis(domain)?
    } else if lower == "w-axis" || lower == "engel_w_axis" {
        ParametricCurve::engel_w_axis(domain)?
    } else if let Some(rest) = lower.strip_prefix("segment:") {
        ParametricCurve::euclidean_segment(parse_floats(rest)?, domain)?
    } else if lower == "weierstrass" || lower.starts_with("weierstrass:") {
        let mut alpha = section.alpha.unwrap_or(0.3);
        let mut beta = section.beta.unwrap_or(4.0);
        let mut phi = section.phi.unwrap_or(1.0);
        if let Some(rest) = lower.strip_prefix("weierstrass:") {
            for kv in rest.split(',') {
                let (key, value) = kv
                    .split_once('=')
                    .ok_or_else(|| Error::invalid(format!("bad weierstrass option '{kv}'")))?;
                let v = value
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| Error::invalid(format!("bad number '{value}'")))?;
                match key.trim() {
                    "alpha" => alpha = v,
                    "beta" => beta = v,
                    "phi" => phi = v,
                    other => {
                        return Err(Error::invalid(format!("unknown weierstrass key '{other}'")))
                    }
                }
            }
        }
        let params = WeierstrassParams::with_tail_tolerance(alpha, beta, 1e-10)?;
        ParametricCurve::engel_weierstrass(params, LinearPhi { c0: 0.0, c1: phi }, domain)?
    } else if let Some(rest) = spec.strip_prefix("poly:") {
        let coeffs: Vec<Vec<f64>> = rest
            .split('|')
            .map(parse_floats)
            .collect::<Result<_>>()?;
        ParametricCurve::coordinate_polynomials(space.kind(), coeffs, domain)?
    } else if let Some(path) = spec.strip_prefix("polyline:") {
        let text = std::fs::read_to_string(path)?;
        let mut times = Vec::new();
        let mut points = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let vals = parse_floats(line)
                .map_err(|_| Error::invalid(format!("{path}:{}: bad row", lineno + 1)))?;
            if vals.len() != space.dim() + 1 {
                return Err(Error::invalid(format!(
                    "{path}:{}: expected t plus {} coordinates",
                    lineno + 1,
                    space.dim()
                )));
            }
            times.push(vals[0]);
            points.push(Point::from_slice(&vals[1..]));
        }
        ParametricCurve::polyline(
            space,
            times,
            points,
            section.holder_const.unwrap_or(10.0),
            section.holder_k.unwrap_or(1.0),
        )?
    } else {
        return Err(Error::invalid(format!("unknown curve spec '{spec}'")));
    };

    if curve.space_kind() != space.kind() {
        // Euclidean segments of matching dimension are the only cross-kind
        // match allowed
        let ok = matches!(
            (curve.space_kind(), space.kind()),
            (SpaceKind::Euclidean(a), SpaceKind::Euclidean(b)) if a == b
        );
        if !ok {
            return Err(Error::invalid(format!(
                "curve '{spec}' lives in {}, not in {}",
                curve.space_kind().label(),
                space.kind().label()
            )));
        }
    }
    Ok(curve)
}

/// Builds the pieces of a rectifiable set from the `[rect]` section.
pub fn build_rect_pieces(
    section: &RectSection,
    space: &MetricSpaceModel,
) -> Result<Vec<RectPiece>> {
    section
        .pieces
        .iter()
        .map(|spec| {
            let curve_section = CurveSection {
                alpha: spec.alpha,
                beta: spec.beta,
                phi: spec.phi,
                ..CurveSection::default()
            };
            let curve = build_curve(
                &spec.curve,
                space,
                &curve_section,
                (spec.domain[0], spec.domain[1]),
            )?;
            Ok(RectPiece {
                curve,
                subsets: spec.subsets.iter().map(|s| (s[0], s[1])).collect(),
            })
        })
        .collect()
}

/// The built-in crossing set: the vertical axis and the tilted curve
/// `(t, 0, t)`, subsets excluding a neighbourhood of their crossing at the
/// origin.
pub fn crossing_preset() -> RectSection {
    RectSection {
        k: Some(2.0),
        pieces: vec![
            RectPieceSpec {
                curve: "vertical".into(),
                domain: [-1.0, 1.0],
                subsets: vec![[-1.0, -0.05], [0.05, 1.0]],
                alpha: None,
                beta: None,
                phi: None,
            },
            RectPieceSpec {
                curve: "poly:0,1|0|0,1".into(),
                domain: [-1.0, 1.0],
                subsets: vec![[-1.0, -0.05], [0.05, 1.0]],
                alpha: None,
                beta: None,
                phi: None,
            },
        ],
    }
}
