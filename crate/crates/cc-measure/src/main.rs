//! CLI driver: parses experiment configs, dispatches to the library and
//! emits CSV tables plus a JSON summary.
//!
//! Exit codes: 0 success (and verdict pass where applicable), 1 verdict
//! fail, 2 input or solver error.

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use cc_measure::config::{
    build_curve, build_rect_pieces, build_space, crossing_preset, ExperimentConfig,
};
use cc_measure::curves::{self, ParametricCurve};
use cc_measure::error::{Error, Result};
use cc_measure::measures::{self, EstimatorOptions, VerifyOptions};
use cc_measure::rect;
use cc_measure::report::{format_float, CsvTable, JsonSummary};
use cc_measure::spaces::{DistanceKind, MetricSpaceModel, Point};

#[derive(Parser)]
#[command(
    name = "cc-measure",
    about = "Metric derivatives, dimensioned lengths and Hausdorff-type measures of curves in Carnot-Caratheodory spaces",
    version
)]
struct Cli {
    /// Sectioned TOML config; flags override config keys.
    #[arg(long, global = true)]
    config: Option<String>,
    /// Seed for all sampling (solver restarts, rectifiability samples).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Parallelism cap; CC_MEASURE_THREADS is honoured when absent.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// CSV output path (stdout when omitted).
    #[arg(long, global = true)]
    out_csv: Option<String>,
    /// JSON summary path (stdout when omitted).
    #[arg(long, global = true)]
    out_json: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Target {
    /// Space spec: euclidean:N | heisenberg | engel.
    #[arg(long)]
    space: Option<String>,
    /// Curve spec: vertical | z-axis | w-axis | segment:... | weierstrass |
    /// poly:... | polyline:PATH.
    #[arg(long)]
    curve: Option<String>,
    /// Curve domain as "a,b".
    #[arg(long)]
    domain: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Distance-engine queries.
    Space {
        #[command(subcommand)]
        cmd: SpaceCmd,
    },
    /// Metric-derivative estimators.
    Curve {
        #[command(subcommand)]
        cmd: CurveCmd,
    },
    /// Dimensioned measures along a curve.
    Measure {
        #[command(subcommand)]
        cmd: MeasureCmd,
    },
    /// Verification harnesses.
    Verify {
        #[command(subcommand)]
        cmd: VerifyCmd,
    },
    /// Rectifiable-set checks.
    Rect {
        #[command(subcommand)]
        cmd: RectCmd,
    },
}

#[derive(Subcommand)]
enum SpaceCmd {
    /// Distance between two points.
    Dist {
        #[command(flatten)]
        target: Target,
        /// First point, comma separated coordinates.
        #[arg(long)]
        p: String,
        /// Second point.
        #[arg(long)]
        q: String,
    },
}

#[derive(Subcommand)]
enum CurveCmd {
    /// measᵏ estimates at one time or over a grid.
    Meas {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        rel_tol: Option<f64>,
        #[arg(long)]
        ladder: Option<usize>,
    },
    /// Log-log slope degree detector.
    Degree {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        ladder: Option<usize>,
    },
    /// Continuity check of the measᵏ profile.
    Mc1k {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        rel_tol: Option<f64>,
        #[arg(long)]
        ladder: Option<usize>,
    },
}

#[derive(Subcommand)]
enum MeasureCmd {
    /// k-dimensional length by quadrature of the measᵏ profile.
    Length {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Greedy epsilon-chain counts over a schedule.
    Complexity {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        k: Option<f64>,
        /// Comma separated epsilon schedule.
        #[arg(long)]
        eps: Option<String>,
        /// Also run the grid oracle with this many cells.
        #[arg(long)]
        dp_grid: Option<usize>,
    },
    /// Greedy epsilon-net counts over a schedule.
    Entropy {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long)]
        eps: Option<String>,
    },
    /// Closed-cover and ball-cover costs over a schedule.
    Hausdorff {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long)]
        eps: Option<String>,
    },
    /// Density profile around one curve point.
    Density {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long)]
        t: Option<f64>,
        /// Comma separated decreasing radius schedule.
        #[arg(long)]
        radii: Option<String>,
    },
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Four-way agreement of length, covers and chain complexity.
    MainTheorem {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long)]
        eps: Option<String>,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        rel_tol: Option<f64>,
    },
}

#[derive(Subcommand)]
enum RectCmd {
    /// Density bounds over a sampled rectifiable set.
    Check {
        /// Space spec (defaults to heisenberg for the preset).
        #[arg(long)]
        space: Option<String>,
        /// Built-in set when the config has no [rect] section.
        #[arg(long, default_value = "crossing")]
        preset: String,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        radii: Option<String>,
        #[arg(long)]
        rel_tol: Option<f64>,
    },
}

struct Ctx {
    cfg: ExperimentConfig,
    seed: u64,
    out_csv: Option<String>,
    out_json: Option<String>,
}

impl Ctx {
    fn space(&self, flag: &Option<String>) -> Result<MetricSpaceModel> {
        let spec = flag
            .clone()
            .or_else(|| self.cfg.space.kind.clone())
            .ok_or_else(|| Error::invalid("missing --space (or [space] kind in the config)"))?;
        build_space(&spec, &self.cfg.space, self.seed)
    }

    fn curve(&self, space: &MetricSpaceModel, target: &Target) -> Result<ParametricCurve> {
        let spec = target
            .curve
            .clone()
            .or_else(|| self.cfg.curve.name.clone())
            .ok_or_else(|| Error::invalid("missing --curve (or [curve] name in the config)"))?;
        let domain = match &target.domain {
            Some(s) => parse_pair(s)?,
            None => self
                .cfg
                .curve
                .domain
                .map(|d| (d[0], d[1]))
                .unwrap_or((0.0, 1.0)),
        };
        build_curve(&spec, space, &self.cfg.curve, domain)
    }

    fn k(&self, flag: Option<f64>) -> Result<f64> {
        flag.or(self.cfg.operation.k)
            .ok_or_else(|| Error::invalid("missing --k (or [operation] k in the config)"))
    }

    fn eps_schedule(&self, flag: &Option<String>, default: &[f64]) -> Result<Vec<f64>> {
        match flag {
            Some(s) => parse_schedule(s),
            None => Ok(self
                .cfg
                .operation
                .eps
                .clone()
                .unwrap_or_else(|| default.to_vec())),
        }
    }

    fn estimator(&self, rel_tol: Option<f64>, ladder: Option<usize>) -> EstimatorOptions {
        EstimatorOptions {
            ladder_count: ladder.or(self.cfg.operation.ladder).unwrap_or(12),
            rel_tol: rel_tol.or(self.cfg.operation.rel_tol).unwrap_or(0.02),
            use_analytic: false,
        }
    }
}

fn parse_pair(s: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::invalid(format!("expected 'a,b', got '{s}'")));
    }
    let a = parts[0]
        .trim()
        .parse()
        .map_err(|_| Error::invalid(format!("bad number '{}'", parts[0])))?;
    let b = parts[1]
        .trim()
        .parse()
        .map_err(|_| Error::invalid(format!("bad number '{}'", parts[1])))?;
    Ok((a, b))
}

fn parse_schedule(s: &str) -> Result<Vec<f64>> {
    let vals: Vec<f64> = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad number '{p}'")))
        })
        .collect::<Result<_>>()?;
    if vals.is_empty() || vals.iter().any(|v| *v <= 0.0) {
        return Err(Error::invalid("schedule must be positive"));
    }
    Ok(vals)
}

fn parse_point(s: &str) -> Result<Point> {
    let coords: Vec<f64> = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad coordinate '{p}'")))
        })
        .collect::<Result<_>>()?;
    Ok(Point::new(coords))
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    let threads = cli.threads.or_else(|| {
        std::env::var("CC_MEASURE_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .ok();
    }
    let cfg = match &cli.config {
        Some(path) => {
            let cfg = ExperimentConfig::from_file(path)?;
            cfg.validate()?;
            cfg
        }
        None => ExperimentConfig::default(),
    };
    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    let ctx = Ctx {
        out_csv: cli.out_csv.or_else(|| cfg.output.csv.clone()),
        out_json: cli.out_json.or_else(|| cfg.output.json.clone()),
        cfg,
        seed,
    };

    match cli.command {
        Command::Space { cmd } => run_space(&ctx, cmd),
        Command::Curve { cmd } => run_curve(&ctx, cmd),
        Command::Measure { cmd } => run_measure(&ctx, cmd),
        Command::Verify { cmd } => run_verify(&ctx, cmd),
        Command::Rect { cmd } => run_rect(&ctx, cmd),
    }
}

fn run_space(ctx: &Ctx, cmd: SpaceCmd) -> Result<i32> {
    match cmd {
        SpaceCmd::Dist { target, p, q } => {
            let space = ctx.space(&target.space)?;
            let pp = parse_point(&p)?;
            let qq = parse_point(&q)?;
            let d = space.distance(&pp, &qq)?;
            let mut csv = CsvTable::new(&["p", "q", "value", "kind", "gap"]);
            csv.push(vec![
                format!("\"{p}\""),
                format!("\"{q}\""),
                format_float(d.value),
                match d.kind {
                    DistanceKind::Exact => "exact".into(),
                    DistanceKind::UpperBound => "upper_bound".into(),
                },
                format_float(d.gap_estimate),
            ]);
            csv.write_to(ctx.out_csv.as_deref())?;
            let mut summary = JsonSummary::new("space dist", ctx.seed);
            summary
                .set("space", json!(space.kind().label()))
                .set("value", json!(d.value))
                .set(
                    "kind",
                    json!(match d.kind {
                        DistanceKind::Exact => "exact",
                        DistanceKind::UpperBound => "upper_bound",
                    }),
                )
                .set("gaps", json!({ "distance": d.gap_estimate }))
                .set("tolerances", json!({}));
            summary.write_to(ctx.out_json.as_deref())?;
            Ok(0)
        }
    }
}

fn run_curve(ctx: &Ctx, cmd: CurveCmd) -> Result<i32> {
    match cmd {
        CurveCmd::Meas {
            target,
            k,
            t,
            grid,
            rel_tol,
            ladder,
        } => {
            let space = ctx.space(&target.space)?;
            let curve = ctx.curve(&space, &target)?;
            let k = ctx.k(k)?;
            let opts = ctx.estimator(rel_tol, ladder);
            let scale_ladder = opts.ladder_for(&curve);
            let times = match t {
                Some(t) => vec![t],
                None => {
                    let (a, b) = curve.domain();
                    curves::uniform_grid(a, b, grid.or(ctx.cfg.operation.grid).unwrap_or(16))
                }
            };
            let mut csv = CsvTable::new(&["t", "k", "value", "converged", "spread", "gap_rel"]);
            let mut worst_gap: f64 = 0.0;
            let mut all_converged = true;
            for t in &times {
                let est =
                    curves::meas_k_estimate(&space, &curve, *t, k, &scale_ladder, opts.rel_tol)?;
                worst_gap = worst_gap.max(est.gap_rel);
                all_converged &= est.converged;
                csv.push(vec![
                    format_float(*t),
                    format_float(k),
                    format_float(est.value),
                    est.converged.to_string(),
                    format_float(est.spread),
                    format_float(est.gap_rel),
                ]);
            }
            csv.write_to(ctx.out_csv.as_deref())?;
            let mut summary = JsonSummary::new("curve meas", ctx.seed);
            summary
                .set("space", json!(space.kind().label()))
                .set("k", json!(k))
                .set("tolerances", json!({ "rel_tol": opts.rel_tol }))
                .set("gaps", json!({ "max_rel": worst_gap }))
                .set("all_converged", json!(all_converged));
            summary.write_to(ctx.out_json.as_deref())?;
            Ok(0)
        }
        CurveCmd::Degree { target, t, ladder } => {
            let space = ctx.space(&target.space)?;
            let curve = ctx.curve(&space, &target)?;
            let (a, b) = curve.domain();
            let t = t.or(ctx.cfg.operation.t).unwrap_or(0.5 * (a + b));
            let opts = ctx.estimator(None, ladder);
            let scale_ladder = opts.ladder_for(&curve);
            let (k_hat, residual) = curves::degree_estimate(&space, &curve, t, &scale_ladder)?;
            let mut csv = CsvTable::new(&["t", "k_hat", "fit_residual"]);
            csv.push(vec![
                format_float(t),
                format_float(k_hat),
                format_float(residual),
            ]);
            csv.write_to(ctx.out_csv.as_deref())?;
            let mut summary = JsonSummary::new("curve degree", ctx.seed);
            summary
                .set("k_hat", json!(k_hat))
                .set("tolerances", json!({ "fit_residual": residual }))
                .set("gaps", json!({ "engine_scale": space.gap_scale() }));
            summary.write_to(ctx.out_json.as_deref())?;
            Ok(0)
        }
        CurveCmd::Mc1k {
            target,
            k,
            grid,
            rel_tol,
            ladder,
        } => {
            let space = ctx.space(&target.space)?;
            let curve = ctx.curve(&space, &target)?;
            let k = ctx.k(k)?;
            let opts = ctx.estimator(rel_tol, ladder);
            let (a, b) = curve.domain();
            let grid = curves::uniform_grid(a, b, grid.or(ctx.cfg.operation.grid).unwrap_or(64));
            let scale_ladder = opts.ladder_for(&curve);
            let report =
                curves::mc1k_check(&space, &curve, k, &grid, opts.rel_tol, &scale_ladder)?;
            let mut csv = CsvTable::new(&["t", "meas_k", "gap_rel"]);
            for (t, v) in report.times.iter().zip(&report.profile) {
                csv.push(vec![
                    format_float(*t),
                    format_float(*v),
                    format_float(report.gap_rel),
                ]);
            }
            csv.write_to(ctx.out_csv.as_deref())?;
            let mut summary = JsonSummary::new("curve mc1k", ctx.seed);
            summary
                .set("k", json!(k))
                .set("passed", json!(report.passed))
                .set("max_jump_rel", json!(report.max_jump_rel))
                .set("offending_times", json!(report.offending_times))
                .set("tolerances", json!({ "rel_tol": opts.rel_tol }))
                .set("gaps", json!({ "max_rel": report.gap_rel }));
            summary.write_to(ctx.out_json.as_deref())?;
            Ok(if report.passed { 0 } else { 1 })
        }
    }
}

fn run_measure(ctx: &Ctx, cmd: MeasureCmd) -> Result<i32> {
    match cmd {
        MeasureCmd::Length { target, k, grid } => {
            let space = ctx.space(&target.space)?;
            let curve = ctx.curve(&space, &target)?;
            let k = ctx.k(k)?;
            let opts = ctx.estimator(None, None);
            let (a, b) = curve.domain();
            let grid = curves::uniform_grid(a, b, grid.or(ctx.cfg.operation.grid).unwrap_or(33));
            let len = measures::length_k(&space, &curve, k, &grid, &opts)?;
            let mut csv = CsvTable::new(&["t", "meas_k", "gap_rel"]);
            for (t, v) in &len.profile {
                csv.push(vec![
                    format_float(*t),
                    format_float(*v),
                    format_float(len.gap_rel),
                ]);
            }
            csv.write_to(ctx.out_csv.as_deref())?;
            let mut summary = JsonSummary::new("measure length", ctx.seed);
            summary
                .set("k", json!(k))
                .set("value", json!(len.value))
                .set(
                    "tolerances",
                    json!({ "refinement_error": len.refinement_error }),
                )
                .set("gaps", json!({ "max_rel": len.gap_rel }));
            summary.write_to(ctx.out_json.as_deref())?;
            Ok(0)
        }
        MeasureCmd::Complexity {
            target,
            k,
            eps,
            dp_grid,
        } => {
            let space = ctx.space(&target.space)?;
            let curve = ctx.curve(&space, &target)?;
            let k = ctx.k(k)?;
            let schedule = ctx.eps_schedule(&eps, &[0.2, 0.1, 0.05])?;
            let dp_grid = dp_grid.or(ctx.cfg.operation.dp_grid);
            let mut csv = CsvTable::new(&["epsilon", "count", "eps_k_hops", "gap"]);
            let mut rows = Vec::new();
            for e in &schedule {
                let cert = measures::interpolation_complexity(&space, &curve, *e)?;
                let mut gap: f64 = 0.0;
                for w in cert.points.windows(2) {
                    gap = gap.max(space.distance(&w[0], &w[1])?.gap_estimate);
                }
                let scaled = e.powf(k) * cert.hops() as f64;
                let dp = match dp_grid {
                    Some(g) => Some(measures::interpolation_complexity_bruteforce(
                        &space, &curve, *e, g,
                    )?),
                    None => None,
                };
                csv.push(vec![
                    format_float(*e),
                    cert.count.to_string(),
                    format_float(scaled),
                    format_float(gap),
                ]);
                rows.push(json!({
                    "epsilon": e,
                    "count": cert.count,
                    "eps_k_hops": scaled,
                    "dp_count": dp,
                }));
            }
            csv.write_to(ctx.out_csv.as_deref())?;
            let mut summary = JsonSummary::new("measure complexity", ctx.seed);
            summary
                .set("k", json!(k))
                .set("rows", json!(rows))
                .set(
                    "tolerances",
                    json!({ "eps_k_slack": schedule.last().map(|e| e.powf(k)) }),
                )
                .set("gaps", json!({ "engine_scale": space.gap_scale() }));
            summary.write_to(ctx.out_json.as_deref())?;
            Ok(0)
        }
        MeasureCmd::Entropy { target, k, eps } => {
            let space = ctx.space(&target.space)?;
            let curve = ctx.curve(&space, &target)?;
            let k = ctx.k(k)?;
            let schedule = ctx.eps_schedule(&eps, &[0.2, 0.1, 0.05])?;
            let mut csv = CsvTable::new(&["epsilon", "count", "eps_k_count", "gap"]);
            for e in &schedule {
                let net = measures::metric_entropy(&space, &curve, *e)?;
                csv.push(vec![
                    format_float(*e),
                    net.count.to_string(),
                    format_float(e.powf(k) * net.count as f64),
                    format_float(space.gap_scale() * e),
                ]);
            }
            csv.write_to(ctx.out_csv.as_deref())?;
            let mut summary = JsonSummary::new("measure entropy", ctx.seed);
            summary
                .set("k", json!(k))
                .set(
                    "tolerances",
                    json!({ "eps_k_slack": schedule.last().map(|e| e.powf(k)) }),
                )
                .set("gaps", json!({ "engine_scale": space.gap_scale() }));
            summary.write_to(ctx.out_json.as_deref())?;
            Ok(0)
        }
        MeasureCmd::Hausdorff { target, k, eps } => {
            let space = ctx.space(&target.space)?;
            let curve = ctx.curve(&space, &target)?;
            let k = ctx.k(k)?;
            let schedule = ctx.eps_schedule(&eps, &[0.2, 0.1, 0.05])?;
            let mut csv = CsvTable::new(&[
                "epsilon",
                "hausdorff_cost",
                "spherical_cost",
                "pieces",
                "sampling_tol_rel",
            ]);
            for e in &schedule {
                let (h, s) = measures::covers(&space, &curve, k, *e)?;
                csv.push(vec![
                    format_float(*e),
                    format_float(h.cost),
                    format_float(s.cost),
                    h.pieces.len().to_string(),
                    format_float(0.01),
                ]);
            }
            csv.write_to(ctx.out_csv.as_deref())?;
            let mut summary = JsonSummary::new("measure hausdorff", ctx.seed);
            summary
                .set("k", json!(k))
                .set("tolerances", json!({ "diameter_sampling_rel": 0.01 }))
                .set("gaps", json!({ "engine_scale": space.gap_scale() }));
            summary.write_to(ctx.out_json.as_deref())?;
            Ok(0)
        }
        MeasureCmd::Density {
            target,
            k,
            t,
            radii,
        } => {
            let space = ctx.space(&target.space)?;
            let curve = ctx.curve(&space, &target)?;
            let k = ctx.k(k)?;
            let (a, b) = curve.domain();
            let t = t.or(ctx.cfg.operation.t).unwrap_or(0.5 * (a + b));
            let radii = match &radii {
                Some(s) => parse_schedule(s)?,
                None => ctx
                    .cfg
                    .operation
                    .radii
                    .clone()
                    .unwrap_or_else(|| vec![0.2, 0.1, 0.05]),
            };
            let opts = ctx.estimator(None, None);
            let prof = measures::density_profile(&space, &curve, k, t, &radii, &opts)?;
            let mut csv = CsvTable::new(&["r", "ratio", "side", "gap"]);
            for ((r, ratio), gap) in prof.radii.iter().zip(&prof.ratios).zip(&prof.gaps) {
                csv.push(vec![
                    format_float(*r),
                    format_float(*ratio),
                    prof.side.label().to_string(),
                    format_float(*gap),
                ]);
            }
            csv.write_to(ctx.out_csv.as_deref())?;
            let mut summary = JsonSummary::new("measure density", ctx.seed);
            summary
                .set("k", json!(k))
                .set("side", json!(prof.side.label()))
                .set("ratios", json!(prof.ratios))
                .set("tolerances", json!({ "rel_tol": opts.rel_tol }))
                .set(
                    "gaps",
                    json!({ "max_rel": prof.gaps.iter().cloned().fold(0.0, f64::max) }),
                );
            summary.write_to(ctx.out_json.as_deref())?;
            Ok(0)
        }
    }
}

fn run_verify(ctx: &Ctx, cmd: VerifyCmd) -> Result<i32> {
    match cmd {
        VerifyCmd::MainTheorem {
            target,
            k,
            eps,
            grid,
            rel_tol,
        } => {
            let space = ctx.space(&target.space)?;
            let curve = ctx.curve(&space, &target)?;
            let k = ctx.k(k)?;
            let defaults = VerifyOptions::default();
            let opts = VerifyOptions {
                eps_schedule: ctx.eps_schedule(&eps, &defaults.eps_schedule)?,
                meas_grid: grid.or(ctx.cfg.operation.grid).unwrap_or(defaults.meas_grid),
                rel_tol: rel_tol
                    .or(ctx.cfg.operation.rel_tol)
                    .unwrap_or(defaults.rel_tol),
                estimator: ctx.estimator(None, None),
            };
            let report = measures::verify_main_theorem(&space, &curve, k, &opts)?;
            let mut csv = CsvTable::new(&["quantity", "value", "tolerance"]);
            for (name, value, tol) in [
                ("length_k", report.length_k, report.tolerances.length),
                (
                    "hausdorff_upper",
                    report.hausdorff_upper,
                    report.tolerances.hausdorff,
                ),
                (
                    "spherical_upper",
                    report.spherical_upper,
                    report.tolerances.spherical,
                ),
                (
                    "eps_k_sigma_int",
                    report.complexity_extrapolation,
                    report.tolerances.complexity,
                ),
            ] {
                csv.push(vec![
                    name.to_string(),
                    format_float(value),
                    format_float(tol),
                ]);
            }
            csv.write_to(ctx.out_csv.as_deref())?;
            let rows: Vec<serde_json::Value> = report
                .rows
                .iter()
                .map(|r| {
                    json!({
                        "epsilon": r.epsilon,
                        "chain_points": r.chain_points,
                        "eps_k_hops": r.eps_k_hops,
                        "hausdorff_cost": r.hausdorff_cost,
                        "spherical_cost": r.spherical_cost,
                    })
                })
                .collect();
            let mut summary = JsonSummary::new("verify main-theorem", ctx.seed);
            summary
                .set("k", json!(k))
                .set("verdict", json!(report.verdict))
                .set(
                    "values",
                    json!({
                        "length_k": report.length_k,
                        "hausdorff_upper": report.hausdorff_upper,
                        "spherical_upper": report.spherical_upper,
                        "eps_k_sigma_int": report.complexity_extrapolation,
                    }),
                )
                .set(
                    "tolerances",
                    json!({
                        "length": report.tolerances.length,
                        "hausdorff": report.tolerances.hausdorff,
                        "spherical": report.tolerances.spherical,
                        "complexity": report.tolerances.complexity,
                        "ordering": report.tolerances.ordering,
                        "rel_tol": opts.rel_tol,
                    }),
                )
                .set("gaps", json!({ "engine_scale": space.gap_scale() }))
                .set("rows", json!(rows))
                .set("failures", json!(report.failures));
            summary.write_to(ctx.out_json.as_deref())?;
            Ok(if report.verdict { 0 } else { 1 })
        }
    }
}

fn run_rect(ctx: &Ctx, cmd: RectCmd) -> Result<i32> {
    match cmd {
        RectCmd::Check {
            space,
            preset,
            k,
            samples,
            radii,
            rel_tol,
        } => {
            let section = match &ctx.cfg.rect {
                Some(r) => r.clone(),
                None => match preset.as_str() {
                    "crossing" => crossing_preset(),
                    other => {
                        return Err(Error::invalid(format!(
                            "unknown preset '{other}' and no [rect] config section"
                        )))
                    }
                },
            };
            let space_spec = space.unwrap_or_else(|| "heisenberg".to_string());
            let space = build_space(&space_spec, &ctx.cfg.space, ctx.seed)?;
            let k = k.or(section.k).unwrap_or(2.0);
            let opts = ctx.estimator(None, None);
            let pieces = build_rect_pieces(&section, &space)?;
            let set = rect::RectifiableSet::new(&space, k, pieces, &opts)?;
            let samples = samples.or(ctx.cfg.operation.samples).unwrap_or(32);
            let radii = match &radii {
                Some(s) => parse_schedule(s)?,
                None => ctx
                    .cfg
                    .operation
                    .radii
                    .clone()
                    .unwrap_or_else(|| vec![0.4, 0.2, 0.1, 0.04]),
            };
            let rel_tol = rel_tol.or(ctx.cfg.operation.rel_tol).unwrap_or(0.05);
            let report =
                rect::density_bounds_check(&space, &set, samples, &radii, rel_tol, ctx.seed, &opts)?;
            let measure = rect::set_measure_k(&space, &set, &opts)?;
            let mut csv = CsvTable::new(&["piece", "time", "lower", "upper", "ok"]);
            for s in &report.samples {
                csv.push(vec![
                    s.piece.to_string(),
                    format_float(s.time),
                    format_float(s.lower),
                    format_float(s.upper),
                    s.ok.to_string(),
                ]);
            }
            csv.write_to(ctx.out_csv.as_deref())?;
            let mut summary = JsonSummary::new("rect check", ctx.seed);
            summary
                .set("k", json!(k))
                .set("verdict", json!(report.verdict))
                .set("set_measure_k", json!(measure))
                .set("samples", json!(report.samples.len()))
                .set(
                    "tolerances",
                    json!({
                        "rel_tol": rel_tol,
                        "bounds": [2.0 * (1.0 - rel_tol), 2f64.powf(k) * (1.0 + rel_tol)],
                    }),
                )
                .set("gaps", json!({ "engine_scale": space.gap_scale() }));
            summary.write_to(ctx.out_json.as_deref())?;
            Ok(if report.verdict { 0 } else { 1 })
        }
    }
}
