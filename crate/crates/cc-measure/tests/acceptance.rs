//! Acceptance suite: one test per criterion, each printing a pass line with
//! its measured values and runtime. Run with `--nocapture` to see the lines.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use cc_measure::curves::{
    self, LinearPhi, ParametricCurve, ScaleLadder, WeierstrassParams,
};
use cc_measure::measures::{self, EstimatorOptions, VerifyOptions};
use cc_measure::rect;
use cc_measure::spaces::transcription::{self, HeisenbergSystem};
use cc_measure::spaces::{MetricSpaceModel, Point, SolverConfig};

const TWO_ROOT_PI: f64 = 3.544907701811032;

fn random_heisenberg_point(rng: &mut ChaCha8Rng) -> Point {
    Point::new(vec![
        rng.gen_range(-2.0..2.0),
        rng.gen_range(-2.0..2.0),
        rng.gen_range(-2.0..2.0),
    ])
}

#[test]
fn acceptance_01_heisenberg_anchor_and_invariances() {
    let start = Instant::now();
    let h = MetricSpaceModel::heisenberg();
    let d = h
        .distance(
            &Point::from_slice(&[0.0, 0.0, 0.0]),
            &Point::from_slice(&[0.0, 0.0, 1.0]),
        )
        .unwrap();
    assert!(
        (d.value - TWO_ROOT_PI).abs() < 1e-9,
        "anchor: {} vs {TWO_ROOT_PI}",
        d.value
    );

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let p = random_heisenberg_point(&mut rng);
        let q = random_heisenberg_point(&mut rng);
        let g = random_heisenberg_point(&mut rng);
        let lambda = rng.gen_range(0.25..4.0);

        let d_pq = h.distance(&p, &q).unwrap().value;
        let dp = h.dilate(lambda, &p).unwrap();
        let dq = h.dilate(lambda, &q).unwrap();
        let d_scaled = h.distance(&dp, &dq).unwrap().value;
        assert!(
            (d_scaled - lambda * d_pq).abs() < 1e-9,
            "homogeneity: {d_scaled} vs {}",
            lambda * d_pq
        );

        let gp = h.compose(&g, &p).unwrap();
        let gq = h.compose(&g, &q).unwrap();
        let d_translated = h.distance(&gp, &gq).unwrap().value;
        assert!(
            (d_translated - d_pq).abs() < 1e-9,
            "left invariance: {d_translated} vs {d_pq}"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "runtime {elapsed:?}");
    println!(
        "acceptance 01 PASS anchor {:.12} and 1000 invariance triples within 1e-9 ({elapsed:?})",
        d.value
    );
}

#[test]
fn acceptance_02_metric_derivative_on_vertical() {
    let start = Instant::now();
    let space = MetricSpaceModel::heisenberg();
    let curve = ParametricCurve::heisenberg_vertical((0.0, 1.0)).unwrap();
    let ladder = ScaleLadder::default_for(&curve);
    let grid = curves::uniform_grid(0.0, 1.0, 16);
    let four_pi = 4.0 * PI;
    for t in &grid {
        let est = curves::meas_k_estimate(&space, &curve, *t, 2.0, &ladder, 0.005).unwrap();
        assert!(est.converged, "t = {t}");
        assert!(
            (est.value - four_pi).abs() <= 0.005 * four_pi,
            "t = {t}: {} vs {four_pi}",
            est.value
        );

        let est3 = curves::meas_k_estimate(&space, &curve, *t, 3.0, &ladder, 0.005).unwrap();
        assert!(est3.value <= 1e-3, "k = 3 at t = {t}: {}", est3.value);

        let est15 = curves::meas_k_estimate(&space, &curve, *t, 1.5, &ladder, 0.005).unwrap();
        assert!(
            est15.diverged() && !est15.converged,
            "k = 1.5 at t = {t} should diverge"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "runtime {elapsed:?}");
    println!(
        "acceptance 02 PASS meas2 = 4pi within 0.5% at 16 grid points, k=3 <= 1e-3, k=1.5 divergent ({elapsed:?})"
    );
}

#[test]
fn acceptance_03_main_theorem_on_vertical() {
    let start = Instant::now();
    let space = MetricSpaceModel::heisenberg();
    let curve = ParametricCurve::heisenberg_vertical((0.0, 1.0)).unwrap();
    let opts = VerifyOptions {
        eps_schedule: vec![0.16, 0.08, 0.04, 0.02, 0.01],
        ..VerifyOptions::default()
    };
    let report = measures::verify_main_theorem(&space, &curve, 2.0, &opts).unwrap();
    assert!(report.verdict, "failures: {:?}", report.failures);
    let four_pi = 4.0 * PI;
    let values = [
        report.length_k,
        report.hausdorff_upper,
        report.spherical_upper,
        report.complexity_extrapolation,
    ];
    for v in &values {
        for w in &values {
            assert!(
                (v - w).abs() <= 0.05 * four_pi,
                "pairwise gap {v} vs {w} above 5% of 4pi"
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "runtime {elapsed:?}");
    println!(
        "acceptance 03 PASS four quantities {values:?} pairwise within 5% of 4pi ({elapsed:?})"
    );
}

#[test]
fn acceptance_04_euclidean_control() {
    let start = Instant::now();
    let space = MetricSpaceModel::euclidean(2).unwrap();
    let curve = ParametricCurve::euclidean_segment(vec![1.0, 0.0], (0.0, 1.0)).unwrap();
    let opts = VerifyOptions {
        eps_schedule: vec![0.2, 0.1, 0.05, 0.025],
        rel_tol: 0.005,
        ..VerifyOptions::default()
    };
    let report = measures::verify_main_theorem(&space, &curve, 1.0, &opts).unwrap();
    assert!(report.verdict, "failures: {:?}", report.failures);
    for v in [
        report.length_k,
        report.hausdorff_upper,
        report.spherical_upper,
        report.complexity_extrapolation,
    ] {
        assert!((v - 1.0).abs() <= 0.005, "{v} off the segment length");
    }
    // the degree-2 estimator vanishes on a Lipschitz curve
    let ladder = ScaleLadder::default_for(&curve);
    for t in curves::uniform_grid(0.0, 1.0, 16) {
        let est = curves::meas_k_estimate(&space, &curve, t, 2.0, &ladder, 0.005).unwrap();
        assert!(est.value <= 1e-6, "meas2 at {t}: {}", est.value);
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "runtime {elapsed:?}");
    println!("acceptance 04 PASS four quantities equal 1 within 0.5%, meas2 <= 1e-6 ({elapsed:?})");
}

#[test]
fn acceptance_05_degree_detection() {
    let start = Instant::now();
    let h = MetricSpaceModel::heisenberg();
    let vertical = ParametricCurve::heisenberg_vertical((0.0, 1.0)).unwrap();
    let (k_hat, _) =
        curves::degree_estimate(&h, &vertical, 0.5, &ScaleLadder::default_for(&vertical)).unwrap();
    assert!((1.98..=2.02).contains(&k_hat), "vertical k_hat {k_hat}");

    let e = MetricSpaceModel::engel_default();
    let z_axis = ParametricCurve::engel_z_axis((0.0, 1.0)).unwrap();
    let (k_z, _) =
        curves::degree_estimate(&e, &z_axis, 0.5, &ScaleLadder::default_for(&z_axis)).unwrap();
    assert!((1.98..=2.02).contains(&k_z), "engel z-axis k_hat {k_z}");

    let w_axis = ParametricCurve::engel_w_axis((0.0, 1.0)).unwrap();
    let (k_w, _) =
        curves::degree_estimate(&e, &w_axis, 0.5, &ScaleLadder::default_for(&w_axis)).unwrap();
    assert!((2.9..=3.1).contains(&k_w), "engel w-axis k_hat {k_w}");

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 600.0, "runtime {elapsed:?}");
    println!(
        "acceptance 05 PASS k_hat vertical {k_hat:.4}, engel z {k_z:.4}, engel w {k_w:.4} ({elapsed:?})"
    );
}

#[test]
fn acceptance_06_engel_weierstrass() {
    let start = Instant::now();
    // alpha beta with xi = log(1/alpha)/log(beta) > 2/3 and alpha beta > 1
    let (alpha, beta) = (0.26, 4.0);
    let params = WeierstrassParams::with_tail_tolerance(alpha, beta, 1e-12).unwrap();
    let xi = params.xi();
    assert!(xi > 2.0 / 3.0 && alpha * beta > 1.0);

    let space = MetricSpaceModel::engel_default();
    let curve = ParametricCurve::engel_weierstrass(
        params.clone(),
        LinearPhi { c0: 0.0, c1: 1.0 },
        (0.0, 1.0),
    )
    .unwrap();
    let grid = curves::uniform_grid(0.0, 1.0, 16);
    let ladder = ScaleLadder::deep_for(&curve, 28);
    let report = curves::mc1k_check(&space, &curve, 3.0, &grid, 0.15, &ladder).unwrap();
    assert!(report.passed, "offending: {:?}", report.offending_times);
    let pmax = report.profile.iter().cloned().fold(f64::MIN, f64::max);
    let pmin = report.profile.iter().cloned().fold(f64::MAX, f64::min);
    let band = 0.15 + 3.0 * report.gap_rel;
    assert!(
        (pmax - pmin) / pmax <= band,
        "profile spread {} above {band}",
        (pmax - pmin) / pmax
    );

    // Holder bound |W(t+h) - W(t)| <= C |h|^xi: C fitted on a dense sweep,
    // then never exceeded on fresh random pairs
    let mut fitted: f64 = 0.0;
    for i in 0..2000 {
        let t = 2.0 * i as f64 / 2000.0;
        for j in 0..20 {
            let h = 0.5 * 0.5_f64.powi(j);
            let ratio = (params.eval(t + h) - params.eval(t)).abs() / h.powf(xi);
            fitted = fitted.max(ratio);
        }
    }
    let c = 1.05 * fitted;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..10_000 {
        let t = rng.gen_range(0.0..2.0);
        let h = 10f64.powf(rng.gen_range(-9.0..-0.31));
        let lhs = (params.eval(t + h) - params.eval(t)).abs();
        assert!(
            lhs <= c * h.powf(xi),
            "Holder bound violated at t = {t}, h = {h}"
        );
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 900.0, "runtime {elapsed:?}");
    println!(
        "acceptance 06 PASS mc1k(k=3) profile in [{pmin:.2}, {pmax:.2}] ({:.1}% spread), Holder C {c:.2} holds on 1e4 pairs ({elapsed:?})",
        100.0 * (pmax - pmin) / pmax
    );
}

#[test]
fn acceptance_07_density_profiles() {
    let start = Instant::now();
    let space = MetricSpaceModel::heisenberg();
    let curve = ParametricCurve::heisenberg_vertical((0.0, 1.0)).unwrap();
    let opts = EstimatorOptions::default();
    let interior =
        measures::density_profile(&space, &curve, 2.0, 0.5, &[0.2, 0.1, 0.05], &opts).unwrap();
    assert_eq!(interior.side, measures::DensitySide::Interior);
    for ratio in &interior.ratios[interior.ratios.len() - 2..] {
        assert!((ratio - 1.0).abs() <= 0.05, "interior ratio {ratio}");
    }
    let endpoint =
        measures::density_profile(&space, &curve, 2.0, 0.0, &[0.2, 0.1, 0.05], &opts).unwrap();
    assert_eq!(endpoint.side, measures::DensitySide::LeftEndpoint);
    for ratio in &endpoint.ratios[endpoint.ratios.len() - 2..] {
        assert!((ratio - 0.5).abs() <= 0.05, "endpoint ratio {ratio}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "runtime {elapsed:?}");
    println!(
        "acceptance 07 PASS interior ratios {:?} -> 1, endpoint ratios {:?} -> 1/2 under side=left_endpoint ({elapsed:?})",
        interior.ratios, endpoint.ratios
    );
}

#[test]
fn acceptance_08_sandwiches_on_acceptance_curves() {
    let start = Instant::now();
    let heis = MetricSpaceModel::heisenberg();
    let eucl = MetricSpaceModel::euclidean(2).unwrap();
    let engel = MetricSpaceModel::engel_default();
    let cases: Vec<(&MetricSpaceModel, ParametricCurve, f64, Vec<f64>)> = vec![
        (
            &heis,
            ParametricCurve::heisenberg_vertical((0.0, 1.0)).unwrap(),
            2.0,
            vec![0.4, 0.2, 0.1],
        ),
        (
            &eucl,
            ParametricCurve::euclidean_segment(vec![1.0, 0.0], (0.0, 1.0)).unwrap(),
            1.0,
            vec![0.3, 0.15, 0.075],
        ),
        (
            &engel,
            ParametricCurve::engel_z_axis((0.0, 1.0)).unwrap(),
            2.0,
            vec![0.8, 0.4, 0.2],
        ),
    ];
    for (space, curve, k, schedule) in &cases {
        let (a, b) = curve.domain();
        let t_len = b - a;
        let hb = measures::holder_bounds_estimate(space, curve, *k, 0.25 * t_len).unwrap();
        assert!(!hb.degenerate);
        let lo_ref = hb.delta_minus.powf(*k) * t_len;
        let hi_ref = hb.delta_plus.powf(*k) * t_len;
        let spherical = measures::spherical_upper(space, curve, *k, *schedule.last().unwrap())
            .unwrap()
            .cost;
        for eps in schedule {
            let tol = 0.02 * hi_ref + 2.0 * space.gap_scale() * hi_ref;
            let cert = measures::interpolation_complexity(space, curve, *eps).unwrap();
            let chain_scaled = eps.powf(*k) * cert.hops() as f64;
            assert!(
                chain_scaled >= lo_ref - tol && chain_scaled <= hi_ref + eps.powf(*k) + tol,
                "chain sandwich at eps {eps}: {chain_scaled} outside [{lo_ref}, {}]",
                hi_ref + eps.powf(*k) + tol
            );

            let net = measures::metric_entropy(space, curve, *eps).unwrap();
            let ent_scaled = eps.powf(*k) * net.count as f64;
            let ent_lo = spherical / 2f64.powf(*k) - tol;
            let ent_hi = spherical / 2.0 + eps.powf(*k) + tol;
            assert!(
                ent_scaled >= ent_lo && ent_scaled <= ent_hi,
                "entropy sandwich at eps {eps}: {ent_scaled} outside [{ent_lo}, {ent_hi}]"
            );

            let (h, s) = measures::covers(space, curve, *k, *eps).unwrap();
            assert!(
                h.cost <= s.cost + tol,
                "cover ordering at eps {eps}: {} > {}",
                h.cost,
                s.cost
            );
            assert!(
                s.cost <= 2f64.powf(*k) * h.cost + tol,
                "cover ordering at eps {eps}: {} > 2^k {}",
                s.cost,
                h.cost
            );
        }
    }
    let elapsed = start.elapsed();
    println!(
        "acceptance 08 PASS chain, entropy and cover sandwiches on {} curves x 3 scales ({elapsed:?})",
        cases.len()
    );
}

#[test]
fn acceptance_09_rectifiability_density_bounds() {
    let start = Instant::now();
    let space = MetricSpaceModel::heisenberg();
    let tilted = ParametricCurve::coordinate_polynomials(
        cc_measure::spaces::SpaceKind::Heisenberg,
        vec![vec![0.0, 1.0], vec![0.0], vec![0.0, 1.0]],
        (-1.0, 1.0),
    )
    .unwrap();
    let set = rect::RectifiableSet::new(
        &space,
        2.0,
        vec![
            rect::RectPiece {
                curve: ParametricCurve::heisenberg_vertical((-1.0, 1.0)).unwrap(),
                subsets: vec![(-1.0, -0.05), (0.05, 1.0)],
            },
            rect::RectPiece {
                curve: tilted,
                subsets: vec![(-1.0, -0.05), (0.05, 1.0)],
            },
        ],
        &EstimatorOptions::default(),
    )
    .unwrap();
    let report = rect::density_bounds_check(
        &space,
        &set,
        32,
        &[0.4, 0.2, 0.1, 0.04],
        0.05,
        9,
        &EstimatorOptions::default(),
    )
    .unwrap();
    assert_eq!(report.samples.len(), 64);
    assert!(report.verdict);
    for s in &report.samples {
        assert!(
            s.lower >= 2.0 * 0.95 && s.upper <= 4.0 * 1.05,
            "sample out of bounds: {s:?}"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "runtime {elapsed:?}");
    println!(
        "acceptance 09 PASS all 64 sampled densities within [1.9, 4.2] ({elapsed:?})"
    );
}

#[test]
fn acceptance_10_oracles() {
    let start = Instant::now();
    // grid oracle vs greedy chains on the acceptance curves
    let heis = MetricSpaceModel::heisenberg();
    let vertical = ParametricCurve::heisenberg_vertical((0.0, 1.0)).unwrap();
    let eucl = MetricSpaceModel::euclidean(1).unwrap();
    let segment = ParametricCurve::euclidean_segment(vec![1.0], (0.0, 1.0)).unwrap();
    let engel = MetricSpaceModel::engel_default();
    let z_axis = ParametricCurve::engel_z_axis((0.0, 1.0)).unwrap();
    for (space, curve, eps, grid) in [
        (&heis, &vertical, 0.9, 4_000usize),
        (&heis, &vertical, 0.5, 40_000),
        (&eucl, &segment, 0.3, 10_000),
        (&eucl, &segment, 0.11, 40_000),
        (&engel, &z_axis, 1.5, 8_000),
    ] {
        let greedy = measures::interpolation_complexity(space, curve, eps)
            .unwrap()
            .count;
        let dp = measures::interpolation_complexity_bruteforce(space, curve, eps, grid).unwrap();
        assert!(
            dp <= greedy && greedy <= dp + 1,
            "eps {eps}: dp {dp} vs greedy {greedy}"
        );
    }

    // closed-form Heisenberg distance vs the control-discretization solver
    let cfg = SolverConfig {
        nodes: 200,
        restarts: 6,
        max_iterations: 2400,
        tolerance: 1e-6,
        ..SolverConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let targets: Vec<[f64; 3]> = (0..50)
        .map(|_| loop {
            let t: [f64; 3] = [
                rng.gen_range(-1.5..1.5),
                rng.gen_range(-1.5..1.5),
                rng.gen_range(-1.0..1.0),
            ];
            if t[0].hypot(t[1]).max(t[2].abs().sqrt()) > 0.3 {
                break t;
            }
        })
        .collect();
    let worst = targets
        .par_iter()
        .enumerate()
        .map(|(i, target)| {
            let out =
                transcription::minimize(&HeisenbergSystem, target, &cfg, None, 1000 + i as u64)
                    .unwrap();
            // leftover bridge: straight legs plus a commutator loop of cost
            // 4 sqrt|zeta|, with sub-precision residues snapped away
            let mut endpoint = [0.0_f64; 3];
            let h = 1.0 / out.controls.len() as f64;
            for u in &out.controls {
                use cc_measure::spaces::transcription::HorizontalSystem;
                HeisenbergSystem.step(&mut endpoint, u[0], u[1], h);
            }
            let dx = target[0] - endpoint[0];
            let dy = target[1] - endpoint[1];
            let dz =
                target[2] - endpoint[2] - 0.5 * (endpoint[0] * dy - endpoint[1] * dx);
            let slack = dx.abs() + dy.abs() + 4.0 * dz.abs().sqrt();
            // control-discretization bias floor for piecewise-constant fields
            let gap = out.spread + out.refinement_delta + slack + 1e-4 * out.value;
            let exact = cc_measure::spaces::heisenberg::distance_origin(
                target[0], target[1], target[2],
            );
            assert!(
                out.value + 1e-9 >= exact,
                "oracle bound {} below exact {exact}",
                out.value
            );
            assert!(
                out.value - exact <= gap,
                "oracle {} vs exact {exact}: difference above oracle gap {gap}",
                out.value
            );
            (out.value - exact) / exact
        })
        .reduce(|| 0.0, f64::max);

    let elapsed = start.elapsed();
    println!(
        "acceptance 10 PASS dp/greedy within one on 5 cases; 50 random Heisenberg targets match the transcription oracle (worst rel excess {worst:.2e}) ({elapsed:?})"
    );
}
