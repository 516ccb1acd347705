use cc_measure::curves::{LinearPhi, ParametricCurve, WeierstrassParams, ScaleLadder, mc1k_check, uniform_grid};
use cc_measure::spaces::{MetricSpaceModel, SolverConfig};

fn main() {
    let e = MetricSpaceModel::engel(SolverConfig::default()).unwrap();
    for (alpha, beta, depth, rel_tol) in [
        (0.3, 4.0, 24usize, 0.05), (0.3, 4.0, 28, 0.05), (0.26, 4.0, 24, 0.05), (0.26, 4.0, 28, 0.05), (0.26, 4.0, 30, 0.08),
    ] {
        let params = WeierstrassParams::with_tail_tolerance(alpha, beta, 1e-12).unwrap();
        let xi = params.xi();
        let curve = ParametricCurve::engel_weierstrass(params, LinearPhi { c0: 0.0, c1: 1.0 }, (0.0, 1.0)).unwrap();
        let grid = uniform_grid(0.0, 1.0, 16);
        let ladder = ScaleLadder::deep_for(&curve, depth);
        let t0 = std::time::Instant::now();
        match mc1k_check(&e, &curve, 3.0, &grid, rel_tol, &ladder) {
            Ok(rep) => {
                let pmin = rep.profile.iter().cloned().fold(f64::MAX, f64::min);
                let pmax = rep.profile.iter().cloned().fold(f64::MIN, f64::max);
                println!(
                    "a {alpha} b {beta} xi {xi:.3} depth {depth} rtol {rel_tol}: passed {} profile [{pmin:.2}, {pmax:.2}] spread {:.1}% jump {:.3} bad {} ({:?})",
                    rep.passed, 100.0 * (pmax - pmin) / pmax, rep.max_jump_rel, rep.offending_times.len(), t0.elapsed()
                );
            }
            Err(err) => println!("a {alpha} b {beta} depth {depth}: ERR {err} ({:?})", t0.elapsed()),
        }
    }
}
