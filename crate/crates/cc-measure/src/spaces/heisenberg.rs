//! Exact Carnot-Caratheodory distance on the Heisenberg group.
//!
//! Unit-speed geodesics from the origin project to circular arcs in the
//! horizontal plane. An arc with curvature `c > 0` traversed through the
//! angle `phi` reaches chord length `r = (2/c) sin(phi/2)` while sweeping
//! height `z = (phi - sin phi) / (2 c^2)`, and has length `phi / c`.
//! Eliminating `c` shows that the ratio `z / r^2` determines the phase
//! through the strictly increasing function
//!
//! ```text
//! mu(phi) = (phi - sin phi) / (8 sin^2(phi/2)),   phi in (0, 2*pi),
//! ```
//!
//! after which the distance is `phi * r / (2 sin(phi/2))`. The limit cases
//! are the straight segment (`z = 0`, distance `r`) and the full circle
//! (`r = 0`, distance `2 sqrt(pi |z|)`), the latter being the isoperimetric
//! value that pins the vertical axis.

use std::f64::consts::PI;

/// Phase root-finding tolerance of the engine. Reported gaps are
/// `ROOT_TOLERANCE * max(1, value)`.
pub const ROOT_TOLERANCE: f64 = 1e-12;

/// `phi - sin(phi)` without cancellation for small arguments.
fn phi_minus_sin(phi: f64) -> f64 {
    if phi < 0.5 {
        let p2 = phi * phi;
        // phi^3/6 * (1 - phi^2/20 + phi^4/840 - phi^6/60480)
        phi * p2 / 6.0 * (1.0 - p2 / 20.0 + p2 * p2 / 840.0 - p2 * p2 * p2 / 60480.0)
    } else {
        phi - phi.sin()
    }
}

/// mu as a function of phi, valid on (0, 2*pi).
fn mu_phi(phi: f64) -> f64 {
    let s = (0.5 * phi).sin();
    phi_minus_sin(phi) / (8.0 * s * s)
}

/// mu as a function of psi = 2*pi - phi, well conditioned near the full
/// circle. sin(phi/2) = sin(psi/2) there, and phi - sin(phi) = 2*pi - psi +
/// sin(psi).
fn mu_psi(psi: f64) -> f64 {
    let s = (0.5 * psi).sin();
    (2.0 * PI - psi + psi.sin()) / (8.0 * s * s)
}

/// Solves mu(phi) = rho by bisection on the monotone branch.
///
/// Returns phi for rho <= mu(pi) and 2*pi - psi otherwise; in both regimes
/// the bracket shrinks below ROOT_TOLERANCE before returning.
fn solve_phase(rho: f64) -> f64 {
    let mu_at_pi = PI / 8.0;
    if rho <= mu_at_pi {
        let (mut lo, mut hi) = (0.0_f64, PI);
        for _ in 0..90 {
            let mid = 0.5 * (lo + hi);
            if mu_phi(mid) < rho {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < ROOT_TOLERANCE * 1e-3 {
                break;
            }
        }
        0.5 * (lo + hi)
    } else {
        // decreasing in psi
        let (mut lo, mut hi) = (1e-12_f64, PI);
        for _ in 0..90 {
            let mid = 0.5 * (lo + hi);
            if mu_psi(mid) > rho {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < ROOT_TOLERANCE * 1e-3 {
                break;
            }
        }
        2.0 * PI - 0.5 * (lo + hi)
    }
}

/// Distance from the origin to `(x, y, z)`.
pub fn distance_origin(x: f64, y: f64, z: f64) -> f64 {
    let r = x.hypot(y);
    let az = z.abs();
    if az == 0.0 {
        return r;
    }
    if r == 0.0 {
        return 2.0 * (PI * az).sqrt();
    }
    // Work at unit homogeneous scale for conditioning.
    let scale = r.max(az.sqrt());
    let ru = r / scale;
    let zu = az / (scale * scale);
    if ru < 1e-10 {
        // Indistinguishable from the axis at double precision.
        return scale * 2.0 * (PI * zu).sqrt();
    }
    let rho = zu / (ru * ru);
    let phi = solve_phase(rho);
    let half = 0.5 * phi;
    let chord_factor = if phi > PI {
        // sin(phi/2) via psi for accuracy near the full circle
        (0.5 * (2.0 * PI - phi)).sin()
    } else {
        half.sin()
    };
    scale * phi * ru / (2.0 * chord_factor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_anchor_is_two_root_pi() {
        let d = distance_origin(0.0, 0.0, 1.0);
        assert!((d - 2.0 * PI.sqrt()).abs() < 1e-12, "{d}");
    }

    #[test]
    fn axis_scaling_follows_homogeneity() {
        for z in [0.5, 1.0, 2.0, 10.0, 1e-6, 1e6] {
            let d = distance_origin(0.0, 0.0, z);
            assert!((d - 2.0 * (PI * z).sqrt()).abs() < 1e-9 * d.max(1.0));
        }
    }

    #[test]
    fn horizontal_segment_is_euclidean() {
        assert_eq!(distance_origin(1.0, 0.0, 0.0), 1.0);
        assert_eq!(distance_origin(3.0, 4.0, 0.0), 5.0);
    }

    #[test]
    fn symmetric_under_sign_flips_and_rotation() {
        let d0 = distance_origin(0.7, 0.3, 0.2);
        for d in [
            distance_origin(-0.7, -0.3, -0.2),
            distance_origin(0.3, 0.7, -0.2),
            distance_origin(0.7_f64.hypot(0.3), 0.0, 0.2),
        ] {
            assert!((d - d0).abs() < 1e-11, "{d} vs {d0}");
        }
    }

    #[test]
    fn continuous_across_phase_branches() {
        // rho = pi/8 is the branch switch; probe both sides
        let rho = PI / 8.0;
        let r = 1.0;
        let below = distance_origin(r, 0.0, (rho - 1e-9) * r * r);
        let above = distance_origin(r, 0.0, (rho + 1e-9) * r * r);
        assert!((below - above).abs() < 1e-7, "{below} vs {above}");
    }

    #[test]
    fn dominates_euclidean_norm_of_chord() {
        // any horizontal path projects onto the plane with the same length
        for (x, y, z) in [(1.0, 0.0, 0.3), (0.5, 0.5, 1.0), (2.0, -1.0, 0.1)] {
            let d = distance_origin(x, y, z);
            assert!(d >= x.hypot(y) - 1e-12);
        }
    }

    #[test]
    fn homogeneity_exact_in_formula() {
        for lam in [0.25, 0.5, 2.0, 4.0] {
            let d1 = distance_origin(0.4, -0.2, 0.15);
            let d2 = distance_origin(lam * 0.4, -lam * 0.2, lam * lam * 0.15);
            assert!((d2 - lam * d1).abs() < 1e-10 * d2.max(1.0));
        }
    }
}
