//! C ABI for the cc-measure library.
//!
//! Spaces and curves are opaque handles created and freed through paired
//! constructor/destructor calls; results come back through plain structs
//! and every fallible function returns a [`CcmStatus`]. All functions are
//! panic-safe: a Rust panic is reported as `CCM_STATUS_INTERNAL` instead of
//! unwinding across the boundary.

use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use cc_measure::curves::{
    self, LinearPhi, ParametricCurve, ScaleLadder, WeierstrassParams,
};
use cc_measure::error::Error;
use cc_measure::measures::{self, EstimatorOptions, VerifyOptions};
use cc_measure::spaces::{DistanceKind, MetricSpaceModel, Point, SolverConfig};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcmStatus {
    CcmStatusOk = 0,
    CcmStatusNullPointer = 1,
    CcmStatusInvalidInput = 2,
    CcmStatusDimensionMismatch = 3,
    CcmStatusSolverFailed = 4,
    CcmStatusNotConverged = 5,
    CcmStatusInternal = 6,
}

fn status_of(err: &Error) -> CcmStatus {
    match err {
        Error::DimensionMismatch { .. } => CcmStatus::CcmStatusDimensionMismatch,
        Error::InvalidInput(_) | Error::Config(_) => CcmStatus::CcmStatusInvalidInput,
        Error::SolverFailed { .. } => CcmStatus::CcmStatusSolverFailed,
        Error::NotConverged { .. } => CcmStatus::CcmStatusNotConverged,
        Error::Io(_) => CcmStatus::CcmStatusInternal,
    }
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn ccm_status_message(status: CcmStatus) -> *const c_char {
    let msg: &'static [u8] = match status {
        CcmStatus::CcmStatusOk => b"ok\0",
        CcmStatus::CcmStatusNullPointer => b"null pointer argument\0",
        CcmStatus::CcmStatusInvalidInput => b"invalid input\0",
        CcmStatus::CcmStatusDimensionMismatch => b"dimension mismatch\0",
        CcmStatus::CcmStatusSolverFailed => b"solver failed to converge\0",
        CcmStatus::CcmStatusNotConverged => b"estimate did not converge\0",
        CcmStatus::CcmStatusInternal => b"internal error\0",
    };
    msg.as_ptr() as *const c_char
}

/// Opaque space handle.
pub struct CcmSpace {
    inner: MetricSpaceModel,
}

/// Opaque curve handle.
pub struct CcmCurve {
    inner: ParametricCurve,
}

/// A distance value with its uncertainty; `is_exact` is 1 for exact
/// engines and 0 for certified upper bounds.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CcmDistance {
    pub value: f64,
    pub gap: f64,
    pub is_exact: u8,
}

/// A degree-k derivative estimate.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CcmMeas {
    pub value: f64,
    pub spread: f64,
    pub gap_rel: f64,
    pub converged: u8,
}

/// The four quantities compared by the verification harness.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CcmVerifyReport {
    pub length_k: f64,
    pub hausdorff_upper: f64,
    pub spherical_upper: f64,
    pub complexity: f64,
    pub verdict: u8,
}

fn boxed_space(space: MetricSpaceModel) -> *mut CcmSpace {
    Box::into_raw(Box::new(CcmSpace { inner: space }))
}

/// Euclidean space of dimension `n`; null when `n` is zero.
#[no_mangle]
pub extern "C" fn ccm_space_euclidean(n: usize) -> *mut CcmSpace {
    match MetricSpaceModel::euclidean(n) {
        Ok(s) => boxed_space(s),
        Err(_) => std::ptr::null_mut(),
    }
}

#[no_mangle]
pub extern "C" fn ccm_space_heisenberg() -> *mut CcmSpace {
    boxed_space(MetricSpaceModel::heisenberg())
}

/// Engel space with explicit solver settings; pass zeros for defaults.
/// Returns null when the configuration is invalid.
#[no_mangle]
pub extern "C" fn ccm_space_engel(
    nodes: usize,
    restarts: usize,
    penalty_weight: f64,
    tolerance: f64,
    max_iterations: usize,
    seed: u64,
) -> *mut CcmSpace {
    let d = SolverConfig::default();
    let cfg = SolverConfig {
        nodes: if nodes == 0 { d.nodes } else { nodes },
        restarts: if restarts == 0 { d.restarts } else { restarts },
        penalty_weight: if penalty_weight == 0.0 {
            d.penalty_weight
        } else {
            penalty_weight
        },
        tolerance: if tolerance == 0.0 { d.tolerance } else { tolerance },
        max_iterations: if max_iterations == 0 {
            d.max_iterations
        } else {
            max_iterations
        },
        seed,
    };
    match MetricSpaceModel::engel(cfg) {
        Ok(s) => boxed_space(s),
        Err(_) => std::ptr::null_mut(),
    }
}

/// Frees a space handle; null is ignored.
///
/// # Safety
/// `space` must be a pointer returned by one of the `ccm_space_*`
/// constructors that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn ccm_space_free(space: *mut CcmSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// Ambient dimension of the space, 0 for null.
///
/// # Safety
/// `space` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ccm_space_dim(space: *const CcmSpace) -> usize {
    if space.is_null() {
        return 0;
    }
    (*space).inner.dim()
}

/// Carnot-Caratheodory (or Euclidean) distance between coordinate arrays
/// `p` and `q` of length `len`.
///
/// # Safety
/// `space` must be a live handle; `p` and `q` must point to `len` doubles;
/// `out` must be a valid destination.
#[no_mangle]
pub unsafe extern "C" fn ccm_distance(
    space: *const CcmSpace,
    p: *const f64,
    q: *const f64,
    len: usize,
    out: *mut CcmDistance,
) -> CcmStatus {
    if space.is_null() || p.is_null() || q.is_null() || out.is_null() {
        return CcmStatus::CcmStatusNullPointer;
    }
    let space = &(*space).inner;
    let pp = Point::from_slice(std::slice::from_raw_parts(p, len));
    let qq = Point::from_slice(std::slice::from_raw_parts(q, len));
    match catch_unwind(AssertUnwindSafe(|| space.distance(&pp, &qq))) {
        Ok(Ok(d)) => {
            *out = CcmDistance {
                value: d.value,
                gap: d.gap_estimate,
                is_exact: (d.kind == DistanceKind::Exact) as u8,
            };
            CcmStatus::CcmStatusOk
        }
        Ok(Err(e)) => status_of(&e),
        Err(_) => CcmStatus::CcmStatusInternal,
    }
}

fn boxed_curve(curve: Result<ParametricCurve, Error>) -> *mut CcmCurve {
    match curve {
        Ok(c) => Box::into_raw(Box::new(CcmCurve { inner: c })),
        Err(_) => std::ptr::null_mut(),
    }
}

/// The vertical Heisenberg curve `t -> (0, 0, t)` on `[a, b]`.
#[no_mangle]
pub extern "C" fn ccm_curve_heisenberg_vertical(a: f64, b: f64) -> *mut CcmCurve {
    boxed_curve(ParametricCurve::heisenberg_vertical((a, b)))
}

#[no_mangle]
pub extern "C" fn ccm_curve_engel_z_axis(a: f64, b: f64) -> *mut CcmCurve {
    boxed_curve(ParametricCurve::engel_z_axis((a, b)))
}

#[no_mangle]
pub extern "C" fn ccm_curve_engel_w_axis(a: f64, b: f64) -> *mut CcmCurve {
    boxed_curve(ParametricCurve::engel_w_axis((a, b)))
}

/// Euclidean segment `t -> t v` with velocity array `v` of length `n`.
///
/// # Safety
/// `v` must point to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn ccm_curve_euclidean_segment(
    v: *const f64,
    n: usize,
    a: f64,
    b: f64,
) -> *mut CcmCurve {
    if v.is_null() || n == 0 {
        return std::ptr::null_mut();
    }
    let vel = std::slice::from_raw_parts(v, n).to_vec();
    boxed_curve(ParametricCurve::euclidean_segment(vel, (a, b)))
}

/// The Engel curve `(0, 0, W(t), phi_slope * t)` with a truncated
/// Weierstrass `W`; returns null unless the Holder exponent exceeds 2/3.
#[no_mangle]
pub extern "C" fn ccm_curve_engel_weierstrass(
    alpha: f64,
    beta: f64,
    phi_slope: f64,
    a: f64,
    b: f64,
) -> *mut CcmCurve {
    let params = match WeierstrassParams::with_tail_tolerance(alpha, beta, 1e-10) {
        Ok(p) => p,
        Err(_) => return std::ptr::null_mut(),
    };
    boxed_curve(ParametricCurve::engel_weierstrass(
        params,
        LinearPhi {
            c0: 0.0,
            c1: phi_slope,
        },
        (a, b),
    ))
}

/// Frees a curve handle; null is ignored.
///
/// # Safety
/// `curve` must be a pointer returned by a `ccm_curve_*` constructor that
/// has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn ccm_curve_free(curve: *mut CcmCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Degree-k derivative estimate at time `t` with the default scale ladder.
///
/// # Safety
/// `space` and `curve` must be live handles, `out` a valid destination.
#[no_mangle]
pub unsafe extern "C" fn ccm_meas_k(
    space: *const CcmSpace,
    curve: *const CcmCurve,
    t: f64,
    k: f64,
    out: *mut CcmMeas,
) -> CcmStatus {
    if space.is_null() || curve.is_null() || out.is_null() {
        return CcmStatus::CcmStatusNullPointer;
    }
    let space = &(*space).inner;
    let curve = &(*curve).inner;
    let ladder = ScaleLadder::default_for(curve);
    match catch_unwind(AssertUnwindSafe(|| {
        curves::meas_k_estimate(space, curve, t, k, &ladder, 0.02)
    })) {
        Ok(Ok(est)) => {
            *out = CcmMeas {
                value: est.value,
                spread: est.spread,
                gap_rel: est.gap_rel,
                converged: est.converged as u8,
            };
            CcmStatus::CcmStatusOk
        }
        Ok(Err(e)) => status_of(&e),
        Err(_) => CcmStatus::CcmStatusInternal,
    }
}

/// Log-log degree detector at time `t`; an infinite `k_hat` marks a
/// locally constant curve.
///
/// # Safety
/// `space` and `curve` must be live handles; outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn ccm_degree(
    space: *const CcmSpace,
    curve: *const CcmCurve,
    t: f64,
    k_hat: *mut f64,
    fit_residual: *mut f64,
) -> CcmStatus {
    if space.is_null() || curve.is_null() || k_hat.is_null() || fit_residual.is_null() {
        return CcmStatus::CcmStatusNullPointer;
    }
    let space = &(*space).inner;
    let curve = &(*curve).inner;
    let ladder = ScaleLadder::default_for(curve);
    match catch_unwind(AssertUnwindSafe(|| {
        curves::degree_estimate(space, curve, t, &ladder)
    })) {
        Ok(Ok((k, r))) => {
            *k_hat = k;
            *fit_residual = r;
            CcmStatus::CcmStatusOk
        }
        Ok(Err(e)) => status_of(&e),
        Err(_) => CcmStatus::CcmStatusInternal,
    }
}

/// k-length over a uniform quadrature grid of `grid_n` points.
///
/// # Safety
/// `space` and `curve` must be live handles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ccm_length_k(
    space: *const CcmSpace,
    curve: *const CcmCurve,
    k: f64,
    grid_n: usize,
    out: *mut f64,
) -> CcmStatus {
    if space.is_null() || curve.is_null() || out.is_null() {
        return CcmStatus::CcmStatusNullPointer;
    }
    let space = &(*space).inner;
    let curve = &(*curve).inner;
    let (a, b) = curve.domain();
    let grid = curves::uniform_grid(a, b, grid_n.max(3));
    match catch_unwind(AssertUnwindSafe(|| {
        measures::length_k(space, curve, k, &grid, &EstimatorOptions::default())
    })) {
        Ok(Ok(len)) => {
            *out = len.value;
            CcmStatus::CcmStatusOk
        }
        Ok(Err(e)) => status_of(&e),
        Err(_) => CcmStatus::CcmStatusInternal,
    }
}

/// Four-way verification over a decreasing epsilon schedule.
///
/// # Safety
/// `space` and `curve` must be live handles; `eps` must point to
/// `eps_len` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ccm_verify_main_theorem(
    space: *const CcmSpace,
    curve: *const CcmCurve,
    k: f64,
    eps: *const f64,
    eps_len: usize,
    out: *mut CcmVerifyReport,
) -> CcmStatus {
    if space.is_null() || curve.is_null() || eps.is_null() || out.is_null() {
        return CcmStatus::CcmStatusNullPointer;
    }
    let space = &(*space).inner;
    let curve = &(*curve).inner;
    let schedule = std::slice::from_raw_parts(eps, eps_len).to_vec();
    let opts = VerifyOptions {
        eps_schedule: schedule,
        ..VerifyOptions::default()
    };
    match catch_unwind(AssertUnwindSafe(|| {
        measures::verify_main_theorem(space, curve, k, &opts)
    })) {
        Ok(Ok(report)) => {
            *out = CcmVerifyReport {
                length_k: report.length_k,
                hausdorff_upper: report.hausdorff_upper,
                spherical_upper: report.spherical_upper,
                complexity: report.complexity_extrapolation,
                verdict: report.verdict as u8,
            };
            CcmStatus::CcmStatusOk
        }
        Ok(Err(e)) => status_of(&e),
        Err(_) => CcmStatus::CcmStatusInternal,
    }
}
