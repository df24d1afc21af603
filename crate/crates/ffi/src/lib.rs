//! C ABI for `densgeo`.
//!
//! Every fallible call returns a [`DgStatus`]; on failure the message is kept
//! per thread and can be fetched with [`dg_last_error`]. Handles are opaque
//! and owned by the caller, who releases them with the matching `_free`.
//! Panics never cross the boundary: they are reported as
//! [`DgStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use densgeo::coeffs::{make_preset, ArcProfile, CoefficientSpec, Preset, DEFAULT_QUAD_TOL};
use densgeo::completeness::{classify_profile, cone_spec, CompletionHint};
use densgeo::curvature::sectional;
use densgeo::error::Error;
use densgeo::geodesics::{connect_with, shoot_with, GeodesicInitial, GeodesicPath, ShootOptions, FAN_SIZE};
use densgeo::manifold::{Grid, ScalarField, SpherePoint};
use densgeo::transforms::{polar, PolarPoint};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownPreset = 3,
    Domain = 4,
    Degenerate = 5,
    Quadrature = 6,
    Tangency = 7,
    /// The path left the domain; the partial path is still returned.
    BoundaryHit = 8,
    NoConnection = 9,
    EmptyProfile = 10,
    Panic = 11,
}

impl From<&Error> for DgStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Dimension { .. } | Error::GridMismatch | Error::InvalidGrid(_) | Error::InvalidArgument(_) => {
                DgStatus::InvalidArgument
            }
            Error::UnknownPreset(_) | Error::UnsupportedPreset(_) => DgStatus::UnknownPreset,
            Error::Domain(_) => DgStatus::Domain,
            Error::Degenerate { .. } => DgStatus::Degenerate,
            Error::Quadrature { .. } => DgStatus::Quadrature,
            Error::Tangency { .. } => DgStatus::Tangency,
            Error::BoundaryHit { .. } => DgStatus::BoundaryHit,
            Error::NoConnection { .. } => DgStatus::NoConnection,
            Error::EmptyProfile => DgStatus::EmptyProfile,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DgCompletionHint {
    None = 0,
    OnePointAtZero = 1,
    OnePointAtInfinity = 2,
    Both = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DgCompleteness {
    pub w_minus: f64,
    pub w_plus: f64,
    pub complete: bool,
    pub incomplete_toward_zero: bool,
    pub incomplete_toward_infinity: bool,
    pub completion_hint: DgCompletionHint,
}

/// One sample of a geodesic in reduced coordinates.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DgSample {
    pub t: f64,
    pub s: f64,
    /// `NaN` when the profile has no radial coordinate.
    pub r: f64,
    pub theta: f64,
    pub s_t: f64,
    pub theta_t: f64,
}

/// Maximum relative drift of the conserved quantities.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DgDrift {
    pub a0: f64,
    pub energy: f64,
    pub first_integral: f64,
}

/// Coefficient spec with its arc-length profile.
pub struct DgSpec {
    spec: CoefficientSpec,
    profile: ArcProfile,
}

pub struct DgPath {
    path: GeodesicPath,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg).unwrap_or_else(|e| {
        let mut bytes = e.into_vec();
        bytes.retain(|b| *b != 0);
        CString::new(bytes).expect("nul bytes removed")
    });
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: DgStatus, msg: impl Into<String>) -> DgStatus {
    set_error(msg.into());
    status
}

fn fail_with(e: &Error) -> DgStatus {
    fail(e.into(), e.to_string())
}

/// Run `f`, turning panics into [`DgStatus::Panic`].
fn guard(f: impl FnOnce() -> DgStatus) -> DgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == DgStatus::Ok {
                LAST_ERROR.with(|e| *e.borrow_mut() = None);
            }
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(DgStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the untruncated length without the NUL, or
/// 0 when there is no error.
///
/// # Safety
/// `buf` must be valid for `len` bytes or null.
#[no_mangle]
pub unsafe extern "C" fn dg_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match &*e.borrow() {
        None => {
            if !buf.is_null() && len > 0 {
                *buf = 0;
            }
            0
        }
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

fn build_spec(spec: CoefficientSpec) -> Result<Box<DgSpec>, Error> {
    let profile = spec.radial_functions().arc_profile(DEFAULT_QUAD_TOL)?;
    Ok(Box::new(DgSpec { spec, profile }))
}

/// Create a spec from a preset name (`reciprocal`, `fisher_rao`, `extended`,
/// `reciprocal_sq`, `sphere_completion`, `cone`). `k` is the cone opening
/// factor and is ignored by the other presets.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dg_spec_preset(name: *const c_char, k: f64, out: *mut *mut DgSpec) -> DgStatus {
    guard(|| {
        if name.is_null() || out.is_null() {
            return fail(DgStatus::NullPointer, "null argument");
        }
        *out = ptr::null_mut();
        let Ok(name) = CStr::from_ptr(name).to_str() else {
            return fail(DgStatus::InvalidArgument, "preset name is not UTF-8");
        };
        let made = Preset::from_name(name, Some(k)).and_then(|p| match p {
            Preset::Cone { k } => cone_spec(k).map(|c| c.spec),
            p => make_preset(p),
        });
        match made.and_then(build_spec) {
            Ok(b) => {
                *out = Box::into_raw(b);
                DgStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// # Safety
/// `spec` must come from `dg_spec_preset` and not be freed already; null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn dg_spec_free(spec: *mut DgSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Range `(W₋, W₊)` of the arc-length coordinate; infinite ends are `±INFINITY`.
///
/// # Safety
/// `spec` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn dg_spec_arc_range(spec: *const DgSpec, w_minus: *mut f64, w_plus: *mut f64) -> DgStatus {
    guard(|| {
        if spec.is_null() || w_minus.is_null() || w_plus.is_null() {
            return fail(DgStatus::NullPointer, "null argument");
        }
        *w_minus = (*spec).profile.w_minus();
        *w_plus = (*spec).profile.w_plus();
        DgStatus::Ok
    })
}

/// Warping function `a(s)`.
///
/// # Safety
/// `spec` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dg_spec_warp(spec: *const DgSpec, s: f64, out: *mut f64) -> DgStatus {
    guard(|| {
        if spec.is_null() || out.is_null() {
            return fail(DgStatus::NullPointer, "null argument");
        }
        match (*spec).profile.a(s) {
            Ok(a) => {
                *out = a;
                DgStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// The two sectional curvatures at arc length `s`.
///
/// # Safety
/// `spec` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn dg_sectional(
    spec: *const DgSpec,
    s: f64,
    sec_sphere: *mut f64,
    sec_mixed: *mut f64,
) -> DgStatus {
    guard(|| {
        if spec.is_null() || sec_sphere.is_null() || sec_mixed.is_null() {
            return fail(DgStatus::NullPointer, "null argument");
        }
        match sectional(&(*spec).profile, s) {
            Ok(c) => {
                *sec_sphere = c.sec_sphere;
                *sec_mixed = c.sec_mixed;
                DgStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// # Safety
/// `spec` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dg_classify(spec: *const DgSpec, out: *mut DgCompleteness) -> DgStatus {
    guard(|| {
        if spec.is_null() || out.is_null() {
            return fail(DgStatus::NullPointer, "null argument");
        }
        let s = &*spec;
        match classify_profile(&s.spec, &s.profile) {
            Ok(r) => {
                *out = DgCompleteness {
                    w_minus: r.w_minus,
                    w_plus: r.w_plus,
                    complete: r.complete,
                    incomplete_toward_zero: r.incomplete_toward_zero,
                    incomplete_toward_infinity: r.incomplete_toward_infinity,
                    completion_hint: match r.completion_hint {
                        CompletionHint::None => DgCompletionHint::None,
                        CompletionHint::OnePointAtZero => DgCompletionHint::OnePointAtZero,
                        CompletionHint::OnePointAtInfinity => DgCompletionHint::OnePointAtInfinity,
                        CompletionHint::Both => DgCompletionHint::Both,
                    },
                };
                DgStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

unsafe fn grid_from(n: usize, weights: *const f64) -> Result<std::sync::Arc<Grid>, Error> {
    if weights.is_null() {
        Grid::uniform(n)
    } else {
        Grid::from_unnormalized(slice::from_raw_parts(weights, n).to_vec())
    }
}

unsafe fn field_from(grid: &std::sync::Arc<Grid>, values: *const f64) -> Result<ScalarField, Error> {
    ScalarField::new(grid.clone(), slice::from_raw_parts(values, grid.n_points()).to_vec())
}

/// Shoot a geodesic from radius `r0` in direction `phi0` (values on an
/// `n`-point grid, normalized internally) with radial speed `r_t0` and
/// sphere speed `psi_norm` along a deterministic direction orthogonal to
/// `phi0`. `weights` may be null for the uniform grid.
///
/// On [`DgStatus::BoundaryHit`] `*out` still receives the partial path.
///
/// # Safety
/// `weights` (if non-null) and `phi0` must hold `n` values; `spec` must be a
/// live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dg_shoot(
    spec: *const DgSpec,
    n: usize,
    weights: *const f64,
    phi0: *const f64,
    r0: f64,
    r_t0: f64,
    psi_norm: f64,
    t_end: f64,
    n_steps: usize,
    out: *mut *mut DgPath,
) -> DgStatus {
    guard(|| {
        if spec.is_null() || phi0.is_null() || out.is_null() {
            return fail(DgStatus::NullPointer, "null argument");
        }
        *out = ptr::null_mut();
        let run = || -> Result<GeodesicPath, Error> {
            let grid = grid_from(n, weights)?;
            let phi = SpherePoint::normalize(field_from(&grid, phi0)?)?;
            let init = GeodesicInitial::in_plane(r0, phi, r_t0, psi_norm)?;
            shoot_with(&init, &(*spec).profile, t_end, n_steps, ShootOptions::default())
        };
        match run() {
            Ok(path) => {
                *out = Box::into_raw(Box::new(DgPath { path }));
                DgStatus::Ok
            }
            Err(Error::BoundaryHit { time, partial }) => {
                *out = Box::into_raw(Box::new(DgPath { path: *partial }));
                fail(DgStatus::BoundaryHit, format!("geodesic hit the domain boundary at t = {time}"))
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// Shortest geodesic found between the fields `f0` and `f1` (positive norm,
/// `n` values each). The path is parametrized on `[0, 1]` with constant
/// speed `*distance`.
///
/// # Safety
/// `weights` (if non-null), `f0` and `f1` must hold `n` values; `spec` must
/// be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn dg_connect(
    spec: *const DgSpec,
    n: usize,
    weights: *const f64,
    f0: *const f64,
    f1: *const f64,
    tol: f64,
    distance: *mut f64,
    out: *mut *mut DgPath,
) -> DgStatus {
    guard(|| {
        if spec.is_null() || f0.is_null() || f1.is_null() || distance.is_null() || out.is_null() {
            return fail(DgStatus::NullPointer, "null argument");
        }
        *out = ptr::null_mut();
        let run = || -> Result<(f64, GeodesicPath), Error> {
            let grid = grid_from(n, weights)?;
            let p0: PolarPoint = polar(&field_from(&grid, f0)?)?;
            let p1: PolarPoint = polar(&field_from(&grid, f1)?)?;
            let c = connect_with(&p0, &p1, &(*spec).profile, tol, FAN_SIZE)?;
            Ok((c.distance, c.path))
        };
        match run() {
            Ok((d, path)) => {
                *distance = d;
                *out = Box::into_raw(Box::new(DgPath { path }));
                DgStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// Number of samples; 0 for a null handle.
///
/// # Safety
/// `path` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn dg_path_len(path: *const DgPath) -> usize {
    if path.is_null() {
        0
    } else {
        (*path).path.len()
    }
}

/// # Safety
/// `path` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dg_path_sample(path: *const DgPath, k: usize, out: *mut DgSample) -> DgStatus {
    guard(|| {
        if path.is_null() || out.is_null() {
            return fail(DgStatus::NullPointer, "null argument");
        }
        let p = &(*path).path;
        if k >= p.len() {
            return fail(DgStatus::InvalidArgument, format!("sample {k} out of range (len {})", p.len()));
        }
        let st = p.states[k];
        *out = DgSample {
            t: p.times[k],
            s: st.s,
            r: p.radii[k],
            theta: st.theta,
            s_t: st.s_t,
            theta_t: st.theta_t,
        };
        DgStatus::Ok
    })
}

/// Field values `f(t_k)`, written to `out[0..n]`.
///
/// # Safety
/// `path` must be a live handle; `out` must hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn dg_path_field(path: *const DgPath, k: usize, out: *mut f64, n: usize) -> DgStatus {
    guard(|| {
        if path.is_null() || out.is_null() {
            return fail(DgStatus::NullPointer, "null argument");
        }
        let Some(f) = (*path).path.field_at(k) else {
            return fail(DgStatus::InvalidArgument, format!("no field for sample {k}"));
        };
        if f.values().len() != n {
            return fail(
                DgStatus::InvalidArgument,
                format!("buffer holds {n} values, field has {}", f.values().len()),
            );
        }
        ptr::copy_nonoverlapping(f.values().as_ptr(), out, n);
        DgStatus::Ok
    })
}

/// # Safety
/// `path` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dg_path_drift(path: *const DgPath, out: *mut DgDrift) -> DgStatus {
    guard(|| {
        if path.is_null() || out.is_null() {
            return fail(DgStatus::NullPointer, "null argument");
        }
        let d = (*path).path.drift;
        *out = DgDrift {
            a0: d.a0,
            energy: d.energy,
            first_integral: d.first_integral,
        };
        DgStatus::Ok
    })
}

/// # Safety
/// `path` must come from `dg_shoot`/`dg_connect` and not be freed already;
/// null is ignored.
#[no_mangle]
pub unsafe extern "C" fn dg_path_free(path: *mut DgPath) {
    if !path.is_null() {
        drop(Box::from_raw(path));
    }
}
