//! Geodesic initial- and boundary-value problems.
//!
//! The sphere component of every geodesic is a reparametrized great circle
//! `φ(t) = cos θ(t)·φ₀ + sin θ(t)·ψ̂₀`, so the flow reduces to the
//! two-dimensional warped metric `g(x)dx² + h(x)dθ²`, with `(g, h) = (g₂, g₁)`
//! in the radius `r` and `(1, a)` in arc length `s`:
//!
//! ```text
//! x_tt = (h'θ_t² − g'x_t²) / 2g        θ_tt = −(h'/h)·x_t·θ_t
//! ```
//!
//! `θ` is integrated as a state rather than recovered from the conserved
//! `A₀ = h·θ_t`, so the recorded drift of `A₀` is a genuine accuracy check.

use std::f64::consts::PI;
use std::io::{self, Write};

use crate::coeffs::{ArcProfile, CoefficientSpec, Preset, RadialFunctions, DEFAULT_QUAD_TOL};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::manifold::{l2_inner, orthogonal_unit, ScalarField, SpherePoint};
use crate::transforms::PolarPoint;

/// Start in arc-length coordinates when `|g₂'/g₂|` exceeds this at `r₀`.
pub const STIFF_RATIO: f64 = 1e3;
/// Tolerance on `⟨φ₀, ψ₀⟩` for initial data.
pub const INITIAL_TANGENCY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicInitial {
    pub p0: PolarPoint,
    pub r_t0: f64,
    /// Initial `φ_t`, orthogonal to `φ₀`.
    pub psi0: ScalarField,
}

impl GeodesicInitial {
    pub fn new(p0: PolarPoint, r_t0: f64, psi0: ScalarField) -> Result<Self> {
        let violation = l2_inner(p0.phi.field(), &psi0)?;
        if violation.abs() > INITIAL_TANGENCY_TOL * psi0.norm().max(1.0) {
            return Err(Error::Tangency { violation });
        }
        if !r_t0.is_finite() {
            return Err(Error::InvalidArgument(format!("r_t0 = {r_t0}")));
        }
        Ok(Self { p0, r_t0, psi0 })
    }

    /// Initial data `(φ₀, ψ₀ = speed·ψ̂)` with `ψ̂ ⟂ φ₀` chosen deterministically.
    pub fn in_plane(r0: f64, phi0: SpherePoint, r_t0: f64, speed: f64) -> Result<Self> {
        let psi = orthogonal_unit(&phi0)?.field().scale(speed);
        Self::new(PolarPoint::new(r0, phi0)?, r_t0, psi)
    }

    pub fn psi_norm(&self) -> f64 {
        self.psi0.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReducedState {
    pub s: f64,
    pub s_t: f64,
    pub theta: f64,
    pub theta_t: f64,
}

/// Orthonormal pair spanning the great circle of the path. `psi_hat` is
/// `None` for purely radial paths.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub phi0: SpherePoint,
    pub psi_hat: Option<SpherePoint>,
}

/// Maximum relative drift of the conserved quantities along a path.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InvariantDrift {
    /// `A₀ = a(s)·θ_t`.
    pub a0: f64,
    /// `½(s_t² + a(s)θ_t²)`.
    pub energy: f64,
    /// `s_t² + A₀²/a(s)` with `A₀` frozen at its initial value.
    pub first_integral: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicPath {
    pub times: Vec<f64>,
    pub states: Vec<ReducedState>,
    /// `r` at each sample, `NaN` for profiles without a radial coordinate.
    pub radii: Vec<f64>,
    /// `a(s)` at each sample.
    pub warp: Vec<f64>,
    /// Relative drift of `A₀` at each sample.
    pub a0_drift: Vec<f64>,
    pub frame: Option<Frame>,
    pub drift: InvariantDrift,
}

impl GeodesicPath {
    fn assemble(
        times: Vec<f64>,
        states: Vec<ReducedState>,
        radii: Vec<f64>,
        warp: Vec<f64>,
        frame: Option<Frame>,
    ) -> Self {
        let (drift, a0_drift) = drifts(&states, &warp);
        Self {
            times,
            states,
            radii,
            warp,
            a0_drift,
            frame,
            drift,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&ReducedState> {
        self.states.last()
    }

    /// `φ(t_k) = cos θ·φ₀ + sin θ·ψ̂₀`.
    pub fn phi_at(&self, k: usize) -> Option<ScalarField> {
        let frame = self.frame.as_ref()?;
        let th = self.states.get(k)?.theta;
        Some(match &frame.psi_hat {
            Some(psi) => frame.phi0.field().lin_comb(th.cos(), psi.field(), th.sin()).ok()?,
            None => frame.phi0.field().clone(),
        })
    }

    /// `f(t_k) = r·φ(t_k)`.
    pub fn field_at(&self, k: usize) -> Option<ScalarField> {
        let r = *self.radii.get(k)?;
        if r.is_nan() {
            return None;
        }
        Some(self.phi_at(k)?.scale(r))
    }

    /// Columns `t, s, r, theta, s_t, theta_t, A0_drift`, then `f_i` per grid
    /// point when `with_fields` is set and the path has a frame.
    pub fn write_csv<W: Write>(&self, mut out: W, with_fields: bool) -> io::Result<()> {
        let n_f = match (&self.frame, with_fields) {
            (Some(fr), true) => fr.phi0.grid().n_points(),
            _ => 0,
        };
        write!(out, "t,s,r,theta,s_t,theta_t,A0_drift")?;
        for i in 0..n_f {
            write!(out, ",f_{i}")?;
        }
        writeln!(out)?;
        for k in 0..self.len() {
            let st = &self.states[k];
            write!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.times[k], st.s, self.radii[k], st.theta, st.s_t, st.theta_t, self.a0_drift[k]
            )?;
            if n_f > 0 {
                match self.field_at(k) {
                    Some(f) => f.values().iter().try_for_each(|v| write!(out, ",{v:.16e}"))?,
                    None => (0..n_f).try_for_each(|_| write!(out, ",NaN"))?,
                }
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// Coordinates `(r cos θ, r sin θ)` in the frame `{φ₀, ψ̂₀}`.
    pub fn planar(&self, k: usize) -> (f64, f64) {
        let r = self.radii[k];
        let th = self.states[k].theta;
        (r * th.cos(), r * th.sin())
    }
}

fn drifts(states: &[ReducedState], warp: &[f64]) -> (InvariantDrift, Vec<f64>) {
    if states.is_empty() {
        return (InvariantDrift::default(), Vec::new());
    }
    let a0 = |k: usize| warp[k] * states[k].theta_t;
    let energy = |k: usize| 0.5 * (states[k].s_t.powi(2) + warp[k] * states[k].theta_t.powi(2));
    let a0_init = a0(0);
    let first_int = |k: usize| states[k].s_t.powi(2) + a0_init * a0_init / warp[k];
    let rel = |q: f64, q0: f64| {
        let d = (q - q0).abs();
        if q0 == 0.0 {
            d
        } else {
            d / q0.abs()
        }
    };
    let (e0, f0) = (energy(0), first_int(0));
    let mut out = InvariantDrift::default();
    let mut per = Vec::with_capacity(states.len());
    for k in 0..states.len() {
        let da = rel(a0(k), a0_init);
        per.push(da);
        out.a0 = out.a0.max(da);
        out.energy = out.energy.max(rel(energy(k), e0));
        out.first_integral = out.first_integral.max(rel(first_int(k), f0));
    }
    (out, per)
}

/// Time integrator for [`shoot_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Integrator {
    /// Classical fixed-step fourth-order Runge–Kutta.
    Rk4,
    /// Step-doubling RK4 with local error control at `tol`.
    Adaptive { tol: f64 },
}

/// Coordinate used for the reduced ODE.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    /// Radius, switching to arc length when the start is stiff.
    Auto,
    Radial,
    Arc,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootOptions {
    pub integrator: Integrator,
    pub chart: Chart,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self {
            integrator: Integrator::Rk4,
            chart: Chart::Auto,
        }
    }
}

enum Coords<'a> {
    Radial(&'a RadialFunctions),
    Arc,
}

struct Reduced<'a> {
    coords: Coords<'a>,
    profile: &'a ArcProfile,
}

type State = [f64; 4];

impl Reduced<'_> {
    /// `(g, h)` jets at `x`.
    fn metric(&self, x: f64) -> Result<(Jet, Jet)> {
        match self.coords {
            Coords::Radial(rf) => Ok((rf.g2_jet(x)?, rf.g1_jet(x)?)),
            Coords::Arc => Ok((Jet::constant(1.0), self.profile.a_jet(x)?)),
        }
    }

    fn rhs(&self, y: &State) -> Result<State> {
        let (g, h) = self.metric(y[0])?;
        let (xt, tht) = (y[1], y[3]);
        Ok([
            xt,
            (h.d * tht * tht - g.d * xt * xt) / (2.0 * g.v),
            tht,
            -(h.d / h.v) * xt * tht,
        ])
    }

    fn rk4(&self, y: &State, dt: f64) -> Result<State> {
        let add = |a: &State, k: &State, c: f64| -> State {
            [a[0] + c * k[0], a[1] + c * k[1], a[2] + c * k[2], a[3] + c * k[3]]
        };
        let k1 = self.rhs(y)?;
        let k2 = self.rhs(&add(y, &k1, 0.5 * dt))?;
        let k3 = self.rhs(&add(y, &k2, 0.5 * dt))?;
        let k4 = self.rhs(&add(y, &k3, dt))?;
        let mut out = *y;
        for i in 0..4 {
            out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if !out.iter().all(|v| v.is_finite()) {
            return Err(Error::Domain("non-finite state".into()));
        }
        Ok(out)
    }

    /// Reduced state, radius and warp for an ODE state.
    fn observe(&self, y: &State) -> Result<(ReducedState, f64, f64)> {
        let (g, h) = self.metric(y[0])?;
        let (s, s_t, r) = match self.coords {
            Coords::Radial(_) => (self.profile.w(y[0])?, g.v.sqrt() * y[1], y[0]),
            Coords::Arc => {
                let r = match self.profile.radial() {
                    Some(_) => self.profile.w_inv(y[0])?,
                    None => f64::NAN,
                };
                (y[0], y[1], r)
            }
        };
        let state = ReducedState {
            s,
            s_t,
            theta: y[2],
            theta_t: y[3],
        };
        Ok((state, r, h.v))
    }

    /// Estimated time at which the path leaves the domain, from the last
    /// admissible sample by linear extrapolation to the nearest finite end.
    fn exit_time(&self, t: f64, st: &ReducedState, r: f64, y: &State, dt: f64) -> f64 {
        let (lo, hi) = (self.profile.w_minus(), self.profile.w_plus());
        let mut est = None;
        if st.s_t < 0.0 && lo.is_finite() {
            est = Some((lo - st.s) / st.s_t);
        } else if st.s_t > 0.0 && hi.is_finite() {
            est = Some((hi - st.s) / st.s_t);
        } else if let (Coords::Radial(rf), false) = (&self.coords, r.is_nan()) {
            let (rlo, rhi) = rf.radius_domain();
            let (rlo, rhi) = (rlo.max(crate::coeffs::R_MIN), rhi.min(crate::coeffs::R_MAX));
            if y[1] < 0.0 {
                est = Some((rlo - r) / y[1]);
            } else if y[1] > 0.0 {
                est = Some((rhi - r) / y[1]);
            }
        }
        t + est.unwrap_or(dt).clamp(0.0, dt.abs())
    }
}

/// Collects samples as the integration proceeds.
struct Recorder {
    times: Vec<f64>,
    states: Vec<ReducedState>,
    radii: Vec<f64>,
    warp: Vec<f64>,
}

impl Recorder {
    fn new(cap: usize) -> Self {
        Self {
            times: Vec::with_capacity(cap),
            states: Vec::with_capacity(cap),
            radii: Vec::with_capacity(cap),
            warp: Vec::with_capacity(cap),
        }
    }

    fn push(&mut self, t: f64, obs: (ReducedState, f64, f64)) {
        self.times.push(t);
        self.states.push(obs.0);
        self.radii.push(obs.1);
        self.warp.push(obs.2);
    }

    fn finish(self, frame: Option<Frame>) -> GeodesicPath {
        GeodesicPath::assemble(self.times, self.states, self.radii, self.warp, frame)
    }
}

fn integrate(
    sys: &Reduced<'_>,
    y0: State,
    t_end: f64,
    n_steps: usize,
    integrator: Integrator,
    frame: Option<Frame>,
) -> Result<GeodesicPath> {
    if n_steps < 8 {
        return Err(Error::InvalidArgument(format!("n_steps = {n_steps} < 8")));
    }
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidArgument(format!("t_end = {t_end}")));
    }
    let mut rec = Recorder::new(n_steps + 1);
    rec.push(0.0, sys.observe(&y0)?);

    let boundary = |rec: Recorder, y: &State, t: f64, dt: f64| -> Error {
        let last = *rec.states.last().unwrap();
        let r = *rec.radii.last().unwrap();
        let time = sys.exit_time(t, &last, r, y, dt);
        Error::BoundaryHit {
            time,
            partial: Box::new(rec.finish(frame.clone())),
        }
    };

    let mut y = y0;
    match integrator {
        Integrator::Rk4 => {
            let dt = t_end / n_steps as f64;
            for k in 0..n_steps {
                let t = dt * k as f64;
                let next = sys.rk4(&y, dt).and_then(|n| sys.observe(&n).map(|o| (n, o)));
                match next {
                    Ok((n, obs)) => {
                        y = n;
                        let t1 = if k + 1 == n_steps { t_end } else { dt * (k + 1) as f64 };
                        rec.push(t1, obs);
                    }
                    Err(_) => return Err(boundary(rec, &y, t, dt)),
                }
            }
        }
        Integrator::Adaptive { tol } => {
            if !(tol > 0.0) {
                return Err(Error::InvalidArgument(format!("adaptive tol = {tol}")));
            }
            let mut t = 0.0;
            let mut h = t_end / n_steps as f64;
            let mut rejected = 0usize;
            while t < t_end {
                let step = h.min(t_end - t);
                let attempt = (|| -> Result<(State, f64)> {
                    let full = sys.rk4(&y, step)?;
                    let half = sys.rk4(&sys.rk4(&y, 0.5 * step)?, 0.5 * step)?;
                    let err = (0..4)
                        .map(|i| (half[i] - full[i]).abs() / (1.0 + half[i].abs()))
                        .fold(0.0, f64::max);
                    let mut out = half;
                    for i in 0..4 {
                        out[i] += (half[i] - full[i]) / 15.0;
                    }
                    Ok((out, err))
                })();
                let accepted = attempt.and_then(|(n, err)| {
                    if err > tol {
                        return Ok((None, err));
                    }
                    sys.observe(&n).map(|o| (Some((n, o)), err))
                });
                match accepted {
                    Ok((Some((n, obs)), err)) => {
                        y = n;
                        t = if step == t_end - t { t_end } else { t + step };
                        rec.push(t, obs);
                        h = step * (0.9 * (tol / err.max(1e-300)).powf(0.2)).clamp(0.2, 4.0);
                        rejected = 0;
                    }
                    Ok((None, err)) => {
                        h = step * (0.9 * (tol / err).powf(0.2)).clamp(0.1, 0.9);
                        rejected += 1;
                        if rejected > 200 {
                            return Err(Error::InvalidArgument(format!(
                                "adaptive step control stalled at t = {t}"
                            )));
                        }
                    }
                    Err(_) => {
                        h = 0.25 * step;
                        rejected += 1;
                        if rejected > 60 || h < 1e-14 * t_end {
                            return Err(boundary(rec, &y, t, step));
                        }
                    }
                }
            }
        }
    }
    Ok(rec.finish(frame))
}

/// Initial ODE state in radius coordinates and the spanning frame.
fn radial_start(init: &GeodesicInitial) -> Result<(State, Frame)> {
    let speed = init.psi_norm();
    let psi_hat = if speed > 0.0 {
        Some(SpherePoint::normalize(init.psi0.clone())?)
    } else {
        None
    };
    let frame = Frame {
        phi0: init.p0.phi.clone(),
        psi_hat,
    };
    Ok(([init.p0.r, init.r_t0, 0.0, speed], frame))
}

/// Integrate the geodesic with initial data `init` over `[0, t_end]`.
pub fn shoot(init: &GeodesicInitial, spec: &CoefficientSpec, t_end: f64, n_steps: usize) -> Result<GeodesicPath> {
    let profile = spec.radial_functions().arc_profile(DEFAULT_QUAD_TOL)?;
    shoot_with(init, &profile, t_end, n_steps, ShootOptions::default())
}

pub fn shoot_with(
    init: &GeodesicInitial,
    profile: &ArcProfile,
    t_end: f64,
    n_steps: usize,
    opts: ShootOptions,
) -> Result<GeodesicPath> {
    let rf = profile
        .radial()
        .ok_or_else(|| Error::InvalidArgument("shoot needs a radial profile; use shoot_arc".into()))?;
    let (y, frame) = radial_start(init)?;
    let arc = match opts.chart {
        Chart::Radial => false,
        Chart::Arc => true,
        Chart::Auto => {
            let g2 = rf.g2_jet(init.p0.r)?;
            (g2.d / g2.v).abs() > STIFF_RATIO
        }
    };
    if arc {
        let g2 = rf.g2(init.p0.r)?;
        let y = [profile.w(init.p0.r)?, g2.sqrt() * init.r_t0, 0.0, y[3]];
        let sys = Reduced {
            coords: Coords::Arc,
            profile,
        };
        integrate(&sys, y, t_end, n_steps, opts.integrator, Some(frame))
    } else {
        let sys = Reduced {
            coords: Coords::Radial(rf),
            profile,
        };
        integrate(&sys, y, t_end, n_steps, opts.integrator, Some(frame))
    }
}

/// Integrate the reduced system directly in arc-length coordinates.
pub fn shoot_arc(
    s0: f64,
    s_t0: f64,
    theta_t0: f64,
    profile: &ArcProfile,
    t_end: f64,
    n_steps: usize,
) -> Result<GeodesicPath> {
    shoot_arc_with(s0, s_t0, theta_t0, profile, t_end, n_steps, Integrator::Rk4)
}

pub fn shoot_arc_with(
    s0: f64,
    s_t0: f64,
    theta_t0: f64,
    profile: &ArcProfile,
    t_end: f64,
    n_steps: usize,
    integrator: Integrator,
) -> Result<GeodesicPath> {
    if !profile.contains(s0) {
        return Err(Error::Domain(format!(
            "s0 = {s0} outside ({}, {})",
            profile.w_minus(),
            profile.w_plus()
        )));
    }
    let sys = Reduced {
        coords: Coords::Arc,
        profile,
    };
    integrate(&sys, [s0, s_t0, 0.0, theta_t0], t_end, n_steps, integrator, None)
}

/// Exact solution with its radial velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    pub r: f64,
    pub r_t: f64,
    pub state: ReducedState,
}

/// Exact geodesics for the presets that have them.
///
/// * `reciprocal`: `r = r₀·exp((r_t0/r₀)t)`, `θ = ‖ψ₀‖t`.
/// * `fisher_rao`: the straight line `f₀ + t(r_t0·φ₀ + r₀ψ₀)` in polar form.
pub fn closed_form(preset: Preset, init: &GeodesicInitial, t: f64) -> Result<ClosedForm> {
    let (r0, rt0, w) = (init.p0.r, init.r_t0, init.psi_norm());
    match preset {
        Preset::Reciprocal => {
            let c = rt0 / r0;
            let r = r0 * (c * t).exp();
            Ok(ClosedForm {
                r,
                r_t: c * r,
                state: ReducedState {
                    s: 2.0 * r.ln(),
                    s_t: 2.0 * c,
                    theta: w * t,
                    theta_t: w,
                },
            })
        }
        Preset::FisherRao => {
            let x = r0 + t * rt0;
            let y = t * r0 * w;
            let r = x.hypot(y);
            let r_t = (x * rt0 + y * r0 * w) / r;
            Ok(ClosedForm {
                r,
                r_t,
                state: ReducedState {
                    s: 2.0 * (r - 1.0),
                    s_t: 2.0 * r_t,
                    theta: y.atan2(x),
                    theta_t: r0 * r0 * w / (r * r),
                },
            })
        }
        other => Err(Error::UnsupportedPreset(format!(
            "no closed-form geodesics for `{other}`"
        ))),
    }
}

// ---------------------------------------------------------------------------
// Boundary-value problem

/// Steps in `θ` per shooting trajectory.
const BVP_STEPS: usize = 2048;
/// Number of initial directions in the shooting fan.
pub const FAN_SIZE: usize = 32;
/// Root-finding iterations per bracket.
const BRACKET_ITERS: usize = 200;
/// Below this angle the endpoints share a ray and the radial segment is used.
const RADIAL_ANGLE: f64 = 1e-9;
/// Relative step change in `r` beyond which a shot is declared to blow up.
const BLOWUP_STEP: f64 = 0.5;

/// Result of [`connect`].
#[derive(Debug, Clone)]
pub struct Connection {
    /// Constant-speed path on `t ∈ [0, 1]`, so the speed equals `distance`.
    pub path: GeodesicPath,
    pub distance: f64,
    /// Shooting trajectories evaluated, over all starts.
    pub evaluations: usize,
    /// Final `|s(θ₁) − s₁|`.
    pub mismatch: f64,
}

/// Length of the comparison path: radial at `φ₀` from `s₀` to `s₁`, then the
/// great-circle arc at `s₁`.
pub fn two_segment_length(p0: &PolarPoint, p1: &PolarPoint, profile: &ArcProfile) -> Result<f64> {
    let s0 = profile.w(p0.r)?;
    let s1 = profile.w(p1.r)?;
    let (theta, _) = angle_and_frame(&p0.phi, &p1.phi)?;
    Ok((s1 - s0).abs() + profile.a(s1)?.sqrt() * theta)
}

/// Angle between `φ₀` and `φ₁` and the unit direction of the great circle
/// through them (deterministic when they are antipodal).
fn angle_and_frame(phi0: &SpherePoint, phi1: &SpherePoint) -> Result<(f64, Option<SpherePoint>)> {
    let c = l2_inner(phi0.field(), phi1.field())?;
    let perp = phi1.field().lin_comb(1.0, phi0.field(), -c)?;
    let sn = perp.norm();
    let theta = sn.atan2(c);
    if theta < RADIAL_ANGLE {
        return Ok((theta, None));
    }
    if sn < 1e-8 {
        return Ok((theta, Some(orthogonal_unit(phi0)?)));
    }
    Ok((theta, Some(SpherePoint::normalize(perp)?)))
}

/// Geodesic `s(θ)` as a graph over the angle, written in the radius:
/// `r'' = g₁'r'²/g₁ + g₁'/2g₂ − g₂'r'²/2g₂`, with length `L' = √(g₂r'² + g₁)`.
struct GraphShot<'a> {
    rf: &'a RadialFunctions,
    profile: &'a ArcProfile,
    s1: f64,
    r1: f64,
    theta1: f64,
}

enum ShotEnd {
    /// Reached `θ₁`; `s(θ₁) − s₁`.
    Hit(f64),
    /// Left the domain before `θ₁`, above (`+1`) or below (`−1`) the target.
    Escaped(f64),
}

impl ShotEnd {
    fn value(&self) -> f64 {
        match *self {
            ShotEnd::Hit(v) => v,
            ShotEnd::Escaped(sign) => sign * f64::INFINITY,
        }
    }
}

impl GraphShot<'_> {
    fn rhs(&self, y: &[f64; 3]) -> Result<[f64; 3]> {
        let g1 = self.rf.g1_jet(y[0])?;
        let g2 = self.rf.g2_jet(y[0])?;
        let rp2 = y[1] * y[1];
        let rpp = g1.d * rp2 / g1.v + g1.d / (2.0 * g2.v) - g2.d * rp2 / (2.0 * g2.v);
        Ok([y[1], rpp, (g2.v * rp2 + g1.v).sqrt()])
    }

    fn step(&self, y: &[f64; 3], h: f64) -> Result<[f64; 3]> {
        let add = |a: &[f64; 3], k: &[f64; 3], c: f64| [a[0] + c * k[0], a[1] + c * k[1], a[2] + c * k[2]];
        let k1 = self.rhs(y)?;
        let k2 = self.rhs(&add(y, &k1, 0.5 * h))?;
        let k3 = self.rhs(&add(y, &k2, 0.5 * h))?;
        let k4 = self.rhs(&add(y, &k3, h))?;
        let mut out = *y;
        for i in 0..3 {
            out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if (out[0] - y[0]).abs() > BLOWUP_STEP * y[0] || !out.iter().all(|v| v.is_finite()) {
            return Err(Error::Domain("shot blew up".into()));
        }
        self.rf.check_radius(out[0])?;
        Ok(out)
    }

    /// Shoot from `(r₀, r'₀)`; optionally keep every sample.
    fn run(&self, r0: f64, rp0: f64, mut keep: Option<&mut Vec<[f64; 3]>>) -> ShotEnd {
        let h = self.theta1 / BVP_STEPS as f64;
        let mut y = [r0, rp0, 0.0];
        if let Some(k) = keep.as_deref_mut() {
            k.push(y);
        }
        for _ in 0..BVP_STEPS {
            match self.step(&y, h) {
                Ok(n) => y = n,
                Err(_) => {
                    let dir = if y[1] != 0.0 { y[1].signum() } else { (y[0] - self.r1).signum() };
                    return ShotEnd::Escaped(dir);
                }
            }
            if let Some(k) = keep.as_deref_mut() {
                k.push(y);
            }
        }
        match self.profile.w(y[0]) {
            Ok(s) => ShotEnd::Hit(s - self.s1),
            Err(_) => ShotEnd::Escaped((y[0] - self.r1).signum()),
        }
    }
}

/// Minimal geodesic between two polar points, found by shooting in the
/// totally geodesic 2-plane through them.
pub fn connect(p0: &PolarPoint, p1: &PolarPoint, spec: &CoefficientSpec, tol: f64) -> Result<Connection> {
    let profile = spec.radial_functions().arc_profile(DEFAULT_QUAD_TOL)?;
    connect_with(p0, p1, &profile, tol, FAN_SIZE)
}

pub fn connect_with(
    p0: &PolarPoint,
    p1: &PolarPoint,
    profile: &ArcProfile,
    tol: f64,
    fan: usize,
) -> Result<Connection> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol = {tol}")));
    }
    if fan == 0 {
        return Err(Error::InvalidArgument("empty shooting fan".into()));
    }
    let rf = profile
        .radial()
        .ok_or_else(|| Error::InvalidArgument("connect needs a radial profile".into()))?;
    let s0 = profile.w(p0.r)?;
    let s1 = profile.w(p1.r)?;
    let (theta1, psi_hat) = angle_and_frame(&p0.phi, &p1.phi)?;

    let Some(psi_hat) = psi_hat else {
        return Ok(radial_connection(p0, profile, s0, s1));
    };
    let frame = Frame {
        phi0: p0.phi.clone(),
        psi_hat: Some(psi_hat),
    };

    let shot = GraphShot {
        rf,
        profile,
        s1,
        r1: p1.r,
        theta1,
    };
    // slope r' for direction angle β from the radial axis
    let a0 = rf.g1(p0.r)?;
    let g20 = rf.g2(p0.r)?;
    let slope = |beta: f64| (a0 / g20).sqrt() * beta.cos() / beta.sin();
    let target = 0.25 * tol;
    let mut evaluations = 0usize;
    let mut eval = |beta: f64| -> f64 {
        if beta <= 0.0 {
            return f64::INFINITY;
        }
        if beta >= PI {
            return f64::NEG_INFINITY;
        }
        evaluations += 1;
        shot.run(p0.r, slope(beta), None).value()
    };

    let mut betas = Vec::with_capacity(fan + 2);
    betas.push(0.0);
    betas.extend((0..fan).map(|i| PI * (i as f64 + 0.5) / fan as f64));
    betas.push(PI);
    let values: Vec<f64> = betas.iter().map(|&b| eval(b)).collect();

    let mut best_mismatch = f64::INFINITY;
    let mut best_beta = None;
    let mut candidates: Vec<(usize, f64, f64, f64)> = Vec::new();
    for i in 0..betas.len() - 1 {
        let (fa, fb) = (values[i], values[i + 1]);
        let (beta, f) = if fa.abs() <= target {
            (betas[i], fa)
        } else if fa.signum() == fb.signum() || fb.abs() <= target {
            continue;
        } else {
            refine(&mut eval, betas[i], fa, betas[i + 1], fb, target)
        };
        if f.abs() < best_mismatch {
            best_mismatch = f.abs();
            best_beta = Some(beta);
        }
        if f.abs() <= target {
            let mut samples = Vec::with_capacity(BVP_STEPS + 1);
            shot.run(p0.r, slope(beta), Some(&mut samples));
            let length = samples.last().map_or(f64::INFINITY, |y| y[2]);
            candidates.push((i, beta, length, f));
        }
    }

    let shortest = candidates
        .iter()
        .min_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)));
    match shortest {
        Some(&(_, beta, length, f)) => {
            let mut samples = Vec::with_capacity(BVP_STEPS + 1);
            shot.run(p0.r, slope(beta), Some(&mut samples));
            let path = graph_path(&samples, theta1, length, profile, rf, frame)?;
            Ok(Connection {
                path,
                distance: length,
                evaluations,
                mismatch: f.abs(),
            })
        }
        None => {
            let best = best_beta.and_then(|beta| {
                let mut samples = Vec::new();
                shot.run(p0.r, slope(beta), Some(&mut samples));
                let length = samples.last()?[2];
                graph_path(&samples, theta1, length, profile, rf, frame).ok().map(Box::new)
            });
            Err(Error::NoConnection { best_mismatch, best })
        }
    }
}

/// Illinois iteration on `[a, b]` with `F(a) > 0 > F(b)` (or the reverse);
/// infinite end values fall back to bisection.
fn refine(eval: &mut impl FnMut(f64) -> f64, mut a: f64, mut fa: f64, mut b: f64, mut fb: f64, target: f64) -> (f64, f64) {
    let mut best = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    let mut side = 0i8;
    for _ in 0..BRACKET_ITERS {
        let x = if fa.is_finite() && fb.is_finite() {
            let x = b - fb * (b - a) / (fb - fa);
            if x > a.min(b) && x < a.max(b) {
                x
            } else {
                0.5 * (a + b)
            }
        } else {
            0.5 * (a + b)
        };
        let fx = eval(x);
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx.abs() <= target || (b - a).abs() <= 4.0 * f64::EPSILON * x.abs() {
            return best;
        }
        if fx.signum() == fb.signum() {
            b = x;
            fb = fx;
            if side == -1 && fa.is_finite() {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = x;
            fa = fx;
            if side == 1 && fb.is_finite() {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    best
}

/// Turn `θ`-parametrized samples `(r, r', L)` into a constant-speed path on
/// `[0, 1]`.
fn graph_path(
    samples: &[[f64; 3]],
    theta1: f64,
    length: f64,
    profile: &ArcProfile,
    rf: &RadialFunctions,
    frame: Frame,
) -> Result<GeodesicPath> {
    let h = theta1 / (samples.len() - 1) as f64;
    let mut rec = Recorder::new(samples.len());
    for (k, y) in samples.iter().enumerate() {
        let g1 = rf.g1(y[0])?;
        let g2 = rf.g2(y[0])?;
        let dl = (g2 * y[1] * y[1] + g1).sqrt();
        let theta_t = length / dl;
        let state = ReducedState {
            s: profile.w(y[0])?,
            s_t: g2.sqrt() * y[1] * theta_t,
            theta: if k + 1 == samples.len() { theta1 } else { h * k as f64 },
            theta_t,
        };
        let t = if length > 0.0 { y[2] / length } else { 0.0 };
        rec.push(t, (state, y[0], g1));
    }
    Ok(rec.finish(Some(frame)))
}

fn radial_connection(p0: &PolarPoint, profile: &ArcProfile, s0: f64, s1: f64) -> Connection {
    const N: usize = 64;
    let mut rec = Recorder::new(N + 1);
    for k in 0..=N {
        let t = k as f64 / N as f64;
        let s = if k == N { s1 } else { s0 + t * (s1 - s0) };
        let r = profile.w_inv(s).unwrap_or(f64::NAN);
        let a = profile.a(s).unwrap_or(f64::NAN);
        let state = ReducedState {
            s,
            s_t: s1 - s0,
            theta: 0.0,
            theta_t: 0.0,
        };
        rec.push(t, (state, r, a));
    }
    let frame = Frame {
        phi0: p0.phi.clone(),
        psi_hat: None,
    };
    Connection {
        path: rec.finish(Some(frame)),
        distance: (s1 - s0).abs(),
        evaluations: 0,
        mismatch: 0.0,
    }
}

/// Largest covariant acceleration `‖∇_ċ ċ‖` over interior samples, from
/// finite differences of the reduced velocities.
pub fn levi_civita_residual(path: &GeodesicPath, profile: &ArcProfile) -> Result<f64> {
    let n = path.len();
    if n < 16 {
        return Err(Error::InvalidArgument(format!("path has {n} samples; need at least 16")));
    }
    let t = &path.times;
    let st = &path.states;
    let mut worst = 0.0f64;
    for k in 1..n - 1 {
        let (h0, h1) = (t[k] - t[k - 1], t[k + 1] - t[k]);
        let d = |f: &dyn Fn(&ReducedState) -> f64| {
            (h0 * h0 * f(&st[k + 1]) - h1 * h1 * f(&st[k - 1]) + (h1 * h1 - h0 * h0) * f(&st[k]))
                / (h0 * h1 * (h0 + h1))
        };
        let s_tt = d(&|x| x.s_t);
        let th_tt = d(&|x| x.theta_t);
        let a = profile.a_jet(st[k].s)?;
        let (s_t, th_t) = (st[k].s_t, st[k].theta_t);
        let acc_s = s_tt - 0.5 * a.d * th_t * th_t;
        let acc_th = th_tt + a.d / a.v * s_t * th_t;
        worst = worst.max((acc_s * acc_s + a.v * acc_th * acc_th).sqrt());
    }
    Ok(worst)
}
