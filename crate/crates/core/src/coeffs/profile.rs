//! Arc-length normal form `ds² + a(s)⟨dφ, dφ⟩` of the warped metric.

use crate::coeffs::{RadialFunctions, R_MAX, R_MIN};
use crate::error::{Error, Result};
use crate::expr::Coef;
use crate::jet::Jet;
use crate::quad::Panel;

/// Number of ratio-2 subdivisions used to probe an improper end.
const MAX_SUBDIVISIONS: usize = 60;

#[derive(Debug, Clone)]
enum Source {
    Radial(RadialTable),
    /// `a(s)` supplied directly on `(lo, hi)`.
    Direct(Coef),
}

#[derive(Debug, Clone)]
struct RadialTable {
    rf: RadialFunctions,
    /// Panels sorted by radius, with `W` at each left edge.
    panels: Vec<(Panel, f64)>,
}

/// The map `W: r ↦ s = ∫₁^r √g₂` with its inverse, the warping function
/// `a(s) = g₁(W⁻¹(s))` and the limits `W₋`, `W₊` (possibly infinite).
#[derive(Debug, Clone)]
pub struct ArcProfile {
    source: Source,
    w_minus: f64,
    w_plus: f64,
    quad_tol: f64,
}

pub(crate) struct EndProbe {
    pub(crate) panels: Vec<Panel>,
    pub(crate) total: f64,
    pub(crate) finite: bool,
}

impl ArcProfile {
    pub fn from_radial(rf: RadialFunctions, quad_tol: f64) -> Result<Self> {
        if !(quad_tol > 0.0) {
            return Err(Error::InvalidArgument(format!("quad_tol = {quad_tol}")));
        }
        let (r_lo, r_hi) = rf.radius_domain();
        let density = |r: f64| rf.arc_density(r);
        let up = probe_end(1.0, r_hi, 2.0, quad_tol, &density)?;
        let down = probe_end(1.0, r_lo, 0.5, quad_tol, &density)?;

        let mut panels = Vec::with_capacity(up.panels.len() + down.panels.len());
        let mut w_right = 0.0;
        let mut lower = Vec::new();
        for p in down.panels {
            // panel [a, b] with b ≤ 1: W(a) = W(b) − ∫_a^b
            let w_left = w_right - p.total();
            w_right = w_left;
            lower.push((p, w_left));
        }
        lower.reverse();
        panels.extend(lower);
        let mut w_left = 0.0;
        for p in up.panels {
            let t = p.total();
            panels.push((p, w_left));
            w_left += t;
        }

        let w_minus = if down.finite { -down.total } else { f64::NEG_INFINITY };
        let w_plus = if up.finite { up.total } else { f64::INFINITY };
        Ok(Self {
            source: Source::Radial(RadialTable { rf, panels }),
            w_minus,
            w_plus,
            quad_tol,
        })
    }

    /// A profile given by `a(s)` on the open interval `(lo, hi)`.
    pub fn direct(a: Coef, lo: f64, hi: f64) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::InvalidArgument(format!("empty interval ({lo}, {hi})")));
        }
        Ok(Self {
            source: Source::Direct(a),
            w_minus: lo,
            w_plus: hi,
            quad_tol: 0.0,
        })
    }

    pub fn w_minus(&self) -> f64 {
        self.w_minus
    }

    pub fn w_plus(&self) -> f64 {
        self.w_plus
    }

    pub fn quad_tol(&self) -> f64 {
        self.quad_tol
    }

    pub fn radial(&self) -> Option<&RadialFunctions> {
        match &self.source {
            Source::Radial(t) => Some(&t.rf),
            Source::Direct(_) => None,
        }
    }

    /// Whether `a`, `a'` and `a''` are obtained without finite differences.
    pub fn is_analytic(&self) -> bool {
        match &self.source {
            Source::Radial(t) => t.rf.spec().is_analytic(),
            Source::Direct(a) => a.is_analytic(),
        }
    }

    pub fn contains(&self, s: f64) -> bool {
        s > self.w_minus && s < self.w_plus
    }

    fn table(&self) -> Result<&RadialTable> {
        match &self.source {
            Source::Radial(t) => Ok(t),
            Source::Direct(_) => Err(Error::InvalidArgument(
                "profile was given directly as a(s); it has no radial coordinate".into(),
            )),
        }
    }

    /// `s = W(r)`.
    pub fn w(&self, r: f64) -> Result<f64> {
        let t = self.table()?;
        t.rf.check_radius(r)?;
        let i = t.panels.partition_point(|(p, _)| p.b < r);
        let (panel, w_left) = t.panels.get(i).ok_or_else(|| {
            Error::Domain(format!("radius {r} beyond the resolved range"))
        })?;
        if r < panel.a {
            return Err(Error::Domain(format!("radius {r} below the resolved range")));
        }
        Ok(w_left + panel.partial(r, |x| t.rf.arc_density(x))?)
    }

    /// `r = W⁻¹(s)`.
    pub fn w_inv(&self, s: f64) -> Result<f64> {
        let t = self.table()?;
        if !(s >= self.w_minus && s <= self.w_plus) {
            return Err(Error::Domain(format!(
                "s = {s} outside ({}, {})",
                self.w_minus, self.w_plus
            )));
        }
        let i = t
            .panels
            .partition_point(|(p, w_left)| w_left + p.total() < s);
        let (panel, w_left) = t
            .panels
            .get(i)
            .ok_or_else(|| Error::Domain(format!("s = {s} beyond the resolved range")))?;
        let r = panel.invert(s - w_left, |x| t.rf.arc_density(x))?;
        t.rf.check_radius(r)?;
        Ok(r)
    }

    /// `(a, a', a'')` at `s`.
    pub fn a_jet(&self, s: f64) -> Result<Jet> {
        if !self.contains(s) {
            return Err(Error::Domain(format!(
                "s = {s} outside ({}, {})",
                self.w_minus, self.w_plus
            )));
        }
        match &self.source {
            Source::Direct(a) => {
                let j = a.eval_jet(Jet::variable(s));
                if !(j.v > 0.0) || !j.is_finite() {
                    return Err(Error::Domain(format!("a({s}) = {} is not positive", j.v)));
                }
                Ok(j)
            }
            Source::Radial(t) => {
                let r = self.w_inv(s)?;
                let g1 = t.rf.g1_jet(r)?;
                let g2 = t.rf.g2_jet(r)?;
                // dr/ds = g₂^{-1/2}
                let a1 = g1.d / g2.v.sqrt();
                let a2 = g1.dd / g2.v - 0.5 * g1.d * g2.d / (g2.v * g2.v);
                Ok(Jet::new(g1.v, a1, a2))
            }
        }
    }

    pub fn a(&self, s: f64) -> Result<f64> {
        self.a_jet(s).map(|j| j.v)
    }

    pub fn a_prime(&self, s: f64) -> Result<f64> {
        self.a_jet(s).map(|j| j.d)
    }

    pub fn a_second(&self, s: f64) -> Result<f64> {
        self.a_jet(s).map(|j| j.dd)
    }
}

/// Integrate `√g₂` from 1 toward `end` over ratio-`ratio` panels. A finite
/// `end` inside the guard range closes the interval; otherwise the integral
/// is declared finite once a panel increment falls below `tol` within
/// [`MAX_SUBDIVISIONS`] panels.
pub(crate) fn probe_end<F>(start: f64, end: f64, ratio: f64, tol: f64, density: &F) -> Result<EndProbe>
where
    F: Fn(f64) -> Result<f64>,
{
    let toward_zero = ratio < 1.0;
    let guard = if toward_zero { R_MIN } else { R_MAX };
    let bounded = if toward_zero { end > 0.0 } else { end.is_finite() };
    let mut panels = Vec::new();
    let mut total = 0.0;
    let mut edge = start;
    let mut converged = false;
    let reached = |x: f64, limit: f64| if toward_zero { x <= limit } else { x >= limit };

    if reached(start, end) {
        return Ok(EndProbe {
            panels,
            total,
            finite: true,
        });
    }
    for _ in 0..MAX_SUBDIVISIONS {
        let mut next = edge * ratio;
        if bounded && reached(next, end) {
            next = end;
        }
        let (a, b) = if toward_zero { (next, edge) } else { (edge, next) };
        let panel = Panel::resolve(a, b, tol, density)?;
        let inc = panel.total();
        if inc.is_nan() {
            return Err(Error::Quadrature {
                message: format!("non-finite integrand on [{a}, {b}]"),
                partial: vec![total],
            });
        }
        panels.push(panel);
        total += inc;
        edge = next;
        if !total.is_finite() {
            break;
        }
        if bounded && edge == end {
            return Ok(EndProbe {
                panels,
                total,
                finite: true,
            });
        }
        if inc.abs() <= tol * total.abs().max(1.0) {
            converged = true;
        }
        if converged && reached(edge, guard) {
            break;
        }
    }
    Ok(EndProbe {
        panels,
        total,
        finite: converged && total.is_finite(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{make_preset, Preset, DEFAULT_QUAD_TOL};
    use crate::expr::Expr;
    use approx::assert_relative_eq;

    fn profile(p: Preset) -> ArcProfile {
        make_preset(p)
            .unwrap()
            .radial_functions()
            .arc_profile(DEFAULT_QUAD_TOL)
            .unwrap()
    }

    #[test]
    fn closed_form_arc_maps() {
        let rec = profile(Preset::Reciprocal);
        let fr = profile(Preset::FisherRao);
        let rsq = profile(Preset::ReciprocalSq);
        let ext = profile(Preset::Extended);
        for &r in &[0.05, 0.3, 1.0, 2.7, 20.0] {
            assert_relative_eq!(rec.w(r).unwrap(), 2.0 * r.ln(), epsilon = 1e-12);
            assert_relative_eq!(fr.w(r).unwrap(), 2.0 * (r - 1.0), epsilon = 1e-12);
            assert_relative_eq!(rsq.w(r).unwrap(), 2.0 - 2.0 / r, epsilon = 1e-12);
            // ∫₁^r 2√(1+ρ²) = [ρ√(1+ρ²) + asinh ρ]₁^r
            let f = |x: f64| x * (1.0 + x * x).sqrt() + x.asinh();
            assert_relative_eq!(ext.w(r).unwrap(), f(r) - f(1.0), epsilon = 1e-11);
        }
        assert_relative_eq!(rec.w(std::f64::consts::E).unwrap(), 2.0, epsilon = 1e-14);
        assert_eq!(fr.w(1.0).unwrap(), 0.0);
    }

    #[test]
    fn improper_ends() {
        let rec = profile(Preset::Reciprocal);
        assert_eq!(rec.w_minus(), f64::NEG_INFINITY);
        assert_eq!(rec.w_plus(), f64::INFINITY);
        let fr = profile(Preset::FisherRao);
        assert_relative_eq!(fr.w_minus(), -2.0, epsilon = 1e-10);
        assert_eq!(fr.w_plus(), f64::INFINITY);
        let rsq = profile(Preset::ReciprocalSq);
        assert_eq!(rsq.w_minus(), f64::NEG_INFINITY);
        assert_relative_eq!(rsq.w_plus(), 2.0, epsilon = 1e-10);
    }

    #[test]
    fn inverse_round_trip() {
        for p in [Preset::Reciprocal, Preset::FisherRao, Preset::Extended, Preset::ReciprocalSq] {
            let prof = profile(p);
            for &r in &[0.01, 0.4, 1.0, 1.9, 33.0] {
                let s = prof.w(r).unwrap();
                assert_relative_eq!(prof.w_inv(s).unwrap(), r, max_relative = 1e-12);
            }
        }
        let fr = profile(Preset::FisherRao);
        assert_relative_eq!(fr.w_inv(-1.0).unwrap(), 0.5, max_relative = 1e-14);
    }

    #[test]
    fn warping_function_of_fisher_rao() {
        let fr = profile(Preset::FisherRao);
        for &s in &[-1.5, 0.0, 3.0] {
            let j = fr.a_jet(s).unwrap();
            assert_relative_eq!(j.v, (s + 2.0) * (s + 2.0), max_relative = 1e-12);
            assert_relative_eq!(j.d, 2.0 * (s + 2.0), max_relative = 1e-12);
            assert_relative_eq!(j.dd, 2.0, max_relative = 1e-10);
        }
        assert!(fr.a(-2.5).is_err());
    }

    #[test]
    fn sphere_band() {
        let sp = profile(Preset::SphereCompletion);
        assert_eq!(sp.w_minus(), 0.0);
        assert_relative_eq!(sp.w_plus(), std::f64::consts::PI, epsilon = 1e-12);
        for &s in &[0.1, 0.7, 1.5, 3.0] {
            let j = sp.a_jet(s).unwrap();
            assert_relative_eq!(j.v, s.sin().powi(2), epsilon = 1e-12);
            assert_relative_eq!(j.d, (2.0 * s).sin(), epsilon = 1e-11);
            assert_relative_eq!(j.dd, 2.0 * (2.0 * s).cos(), epsilon = 1e-9);
        }
    }

    #[test]
    fn direct_profile_has_no_radius() {
        let a = Coef::Expr(Expr::Exp(Box::new(Expr::monomial(-2.0, 1.0))));
        let p = ArcProfile::direct(a, f64::NEG_INFINITY, f64::INFINITY).unwrap();
        assert_relative_eq!(p.a(0.5).unwrap(), (-1.0f64).exp());
        assert!(p.w(1.0).is_err());
    }
}
