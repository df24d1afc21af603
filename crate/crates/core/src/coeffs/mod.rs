//! Metric coefficients `(C₁, C₂)` and the scalar functions derived from them.
//!
//! A coefficient spec determines the metric
//! `G_μ(α, β) = C₁(m) ∫ (α/μ)(β/μ) μ + C₂(m) ∫α ∫β` with `m = μ(M)`.
//! In polar coordinates on the half-density space it becomes
//! `g₁(r)⟨dφ, dφ⟩ + g₂(r) dr²` with
//!
//! ```text
//! g₁(r) = 4 C₁(r²) r²,     g₂(r) = 4 (C₂(r²) r² + C₁(r²)).
//! ```

pub(crate) mod profile;

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{BlackBox, Coef, Expr};
use crate::jet::Jet;

pub use profile::ArcProfile;

/// Radii outside this range are rejected by every evaluator.
pub const R_MIN: f64 = 1e-8;
pub const R_MAX: f64 = 1e8;

/// `g₁` below this threshold is treated as a degenerate sphere factor.
const DEGENERATE_G1: f64 = 1e-24;

pub const DEFAULT_QUAD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// `C₁ = 1/m, C₂ = 0`
    Reciprocal,
    /// `C₁ = 1, C₂ = 0`
    FisherRao,
    /// `C₁ = C₂ = 1`
    Extended,
    /// `C₁ = 1/m², C₂ = 0`
    ReciprocalSq,
    /// `C₁ = sin²(m−1)/(4m), C₂ = 1 − sin²(m−1)/(4m²)`
    SphereCompletion,
    /// `C₁ = K², C₂ = (1 − K²)/m`, giving `a(s) = K²s²` from the tip.
    Cone { k: f64 },
}

impl Preset {
    pub const NAMES: [&'static str; 6] = [
        "reciprocal",
        "fisher_rao",
        "extended",
        "reciprocal_sq",
        "sphere_completion",
        "cone",
    ];

    /// Parse `reciprocal`, `fisher_rao`, ..., `cone(0.5)` or `cone` with a
    /// separately supplied opening factor.
    pub fn from_name(name: &str, k: Option<f64>) -> Result<Self> {
        let name = name.trim();
        if let Some(rest) = name.strip_prefix("cone") {
            let k = match rest.trim() {
                "" => k.ok_or_else(|| Error::InvalidArgument("cone preset needs K".into()))?,
                arg => arg
                    .strip_prefix('(')
                    .and_then(|a| a.strip_suffix(')'))
                    .and_then(|a| a.trim().parse::<f64>().ok())
                    .ok_or_else(|| Error::UnknownPreset(name.to_string()))?,
            };
            return Ok(Preset::Cone { k });
        }
        match name {
            "reciprocal" => Ok(Preset::Reciprocal),
            "fisher_rao" => Ok(Preset::FisherRao),
            "extended" => Ok(Preset::Extended),
            "reciprocal_sq" => Ok(Preset::ReciprocalSq),
            "sphere_completion" => Ok(Preset::SphereCompletion),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::Reciprocal => write!(f, "reciprocal"),
            Preset::FisherRao => write!(f, "fisher_rao"),
            Preset::Extended => write!(f, "extended"),
            Preset::ReciprocalSq => write!(f, "reciprocal_sq"),
            Preset::SphereCompletion => write!(f, "sphere_completion"),
            Preset::Cone { k } => write!(f, "cone({k})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpecKind {
    Preset(Preset),
    Expression,
    BlackBox,
}

/// The coefficient pair `(C₁, C₂)` as functions of total mass.
///
/// `mass_domain` is the open interval of admissible total masses; it is
/// `(0, ∞)` except for constructions whose sphere factor vanishes at interior
/// masses, which are restricted to one band between consecutive zeros.
#[derive(Debug, Clone)]
pub struct CoefficientSpec {
    c1: Coef,
    c2: Coef,
    kind: SpecKind,
    mass_domain: (f64, f64),
}

impl CoefficientSpec {
    pub fn from_exprs(c1: Expr, c2: Expr) -> Self {
        Self {
            c1: Coef::Expr(c1),
            c2: Coef::Expr(c2),
            kind: SpecKind::Expression,
            mass_domain: (0.0, f64::INFINITY),
        }
    }

    pub fn from_fns(
        c1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        c2: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            c1: Coef::BlackBox(BlackBox::new("C1", c1)),
            c2: Coef::BlackBox(BlackBox::new("C2", c2)),
            kind: SpecKind::BlackBox,
            mass_domain: (0.0, f64::INFINITY),
        }
    }

    pub fn from_coefs(c1: Coef, c2: Coef) -> Self {
        let kind = if c1.is_analytic() && c2.is_analytic() {
            SpecKind::Expression
        } else {
            SpecKind::BlackBox
        };
        Self {
            c1,
            c2,
            kind,
            mass_domain: (0.0, f64::INFINITY),
        }
    }

    pub fn with_mass_domain(mut self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo >= 0.0 && hi > lo) {
            return Err(Error::InvalidArgument(format!("bad mass domain ({lo}, {hi})")));
        }
        if !(lo <= 1.0 && 1.0 <= hi) {
            return Err(Error::InvalidArgument(
                "mass domain must contain the reference mass 1".into(),
            ));
        }
        self.mass_domain = (lo, hi);
        Ok(self)
    }

    pub fn c1_coef(&self) -> &Coef {
        &self.c1
    }

    pub fn c2_coef(&self) -> &Coef {
        &self.c2
    }

    pub fn kind(&self) -> &SpecKind {
        &self.kind
    }

    pub fn preset(&self) -> Option<Preset> {
        match self.kind {
            SpecKind::Preset(p) => Some(p),
            _ => None,
        }
    }

    pub fn mass_domain(&self) -> (f64, f64) {
        self.mass_domain
    }

    pub fn is_analytic(&self) -> bool {
        self.c1.is_analytic() && self.c2.is_analytic()
    }

    pub fn c1(&self, m: f64) -> f64 {
        self.c1.eval(m)
    }

    pub fn c2(&self, m: f64) -> f64 {
        self.c2.eval(m)
    }

    pub fn c1_prime(&self, m: f64) -> f64 {
        self.c1.derivative(m)
    }

    pub fn c2_prime(&self, m: f64) -> f64 {
        self.c2.derivative(m)
    }

    /// `C₁(m)`, rejecting masses where the sphere factor degenerates.
    pub fn c1_checked(&self, m: f64) -> Result<f64> {
        let c1 = self.c1(m);
        if !(c1 > 0.0) || 4.0 * c1 * m < DEGENERATE_G1 {
            return Err(Error::Degenerate { mass: m, c1 });
        }
        Ok(c1)
    }

    pub fn radial_functions(&self) -> RadialFunctions {
        RadialFunctions { spec: self.clone() }
    }

    /// Positive-definiteness `C₁ > 0` and `C₂(m) > −C₁(m)/m` at each sample.
    pub fn validate_positive_definite(&self, m_samples: &[f64]) -> PositivityReport {
        let samples: Vec<_> = m_samples
            .iter()
            .map(|&m| {
                let c1 = self.c1(m);
                let c2 = self.c2(m);
                let nondegenerate = m > 0.0 && self.c1_checked(m).is_ok();
                PositivitySample {
                    m,
                    c1,
                    c2,
                    nondegenerate,
                    definite: nondegenerate && c2 > -c1 / m,
                }
            })
            .collect();
        let all_pass = samples.iter().all(|s| s.definite);
        PositivityReport { samples, all_pass }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositivitySample {
    pub m: f64,
    pub c1: f64,
    pub c2: f64,
    /// `C₁(m) > 0` away from the degeneracy threshold.
    pub nondegenerate: bool,
    pub definite: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositivityReport {
    pub samples: Vec<PositivitySample>,
    pub all_pass: bool,
}

fn sin2_shifted() -> Expr {
    // sin²(m − 1)
    Expr::sin2(Expr::add(vec![Expr::var(), Expr::c(-1.0)]))
}

/// Build the coefficient spec for a named preset.
pub fn make_preset(preset: Preset) -> Result<CoefficientSpec> {
    let (c1, c2) = match preset {
        Preset::Reciprocal => (Expr::monomial(1.0, -1.0), Expr::c(0.0)),
        Preset::FisherRao => (Expr::c(1.0), Expr::c(0.0)),
        Preset::Extended => (Expr::c(1.0), Expr::c(1.0)),
        Preset::ReciprocalSq => (Expr::monomial(1.0, -2.0), Expr::c(0.0)),
        Preset::SphereCompletion => {
            let c1 = Expr::div(sin2_shifted(), Expr::monomial(4.0, 1.0));
            let c2 = Expr::add(vec![
                Expr::c(1.0),
                Expr::Neg(Box::new(Expr::div(sin2_shifted(), Expr::monomial(4.0, 2.0)))),
            ]);
            let spec = CoefficientSpec {
                c1: c1.into(),
                c2: c2.into(),
                kind: SpecKind::Preset(preset),
                mass_domain: (0.0, f64::INFINITY),
            };
            // band between the zeros of sin²(m − 1) at m = 1 and m = 1 + π
            return spec.with_mass_domain(1.0, 1.0 + PI);
        }
        Preset::Cone { k } => {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::InvalidArgument(format!("cone factor K = {k} must be > 0")));
            }
            (Expr::c(k * k), Expr::monomial(1.0 - k * k, -1.0))
        }
    };
    Ok(CoefficientSpec {
        c1: c1.into(),
        c2: c2.into(),
        kind: SpecKind::Preset(preset),
        mass_domain: (0.0, f64::INFINITY),
    })
}

/// `g₁`, `g₂` and their derivatives as functions of the radius `r = ‖f‖`.
#[derive(Debug, Clone)]
pub struct RadialFunctions {
    spec: CoefficientSpec,
}

impl RadialFunctions {
    pub fn spec(&self) -> &CoefficientSpec {
        &self.spec
    }

    /// Radius interval `[√m_lo, √m_hi]` from the mass domain.
    pub fn radius_domain(&self) -> (f64, f64) {
        let (lo, hi) = self.spec.mass_domain;
        (lo.sqrt(), hi.sqrt())
    }

    pub fn check_radius(&self, r: f64) -> Result<()> {
        let (lo, hi) = self.radius_domain();
        if !(R_MIN..=R_MAX).contains(&r) || r < lo || r > hi {
            return Err(Error::Domain(format!(
                "radius {r} outside [{}, {}]",
                lo.max(R_MIN),
                hi.min(R_MAX)
            )));
        }
        Ok(())
    }

    fn mass_jet(r: f64) -> Jet {
        // m = r² as a jet in r
        Jet::new(r * r, 2.0 * r, 2.0)
    }

    /// Unchecked `g₁` jet.
    pub(crate) fn g1_jet_raw(&self, r: f64) -> Jet {
        let m = Self::mass_jet(r);
        self.spec.c1.eval_jet(m) * m * 4.0
    }

    /// Unchecked `g₂` jet.
    pub(crate) fn g2_jet_raw(&self, r: f64) -> Jet {
        let m = Self::mass_jet(r);
        (self.spec.c2.eval_jet(m) * m + self.spec.c1.eval_jet(m)) * 4.0
    }

    pub fn g1_jet(&self, r: f64) -> Result<Jet> {
        self.check_radius(r)?;
        self.spec.c1_checked(r * r)?;
        let j = self.g1_jet_raw(r);
        if !j.is_finite() {
            return Err(Error::Domain(format!("g1 not finite at r = {r}")));
        }
        Ok(j)
    }

    pub fn g2_jet(&self, r: f64) -> Result<Jet> {
        self.check_radius(r)?;
        let j = self.g2_jet_raw(r);
        if !(j.v > 0.0) || !j.is_finite() {
            return Err(Error::Domain(format!("g2({r}) = {} is not positive", j.v)));
        }
        Ok(j)
    }

    pub fn g1(&self, r: f64) -> Result<f64> {
        self.g1_jet(r).map(|j| j.v)
    }

    pub fn g2(&self, r: f64) -> Result<f64> {
        self.g2_jet(r).map(|j| j.v)
    }

    pub fn g1_prime(&self, r: f64) -> Result<f64> {
        self.g1_jet(r).map(|j| j.d)
    }

    pub fn g2_prime(&self, r: f64) -> Result<f64> {
        self.g2_jet(r).map(|j| j.d)
    }

    /// `√g₂(r)`, the arc-length density; the domain guard is not applied so
    /// improper integrals can be probed past it.
    pub(crate) fn arc_density(&self, r: f64) -> Result<f64> {
        let g2 = self.g2_jet_raw(r).v;
        if g2.is_nan() || g2 < 0.0 {
            return Err(Error::Domain(format!("g2({r}) = {g2} is negative")));
        }
        Ok(g2.sqrt())
    }

    pub fn arc_profile(&self, quad_tol: f64) -> Result<ArcProfile> {
        ArcProfile::from_radial(self.clone(), quad_tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn preset(p: Preset) -> CoefficientSpec {
        make_preset(p).unwrap()
    }

    #[test]
    fn preset_values() {
        let r = preset(Preset::Reciprocal);
        assert_eq!((r.c1(1.0), r.c2(1.0)), (1.0, 0.0));
        let e = preset(Preset::Extended);
        for m in [0.1, 1.0, 10.0] {
            assert!(e.c2(m) > -e.c1(m) / m);
        }
        assert!(matches!(
            Preset::from_name("hyperbolic", None),
            Err(Error::UnknownPreset(_))
        ));
        assert_eq!(Preset::from_name("cone(0.5)", None).unwrap(), Preset::Cone { k: 0.5 });
        assert!(make_preset(Preset::Cone { k: 0.0 }).is_err());
    }

    #[test]
    fn sphere_completion_degenerates_at_unit_mass() {
        let s = preset(Preset::SphereCompletion);
        assert_eq!(s.c1(1.0), 0.0);
        assert!(matches!(s.c1_checked(1.0), Err(Error::Degenerate { .. })));
        assert!(matches!(s.c1_checked(1.0 + 1e-13), Err(Error::Degenerate { .. })));
        assert!(s.c1_checked(1.5).is_ok());
        let report = s.validate_positive_definite(&[1.0]);
        assert!(!report.all_pass);
    }

    #[test]
    fn positivity_report() {
        let fr = preset(Preset::FisherRao);
        assert!(fr.validate_positive_definite(&[0.01, 1.0, 100.0]).all_pass);
        let bad = CoefficientSpec::from_exprs(Expr::c(1.0), Expr::monomial(-2.0, -1.0));
        let rep = bad.validate_positive_definite(&[1.0]);
        assert!(!rep.all_pass);
        assert!(rep.samples[0].nondegenerate);
        let ext = preset(Preset::Extended);
        assert!(ext.validate_positive_definite(&[0.1, 1.0, 10.0]).all_pass);
    }

    #[test]
    fn radial_functions_of_examples() {
        let rf = preset(Preset::FisherRao).radial_functions();
        for r in [0.3, 1.0, 2.5] {
            assert_relative_eq!(rf.g1(r).unwrap(), 4.0 * r * r, max_relative = 1e-15);
            assert_relative_eq!(rf.g2(r).unwrap(), 4.0, max_relative = 1e-15);
        }
        let rf = preset(Preset::Reciprocal).radial_functions();
        for r in [0.3, 1.0, 2.5] {
            assert_relative_eq!(rf.g1(r).unwrap(), 4.0, max_relative = 1e-15);
            assert_relative_eq!(rf.g2(r).unwrap(), 4.0 / (r * r), max_relative = 1e-15);
        }
        let rf = preset(Preset::Extended).radial_functions();
        for r in [0.3, 1.0, 2.5] {
            assert_relative_eq!(rf.g1(r).unwrap(), 4.0 * r * r, max_relative = 1e-15);
            assert_relative_eq!(rf.g2(r).unwrap(), 4.0 * r * r + 4.0, max_relative = 1e-15);
        }
        let rf = preset(Preset::ReciprocalSq).radial_functions();
        assert_relative_eq!(rf.g1(2.0).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(rf.g2(2.0).unwrap(), 0.25, max_relative = 1e-15);
    }

    #[test]
    fn radial_invariants_hold_for_random_expression() {
        let spec = CoefficientSpec::from_exprs(
            Expr::add(vec![Expr::c(0.5), Expr::monomial(0.3, -1.0)]),
            Expr::monomial(0.2, 1.0),
        );
        let rf = spec.radial_functions();
        for r in [0.2, 0.9, 3.0] {
            let m = r * r;
            assert_relative_eq!(rf.g1(r).unwrap(), 4.0 * spec.c1(m) * m, max_relative = 1e-12);
            assert_relative_eq!(
                rf.g2(r).unwrap(),
                4.0 * (spec.c2(m) * m + spec.c1(m)),
                max_relative = 1e-12
            );
            let h = 1e-5 * r;
            let fd = (rf.g1(r + h).unwrap() - rf.g1(r - h).unwrap()) / (2.0 * h);
            assert_relative_eq!(rf.g1_prime(r).unwrap(), fd, max_relative = 1e-8);
        }
    }

    #[test]
    fn domain_guard() {
        let rf = preset(Preset::FisherRao).radial_functions();
        assert!(rf.g1(1e-9).is_err());
        assert!(rf.g1(2e8).is_err());
        assert!(rf.g1(1e-8).is_ok());
    }
}
