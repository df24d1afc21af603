//! Completeness of the warped metric and its one-point completions.
//!
//! The metric can only be geodesically complete if `(W₋, W₊) = ℝ`. With
//! `m = r²`, `W₊ = ∞` exactly when `∫₁^∞ √C₁(r²) dr` or `∫₁^∞ √C₂(r²) r dr`
//! diverges (similarly toward 0), which is checked independently of the
//! direct quadrature of `√g₂`.

use std::cell::Cell;
use std::f64::consts::PI;
use std::fmt;

use crate::coeffs::profile::probe_end;
use crate::coeffs::{make_preset, ArcProfile, CoefficientSpec, Preset, DEFAULT_QUAD_TOL, R_MAX, R_MIN};
use crate::error::{Error, Result};
use crate::expr::{BlackBox, Coef, End, Expr};
use crate::quad::gl;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompletionHint {
    None,
    /// One point added at the lower end of the domain (cone tip, pole).
    OnePointAtZero,
    /// One point added at the upper end.
    OnePointAtInfinity,
    Both,
}

/// The divergence criterion on `C₁`, `C₂` for one end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionEnd {
    /// `None` when the criterion does not apply (`C₂ < 0` somewhere).
    pub divergent: Option<bool>,
    /// Agrees with the direct quadrature of `W`; vacuously true when not
    /// applicable.
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletenessReport {
    pub w_minus: f64,
    pub w_plus: f64,
    pub complete: bool,
    pub incomplete_toward_zero: bool,
    pub incomplete_toward_infinity: bool,
    pub completion_hint: CompletionHint,
    pub criterion_zero: CriterionEnd,
    pub criterion_infinity: CriterionEnd,
    pub completion: CompletionReport,
}

impl CompletenessReport {
    pub fn criterion_agrees(&self) -> bool {
        self.criterion_zero.agrees && self.criterion_infinity.agrees
    }
}

pub fn classify(spec: &CoefficientSpec) -> Result<CompletenessReport> {
    let profile = spec.radial_functions().arc_profile(DEFAULT_QUAD_TOL)?;
    classify_profile(spec, &profile)
}

pub fn classify_profile(spec: &CoefficientSpec, profile: &ArcProfile) -> Result<CompletenessReport> {
    let (w_minus, w_plus) = (profile.w_minus(), profile.w_plus());
    let tol = profile.quad_tol();
    let criterion_zero = criterion(spec, End::Zero, tol, w_minus.is_infinite())?;
    let criterion_infinity = criterion(spec, End::Infinity, tol, w_plus.is_infinite())?;
    let completion = completion_check_profile(spec, profile);
    let completion_hint = match (
        completion.at_zero.verdict == EndVerdict::OnePoint,
        completion.at_infinity.verdict == EndVerdict::OnePoint,
    ) {
        (true, true) => CompletionHint::Both,
        (true, false) => CompletionHint::OnePointAtZero,
        (false, true) => CompletionHint::OnePointAtInfinity,
        (false, false) => CompletionHint::None,
    };
    Ok(CompletenessReport {
        w_minus,
        w_plus,
        complete: w_minus == f64::NEG_INFINITY && w_plus == f64::INFINITY,
        incomplete_toward_zero: w_minus.is_finite(),
        incomplete_toward_infinity: w_plus.is_finite(),
        completion_hint,
        criterion_zero,
        criterion_infinity,
        completion,
    })
}

/// Divergence of `∫√C₁(r²) dr` or `∫√C₂(r²) r dr` toward `end`.
fn criterion(spec: &CoefficientSpec, end: End, tol: f64, w_infinite: bool) -> Result<CriterionEnd> {
    let (lo, hi) = spec.radial_functions().radius_domain();
    let (limit, ratio) = match end {
        End::Zero => (lo, 0.5),
        End::Infinity => (hi, 2.0),
    };
    let negative = Cell::new(false);
    let c1_part = |r: f64| Ok(spec.c1(r * r).max(0.0).sqrt());
    let c2_part = |r: f64| {
        let c2 = spec.c2(r * r);
        if c2 < 0.0 {
            negative.set(true);
        }
        Ok((c2.max(0.0) * r * r).sqrt())
    };
    let a = probe_end(1.0, limit, ratio, tol, &c1_part)?;
    let b = probe_end(1.0, limit, ratio, tol, &c2_part)?;
    if negative.get() {
        return Ok(CriterionEnd {
            divergent: None,
            agrees: true,
        });
    }
    let divergent = !a.finite || !b.finite;
    Ok(CriterionEnd {
        divergent: Some(divergent),
        agrees: divergent == w_infinite,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndVerdict {
    /// `W` is infinite at this end; nothing to complete.
    NotNeeded,
    /// A smooth one-point completion exists.
    OnePoint,
    /// The end is incomplete and some condition fails.
    Fails,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub name: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndCheck {
    pub end: End,
    pub verdict: EndVerdict,
    pub conditions: Vec<Condition>,
}

impl EndCheck {
    /// Names of the conditions that fail.
    pub fn failing(&self) -> Vec<&str> {
        self.conditions.iter().filter(|c| !c.holds).map(|c| c.name.as_str()).collect()
    }

    fn from_conditions(end: End, conditions: Vec<Condition>) -> Self {
        let verdict = if conditions.iter().all(|c| c.holds) {
            EndVerdict::OnePoint
        } else {
            EndVerdict::Fails
        };
        Self {
            end,
            verdict,
            conditions,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionReport {
    pub at_zero: EndCheck,
    pub at_infinity: EndCheck,
}

pub fn completion_check(spec: &CoefficientSpec) -> Result<CompletionReport> {
    let profile = spec.radial_functions().arc_profile(DEFAULT_QUAD_TOL)?;
    Ok(completion_check_profile(spec, &profile))
}

fn cond(name: &str, holds: bool) -> Condition {
    Condition {
        name: name.to_string(),
        holds,
    }
}

fn completion_check_profile(spec: &CoefficientSpec, profile: &ArcProfile) -> CompletionReport {
    let (m_lo, m_hi) = spec.mass_domain();
    let at_zero = if profile.w_minus().is_infinite() {
        EndCheck {
            end: End::Zero,
            verdict: EndVerdict::NotNeeded,
            conditions: vec![cond("w_minus finite", false)],
        }
    } else if m_lo > 0.0 {
        EndCheck::from_conditions(End::Zero, pole_conditions(profile, profile.w_minus(), 1.0))
    } else {
        let c1 = spec.c1_coef().germ(End::Zero);
        let c2 = spec.c2_coef().germ(End::Zero);
        EndCheck::from_conditions(
            End::Zero,
            vec![
                cond("w_minus finite", true),
                cond("C1 extends smoothly to m = 0", c1.is_some()),
                cond("C2 extends smoothly to m = 0", c2.is_some()),
                cond("C1(0) > 0", c1.is_some_and(|v| v > 0.0)),
            ],
        )
    };
    let at_infinity = if profile.w_plus().is_infinite() {
        EndCheck {
            end: End::Infinity,
            verdict: EndVerdict::NotNeeded,
            conditions: vec![cond("w_plus finite", false)],
        }
    } else if m_hi.is_finite() {
        EndCheck::from_conditions(End::Infinity, pole_conditions(profile, profile.w_plus(), -1.0))
    } else {
        EndCheck::from_conditions(
            End::Infinity,
            vec![
                cond("w_plus finite", true),
                cond("C1 extends smoothly in 1/m", spec.c1_coef().germ(End::Infinity).is_some()),
                cond("C2 extends smoothly in 1/m", spec.c2_coef().germ(End::Infinity).is_some()),
            ],
        )
    };
    CompletionReport {
        at_zero,
        at_infinity,
    }
}

/// At a finite end `s*` of a mass band, a smooth pole needs `a → 0` and
/// `a'²/4a → 1` (the unit-speed closing of a round cap). `inward` is the
/// direction from `s*` into the domain.
fn pole_conditions(profile: &ArcProfile, end: f64, inward: f64) -> Vec<Condition> {
    let probe = |d: f64| profile.a_jet(end + inward * d).ok();
    let (near, nearer) = (probe(1e-3), probe(1e-4));
    let (vanishes, unit_slope) = match (near, nearer) {
        (Some(j1), Some(j2)) => {
            let q = |j: crate::jet::Jet| (j.d * j.d / (4.0 * j.v) - 1.0).abs();
            (j2.v < j1.v && j2.v < 1e-6, q(j2) <= q(j1) && q(j2) < 1e-6)
        }
        _ => (false, false),
    };
    vec![
        cond("end finite", true),
        cond("a(s) -> 0 at the end", vanishes),
        cond("a'(s)^2 / 4a(s) -> 1 at the end", unit_slope),
    ]
}

impl fmt::Display for EndVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EndVerdict::NotNeeded => "complete, no completion needed",
            EndVerdict::OnePoint => "incomplete, smooth 1-point completion",
            EndVerdict::Fails => "incomplete, no smooth 1-point completion",
        })
    }
}

fn ext(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:.12}")
    }
}

impl fmt::Display for CompletenessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "w_minus = {}", ext(self.w_minus))?;
        writeln!(f, "w_plus = {}", ext(self.w_plus))?;
        if self.complete {
            writeln!(f, "verdict: complete")?;
        } else {
            writeln!(
                f,
                "verdict: incomplete (toward zero: {}, toward infinity: {})",
                self.incomplete_toward_zero, self.incomplete_toward_infinity
            )?;
        }
        let crit = |c: &CriterionEnd| match c.divergent {
            Some(d) => format!("{} ({})", if d { "divergent" } else { "convergent" }, if c.agrees { "agrees" } else { "DISAGREES" }),
            None => "not applicable (C2 < 0)".into(),
        };
        writeln!(f, "criterion toward zero: {}", crit(&self.criterion_zero))?;
        writeln!(f, "criterion toward infinity: {}", crit(&self.criterion_infinity))?;
        writeln!(f, "completion hint: {:?}", self.completion_hint)?;
        for check in [&self.completion.at_zero, &self.completion.at_infinity] {
            let name = match check.end {
                End::Zero => "lower end",
                End::Infinity => "upper end",
            };
            writeln!(f, "{name}: {}", check.verdict)?;
            if check.verdict == EndVerdict::Fails {
                writeln!(f, "  failing: {}", check.failing().join("; "))?;
            }
        }
        Ok(())
    }
}

/// Coefficients of the generalized cone `ds² + K²s²⟨dφ, dφ⟩`.
#[derive(Debug, Clone)]
pub struct ConeSpec {
    pub spec: CoefficientSpec,
    pub k: f64,
    /// `2π(1 − K)`.
    pub angle_defect: f64,
    /// `n` when `K = 1/n` for an integer `n ≥ 2`: the tip is a `ℤ/nℤ` orbifold point.
    pub orbifold_order: Option<u32>,
}

/// With `g₂ ≡ 4` we get `s = 2(r − 1)` and the tip at `r = 0`, i.e.
/// `σ = s − W₋ = 2r`; then `C₁ = K²` and `C₂ = (1 − K²)/m` give `a = K²σ²`.
pub fn cone_spec(k: f64) -> Result<ConeSpec> {
    let spec = make_preset(Preset::Cone { k })?;
    let inv = 1.0 / k;
    let n = inv.round();
    let orbifold_order = ((inv - n).abs() < 1e-9 && n >= 2.0).then_some(n as u32);
    Ok(ConeSpec {
        spec,
        k,
        angle_defect: 2.0 * PI * (1.0 - k),
        orbifold_order,
    })
}

/// Coefficients with `g₁(r) = sin²(W(r))`, `W(r) = ∫₁^r √g₂`, so that
/// `a(s) = sin² s` on the band `W ∈ (0, π)`:
///
/// ```text
/// C₁(m) = g₁(√m)/(4m),    C₂(m) = (g₂(√m)/4 − C₁(m))/m
/// ```
///
/// Monomial `g₂ = c·r^p` gives a closed-form `W`; anything else is integrated
/// numerically.
pub fn sphere_completion_from_g2(g2: Coef) -> Result<CoefficientSpec> {
    if let Some((c, p)) = g2.as_expr().and_then(Expr::as_monomial) {
        return monomial_sphere(c, p);
    }
    numeric_sphere(g2)
}

fn monomial_sphere(c: f64, p: f64) -> Result<CoefficientSpec> {
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!("g2 = {c}·r^{p} is not positive")));
    }
    let rc = c.sqrt();
    // W as a function of m = r²
    let (w, r_pi) = if p == -2.0 {
        (Expr::mul(vec![Expr::c(0.5 * rc), Expr::Ln(Box::new(Expr::var()))]), (PI / rc).exp())
    } else {
        let q = 0.5 * p + 1.0;
        let k = rc / q;
        let w = Expr::add(vec![Expr::monomial(k, 0.5 * q), Expr::c(-k)]);
        let base = 1.0 + PI / k;
        if !(base > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "W stays below pi for g2 = {c}·r^{p}; no sphere band"
            )));
        }
        (w, base.powf(1.0 / q))
    };
    let c1 = Expr::div(Expr::sin2(w.clone()), Expr::monomial(4.0, 1.0));
    let c2 = Expr::add(vec![
        Expr::monomial(0.25 * c, 0.5 * p - 1.0),
        Expr::Neg(Box::new(Expr::div(Expr::sin2(w), Expr::monomial(4.0, 2.0)))),
    ]);
    CoefficientSpec::from_exprs(c1, c2).with_mass_domain(1.0, r_pi * r_pi)
}

fn numeric_sphere(g2: Coef) -> Result<CoefficientSpec> {
    let density = {
        let g2 = g2.clone();
        move |r: f64| -> Result<f64> {
            let v = g2.eval(r);
            if !(v > 0.0) {
                return Err(Error::Domain(format!("g2({r}) = {v} is not positive")));
            }
            Ok(v.sqrt())
        }
    };
    let w_of = {
        let density = density.clone();
        move |r: f64| -> Result<f64> {
            let n = ((r - 1.0).abs() * 16.0).ceil().clamp(1.0, 4096.0) as usize;
            let mut acc = 0.0;
            for i in 0..n {
                let a = 1.0 + (r - 1.0) * i as f64 / n as f64;
                let b = 1.0 + (r - 1.0) * (i + 1) as f64 / n as f64;
                acc += gl(a, b, &density)?;
            }
            Ok(acc)
        }
    };
    // bracket W(r) = π above r = 1
    let mut hi = 2.0;
    while w_of(hi)? < PI {
        hi *= 2.0;
        if hi > R_MAX {
            return Err(Error::InvalidArgument("W stays below pi; no sphere band".into()));
        }
    }
    let mut lo = 1.0;
    while hi - lo > 1e-15 * hi {
        let mid = 0.5 * (lo + hi);
        if w_of(mid)? < PI {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r_pi = lo.max(R_MIN);

    let c1 = {
        let w_of = w_of.clone();
        move |m: f64| {
            let r = m.sqrt();
            w_of(r).map_or(f64::NAN, |w| w.sin().powi(2) / (4.0 * m))
        }
    };
    let c2 = {
        let c1 = c1.clone();
        move |m: f64| (g2.eval(m.sqrt()) / 4.0 - c1(m)) / m
    };
    CoefficientSpec::from_coefs(
        Coef::BlackBox(BlackBox::new("sin²(W(√m))/(4m)", c1)),
        Coef::BlackBox(BlackBox::new("(g2(√m)/4 − C1(m))/m", c2)),
    )
    .with_mass_domain(1.0, r_pi * r_pi)
}
