//! Sectional curvature of `ds² + a(s)⟨dφ, dφ⟩` and the surface-of-revolution
//! picture of its 2-planes.
//!
//! Only two sectional curvatures occur:
//!
//! ```text
//! sphere–sphere planes:   1/a − a'²/(4a²)
//! radial–sphere planes:  −a''/(2a) + a'²/(4a²)
//! ```
//!
//! The second one is the Gauss curvature `−(√a)''/√a` of the reduced surface
//! `ds² + a dθ²`, which gives an independent finite-difference check.

use std::io::{self, Write};

use crate::coeffs::ArcProfile;
use crate::error::{Error, Result};
use crate::quad::gl;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvaturePair {
    pub sec_sphere: f64,
    pub sec_mixed: f64,
    pub at_s: f64,
}

pub fn sectional(profile: &ArcProfile, s: f64) -> Result<CurvaturePair> {
    let j = profile.a_jet(s)?;
    let (a, a1, a2) = (j.v, j.d, j.dd);
    let q = a1 * a1 / (4.0 * a * a);
    Ok(CurvaturePair {
        sec_sphere: 1.0 / a - q,
        sec_mixed: -a2 / (2.0 * a) + q,
        at_s: s,
    })
}

/// `|K_fd − sec_mixed|` where `K_fd = −(√a)''/√a` by central differences
/// with step `h`.
pub fn sectional_fd_check(profile: &ArcProfile, s: f64, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step h = {h}")));
    }
    let root = |x: f64| profile.a(x).map(f64::sqrt);
    let (lo, mid, hi) = (root(s - h)?, root(s)?, root(s + h)?);
    let k_fd = -(hi - 2.0 * mid + lo) / (h * h) / mid;
    Ok((k_fd - sectional(profile, s)?.sec_mixed).abs())
}

/// `a'(s)² < 4a(s)`: the sphere–sphere curvature is positive and the
/// revolution embedding exists at `s`.
pub fn validity_condition(profile: &ArcProfile, s: f64) -> Result<bool> {
    let j = profile.a_jet(s)?;
    Ok(j.d * j.d < 4.0 * j.v)
}

/// Generating curve `(c₁(s), c₂(s))` of the hypersurface of revolution.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCurve {
    pub s_samples: Vec<f64>,
    /// Axial coordinate `∫ √(1 − a'²/4a)`.
    pub c1_vals: Vec<f64>,
    /// Distance from the axis, `√a`.
    pub c2_vals: Vec<f64>,
    pub valid: Vec<bool>,
}

impl ProfileCurve {
    pub fn n_valid(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    /// Columns `s, c1, c2, valid`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "s,c1,c2,valid")?;
        for k in 0..self.s_samples.len() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{}",
                self.s_samples[k], self.c1_vals[k], self.c2_vals[k], self.valid[k] as u8
            )?;
        }
        Ok(())
    }
}

/// Axial speed `√(1 − a'²/4a)`, clipped at zero where the embedding fails.
fn axial_speed(profile: &ArcProfile, s: f64) -> Result<f64> {
    let j = profile.a_jet(s)?;
    Ok((1.0 - j.d * j.d / (4.0 * j.v)).max(0.0).sqrt())
}

/// `∫_a^b` with the substitution `σ = a + (b − a)(1 − cos πv)/2`, which
/// absorbs square-root behaviour at either end.
fn integrate_axial(profile: &ArcProfile, a: f64, b: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let half = std::f64::consts::FRAC_PI_2;
    gl(0.0, 1.0, |v| {
        let sigma = a + 0.5 * (b - a) * (1.0 - (std::f64::consts::PI * v).cos());
        let jac = half * (b - a) * (std::f64::consts::PI * v).sin();
        Ok(axial_speed(profile, sigma)? * jac)
    })
}

/// Sample the generating curve on `n` equispaced points of `range`. The
/// axial coordinate is measured from `s = 0` when that lies in the closed
/// domain of the profile, otherwise from the start of the range.
pub fn revolution_profile(profile: &ArcProfile, range: (f64, f64), n: usize) -> Result<ProfileCurve> {
    let (lo, hi) = range;
    if n < 2 {
        return Err(Error::InvalidArgument(format!("n = {n} < 2")));
    }
    if !(hi > lo) {
        return Err(Error::InvalidArgument(format!("empty range ({lo}, {hi})")));
    }
    let s_samples: Vec<f64> = (0..n)
        .map(|k| if k + 1 == n { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 })
        .collect();

    let mut c2_vals = Vec::with_capacity(n);
    let mut valid = Vec::with_capacity(n);
    for &s in &s_samples {
        let j = profile.a_jet(s)?;
        c2_vals.push(j.v.sqrt());
        valid.push(j.d * j.d < 4.0 * j.v);
    }
    if !valid.iter().any(|v| *v) {
        return Err(Error::EmptyProfile);
    }

    let origin = if profile.w_minus() <= 0.0 && 0.0 <= profile.w_plus() { 0.0 } else { lo };
    // cumulative from the first sample, then shift to the origin
    let mut cum = Vec::with_capacity(n);
    cum.push(0.0);
    for k in 1..n {
        let prev = cum[k - 1];
        cum.push(prev + integrate_axial(profile, s_samples[k - 1], s_samples[k])?);
    }
    let offset = integrate_from(profile, lo, origin, (hi - lo) / (n - 1) as f64)?;
    let c1_vals = cum.iter().map(|c| c - offset).collect();
    Ok(ProfileCurve {
        s_samples,
        c1_vals,
        c2_vals,
        valid,
    })
}

/// `∫_a^b` of the axial speed over pieces no longer than `piece`.
fn integrate_from(profile: &ArcProfile, a: f64, b: f64, piece: f64) -> Result<f64> {
    let n = ((b - a).abs() / piece).ceil().max(1.0) as usize;
    let mut acc = 0.0;
    for i in 0..n {
        let x0 = a + (b - a) * i as f64 / n as f64;
        let x1 = if i + 1 == n { b } else { a + (b - a) * (i + 1) as f64 / n as f64 };
        acc += integrate_axial(profile, x0, x1)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{make_preset, Preset, DEFAULT_QUAD_TOL};
    use crate::expr::{Coef, Expr};
    use approx::assert_relative_eq;

    fn profile(p: Preset) -> ArcProfile {
        make_preset(p).unwrap().radial_functions().arc_profile(DEFAULT_QUAD_TOL).unwrap()
    }

    fn pseudosphere() -> ArcProfile {
        let a = Expr::Exp(Box::new(Expr::monomial(-2.0, 1.0)));
        ArcProfile::direct(Coef::Expr(a), -1.0, 40.0).unwrap()
    }

    #[test]
    fn round_flat_and_hyperbolic() {
        let sph = profile(Preset::SphereCompletion);
        let c = sectional(&sph, 0.7).unwrap();
        assert_relative_eq!(c.sec_sphere, 1.0, epsilon = 1e-10);
        assert_relative_eq!(c.sec_mixed, 1.0, epsilon = 1e-10);
        let fr = profile(Preset::FisherRao);
        for s in [-1.5, 0.0, 3.0] {
            let c = sectional(&fr, s).unwrap();
            assert!(c.sec_sphere.abs() < 1e-12 && c.sec_mixed.abs() < 1e-12);
        }
        for s in [0.1, 1.0, 5.0] {
            assert_relative_eq!(sectional(&pseudosphere(), s).unwrap().sec_mixed, -1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn finite_difference_oracle() {
        assert!(sectional_fd_check(&profile(Preset::FisherRao), 1.0, 1e-4).unwrap() < 1e-6);
        let sph = profile(Preset::SphereCompletion);
        assert!(sectional_fd_check(&sph, 0.5, 1e-4).unwrap() < 1e-5);
        let rec = profile(Preset::Reciprocal);
        assert!(sectional_fd_check(&rec, 0.3, 1e-4).unwrap() < 1e-7);
        assert!(sectional(&rec, 0.3).unwrap().sec_mixed.abs() < 1e-14);
    }

    #[test]
    fn validity() {
        let sph = profile(Preset::SphereCompletion);
        assert!(validity_condition(&sph, 0.7).unwrap());
        assert!(!validity_condition(&profile(Preset::FisherRao), 0.4).unwrap());
        let rec = profile(Preset::Reciprocal);
        assert!(validity_condition(&rec, 2.0).unwrap());
        assert_relative_eq!(sectional(&rec, 2.0).unwrap().sec_sphere, 0.25, max_relative = 1e-14);
        for p in [Preset::Extended, Preset::ReciprocalSq, Preset::SphereCompletion] {
            let prof = profile(p);
            for k in 1..20 {
                let s = prof.w_minus().max(-3.0) + k as f64 * 0.05 * (prof.w_plus().min(3.0) - prof.w_minus().max(-3.0));
                let c = sectional(&prof, s).unwrap();
                if c.sec_sphere.abs() > 1e-12 {
                    assert_eq!(validity_condition(&prof, s).unwrap(), c.sec_sphere > 0.0);
                }
            }
        }
    }

    #[test]
    fn tractrix() {
        let curve = revolution_profile(&pseudosphere(), (0.0, 3.0), 61).unwrap();
        for k in 0..curve.s_samples.len() {
            let s = curve.s_samples[k];
            assert_relative_eq!(curve.c2_vals[k], (-s).exp(), max_relative = 1e-14);
            // ∫₀^s √(1 − e^{−2σ}) dσ = atanh(√(1−e^{−2s})) − √(1−e^{−2s})
            let q = (1.0 - (-2.0 * s).exp()).sqrt();
            assert!((curve.c1_vals[k] - (q.atanh() - q)).abs() < 1e-6, "s = {s}");
        }
    }

    #[test]
    fn sphere_and_flat_profiles() {
        let sph = profile(Preset::SphereCompletion);
        let curve = revolution_profile(&sph, (0.1, std::f64::consts::PI - 0.1), 41).unwrap();
        assert_eq!(curve.n_valid(), 41);
        let mid = 20;
        assert_relative_eq!(curve.s_samples[mid], std::f64::consts::FRAC_PI_2, epsilon = 1e-15);
        assert_relative_eq!(curve.c2_vals[mid], 1.0, epsilon = 1e-12);
        for k in 0..41 {
            assert!((curve.c1_vals[k] - (1.0 - curve.s_samples[k].cos())).abs() < 1e-8);
        }
        let fr = profile(Preset::FisherRao);
        assert!(matches!(revolution_profile(&fr, (-1.0, 1.0), 11), Err(Error::EmptyProfile)));

        let mut buf = Vec::new();
        curve.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("s,c1,c2,valid\n"));
        assert_eq!(text.lines().count(), 42);
    }

    #[test]
    fn profile_is_arc_length_parametrized() {
        let ext = profile(Preset::Extended);
        let curve = revolution_profile(&ext, (-2.0, 2.0), 9).unwrap();
        for (k, &s) in curve.s_samples.iter().enumerate() {
            if !curve.valid[k] {
                continue;
            }
            let j = ext.a_jet(s).unwrap();
            let c1p = (1.0 - j.d * j.d / (4.0 * j.v)).sqrt();
            let c2p = j.d / (2.0 * j.v.sqrt());
            assert!((c1p * c1p + c2p * c2p - 1.0).abs() < 1e-12);
        }
    }
}
