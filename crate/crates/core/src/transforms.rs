//! Coordinate chain `Dens₊ → C(M, ℝ>0) → ℝ>0 × S → (W₋, W₊) × S`.

use crate::coeffs::ArcProfile;
use crate::error::{Error, Result};
use crate::manifold::{DensityField, ScalarField, SpherePoint};

/// Fields with L² norm below this are treated as the excluded origin.
pub const ZERO_NORM: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct PolarPoint {
    pub r: f64,
    pub phi: SpherePoint,
}

impl PolarPoint {
    pub fn new(r: f64, phi: SpherePoint) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Domain(format!("polar radius {r} must be positive")));
        }
        Ok(Self { r, phi })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArcPoint {
    pub s: f64,
    pub phi: SpherePoint,
}

/// `R(μ) = √(μ/μ₀)` on strictly positive densities.
pub fn r_map(mu: &DensityField) -> Result<ScalarField> {
    if let Some(a) = mu.ratio().iter().find(|a| !(**a > 0.0)) {
        return Err(Error::Domain(format!(
            "density ratio {a} is not positive; use r_signed for boundary densities"
        )));
    }
    ScalarField::new(mu.grid().clone(), mu.ratio().iter().map(|a| a.sqrt()).collect())
}

/// `R(μ) = sgn(μ) √(|μ|/μ₀)`, defined for every density.
pub fn r_signed(mu: &DensityField) -> ScalarField {
    let values = mu
        .ratio()
        .iter()
        .map(|&a| if a == 0.0 { 0.0 } else { a.signum() * a.abs().sqrt() })
        .collect();
    ScalarField::new(mu.grid().clone(), values).expect("same length")
}

/// `R⁻¹(f) = f|f| μ₀`.
pub fn r_inv_signed(f: &ScalarField) -> DensityField {
    DensityField::new(f.grid().clone(), f.values().iter().map(|&v| v * v.abs()).collect())
        .expect("same length")
}

/// `Φ(f) = (‖f‖, f/‖f‖)`.
pub fn polar(f: &ScalarField) -> Result<PolarPoint> {
    let r = f.norm();
    if !(r >= ZERO_NORM) {
        return Err(Error::Domain(format!("field norm {r:e} is too close to 0")));
    }
    Ok(PolarPoint {
        r,
        phi: SpherePoint::normalize(f.clone())?,
    })
}

/// `Φ⁻¹(r, φ) = r·φ`.
pub fn polar_inv(p: &PolarPoint) -> ScalarField {
    p.phi.field().scale(p.r)
}

pub fn to_arc(p: &PolarPoint, profile: &ArcProfile) -> Result<ArcPoint> {
    Ok(ArcPoint {
        s: profile.w(p.r)?,
        phi: p.phi.clone(),
    })
}

pub fn from_arc(q: &ArcPoint, profile: &ArcProfile) -> Result<PolarPoint> {
    PolarPoint::new(profile.w_inv(q.s)?, q.phi.clone())
}
