//! Numerical geometry of diffeomorphism-invariant metrics on spaces of
//! densities.
//!
//! Every such metric has the form
//! `G_μ(α, β) = C₁(m) ∫ (α/μ)(β/μ) μ + C₂(m) ∫α ∫β`, `m = μ(M)`.
//! Through the half-density map `R(μ) = √(μ/μ₀)`, polar coordinates and the
//! arc-length reparametrization `s = W(r)` it becomes the warped product
//! `ds² + a(s)⟨dφ, dφ⟩` over the unit L²(μ₀)-sphere.
//!
//! | module | contents |
//! |--------|----------|
//! | [`manifold`] | weighted grids, fields, L² inner products |
//! | [`coeffs`] | coefficient specs, presets, `g₁`, `g₂`, the arc profile `a(s)` |
//! | [`transforms`] | `R`, its signed extension, polar and arc-length coordinates |
//! | [`metric`] | the metric in all four representations |
//! | [`geodesics`] | initial and boundary value problems |
//! | [`curvature`] | sectional curvatures and surface-of-revolution profiles |
//! | [`completeness`] | `W±` classification and one-point completions |
//! | [`cli`] | configuration format and command implementations |

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coeffs;
pub mod completeness;
pub mod curvature;
pub mod error;
pub mod expr;
pub mod geodesics;
pub mod jet;
pub mod manifold;
pub mod metric;
pub mod quad;
pub mod transforms;

pub use coeffs::{make_preset, ArcProfile, CoefficientSpec, Preset, RadialFunctions};
pub use error::{Error, Result};
pub use manifold::{Grid, DensityField, ScalarField, SpherePoint};
