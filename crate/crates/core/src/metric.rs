//! The metric in its four representations.
//!
//! | evaluator        | space                         | form                                   |
//! |------------------|-------------------------------|----------------------------------------|
//! | [`g_density`]    | positive densities            | `C₁(m)∫(α/μ)(β/μ)μ + C₂(m)∫α∫β`        |
//! | [`g_tilde`]      | scalar fields                 | `4C₁(‖f‖²)⟨h,k⟩ + 4C₂(‖f‖²)⟨f,h⟩⟨f,k⟩` |
//! | [`g_bar_polar`]  | `ℝ>0 × S`                     | `g₁(r)⟨dφ,dφ⟩ + g₂(r)dr²`              |
//! | [`g_bar_arc`]    | `(W₋, W₊) × S`                | `a(s)⟨dφ,dφ⟩ + ds²`                    |

use crate::coeffs::{ArcProfile, CoefficientSpec, RadialFunctions};
use crate::error::{Error, Result};
use crate::manifold::{integrate_density, l2_inner, ordered_sum, DensityField, ScalarField, SpherePoint};
use crate::transforms::{ArcPoint, PolarPoint};

/// Tangent components `⟨φ, dφ⟩` up to this size are projected away.
pub const TANGENCY_TOL: f64 = 1e-8;

/// A tangent vector at a polar point: radial speed and sphere component.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarTangent {
    pub dr: f64,
    pub dphi: ScalarField,
}

/// `C₁(m)·Σ wᵢ aᵢbᵢ/μᵢ + C₂(m)·(Σ wᵢaᵢ)(Σ wᵢbᵢ)` with `m = ∫μ`, everything in
/// ratio form against `μ₀`.
pub fn g_density(
    base: &DensityField,
    alpha: &DensityField,
    beta: &DensityField,
    spec: &CoefficientSpec,
) -> Result<f64> {
    base.check_grid(alpha)?;
    base.check_grid(beta)?;
    if let Some(b) = base.ratio().iter().find(|b| !(**b > 0.0)) {
        return Err(Error::Domain(format!("base density ratio {b} is not positive")));
    }
    let m = integrate_density(base);
    let w = base.grid().weights();
    let local = ordered_sum(
        (0..w.len()).map(|i| w[i] * alpha.ratio()[i] * beta.ratio()[i] / base.ratio()[i]),
    );
    Ok(spec.c1(m) * local + spec.c2(m) * integrate_density(alpha) * integrate_density(beta))
}

/// Pullback of [`g_density`] along `R⁻¹`; defined for sign-changing `f` too.
pub fn g_tilde(f: &ScalarField, h: &ScalarField, k: &ScalarField, spec: &CoefficientSpec) -> Result<f64> {
    let m = l2_inner(f, f)?;
    let hk = l2_inner(h, k)?;
    let fh = l2_inner(f, h)?;
    let fk = l2_inner(f, k)?;
    Ok(4.0 * spec.c1(m) * hk + 4.0 * spec.c2(m) * fh * fk)
}

/// Check `⟨φ, dφ⟩ = 0`; small violations are projected out.
fn tangent_part(phi: &SpherePoint, dphi: &ScalarField) -> Result<ScalarField> {
    let violation = l2_inner(phi.field(), dphi)?;
    if violation == 0.0 {
        Ok(dphi.clone())
    } else if violation.abs() <= TANGENCY_TOL {
        phi.project_tangent(dphi)
    } else {
        Err(Error::Tangency { violation })
    }
}

pub fn g_bar_polar(p: &PolarPoint, v: &PolarTangent, w: &PolarTangent, rf: &RadialFunctions) -> Result<f64> {
    let dv = tangent_part(&p.phi, &v.dphi)?;
    let dw = tangent_part(&p.phi, &w.dphi)?;
    Ok(rf.g1(p.r)? * l2_inner(&dv, &dw)? + rf.g2(p.r)? * v.dr * w.dr)
}

pub fn g_bar_arc(
    q: &ArcPoint,
    (ds1, dphi1): (f64, &ScalarField),
    (ds2, dphi2): (f64, &ScalarField),
    profile: &ArcProfile,
) -> Result<f64> {
    let d1 = tangent_part(&q.phi, dphi1)?;
    let d2 = tangent_part(&q.phi, dphi2)?;
    Ok(profile.a(q.s)? * l2_inner(&d1, &d2)? + ds1 * ds2)
}

/// `dΦ`: split a field variation `h` at `f = r·φ` into `dr = ⟨φ, h⟩` and
/// `dφ = (h − ⟨φ, h⟩φ)/r`.
pub fn polar_differential(p: &PolarPoint, h: &ScalarField) -> Result<PolarTangent> {
    let dr = l2_inner(p.phi.field(), h)?;
    let dphi = h.lin_comb(1.0 / p.r, p.phi.field(), -dr / p.r)?;
    Ok(PolarTangent { dr, dphi })
}

/// `dR⁻¹`: the density variation `2fh·μ₀` induced by `h` at `f`.
pub fn density_differential(f: &ScalarField, h: &ScalarField) -> Result<DensityField> {
    f.check_grid(h)?;
    let ratio = f.values().iter().zip(h.values()).map(|(a, b)| 2.0 * a * b).collect();
    DensityField::new(f.grid().clone(), ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{make_preset, Preset, DEFAULT_QUAD_TOL};
    use crate::manifold::Grid;
    use crate::transforms::{polar, r_inv_signed, r_map, to_arc};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn spec(p: Preset) -> CoefficientSpec {
        make_preset(p).unwrap()
    }

    #[test]
    fn density_examples() {
        let g = Grid::uniform(4).unwrap();
        let mu0 = DensityField::reference(g.clone(), 1.0);
        assert_relative_eq!(g_density(&mu0, &mu0, &mu0, &spec(Preset::FisherRao)).unwrap(), 1.0);
        assert_relative_eq!(g_density(&mu0, &mu0, &mu0, &spec(Preset::Extended)).unwrap(), 2.0);
        let base = DensityField::reference(g.clone(), 4.0);
        assert_relative_eq!(
            g_density(&base, &mu0, &mu0, &spec(Preset::Reciprocal)).unwrap(),
            1.0 / 16.0,
            max_relative = 1e-15
        );
        let bad = DensityField::new(g, vec![1.0, 0.0, 1.0, 1.0]).unwrap();
        assert!(g_density(&bad, &mu0, &mu0, &spec(Preset::FisherRao)).is_err());
    }

    #[test]
    fn tilde_examples() {
        let g = Grid::new(vec![0.25, 0.75]).unwrap();
        let f = ScalarField::new(g.clone(), vec![2.0, 0.0]).unwrap();
        let h = ScalarField::new(g.clone(), vec![0.0, 1.0 / 0.75f64.sqrt()]).unwrap();
        assert_relative_eq!(g_tilde(&f, &h, &h, &spec(Preset::FisherRao)).unwrap(), 4.0, max_relative = 1e-15);
        assert_relative_eq!(g_tilde(&f, &f, &f, &spec(Preset::Extended)).unwrap(), 8.0, max_relative = 1e-15);
        let other = ScalarField::constant(Grid::uniform(2).unwrap(), 1.0);
        assert!(matches!(g_tilde(&f, &other, &h, &spec(Preset::FisherRao)), Err(Error::GridMismatch)));
    }

    #[test]
    fn polar_and_arc_examples() {
        let g = Grid::uniform(3).unwrap();
        let rf = spec(Preset::FisherRao).radial_functions();
        let phi = SpherePoint::new(ScalarField::constant(g.clone(), 1.0)).unwrap();
        let e = ScalarField::new(g.clone(), vec![1.0, -1.0, 0.0]).unwrap();
        let e = e.scale(1.0 / e.norm());
        let radial = PolarTangent { dr: 1.0, dphi: ScalarField::constant(g.clone(), 0.0) };
        let sph = PolarTangent { dr: 0.0, dphi: e.clone() };
        for r in [0.3, 1.0, 5.0] {
            let p = PolarPoint::new(r, phi.clone()).unwrap();
            assert_relative_eq!(g_bar_polar(&p, &radial, &radial, &rf).unwrap(), 4.0);
        }
        let p2 = PolarPoint::new(2.0, phi.clone()).unwrap();
        assert_relative_eq!(g_bar_polar(&p2, &sph, &sph, &rf).unwrap(), 16.0, max_relative = 1e-14);

        let off = PolarTangent { dr: 0.0, dphi: ScalarField::constant(g.clone(), 1e-3) };
        assert!(matches!(g_bar_polar(&p2, &off, &off, &rf), Err(Error::Tangency { .. })));
        let nearly = PolarTangent { dr: 0.0, dphi: e.lin_comb(1.0, phi.field(), 1e-9).unwrap() };
        assert_relative_eq!(g_bar_polar(&p2, &nearly, &nearly, &rf).unwrap(), 16.0, max_relative = 1e-12);

        let prof = spec(Preset::Reciprocal).radial_functions().arc_profile(DEFAULT_QUAD_TOL).unwrap();
        let zero = ScalarField::constant(g.clone(), 0.0);
        for s in [-3.0, 0.0, 1.5] {
            let q = ArcPoint { s, phi: phi.clone() };
            assert_eq!(g_bar_arc(&q, (1.0, &zero), (1.0, &zero), &prof).unwrap(), 1.0);
            assert_relative_eq!(g_bar_arc(&q, (0.0, &e), (0.0, &e), &prof).unwrap(), 4.0, max_relative = 1e-14);
            assert_eq!(g_bar_arc(&q, (1.0, &zero), (0.0, &e), &prof).unwrap(), 0.0);
        }
    }

    fn inputs() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> {
        (2usize..12).prop_flat_map(|n| {
            (
                prop::collection::vec(0.05f64..1.0, n),
                prop::collection::vec(0.2f64..2.0, n),
                prop::collection::vec(-1.0f64..1.0, n),
                prop::collection::vec(-1.0f64..1.0, n),
            )
        })
    }


    proptest! {
        #[test]
        fn isometry_chain((w, f, h, k) in inputs(), preset in 0usize..4) {
            let spec = spec([Preset::Reciprocal, Preset::FisherRao, Preset::Extended, Preset::ReciprocalSq][preset]);
            let rf = spec.radial_functions();
            let prof = rf.arc_profile(DEFAULT_QUAD_TOL).unwrap();
            let g = Grid::from_unnormalized(w).unwrap();
            let f = ScalarField::new(g.clone(), f).unwrap();
            let h = ScalarField::new(g.clone(), h).unwrap();
            let k = ScalarField::new(g.clone(), k).unwrap();

            let mu = r_inv_signed(&f);
            let gd = g_density(&mu, &density_differential(&f, &h).unwrap(), &density_differential(&f, &k).unwrap(), &spec).unwrap();
            let gt = g_tilde(&f, &h, &k, &spec).unwrap();

            let p = polar(&r_map(&mu).unwrap()).unwrap();
            let vh = polar_differential(&p, &h).unwrap();
            let vk = polar_differential(&p, &k).unwrap();
            let gp = g_bar_polar(&p, &vh, &vk, &rf).unwrap();

            let q = to_arc(&p, &prof).unwrap();
            let sqrt_g2 = rf.g2(p.r).unwrap().sqrt();
            let ga = g_bar_arc(&q, (sqrt_g2 * vh.dr, &vh.dphi), (sqrt_g2 * vk.dr, &vk.dphi), &prof).unwrap();

            let scale = gt.abs().max(gd.abs()).max(1e-12);
            for (a, b) in [(gd, gt), (gt, gp), (gp, ga), (gd, ga)] {
                prop_assert!((a - b).abs() <= 1e-9 * scale, "{a} vs {b}");
            }
            let gt_sym = g_tilde(&f, &k, &h, &spec).unwrap();
            prop_assert!((gt - gt_sym).abs() <= 1e-14 * scale.max(h.norm() * k.norm()));
        }

        #[test]
        fn permutation_invariance((w, f, h, k) in inputs(), seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let n = w.len();
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rand::rngs::StdRng::seed_from_u64(seed));
            let spec = spec(Preset::Extended);
            let rf = spec.radial_functions();
            let g = Grid::from_unnormalized(w).unwrap();
            let gp = g.permuted(&perm).unwrap();
            let f = ScalarField::new(g.clone(), f).unwrap();
            let h = ScalarField::new(g.clone(), h).unwrap();
            let k = ScalarField::new(g.clone(), k).unwrap();
            let (fp, hp, kp) = (f.permuted(gp.clone(), &perm).unwrap(), h.permuted(gp.clone(), &perm).unwrap(), k.permuted(gp.clone(), &perm).unwrap());
            prop_assert_eq!(g_tilde(&f, &h, &k, &spec).unwrap(), g_tilde(&fp, &hp, &kp, &spec).unwrap());
            let mu = r_inv_signed(&f);
            let mup = r_inv_signed(&fp);
            prop_assert_eq!(
                g_density(&mu, &density_differential(&f, &h).unwrap(), &density_differential(&f, &k).unwrap(), &spec).unwrap(),
                g_density(&mup, &density_differential(&fp, &hp).unwrap(), &density_differential(&fp, &kp).unwrap(), &spec).unwrap()
            );
            let p = polar(&f).unwrap();
            let pp = polar(&fp).unwrap();
            prop_assert_eq!(
                g_bar_polar(&p, &polar_differential(&p, &h).unwrap(), &polar_differential(&p, &k).unwrap(), &rf).unwrap(),
                g_bar_polar(&pp, &polar_differential(&pp, &hp).unwrap(), &polar_differential(&pp, &kp).unwrap(), &rf).unwrap()
            );
        }

        #[test]
        fn positive_on_nonzero_tangents((w, f, h, _k) in inputs()) {
            let spec = spec(Preset::Extended);
            let g = Grid::from_unnormalized(w).unwrap();
            let f = ScalarField::new(g.clone(), f).unwrap();
            let h = ScalarField::new(g, h).unwrap();
            prop_assume!(h.norm() > 1e-6);
            let mu = r_inv_signed(&f);
            let d = density_differential(&f, &h).unwrap();
            prop_assert!(g_density(&mu, &d, &d, &spec).unwrap() > 0.0);
        }
    }
}
