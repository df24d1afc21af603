//! Metric-space properties of the two-point solver.

use densgeo::coeffs::{make_preset, Preset};
use densgeo::geodesics::connect;
use densgeo::manifold::{orthogonal_unit, Grid, ScalarField, SpherePoint};
use densgeo::transforms::PolarPoint;
use proptest::prelude::*;

/// Points `(r, θ)` in a fixed 2-plane, where all connections are planar.
fn plane_point(r: f64, theta: f64) -> PolarPoint {
    let g = Grid::from_unnormalized(vec![1.0, 3.0, 2.0, 0.5]).unwrap();
    let phi0 = SpherePoint::normalize(ScalarField::new(g, vec![1.0, 0.7, 1.3, 0.9]).unwrap()).unwrap();
    let psi = orthogonal_unit(&phi0).unwrap();
    let phi = phi0.field().lin_comb(theta.cos(), psi.field(), theta.sin()).unwrap();
    PolarPoint::new(r, SpherePoint::normalize(phi).unwrap()).unwrap()
}

fn preset() -> impl Strategy<Value = Preset> {
    prop_oneof![Just(Preset::Reciprocal), Just(Preset::FisherRao), Just(Preset::Extended)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn symmetric(p in preset(), r0 in 0.5f64..3.0, r1 in 0.5f64..3.0, th in 0.0f64..2.5) {
        let spec = make_preset(p).unwrap();
        let (a, b) = (plane_point(r0, 0.0), plane_point(r1, th));
        let d_ab = connect(&a, &b, &spec, 1e-10).unwrap().distance;
        let d_ba = connect(&b, &a, &spec, 1e-10).unwrap().distance;
        prop_assert!((d_ab - d_ba).abs() <= 1e-7 * d_ab.max(1.0), "{d_ab} vs {d_ba}");
    }

    #[test]
    fn triangle_inequality(
        p in preset(),
        r in prop::array::uniform3(0.5f64..3.0),
        th in prop::array::uniform3(0.0f64..1.2),
    ) {
        let spec = make_preset(p).unwrap();
        let x = plane_point(r[0], th[0]);
        let y = plane_point(r[1], th[1]);
        let z = plane_point(r[2], th[2]);
        let d = |a: &PolarPoint, b: &PolarPoint| connect(a, b, &spec, 1e-10).unwrap().distance;
        let (xz, xy, yz) = (d(&x, &z), d(&x, &y), d(&y, &z));
        prop_assert!(xz <= xy + yz + 1e-8, "{xz} > {xy} + {yz}");
    }

    #[test]
    fn path_speed_equals_distance(r0 in 0.5f64..3.0, r1 in 0.5f64..3.0, th in 0.1f64..2.5) {
        let spec = make_preset(Preset::Reciprocal).unwrap();
        let c = connect(&plane_point(r0, 0.0), &plane_point(r1, th), &spec, 1e-10).unwrap();
        for (k, st) in c.path.states.iter().enumerate() {
            let speed = (st.s_t.powi(2) + c.path.warp[k] * st.theta_t.powi(2)).sqrt();
            prop_assert!((speed - c.distance).abs() <= 1e-6 * c.distance.max(1.0));
        }
    }
}
