//! Discretized base manifold: a weighted point set carrying the reference
//! probability density μ₀, together with the fields that live on it.
//!
//! Densities are stored as ratios against μ₀, so `∫ α = Σ wᵢ aᵢ` and the
//! L²(μ₀) inner product of two functions is `Σ wᵢ hᵢ kᵢ`.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Quadrature weights of the reference density.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    weights: Vec<f64>,
    labels: Vec<String>,
}

impl Grid {
    pub fn new(weights: Vec<f64>) -> Result<Arc<Self>> {
        let labels = (0..weights.len()).map(|i| format!("x{i}")).collect();
        Self::with_labels(weights, labels)
    }

    pub fn with_labels(weights: Vec<f64>, labels: Vec<String>) -> Result<Arc<Self>> {
        if weights.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {}",
                weights.len()
            )));
        }
        if labels.len() != weights.len() {
            return Err(Error::Dimension {
                expected: weights.len(),
                found: labels.len(),
            });
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-positive weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidGrid(format!("weights sum to {total}, not 1")));
        }
        Ok(Arc::new(Self { weights, labels }))
    }

    pub fn uniform(n: usize) -> Result<Arc<Self>> {
        Self::new(vec![1.0 / n as f64; n])
    }

    /// Normalizes arbitrary positive weights to unit mass.
    pub fn from_unnormalized(weights: Vec<f64>) -> Result<Arc<Self>> {
        let total: f64 = weights.iter().sum();
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn n_points(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Relabel points: point `i` of the result is point `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Arc<Self>> {
        check_perm(perm, self.n_points())?;
        Self::with_labels(
            perm.iter().map(|&i| self.weights[i]).collect(),
            perm.iter().map(|&i| self.labels[i].clone()).collect(),
        )
    }

    fn same(a: &Arc<Grid>, b: &Arc<Grid>) -> bool {
        Arc::ptr_eq(a, b) || a.weights == b.weights
    }
}

fn check_perm(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::Dimension {
            expected: n,
            found: perm.len(),
        });
    }
    let mut seen = vec![false; n];
    for &i in perm {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidArgument("not a permutation".into()));
        }
    }
    Ok(())
}

fn check_len(grid: &Grid, len: usize) -> Result<()> {
    if len != grid.n_points() {
        return Err(Error::Dimension {
            expected: grid.n_points(),
            found: len,
        });
    }
    Ok(())
}

/// A function on the grid (an element of the half-density / L² picture).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        check_len(&grid, values.len())?;
        Ok(Self { grid, values })
    }

    pub fn constant(grid: Arc<Grid>, c: f64) -> Self {
        let n = grid.n_points();
        Self {
            grid,
            values: vec![c; n],
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn norm(&self) -> f64 {
        self.weighted_dot(&self.values).sqrt()
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `a·self + b·other`
    pub fn lin_comb(&self, a: f64, other: &ScalarField, b: f64) -> Result<Self> {
        self.check_grid(other)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        })
    }

    pub fn permuted(&self, grid: Arc<Grid>, perm: &[usize]) -> Result<Self> {
        check_perm(perm, self.values.len())?;
        Self::new(grid, perm.iter().map(|&i| self.values[i]).collect())
    }

    pub(crate) fn check_grid(&self, other: &ScalarField) -> Result<()> {
        if !Grid::same(&self.grid, &other.grid) {
            if self.values.len() != other.values.len() {
                return Err(Error::Dimension {
                    expected: self.values.len(),
                    found: other.values.len(),
                });
            }
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    fn weighted_dot(&self, other: &[f64]) -> f64 {
        ordered_sum(
            self.grid
                .weights
                .iter()
                .zip(&self.values)
                .zip(other)
                .map(|((w, h), k)| w * h * k),
        )
    }
}

/// A density `α = a·μ₀`, stored through its ratio `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    grid: Arc<Grid>,
    ratio: Vec<f64>,
}

impl DensityField {
    pub fn new(grid: Arc<Grid>, ratio: Vec<f64>) -> Result<Self> {
        check_len(&grid, ratio.len())?;
        Ok(Self { grid, ratio })
    }

    /// The reference density μ₀ scaled by `c`.
    pub fn reference(grid: Arc<Grid>, c: f64) -> Self {
        let n = grid.n_points();
        Self {
            grid,
            ratio: vec![c; n],
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn ratio(&self) -> &[f64] {
        &self.ratio
    }

    pub fn is_positive(&self) -> bool {
        self.ratio.iter().all(|&a| a > 0.0)
    }

    pub fn permuted(&self, grid: Arc<Grid>, perm: &[usize]) -> Result<Self> {
        check_perm(perm, self.ratio.len())?;
        Self::new(grid, perm.iter().map(|&i| self.ratio[i]).collect())
    }

    pub(crate) fn check_grid(&self, other: &DensityField) -> Result<()> {
        if !Grid::same(&self.grid, &other.grid) {
            if self.ratio.len() != other.ratio.len() {
                return Err(Error::Dimension {
                    expected: self.ratio.len(),
                    found: other.ratio.len(),
                });
            }
            return Err(Error::GridMismatch);
        }
        Ok(())
    }
}

/// A point on the unit L²(μ₀) sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    field: ScalarField,
}

impl SpherePoint {
    pub const NORM_TOL: f64 = 1e-10;

    pub fn new(field: ScalarField) -> Result<Self> {
        let n2 = l2_inner(&field, &field)?;
        if (n2 - 1.0).abs() > Self::NORM_TOL {
            return Err(Error::Domain(format!("field has squared norm {n2}, not 1")));
        }
        Ok(Self { field })
    }

    /// Radial projection; rejects (near-)zero fields.
    pub fn normalize(field: ScalarField) -> Result<Self> {
        let n = field.norm();
        if !(n > 1e-10) {
            return Err(Error::Domain("cannot normalize the zero field".into()));
        }
        Ok(Self {
            field: field.scale(1.0 / n),
        })
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    pub fn values(&self) -> &[f64] {
        self.field.values()
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.field.grid()
    }

    /// Orthogonal projection of `v` onto the tangent space at this point.
    pub fn project_tangent(&self, v: &ScalarField) -> Result<ScalarField> {
        let c = l2_inner(&self.field, v)?;
        v.lin_comb(1.0, &self.field, -c)
    }
}

/// `Σ wᵢ hᵢ kᵢ`
pub fn l2_inner(h: &ScalarField, k: &ScalarField) -> Result<f64> {
    h.check_grid(k)?;
    Ok(h.weighted_dot(&k.values))
}

/// `Σ wᵢ aᵢ`, the total mass of a density.
pub fn integrate_density(alpha: &DensityField) -> f64 {
    ordered_sum(alpha.grid.weights.iter().zip(&alpha.ratio).map(|(w, a)| w * a))
}

/// Sum of terms in ascending order, so the result does not depend on how the
/// grid points are enumerated.
pub(crate) fn ordered_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let mut t: Vec<f64> = terms.collect();
    t.sort_by(f64::total_cmp);
    t.into_iter().sum()
}

/// Great-circle distance on the unit sphere, in `[0, π]`.
pub fn sphere_distance(p: &SpherePoint, q: &SpherePoint) -> Result<f64> {
    let c = l2_inner(&p.field, &q.field)?;
    Ok(c.clamp(-1.0, 1.0).acos())
}

/// Deterministic unit vector orthogonal to `phi`: the first coordinate
/// indicator field with its `phi` component removed, falling back to the next
/// coordinate when that projection degenerates.
pub fn orthogonal_unit(phi: &SpherePoint) -> Result<SpherePoint> {
    let grid = phi.grid().clone();
    let n = grid.n_points();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        let e = ScalarField::new(grid.clone(), e)?;
        let t = phi.project_tangent(&e)?;
        // compare against the norm of e itself
        if t.norm() > 1e-6 * e.norm() {
            return SpherePoint::normalize(t);
        }
    }
    Err(Error::Domain("no orthogonal direction on this grid".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn grid2(a: f64, b: f64) -> Arc<Grid> {
        Grid::new(vec![a, b]).unwrap()
    }

    #[test]
    fn grid_invariants() {
        assert!(Grid::new(vec![1.0]).is_err());
        assert!(Grid::new(vec![0.5, 0.6]).is_err());
        assert!(Grid::new(vec![1.5, -0.5]).is_err());
        assert!(Grid::uniform(7).is_ok());
    }

    #[test]
    fn inner_products() {
        let g = Grid::uniform(5).unwrap();
        let one = ScalarField::constant(g.clone(), 1.0);
        assert_abs_diff_eq!(l2_inner(&one, &one).unwrap(), 1.0, epsilon = 1e-15);

        let g = grid2(0.5, 0.5);
        let h = ScalarField::new(g.clone(), vec![1.0, 1.0]).unwrap();
        let k = ScalarField::new(g, vec![1.0, -1.0]).unwrap();
        assert_eq!(l2_inner(&h, &k).unwrap(), 0.0);

        let g = grid2(0.25, 0.75);
        let h = ScalarField::new(g, vec![2.0, 0.0]).unwrap();
        assert_abs_diff_eq!(l2_inner(&h, &h).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn mismatched_grids_error() {
        let h = ScalarField::constant(Grid::uniform(3).unwrap(), 1.0);
        let k = ScalarField::constant(Grid::uniform(4).unwrap(), 1.0);
        assert!(matches!(l2_inner(&h, &k), Err(Error::Dimension { .. })));
        let k = ScalarField::constant(grid2(0.25, 0.75), 1.0);
        let h = ScalarField::constant(Grid::uniform(2).unwrap(), 1.0);
        assert!(matches!(l2_inner(&h, &k), Err(Error::GridMismatch)));
    }

    #[test]
    fn density_mass() {
        let g = Grid::uniform(4).unwrap();
        assert_abs_diff_eq!(integrate_density(&DensityField::reference(g, 1.0)), 1.0, epsilon = 1e-15);
        let g = grid2(0.5, 0.5);
        assert_eq!(integrate_density(&DensityField::new(g, vec![2.0, 2.0]).unwrap()), 2.0);
        let g = grid2(0.25, 0.75);
        assert_eq!(integrate_density(&DensityField::new(g, vec![4.0, 0.0]).unwrap()), 1.0);
    }

    #[test]
    fn sphere_distances() {
        let g = grid2(0.5, 0.5);
        let p = SpherePoint::new(ScalarField::new(g.clone(), vec![1.0, 1.0]).unwrap()).unwrap();
        let q = SpherePoint::new(ScalarField::new(g.clone(), vec![1.0, -1.0]).unwrap()).unwrap();
        let mp = SpherePoint::new(p.field().scale(-1.0)).unwrap();
        assert_eq!(sphere_distance(&p, &p).unwrap(), 0.0);
        assert_abs_diff_eq!(sphere_distance(&p, &mp).unwrap(), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(sphere_distance(&p, &q).unwrap(), PI / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn clamped_arccos_survives_rounding() {
        let g = Grid::uniform(3).unwrap();
        let f = ScalarField::new(g, vec![0.3, 1.1, 1.4]).unwrap();
        let p = SpherePoint::normalize(f).unwrap();
        let d = sphere_distance(&p, &p).unwrap();
        assert!(d.is_finite() && d < 1e-7);
    }

    #[test]
    fn orthogonal_unit_is_tangent() {
        let g = Grid::uniform(4).unwrap();
        let phi = SpherePoint::new(ScalarField::constant(g, 1.0)).unwrap();
        let psi = orthogonal_unit(&phi).unwrap();
        assert_abs_diff_eq!(l2_inner(phi.field(), psi.field()).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(psi.field().norm(), 1.0, epsilon = 1e-15);
    }

    fn weights_and_fields() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>, Vec<usize>)> {
        (2usize..12).prop_flat_map(|n| {
            (
                prop::collection::vec(0.01f64..1.0, n),
                prop::collection::vec(-3.0f64..3.0, n),
                prop::collection::vec(-3.0f64..3.0, n),
                Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
            )
        })
    }

    proptest! {
        #[test]
        fn inner_product_is_symmetric_bilinear_positive((w, h, k, _) in weights_and_fields(), c in -2.0f64..2.0) {
            let g = Grid::from_unnormalized(w).unwrap();
            let h = ScalarField::new(g.clone(), h).unwrap();
            let k = ScalarField::new(g.clone(), k).unwrap();
            let hk = l2_inner(&h, &k).unwrap();
            prop_assert!((hk - l2_inner(&k, &h).unwrap()).abs() < 1e-14);
            let lhs = l2_inner(&h.lin_comb(c, &k, 1.0).unwrap(), &k).unwrap();
            let rhs = c * l2_inner(&h, &k).unwrap() + l2_inner(&k, &k).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs.abs()));
            let hh = l2_inner(&h, &h).unwrap();
            prop_assert!(hh >= 0.0);
            if h.values().iter().any(|v| *v != 0.0) {
                prop_assert!(hh > 0.0);
            }
        }

        #[test]
        fn weighted_permutation_invariance((w, h, k, perm) in weights_and_fields()) {
            let g = Grid::from_unnormalized(w).unwrap();
            let gp = g.permuted(&perm).unwrap();
            let hf = ScalarField::new(g.clone(), h.clone()).unwrap();
            let kf = ScalarField::new(g.clone(), k).unwrap();
            let hp = hf.permuted(gp.clone(), &perm).unwrap();
            let kp = kf.permuted(gp.clone(), &perm).unwrap();
            prop_assert_eq!(l2_inner(&hf, &kf).unwrap(), l2_inner(&hp, &kp).unwrap());

            let d = DensityField::new(g, h.iter().map(|v| v.abs()).collect()).unwrap();
            let dp = d.permuted(gp, &perm).unwrap();
            prop_assert_eq!(integrate_density(&d), integrate_density(&dp));

            if hf.norm() > 1e-6 && kf.norm() > 1e-6 {
                let p = SpherePoint::normalize(hf).unwrap();
                let q = SpherePoint::normalize(kf).unwrap();
                let pp = SpherePoint::normalize(hp).unwrap();
                let qp = SpherePoint::normalize(kp).unwrap();
                prop_assert_eq!(sphere_distance(&p, &q).unwrap(), sphere_distance(&pp, &qp).unwrap());
            }
        }
    }
}
