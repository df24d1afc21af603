//! Fixed-order Gauss–Legendre panels.
//!
//! Integrals of the radial density `√g₂` are assembled from panels with fixed
//! breakpoints, so the computed value is a smooth function of the upper limit.
//! That matters for finite-difference curvature checks downstream.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;

use crate::error::{Error, Result};

const ORDER: usize = 30;
const MAX_LEVEL: u32 = 12;

fn rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(NonZeroUsize::new(ORDER).unwrap()))
        .as_node_weight_pairs()
}

/// 30-point Gauss–Legendre on `[a, b]`.
pub fn gl<F>(a: f64, b: f64, mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let mut acc = 0.0;
    for &(x, w) in rule() {
        acc += w * f(mid + half * x)?;
    }
    Ok(half * acc)
}

/// An interval split into equal sub-panels, each integrated with [`gl`],
/// with cumulative values at the sub-panel edges.
#[derive(Debug, Clone)]
pub struct Panel {
    pub a: f64,
    pub b: f64,
    edges: Vec<f64>,
    cum: Vec<f64>,
}

impl Panel {
    /// Refine by halving until successive levels agree to `tol` (relative to
    /// `max(1, |I|)`).
    pub fn resolve<F>(a: f64, b: f64, tol: f64, mut f: F) -> Result<Self>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let mut prev = Self::at_level(a, b, 0, &mut f)?;
        let mut history = vec![prev.total()];
        for level in 1..=MAX_LEVEL {
            let next = Self::at_level(a, b, level, &mut f)?;
            let (i0, i1) = (prev.total(), next.total());
            history.push(i1);
            if !i1.is_finite() {
                return Ok(next);
            }
            if (i1 - i0).abs() <= tol * i1.abs().max(1.0) {
                return Ok(next);
            }
            prev = next;
        }
        Err(Error::Quadrature {
            message: format!("panel [{a}, {b}] unresolved after {MAX_LEVEL} halvings"),
            partial: history,
        })
    }

    fn at_level<F>(a: f64, b: f64, level: u32, f: &mut F) -> Result<Self>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let n = 1usize << level;
        let h = (b - a) / n as f64;
        let mut edges = Vec::with_capacity(n + 1);
        let mut cum = Vec::with_capacity(n + 1);
        edges.push(a);
        cum.push(0.0);
        let mut acc = 0.0;
        for i in 0..n {
            let lo = a + h * i as f64;
            let hi = if i + 1 == n { b } else { a + h * (i + 1) as f64 };
            acc += gl(lo, hi, &mut *f)?;
            edges.push(hi);
            cum.push(acc);
        }
        Ok(Self { a, b, edges, cum })
    }

    pub fn total(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    /// Index `j` of the sub-panel `[edges[j], edges[j+1]]` holding `x`.
    fn locate(&self, x: f64) -> usize {
        let j = self.edges.partition_point(|&e| e <= x);
        j.saturating_sub(1).min(self.edges.len() - 2)
    }

    /// `∫_a^x f` for `x` in the panel.
    pub fn partial<F>(&self, x: f64, f: F) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let j = self.locate(x);
        Ok(self.cum[j] + gl(self.edges[j], x, f)?)
    }

    /// Solve `∫_a^x f = target` for `x`, given `f > 0` on the panel.
    pub fn invert<F>(&self, target: f64, mut f: F) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let total = self.total();
        if target <= 0.0 {
            return Ok(self.a);
        }
        if target >= total {
            return Ok(self.b);
        }
        let j = self.cum.partition_point(|&c| c <= target).saturating_sub(1);
        let j = j.min(self.edges.len() - 2);
        let (mut lo, mut hi) = (self.edges[j], self.edges[j + 1]);
        let base = self.cum[j];
        let span = self.cum[j + 1] - base;
        let frac = if span > 0.0 { (target - base) / span } else { 0.5 };
        let mut x = lo + frac * (hi - lo);
        for _ in 0..100 {
            let resid = base + gl(self.edges[j], x, &mut f)? - target;
            if resid > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let slope = f(x)?;
            let mut next = x - resid / slope;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
                return Ok(next);
            }
            x = next;
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gl_is_exact_for_smooth_integrands() {
        let v = gl(0.0, 1.0, |x| Ok(x.exp())).unwrap();
        assert_relative_eq!(v, std::f64::consts::E - 1.0, max_relative = 1e-15);
    }

    #[test]
    fn panel_partial_and_inverse() {
        let f = |x: f64| Ok(2.0 / x);
        let p = Panel::resolve(1.0, 2.0, 1e-14, f).unwrap();
        assert_relative_eq!(p.total(), 2.0 * 2f64.ln(), max_relative = 1e-15);
        let x = 1.37;
        let w = p.partial(x, f).unwrap();
        assert_relative_eq!(w, 2.0 * x.ln(), max_relative = 1e-14);
        let back = p.invert(w, f).unwrap();
        assert_relative_eq!(back, x, max_relative = 1e-14);
    }

    #[test]
    fn oscillatory_integrand_forces_refinement() {
        let f = |x: f64| Ok((40.0 * x).sin().powi(2) + 1.0);
        let p = Panel::resolve(0.0, 3.0, 1e-13, f).unwrap();
        let exact = 3.0 + 1.5 - (240.0f64).sin() / 160.0;
        assert_relative_eq!(p.total(), exact, max_relative = 1e-12);
        assert!(p.edges.len() > 2);
    }
}
