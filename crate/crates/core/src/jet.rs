//! Second-order forward-mode derivatives.
//!
//! A [`Jet`] carries a value together with its first and second derivative
//! with respect to one underlying variable. Composition follows the chain rule
//! `(f∘u)'' = f''(u)·u'² + f'(u)·u''`, which is all the curvature and geodesic
//! code needs from the coefficient functions.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d: f64,
    pub dd: f64,
}

impl Jet {
    pub const fn new(v: f64, d: f64, dd: f64) -> Self {
        Self { v, d, dd }
    }

    pub const fn constant(v: f64) -> Self {
        Self { v, d: 0.0, dd: 0.0 }
    }

    /// The identity jet `x ↦ x` at `x`.
    pub const fn variable(x: f64) -> Self {
        Self { v: x, d: 1.0, dd: 0.0 }
    }

    /// Compose with a scalar function given its value and two derivatives at `self.v`.
    pub fn chain(self, f: f64, f1: f64, f2: f64) -> Self {
        Self {
            v: f,
            d: f1 * self.d,
            dd: f2 * self.d * self.d + f1 * self.dd,
        }
    }

    pub fn recip(self) -> Self {
        let inv = 1.0 / self.v;
        self.chain(inv, -inv * inv, 2.0 * inv * inv * inv)
    }

    pub fn powf(self, p: f64) -> Self {
        if p == 0.0 {
            return Self::constant(1.0);
        }
        if p.fract() == 0.0 && p.abs() < 64.0 {
            let n = p as i32;
            if n == 1 {
                return self;
            }
            let x = self.v;
            return self.chain(x.powi(n), p * x.powi(n - 1), p * (p - 1.0) * x.powi(n - 2));
        }
        let x = self.v;
        self.chain(x.powf(p), p * x.powf(p - 1.0), p * (p - 1.0) * x.powf(p - 2.0))
    }

    pub fn sqrt(self) -> Self {
        let r = self.v.sqrt();
        self.chain(r, 0.5 / r, -0.25 / (r * self.v))
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn ln(self) -> Self {
        let inv = 1.0 / self.v;
        self.chain(self.v.ln(), inv, -inv * inv)
    }

    pub fn scale(self, c: f64) -> Self {
        Self::new(c * self.v, c * self.d, c * self.dd)
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.d.is_finite() && self.dd.is_finite()
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet::new(self.v + o.v, self.d + o.d, self.dd + o.dd)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet::new(self.v - o.v, self.d - o.d, self.dd - o.dd)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet::new(
            self.v * o.v,
            self.d * o.v + self.v * o.d,
            self.dd * o.v + 2.0 * self.d * o.d + self.v * o.dd,
        )
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, c: f64) -> Jet {
        Jet::new(self.v + c, self.d, self.dd)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, c: f64) -> Jet {
        self.scale(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fd(f: impl Fn(f64) -> f64, x: f64) -> (f64, f64) {
        let h = 1e-4;
        let d = (f(x + h) - f(x - h)) / (2.0 * h);
        let dd = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        (d, dd)
    }

    #[test]
    fn composite_matches_finite_differences() {
        let f = |x: f64| (x * x + 1.0).sqrt() * (x - 0.3).sin() / x.exp();
        let jf = |x: Jet| (x * x + 1.0).sqrt() * (x + (-0.3)).sin() / x.exp();
        for &x in &[0.2, 1.0, 2.7] {
            let j = jf(Jet::variable(x));
            let (d, dd) = fd(f, x);
            assert_relative_eq!(j.v, f(x), max_relative = 1e-14);
            assert_relative_eq!(j.d, d, max_relative = 1e-7);
            assert_relative_eq!(j.dd, dd, max_relative = 1e-5);
        }
    }

    #[test]
    fn integer_powers_at_zero_are_finite() {
        let j = Jet::variable(0.0).powf(2.0);
        assert_eq!((j.v, j.d, j.dd), (0.0, 0.0, 2.0));
        let j = Jet::variable(0.0).powf(1.0);
        assert_eq!((j.v, j.d, j.dd), (0.0, 1.0, 0.0));
        let j = Jet::variable(-2.0).powf(3.0);
        assert_eq!((j.v, j.d, j.dd), (-8.0, 12.0, -12.0));
    }

    #[test]
    fn negative_powers_and_logs() {
        let j = Jet::variable(2.0).powf(-2.0);
        assert_relative_eq!(j.v, 0.25);
        assert_relative_eq!(j.d, -0.25);
        assert_relative_eq!(j.dd, 6.0 / 16.0);
        let l = Jet::variable(2.0).ln();
        assert_relative_eq!(l.d, 0.5);
        assert_relative_eq!(l.dd, -0.25);
    }
}
