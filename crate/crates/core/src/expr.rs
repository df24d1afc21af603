//! Scalar functions of one variable used for the metric coefficients.
//!
//! Coefficients are either expression trees, which carry exact first and
//! second derivatives through [`Jet`] evaluation, or opaque closures whose
//! derivatives fall back to central differences.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::jet::Jet;

/// Expression in a single variable `x`.
///
/// In a coefficient spec `x` is the total mass `m`; in a radial function it is
/// `r`; in a direct warping profile it is the arc-length coordinate `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expr {
    Const(f64),
    Var,
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
    Neg(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
    Ln(Box<Expr>),
    Sqrt(Box<Expr>),
}

/// End of the half line `(0, ∞)` at which smooth extendability is examined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    Zero,
    /// Extendability in the coordinate `u = 1/x` at `u = 0`.
    Infinity,
}

impl Expr {
    pub fn c(v: f64) -> Self {
        Expr::Const(v)
    }

    pub fn var() -> Self {
        Expr::Var
    }

    /// `coef · x^p`
    pub fn monomial(coef: f64, p: f64) -> Self {
        if coef == 0.0 {
            return Expr::Const(0.0);
        }
        let power = if p == 0.0 {
            Expr::Const(1.0)
        } else if p == 1.0 {
            Expr::Var
        } else {
            Expr::Pow(Box::new(Expr::Var), p)
        };
        if coef == 1.0 {
            power
        } else {
            Expr::Mul(vec![Expr::Const(coef), power])
        }
    }

    pub fn sin2(inner: Expr) -> Self {
        Expr::Pow(Box::new(Expr::Sin(Box::new(inner))), 2.0)
    }

    pub fn add(terms: Vec<Expr>) -> Self {
        Expr::Add(terms)
    }

    pub fn mul(factors: Vec<Expr>) -> Self {
        Expr::Mul(factors)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn div(num: Expr, den: Expr) -> Self {
        Expr::Div(Box::new(num), Box::new(den))
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var => x,
            Expr::Add(ts) => ts.iter().map(|t| t.eval(x)).sum(),
            Expr::Mul(fs) => fs.iter().map(|f| f.eval(x)).product(),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Pow(e, p) => {
                let v = e.eval(x);
                if p.fract() == 0.0 && p.abs() < 64.0 {
                    v.powi(*p as i32)
                } else {
                    v.powf(*p)
                }
            }
            Expr::Neg(e) => -e.eval(x),
            Expr::Sin(e) => e.eval(x).sin(),
            Expr::Cos(e) => e.eval(x).cos(),
            Expr::Exp(e) => e.eval(x).exp(),
            Expr::Ln(e) => e.eval(x).ln(),
            Expr::Sqrt(e) => e.eval(x).sqrt(),
        }
    }

    pub fn eval_jet(&self, x: Jet) -> Jet {
        match self {
            Expr::Const(c) => Jet::constant(*c),
            Expr::Var => x,
            Expr::Add(ts) => ts
                .iter()
                .fold(Jet::constant(0.0), |acc, t| acc + t.eval_jet(x)),
            Expr::Mul(fs) => fs
                .iter()
                .fold(Jet::constant(1.0), |acc, f| acc * f.eval_jet(x)),
            Expr::Div(a, b) => a.eval_jet(x) / b.eval_jet(x),
            Expr::Pow(e, p) => e.eval_jet(x).powf(*p),
            Expr::Neg(e) => -e.eval_jet(x),
            Expr::Sin(e) => e.eval_jet(x).sin(),
            Expr::Cos(e) => e.eval_jet(x).cos(),
            Expr::Exp(e) => e.eval_jet(x).exp(),
            Expr::Ln(e) => e.eval_jet(x).ln(),
            Expr::Sqrt(e) => e.eval_jet(x).sqrt(),
        }
    }

    /// Limit value at `end` if the expression is structurally smooth there.
    ///
    /// `None` means smooth extension could not be established. The analysis is
    /// conservative: nonnegative integer powers of `x`, constants, and
    /// sin/cos/exp compositions extend at zero; at infinity only nonpositive
    /// integer powers of `x` do. Quotients, roots and logs extend when the
    /// limit of the denominator (resp. argument) is nonzero (resp. positive).
    pub fn germ(&self, end: End) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            Expr::Var => match end {
                End::Zero => Some(0.0),
                End::Infinity => None,
            },
            Expr::Add(ts) => ts.iter().map(|t| t.germ(end)).sum(),
            Expr::Mul(fs) => {
                if fs.contains(&Expr::Const(0.0)) {
                    return Some(0.0);
                }
                fs.iter().map(|f| f.germ(end)).product()
            }
            Expr::Div(a, b) => {
                let den = b.germ(end)?;
                if den == 0.0 {
                    return None;
                }
                Some(a.germ(end)? / den)
            }
            Expr::Pow(e, p) => {
                let integer = p.fract() == 0.0;
                if **e == Expr::Var && end == End::Infinity {
                    return if integer && *p <= 0.0 {
                        Some(if *p == 0.0 { 1.0 } else { 0.0 })
                    } else {
                        None
                    };
                }
                let base = e.germ(end)?;
                if (integer && *p >= 0.0) || base > 0.0 {
                    Some(base.powf(*p))
                } else {
                    None
                }
            }
            Expr::Neg(e) => e.germ(end).map(|v| -v),
            Expr::Sin(e) => e.germ(end).map(f64::sin),
            Expr::Cos(e) => e.germ(end).map(f64::cos),
            Expr::Exp(e) => e.germ(end).map(f64::exp),
            Expr::Ln(e) => e.germ(end).filter(|v| *v > 0.0).map(f64::ln),
            Expr::Sqrt(e) => e.germ(end).filter(|v| *v > 0.0).map(f64::sqrt),
        }
    }

    /// Recognizes `c · x^p` (including plain constants) and returns `(c, p)`.
    pub fn as_monomial(&self) -> Option<(f64, f64)> {
        match self {
            Expr::Const(c) => Some((*c, 0.0)),
            Expr::Var => Some((1.0, 1.0)),
            Expr::Pow(e, p) if **e == Expr::Var => Some((1.0, *p)),
            Expr::Neg(e) => e.as_monomial().map(|(c, p)| (-c, p)),
            Expr::Mul(fs) => fs.iter().try_fold((1.0, 0.0), |(c, p), f| {
                f.as_monomial().map(|(c2, p2)| (c * c2, p + p2))
            }),
            _ => None,
        }
    }

    /// Replace the variable by another expression.
    pub fn substitute(&self, inner: &Expr) -> Expr {
        let sub = |e: &Expr| Box::new(e.substitute(inner));
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var => inner.clone(),
            Expr::Add(ts) => Expr::Add(ts.iter().map(|t| t.substitute(inner)).collect()),
            Expr::Mul(fs) => Expr::Mul(fs.iter().map(|f| f.substitute(inner)).collect()),
            Expr::Div(a, b) => Expr::Div(sub(a), sub(b)),
            Expr::Pow(e, p) => Expr::Pow(sub(e), *p),
            Expr::Neg(e) => Expr::Neg(sub(e)),
            Expr::Sin(e) => Expr::Sin(sub(e)),
            Expr::Cos(e) => Expr::Cos(sub(e)),
            Expr::Exp(e) => Expr::Exp(sub(e)),
            Expr::Ln(e) => Expr::Ln(sub(e)),
            Expr::Sqrt(e) => Expr::Sqrt(sub(e)),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, items: &[Expr], sep: &str| -> fmt::Result {
            write!(f, "(")?;
            for (i, it) in items.iter().enumerate() {
                if i > 0 {
                    write!(f, "{sep}")?;
                }
                write!(f, "{it}")?;
            }
            write!(f, ")")
        };
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var => write!(f, "x"),
            Expr::Add(ts) => join(f, ts, " + "),
            Expr::Mul(fs) => join(f, fs, "·"),
            Expr::Div(a, b) => write!(f, "({a})/({b})"),
            Expr::Pow(e, p) => write!(f, "{e}^{p}"),
            Expr::Neg(e) => write!(f, "-{e}"),
            Expr::Sin(e) => write!(f, "sin({e})"),
            Expr::Cos(e) => write!(f, "cos({e})"),
            Expr::Exp(e) => write!(f, "exp({e})"),
            Expr::Ln(e) => write!(f, "ln({e})"),
            Expr::Sqrt(e) => write!(f, "sqrt({e})"),
        }
    }
}

/// Opaque function with finite-difference derivatives.
#[derive(Clone)]
pub struct BlackBox {
    pub label: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl BlackBox {
    pub fn new(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    /// Central differences with step `h = max(1e-5, 1e-5·|x|)`.
    pub fn eval_jet(&self, x: Jet) -> Jet {
        let h = (1e-5 * x.v.abs()).max(1e-5);
        let f0 = self.eval(x.v);
        let fp = self.eval(x.v + h);
        let fm = self.eval(x.v - h);
        x.chain(f0, (fp - fm) / (2.0 * h), (fp - 2.0 * f0 + fm) / (h * h))
    }
}

impl fmt::Debug for BlackBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BlackBox({})", self.label)
    }
}

/// A scalar function of one variable.
#[derive(Debug, Clone)]
pub enum Coef {
    Expr(Expr),
    BlackBox(BlackBox),
}

impl Coef {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Coef::Expr(e) => e.eval(x),
            Coef::BlackBox(b) => b.eval(x),
        }
    }

    pub fn eval_jet(&self, x: Jet) -> Jet {
        match self {
            Coef::Expr(e) => e.eval_jet(x),
            Coef::BlackBox(b) => b.eval_jet(x),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.eval_jet(Jet::variable(x)).d
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        self.eval_jet(Jet::variable(x)).dd
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self, Coef::Expr(_))
    }

    /// Black-box functions never report smooth extendability.
    pub fn germ(&self, end: End) -> Option<f64> {
        match self {
            Coef::Expr(e) => e.germ(end),
            Coef::BlackBox(_) => None,
        }
    }

    pub fn as_expr(&self) -> Option<&Expr> {
        match self {
            Coef::Expr(e) => Some(e),
            Coef::BlackBox(_) => None,
        }
    }
}

impl From<Expr> for Coef {
    fn from(e: Expr) -> Self {
        Coef::Expr(e)
    }
}
