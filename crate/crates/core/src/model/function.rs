//! Rate functions: parameter families plus the expression DSL.

use std::fmt;

use super::expr::Expr;
use crate::Result;

#[derive(Clone, Debug, PartialEq)]
pub enum FunctionSpec {
    /// a·x + b
    Affine { a: f64, b: f64 },
    /// a·x^b, with a·x^0 = a and 0·x^b = 0.
    Power { a: f64, b: f64 },
    /// a·x² + b·x
    QuadraticAffine { a: f64, b: f64 },
    Expression(Expr),
}

impl FunctionSpec {
    pub fn zero() -> Self {
        FunctionSpec::Affine { a: 0.0, b: 0.0 }
    }

    pub fn constant(c: f64) -> Self {
        FunctionSpec::Affine { a: 0.0, b: c }
    }

    pub fn linear(a: f64) -> Self {
        FunctionSpec::Affine { a, b: 0.0 }
    }

    pub fn affine(a: f64, b: f64) -> Self {
        FunctionSpec::Affine { a, b }
    }

    pub fn power(a: f64, b: f64) -> Self {
        FunctionSpec::Power { a, b }
    }

    pub fn quadratic_affine(a: f64, b: f64) -> Self {
        FunctionSpec::QuadraticAffine { a, b }
    }

    pub fn expression(text: &str) -> Result<Self> {
        Ok(FunctionSpec::Expression(Expr::parse(text)?))
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            FunctionSpec::Affine { a, b } => {
                if *a == 0.0 {
                    *b
                } else {
                    a * x + b
                }
            }
            FunctionSpec::Power { a, b } => {
                if *a == 0.0 {
                    0.0
                } else if *b == 0.0 {
                    *a
                } else {
                    a * x.powf(*b)
                }
            }
            FunctionSpec::QuadraticAffine { a, b } => {
                let lin = if *b == 0.0 { 0.0 } else { b * x };
                if *a == 0.0 {
                    lin
                } else {
                    a * x * x + lin
                }
            }
            FunctionSpec::Expression(e) => e.eval(x),
        }
    }

    /// Derivative: closed form for the families, central difference otherwise.
    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            FunctionSpec::Affine { a, .. } => *a,
            FunctionSpec::Power { a, b } => {
                if *a == 0.0 || *b == 0.0 {
                    0.0
                } else if *b == 1.0 {
                    *a
                } else {
                    a * b * x.powf(b - 1.0)
                }
            }
            FunctionSpec::QuadraticAffine { a, b } => 2.0 * a * x + b,
            FunctionSpec::Expression(e) => {
                let h = 1e-6 * x.abs().max(1e-3);
                if x >= h {
                    (e.eval(x + h) - e.eval(x - h)) / (2.0 * h)
                } else {
                    (e.eval(x + h) - e.eval(x)) / h
                }
            }
        }
    }

    /// `Some(c)` when the function is exactly c·x.
    pub fn linear_coefficient(&self) -> Option<f64> {
        match self.polynomial() {
            Some([0.0, c, 0.0]) => Some(c),
            _ => None,
        }
    }

    /// `Some(c)` when the function is the constant c.
    pub fn constant_value(&self) -> Option<f64> {
        match self.polynomial() {
            Some([c, 0.0, 0.0]) => Some(c),
            _ => None,
        }
    }

    /// `Some((slope, intercept))` when the function is affine.
    pub fn affine_coefficients(&self) -> Option<(f64, f64)> {
        match self.polynomial() {
            Some([c0, c1, 0.0]) => Some((c1, c0)),
            _ => None,
        }
    }

    /// Coefficients [c0, c1, c2] of c0 + c1·x + c2·x² when the function is such a polynomial.
    pub fn polynomial(&self) -> Option<[f64; 3]> {
        match *self {
            FunctionSpec::Affine { a, b } => Some([b, a, 0.0]),
            FunctionSpec::QuadraticAffine { a, b } => Some([0.0, b, a]),
            FunctionSpec::Power { a, b } => {
                if a == 0.0 {
                    Some([0.0; 3])
                } else if b == 0.0 {
                    Some([a, 0.0, 0.0])
                } else if b == 1.0 {
                    Some([0.0, a, 0.0])
                } else if b == 2.0 {
                    Some([0.0, 0.0, a])
                } else {
                    None
                }
            }
            FunctionSpec::Expression(_) => None,
        }
    }

    /// Exponent γ with |f(x)| ≤ c₁x^γ + c₂, known in closed form for the families.
    pub fn growth_exponent(&self) -> Option<f64> {
        match *self {
            FunctionSpec::Power { a, b } if a != 0.0 => Some(b.max(0.0)),
            FunctionSpec::Expression(_) => None,
            _ => {
                let [_, c1, c2] = self.polynomial()?;
                Some(if c2 != 0.0 {
                    2.0
                } else if c1 != 0.0 {
                    1.0
                } else {
                    0.0
                })
            }
        }
    }

    pub fn is_identically_zero(&self) -> bool {
        matches!(self.polynomial(), Some([0.0, 0.0, 0.0]))
    }

    pub fn form_name(&self) -> &'static str {
        match self {
            FunctionSpec::Affine { .. } => "affine",
            FunctionSpec::Power { .. } => "power",
            FunctionSpec::QuadraticAffine { .. } => "quadratic-affine",
            FunctionSpec::Expression(_) => "expression",
        }
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSpec::Affine { a, b } => write!(f, "affine({a}, {b})"),
            FunctionSpec::Power { a, b } => write!(f, "power({a}, {b})"),
            FunctionSpec::QuadraticAffine { a, b } => write!(f, "quadratic-affine({a}, {b})"),
            FunctionSpec::Expression(e) => write!(f, "expression({e})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_evaluate() {
        assert_eq!(FunctionSpec::affine(2.0, 1.0).eval(3.0), 7.0);
        assert_eq!(FunctionSpec::power(2.0, 0.5).eval(4.0), 4.0);
        assert_eq!(FunctionSpec::power(3.0, 0.0).eval(0.0), 3.0);
        assert_eq!(FunctionSpec::power(0.0, 1.0).eval(5.0), 0.0);
        assert_eq!(FunctionSpec::power(0.0, -1.0).eval(0.0), 0.0);
        assert_eq!(FunctionSpec::quadratic_affine(1.0, 2.0).eval(3.0), 15.0);
    }

    #[test]
    fn structure_queries() {
        assert_eq!(FunctionSpec::affine(2.0, 0.0).linear_coefficient(), Some(2.0));
        assert_eq!(FunctionSpec::quadratic_affine(0.0, 3.0).linear_coefficient(), Some(3.0));
        assert_eq!(FunctionSpec::power(4.0, 1.0).linear_coefficient(), Some(4.0));
        assert_eq!(FunctionSpec::affine(2.0, 1.0).linear_coefficient(), None);
        assert_eq!(FunctionSpec::affine(0.0, 0.5).constant_value(), Some(0.5));
        assert_eq!(FunctionSpec::power(0.0, 1.0).constant_value(), Some(0.0));
        assert!(FunctionSpec::power(0.0, 1.0).is_identically_zero());
        assert_eq!(FunctionSpec::quadratic_affine(1.0, 0.0).growth_exponent(), Some(2.0));
        assert_eq!(FunctionSpec::power(1.0, 1.5).growth_exponent(), Some(1.5));
    }

    #[test]
    fn expression_derivative_is_close() {
        let f = FunctionSpec::expression("x^3 + exp(x)").unwrap();
        let d = f.derivative(1.3);
        assert!((d - (3.0 * 1.69 + 1.3f64.exp())).abs() < 1e-6);
    }
}
