//! Scalar fields that can produce jets: plain expressions, and expressions
//! augmented by a quadrature-backed function of one coordinate.

use std::fmt;
use std::sync::Arc;

use crate::error::Result;
use crate::expr::Expr;
use crate::jet::{eval_jet2, Jet2};

pub trait ScalarField: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn value(&self, p: &[f64]) -> Result<f64>;

    fn jet(&self, p: &[f64]) -> Result<Jet2>;

    /// The symbolic form, when the field is a plain expression.
    fn as_expr(&self) -> Option<&Expr> {
        None
    }

    fn describe(&self) -> String;
}

impl ScalarField for Expr {
    fn dim(&self) -> usize {
        Expr::dim(self)
    }

    fn value(&self, p: &[f64]) -> Result<f64> {
        self.eval(p)
    }

    fn jet(&self, p: &[f64]) -> Result<Jet2> {
        eval_jet2(self, p)
    }

    fn as_expr(&self) -> Option<&Expr> {
        Some(self)
    }

    fn describe(&self) -> String {
        self.to_string()
    }
}

/// A function of one real variable known through its value and first two
/// derivatives, typically backed by quadrature.
pub trait Profile: Send + Sync + fmt::Debug {
    fn eval(&self, s: f64) -> Result<[f64; 3]>;

    fn name(&self) -> String;
}

/// `expr(p) + profile(p[axis])`.
#[derive(Debug, Clone)]
pub struct ProfiledField {
    pub expr: Expr,
    pub profile: Arc<dyn Profile>,
    pub axis: usize,
}

impl ScalarField for ProfiledField {
    fn dim(&self) -> usize {
        self.expr.dim()
    }

    fn value(&self, p: &[f64]) -> Result<f64> {
        Ok(self.expr.eval(p)? + self.profile.eval(p[self.axis])?[0])
    }

    fn jet(&self, p: &[f64]) -> Result<Jet2> {
        let mut jet = eval_jet2(&self.expr, p)?;
        let [v, d1, d2] = self.profile.eval(p[self.axis])?;
        let a = self.axis;
        jet.value += v;
        jet.gradient[a] += d1;
        jet.hessian[(a, a)] += d2;
        Ok(jet)
    }

    fn describe(&self) -> String {
        let name = &self.expr.chart().names()[self.axis];
        let profile = format!("{}({name})", self.profile.name());
        if self.expr.is_constant() && self.expr.eval(&vec![0.0; self.dim()]).ok() == Some(0.0) {
            profile
        } else {
            format!("{} + {profile}", self.expr)
        }
    }
}

/// `exp(-phi/m)` for a field without symbolic form; the jet follows by the chain rule.
#[derive(Debug, Clone)]
pub struct ExpScaledField {
    pub inner: Arc<dyn ScalarField>,
    pub factor: f64,
}

impl ScalarField for ExpScaledField {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, p: &[f64]) -> Result<f64> {
        Ok((self.factor * self.inner.value(p)?).exp())
    }

    fn jet(&self, p: &[f64]) -> Result<Jet2> {
        Ok(self.inner.jet(p)?.scale(self.factor).exp())
    }

    fn describe(&self) -> String {
        format!("exp({}*({}))", self.factor, self.inner.describe())
    }
}

/// The substitution field `theta = exp(-phi/m)`, built symbolically when `phi` is an expression.
pub fn theta_field(phi: &Arc<dyn ScalarField>, m: f64) -> Arc<dyn ScalarField> {
    match phi.as_expr() {
        Some(e) => {
            let chart = e.chart().clone();
            let theta = (-(e.clone()) / Expr::constant(&chart, m)).exp();
            Arc::new(theta)
        }
        None => Arc::new(ExpScaledField {
            inner: phi.clone(),
            factor: -1.0 / m,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expression, Chart};

    #[derive(Debug)]
    struct Square;

    impl Profile for Square {
        fn eval(&self, s: f64) -> Result<[f64; 3]> {
            Ok([s * s, 2.0 * s, 2.0])
        }
        fn name(&self) -> String {
            "Q".into()
        }
    }

    #[test]
    fn profiled_field_adds_on_its_axis() {
        let c = Chart::new(&["x", "t"]);
        let f = ProfiledField {
            expr: parse_expression("x*t", &c).unwrap(),
            profile: Arc::new(Square),
            axis: 1,
        };
        let j = f.jet(&[2.0, 3.0]).unwrap();
        assert_eq!(j.value, 6.0 + 9.0);
        assert_eq!(j.gradient.as_slice(), &[3.0, 2.0 + 6.0]);
        assert_eq!(j.hessian[(1, 1)], 2.0);
        assert_eq!(j.hessian[(0, 1)], 1.0);
        assert_eq!(f.describe(), "x*t + Q(t)");
    }

    #[test]
    fn theta_routes_agree() {
        let c = Chart::new(&["x", "y"]);
        let phi: Arc<dyn ScalarField> = Arc::new(parse_expression("x^2*y + sin(y)", &c).unwrap());
        let symbolic = theta_field(&phi, 2.5);
        assert!(symbolic.as_expr().is_some());
        let chained = ExpScaledField {
            inner: phi.clone(),
            factor: -1.0 / 2.5,
        };
        let p = [0.4, -1.2];
        let (a, b) = (symbolic.jet(&p).unwrap(), chained.jet(&p).unwrap());
        assert!((a.value - b.value).abs() < 1e-14);
        assert!((&a.hessian - &b.hessian).amax() < 1e-13);
    }
}
