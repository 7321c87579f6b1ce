//! Forward-mode second-order jets.
//!
//! Every node carries its value, gradient and full Hessian with respect to
//! the chart coordinates. Hessians are assembled on the upper triangle and
//! mirrored, so they are symmetric bit for bit.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::expr::{Expr, Func, Node, PowKind};

#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

impl Jet2 {
    pub fn constant(n: usize, value: f64) -> Jet2 {
        Jet2 {
            value,
            gradient: DVector::zeros(n),
            hessian: DMatrix::zeros(n, n),
        }
    }

    pub fn variable(n: usize, index: usize, value: f64) -> Jet2 {
        let mut jet = Jet2::constant(n, value);
        jet.gradient[index] = 1.0;
        jet
    }

    pub fn dim(&self) -> usize {
        self.gradient.len()
    }

    /// Build a Hessian from an upper-triangle rule.
    fn symmetric(n: usize, mut upper: impl FnMut(usize, usize) -> f64) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = upper(i, j);
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        h
    }

    pub fn add(&self, o: &Jet2) -> Jet2 {
        let n = self.dim();
        Jet2 {
            value: self.value + o.value,
            gradient: &self.gradient + &o.gradient,
            hessian: Jet2::symmetric(n, |i, j| self.hessian[(i, j)] + o.hessian[(i, j)]),
        }
    }

    pub fn sub(&self, o: &Jet2) -> Jet2 {
        let n = self.dim();
        Jet2 {
            value: self.value - o.value,
            gradient: &self.gradient - &o.gradient,
            hessian: Jet2::symmetric(n, |i, j| self.hessian[(i, j)] - o.hessian[(i, j)]),
        }
    }

    pub fn neg(&self) -> Jet2 {
        Jet2 {
            value: -self.value,
            gradient: -&self.gradient,
            hessian: -&self.hessian,
        }
    }

    pub fn scale(&self, c: f64) -> Jet2 {
        Jet2 {
            value: c * self.value,
            gradient: &self.gradient * c,
            hessian: &self.hessian * c,
        }
    }

    pub fn mul(&self, o: &Jet2) -> Jet2 {
        let n = self.dim();
        let (a, b) = (self.value, o.value);
        let (ga, gb) = (&self.gradient, &o.gradient);
        Jet2 {
            value: a * b,
            gradient: gb * a + ga * b,
            hessian: Jet2::symmetric(n, |i, j| {
                a * o.hessian[(i, j)] + b * self.hessian[(i, j)] + ga[i] * gb[j] + gb[i] * ga[j]
            }),
        }
    }

    /// Apply a scalar function given its value and first two derivatives at `self.value`.
    pub fn chain(&self, f: f64, df: f64, d2f: f64) -> Jet2 {
        let n = self.dim();
        let g = &self.gradient;
        Jet2 {
            value: f,
            gradient: g * df,
            hessian: Jet2::symmetric(n, |i, j| df * self.hessian[(i, j)] + d2f * g[i] * g[j]),
        }
    }

    pub fn recip(&self) -> Jet2 {
        let u = self.value;
        self.chain(1.0 / u, -1.0 / (u * u), 2.0 / (u * u * u))
    }

    pub fn exp(&self) -> Jet2 {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn ln(&self) -> Jet2 {
        let u = self.value;
        self.chain(u.ln(), 1.0 / u, -1.0 / (u * u))
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.gradient.iter().all(|v| v.is_finite())
            && self.hessian.iter().all(|v| v.is_finite())
    }
}

/// Exact value, gradient and Hessian of `expr` at `p`.
pub fn eval_jet2(expr: &Expr, p: &[f64]) -> Result<Jet2> {
    expr.check_point(p)?;
    jet_node(expr.root(), p)
}

fn jet_node(node: &Node, p: &[f64]) -> Result<Jet2> {
    let n = p.len();
    let jet = match node {
        Node::Const(c) => Jet2::constant(n, *c),
        Node::Var(i) => Jet2::variable(n, *i, p[*i]),
        Node::Neg(a) => jet_node(a, p)?.neg(),
        Node::Add(a, b) => jet_node(a, p)?.add(&jet_node(b, p)?),
        Node::Sub(a, b) => jet_node(a, p)?.sub(&jet_node(b, p)?),
        Node::Mul(a, b) => jet_node(a, p)?.mul(&jet_node(b, p)?),
        Node::Div(a, b) => {
            let den = jet_node(b, p)?;
            if den.value == 0.0 {
                return Err(node.domain_error(p, "division by zero"));
            }
            jet_node(a, p)?.mul(&den.recip())
        }
        Node::Pow(a, b) => {
            let base = jet_node(a, p)?;
            match Node::pow_kind(b)? {
                PowKind::Integer(k) => {
                    if k < 0 && base.value == 0.0 {
                        return Err(node.domain_error(p, "zero base with negative exponent"));
                    }
                    let mut acc = Jet2::constant(n, 1.0);
                    for _ in 0..k.unsigned_abs() {
                        acc = acc.mul(&base);
                    }
                    if k < 0 {
                        acc.recip()
                    } else {
                        acc
                    }
                }
                PowKind::Real(c) => {
                    let u = base.value;
                    if u <= 0.0 {
                        return Err(node.domain_error(p, "non-positive base with real exponent"));
                    }
                    base.chain(u.powf(c), c * u.powf(c - 1.0), c * (c - 1.0) * u.powf(c - 2.0))
                }
                PowKind::Variable => {
                    if base.value <= 0.0 {
                        return Err(node.domain_error(p, "non-positive base with variable exponent"));
                    }
                    jet_node(b, p)?.mul(&base.ln()).exp()
                }
            }
        }
        Node::Call(f, a) => {
            let arg = jet_node(a, p)?;
            let u = arg.value;
            match f {
                Func::Exp => arg.exp(),
                Func::Ln => {
                    if u <= 0.0 {
                        return Err(node.domain_error(p, "logarithm of non-positive argument"));
                    }
                    arg.ln()
                }
                Func::Sin => arg.chain(u.sin(), u.cos(), -u.sin()),
                Func::Cos => arg.chain(u.cos(), -u.sin(), -u.cos()),
                Func::Sqrt => {
                    if u <= 0.0 {
                        return Err(node.domain_error(p, "square root needs a positive argument"));
                    }
                    let s = u.sqrt();
                    arg.chain(s, 0.5 / s, -0.25 / (s * u))
                }
            }
        }
    };
    if !jet.is_finite() {
        return Err(node.domain_error(p, "non-finite jet"));
    }
    Ok(jet)
}
