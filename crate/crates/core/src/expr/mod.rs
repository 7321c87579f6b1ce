//! Scalar field expressions over a named coordinate chart.
//!
//! An [`Expr`] is an immutable tree whose variables are resolved to chart
//! indices at parse (or build) time. Trees are evaluated either for their
//! value alone ([`Expr::eval`]) or as a second-order jet
//! ([`crate::jet::eval_jet2`]).

mod parser;
mod print;

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{GeomError, Result};

pub use parser::parse_expression;

/// Ordered coordinate names of a chart.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Chart {
    names: Vec<String>,
}

impl Chart {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Arc<Chart> {
        Arc::new(Chart {
            names: names.iter().map(|s| s.as_ref().to_string()).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// How a `^` node is evaluated once its exponent is known.
pub(crate) enum PowKind {
    /// Constant integer exponent: repeated multiplication.
    Integer(i32),
    /// Constant non-integer exponent: requires a positive base.
    Real(f64),
    /// Exponent depends on the chart: `exp(e * ln(base))`.
    Variable,
}

/// Integer exponents above this magnitude fall back to `powf`.
const MAX_INT_EXPONENT: f64 = 64.0;

impl Node {
    pub(crate) fn is_constant(&self) -> bool {
        match self {
            Node::Const(_) => true,
            Node::Var(_) => false,
            Node::Neg(a) | Node::Call(_, a) => a.is_constant(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.is_constant() && b.is_constant()
            }
        }
    }

    pub(crate) fn pow_kind(exponent: &Node) -> Result<PowKind> {
        if !exponent.is_constant() {
            return Ok(PowKind::Variable);
        }
        let c = exponent.eval_at(&[])?;
        if c.fract() == 0.0 && c.abs() <= MAX_INT_EXPONENT {
            Ok(PowKind::Integer(c as i32))
        } else {
            Ok(PowKind::Real(c))
        }
    }

    fn domain(&self, p: &[f64], reason: &str) -> GeomError {
        GeomError::Domain {
            node: print::render_anon(self),
            point: p.to_vec(),
            reason: reason.to_string(),
        }
    }

    pub(crate) fn domain_error(&self, p: &[f64], reason: &str) -> GeomError {
        self.domain(p, reason)
    }

    /// Value-only evaluation; shares no derivative logic with the jet path.
    pub(crate) fn eval_at(&self, p: &[f64]) -> Result<f64> {
        let v = match self {
            Node::Const(c) => *c,
            Node::Var(i) => p[*i],
            Node::Neg(a) => -a.eval_at(p)?,
            Node::Add(a, b) => a.eval_at(p)? + b.eval_at(p)?,
            Node::Sub(a, b) => a.eval_at(p)? - b.eval_at(p)?,
            Node::Mul(a, b) => a.eval_at(p)? * b.eval_at(p)?,
            Node::Div(a, b) => {
                let den = b.eval_at(p)?;
                if den == 0.0 {
                    return Err(self.domain(p, "division by zero"));
                }
                a.eval_at(p)? / den
            }
            Node::Pow(a, b) => {
                let base = a.eval_at(p)?;
                match Node::pow_kind(b)? {
                    PowKind::Integer(k) => {
                        if k < 0 && base == 0.0 {
                            return Err(self.domain(p, "zero base with negative exponent"));
                        }
                        let mut acc = 1.0;
                        for _ in 0..k.unsigned_abs() {
                            acc *= base;
                        }
                        if k < 0 {
                            1.0 / acc
                        } else {
                            acc
                        }
                    }
                    PowKind::Real(c) => {
                        if base <= 0.0 {
                            return Err(self.domain(p, "non-positive base with real exponent"));
                        }
                        base.powf(c)
                    }
                    PowKind::Variable => {
                        if base <= 0.0 {
                            return Err(self.domain(p, "non-positive base with variable exponent"));
                        }
                        (b.eval_at(p)? * base.ln()).exp()
                    }
                }
            }
            Node::Call(f, a) => {
                let u = a.eval_at(p)?;
                match f {
                    Func::Exp => u.exp(),
                    Func::Ln => {
                        if u <= 0.0 {
                            return Err(self.domain(p, "logarithm of non-positive argument"));
                        }
                        u.ln()
                    }
                    Func::Sin => u.sin(),
                    Func::Cos => u.cos(),
                    Func::Sqrt => {
                        if u < 0.0 {
                            return Err(self.domain(p, "square root of negative argument"));
                        }
                        u.sqrt()
                    }
                }
            }
        };
        if !v.is_finite() {
            return Err(self.domain(p, "non-finite value"));
        }
        Ok(v)
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            Node::Const(_) => None,
            Node::Var(i) => Some(*i),
            Node::Neg(a) | Node::Call(_, a) => a.max_var(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.max_var().max(b.max_var())
            }
        }
    }

    fn depends_on(&self, var: usize) -> bool {
        match self {
            Node::Const(_) => false,
            Node::Var(i) => *i == var,
            Node::Neg(a) | Node::Call(_, a) => a.depends_on(var),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.depends_on(var) || b.depends_on(var)
            }
        }
    }

    fn map_vars(&self, f: &impl Fn(usize) -> usize) -> Node {
        let bx = |n: &Node| Box::new(n.map_vars(f));
        match self {
            Node::Const(c) => Node::Const(*c),
            Node::Var(i) => Node::Var(f(*i)),
            Node::Neg(a) => Node::Neg(bx(a)),
            Node::Call(g, a) => Node::Call(*g, bx(a)),
            Node::Add(a, b) => Node::Add(bx(a), bx(b)),
            Node::Sub(a, b) => Node::Sub(bx(a), bx(b)),
            Node::Mul(a, b) => Node::Mul(bx(a), bx(b)),
            Node::Div(a, b) => Node::Div(bx(a), bx(b)),
            Node::Pow(a, b) => Node::Pow(bx(a), bx(b)),
        }
    }
}

/// A scalar field expression bound to a chart.
#[derive(Debug, Clone)]
pub struct Expr {
    root: Node,
    chart: Arc<Chart>,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root && self.chart == other.chart
    }
}

impl Expr {
    pub fn from_node(chart: &Arc<Chart>, root: Node) -> Result<Expr> {
        if let Some(i) = root.max_var() {
            if i >= chart.dim() {
                return Err(GeomError::Invalid(format!(
                    "variable index {i} outside chart of dimension {}",
                    chart.dim()
                )));
            }
        }
        Ok(Expr {
            root,
            chart: chart.clone(),
        })
    }

    /// Negative values are stored as `Neg(Const)`, matching what the parser builds.
    pub fn constant(chart: &Arc<Chart>, c: f64) -> Expr {
        let root = if c < 0.0 {
            Node::Neg(Box::new(Node::Const(-c)))
        } else {
            Node::Const(c)
        };
        Expr {
            root,
            chart: chart.clone(),
        }
    }

    /// Panics if `name` is not a chart coordinate.
    pub fn var(chart: &Arc<Chart>, name: &str) -> Expr {
        let i = chart
            .index_of(name)
            .unwrap_or_else(|| panic!("`{name}` is not a coordinate of the chart"));
        Expr {
            root: Node::Var(i),
            chart: chart.clone(),
        }
    }

    pub fn var_index(chart: &Arc<Chart>, i: usize) -> Expr {
        assert!(i < chart.dim());
        Expr {
            root: Node::Var(i),
            chart: chart.clone(),
        }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn is_constant(&self) -> bool {
        self.root.is_constant()
    }

    pub fn depends_on(&self, var: usize) -> bool {
        self.root.depends_on(var)
    }

    pub(crate) fn check_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(GeomError::DimensionMismatch {
                expected: self.dim(),
                got: p.len(),
            });
        }
        Ok(())
    }

    pub fn eval(&self, p: &[f64]) -> Result<f64> {
        self.check_point(p)?;
        self.root.eval_at(p)
    }

    /// Re-home the expression on `target`, sending coordinate `i` to `offset + i`.
    pub fn lift(&self, target: &Arc<Chart>, offset: usize) -> Result<Expr> {
        Expr::from_node(target, self.root.map_vars(&|i| i + offset))
    }

    fn with_root(&self, root: Node) -> Expr {
        Expr {
            root,
            chart: self.chart.clone(),
        }
    }

    fn binary(self, rhs: Expr, op: fn(Box<Node>, Box<Node>) -> Node) -> Expr {
        assert_eq!(self.chart, rhs.chart, "expressions live on different charts");
        let chart = self.chart;
        Expr {
            root: op(Box::new(self.root), Box::new(rhs.root)),
            chart,
        }
    }

    fn call(&self, f: Func) -> Expr {
        self.with_root(Node::Call(f, Box::new(self.root.clone())))
    }

    pub fn exp(&self) -> Expr {
        self.call(Func::Exp)
    }

    pub fn ln(&self) -> Expr {
        self.call(Func::Ln)
    }

    pub fn sin(&self) -> Expr {
        self.call(Func::Sin)
    }

    pub fn cos(&self) -> Expr {
        self.call(Func::Cos)
    }

    pub fn sqrt(&self) -> Expr {
        self.call(Func::Sqrt)
    }

    pub fn powi(&self, k: i32) -> Expr {
        let exponent = if k < 0 {
            Node::Neg(Box::new(Node::Const(-(k as f64))))
        } else {
            Node::Const(k as f64)
        };
        self.with_root(Node::Pow(Box::new(self.root.clone()), Box::new(exponent)))
    }

    pub fn scale(&self, c: f64) -> Expr {
        Expr::constant(&self.chart, c) * self.clone()
    }

    /// Symbolic partial derivative with respect to coordinate `var`, lightly folded.
    pub fn derivative(&self, var: usize) -> Expr {
        self.with_root(fold(&diff(&self.root, var)))
    }

    /// Constant folding and identity removal (`x*1`, `x+0`, `x/x`, ...).
    pub fn folded(&self) -> Expr {
        self.with_root(fold(&self.root))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::render(&self.root, self.chart.names()))
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        self.binary(rhs, Node::Add)
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        self.binary(rhs, Node::Sub)
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        self.binary(rhs, Node::Mul)
    }
}

impl Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        self.binary(rhs, Node::Div)
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        let chart = self.chart;
        Expr {
            root: Node::Neg(Box::new(self.root)),
            chart,
        }
    }
}

fn c(v: f64) -> Box<Node> {
    Box::new(Node::Const(v))
}

fn b(n: Node) -> Box<Node> {
    Box::new(n)
}

fn diff(n: &Node, var: usize) -> Node {
    use Node::*;
    match n {
        Const(_) => Const(0.0),
        Var(i) => Const(if *i == var { 1.0 } else { 0.0 }),
        Neg(a) => Neg(b(diff(a, var))),
        Add(x, y) => Add(b(diff(x, var)), b(diff(y, var))),
        Sub(x, y) => Sub(b(diff(x, var)), b(diff(y, var))),
        Mul(x, y) => Add(b(Mul(b(diff(x, var)), y.clone())), b(Mul(x.clone(), b(diff(y, var))))),
        Div(x, y) => Div(
            b(Sub(
                b(Mul(b(diff(x, var)), y.clone())),
                b(Mul(x.clone(), b(diff(y, var)))),
            )),
            b(Pow(y.clone(), c(2.0))),
        ),
        Pow(x, e) => {
            if e.is_constant() {
                // d(u^k) = k u^(k-1) u'
                Mul(
                    b(Mul(e.clone(), b(Pow(x.clone(), b(Sub(e.clone(), c(1.0))))))),
                    b(diff(x, var)),
                )
            } else {
                // d(u^e) = u^e (e' ln u + e u'/u)
                Mul(
                    b(n.clone()),
                    b(Add(
                        b(Mul(b(diff(e, var)), b(Call(Func::Ln, x.clone())))),
                        b(Div(b(Mul(e.clone(), b(diff(x, var)))), x.clone())),
                    )),
                )
            }
        }
        Call(f, a) => {
            let outer = match f {
                Func::Exp => Call(Func::Exp, a.clone()),
                Func::Ln => Div(c(1.0), a.clone()),
                Func::Sin => Call(Func::Cos, a.clone()),
                Func::Cos => Neg(b(Call(Func::Sin, a.clone()))),
                Func::Sqrt => Div(c(1.0), b(Mul(c(2.0), b(Call(Func::Sqrt, a.clone()))))),
            };
            Mul(b(outer), b(diff(a, var)))
        }
    }
}

fn as_const(n: &Node) -> Option<f64> {
    match n {
        Node::Const(v) => Some(*v),
        Node::Neg(a) => match **a {
            Node::Const(v) => Some(-v),
            _ => None,
        },
        _ => None,
    }
}

/// Build a constant node; negatives keep the parser's `Neg(Const)` shape.
fn const_node(v: f64) -> Node {
    if v < 0.0 {
        Node::Neg(c(-v))
    } else {
        Node::Const(v)
    }
}

fn fold(n: &Node) -> Node {
    use Node::*;
    match n {
        Const(_) | Var(_) => n.clone(),
        Neg(a) => {
            let a = fold(a);
            match a {
                Const(0.0) => Const(0.0),
                Neg(inner) => *inner,
                other => Neg(b(other)),
            }
        }
        Call(f, a) => Call(*f, b(fold(a))),
        Add(x, y) => {
            let (x, y) = (fold(x), fold(y));
            match (as_const(&x), as_const(&y)) {
                (Some(p), Some(q)) => const_node(p + q),
                (Some(0.0), _) => y,
                (_, Some(0.0)) => x,
                _ => Add(b(x), b(y)),
            }
        }
        Sub(x, y) => {
            let (x, y) = (fold(x), fold(y));
            match (as_const(&x), as_const(&y)) {
                (Some(p), Some(q)) => const_node(p - q),
                (_, Some(0.0)) => x,
                (Some(0.0), _) => Neg(b(y)),
                _ => Sub(b(x), b(y)),
            }
        }
        Mul(x, y) => {
            let (x, y) = (fold(x), fold(y));
            match (as_const(&x), as_const(&y)) {
                (Some(p), Some(q)) => const_node(p * q),
                (Some(0.0), _) | (_, Some(0.0)) => Const(0.0),
                (Some(1.0), _) => y,
                (_, Some(1.0)) => x,
                (None, Some(_)) => Mul(b(y), b(x)),
                _ => Mul(b(x), b(y)),
            }
        }
        Div(x, y) => {
            let (x, y) = (fold(x), fold(y));
            match (as_const(&x), as_const(&y)) {
                (Some(p), Some(q)) if q != 0.0 => const_node(p / q),
                (Some(0.0), _) => Const(0.0),
                (_, Some(1.0)) => x,
                _ if x == y => Const(1.0),
                _ => Div(b(x), b(y)),
            }
        }
        Pow(x, e) => {
            let (x, e) = (fold(x), fold(e));
            match (as_const(&x), as_const(&e)) {
                (_, Some(0.0)) => Const(1.0),
                (_, Some(1.0)) => x,
                (Some(1.0), _) => Const(1.0),
                (Some(_), Some(_)) => {
                    let folded = Pow(b(x), b(e));
                    match folded.eval_at(&[]) {
                        Ok(v) => const_node(v),
                        Err(_) => folded,
                    }
                }
                _ => Pow(b(x), b(e)),
            }
        }
    }
}
