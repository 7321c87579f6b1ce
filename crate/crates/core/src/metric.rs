//! Metric fields over a chart and their pointwise evaluation.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{GeomError, Result};
use crate::expr::{Chart, Expr};
use crate::fd::finite_diff_jet2_richardson;
use crate::jet::{eval_jet2, Jet2};

/// Determinants below this magnitude are treated as singular.
pub const SINGULAR_DET: f64 = 1e-12;

/// Counts of negative and positive metric eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature {
    pub negative: usize,
    pub positive: usize,
}

impl Signature {
    pub fn riemannian(n: usize) -> Signature {
        Signature {
            negative: 0,
            positive: n,
        }
    }

    pub fn lorentzian(n: usize) -> Signature {
        Signature {
            negative: 1,
            positive: n - 1,
        }
    }

    pub fn neutral(n: usize) -> Signature {
        Signature {
            negative: n / 2,
            positive: n - n / 2,
        }
    }

    pub fn dim(&self) -> usize {
        self.negative + self.positive
    }

    /// Parse a sign pattern such as `-++` or `(-,-,+,+)`.
    pub fn parse(s: &str) -> Result<Signature> {
        let mut sig = Signature {
            negative: 0,
            positive: 0,
        };
        for ch in s.chars() {
            match ch {
                '-' | '−' => sig.negative += 1,
                '+' => sig.positive += 1,
                '(' | ')' | ',' | ' ' => {}
                other => {
                    return Err(GeomError::Invalid(format!(
                        "bad signature character `{other}` in `{s}`"
                    )))
                }
            }
        }
        if sig.dim() == 0 {
            return Err(GeomError::Invalid(format!("empty signature `{s}`")));
        }
        Ok(sig)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let signs: Vec<&str> = std::iter::repeat_n("-", self.negative)
            .chain(std::iter::repeat_n("+", self.positive))
            .collect();
        write!(f, "({})", signs.join(","))
    }
}

/// Symmetric matrix of component expressions; only the upper triangle is stored.
#[derive(Debug, Clone)]
pub struct MetricField {
    chart: Arc<Chart>,
    upper: Vec<Expr>,
    signature: Signature,
}

fn upper_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

impl MetricField {
    pub fn from_fn(
        chart: &Arc<Chart>,
        signature: Signature,
        mut component: impl FnMut(usize, usize) -> Expr,
    ) -> Result<MetricField> {
        let n = chart.dim();
        if signature.dim() != n {
            return Err(GeomError::Invalid(format!(
                "signature {signature} does not match chart dimension {n}"
            )));
        }
        let mut upper = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                let e = component(i, j);
                if e.chart() != chart {
                    return Err(GeomError::Invalid(format!(
                        "component ({i},{j}) is on a different chart"
                    )));
                }
                upper.push(e);
            }
        }
        Ok(MetricField {
            chart: chart.clone(),
            upper,
            signature,
        })
    }

    /// Build from a full matrix, which must be structurally symmetric.
    #[allow(clippy::needless_range_loop)]
    pub fn from_matrix(chart: &Arc<Chart>, signature: Signature, rows: Vec<Vec<Expr>>) -> Result<MetricField> {
        let n = chart.dim();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(GeomError::Invalid(format!("metric must be {n}x{n}")));
        }
        for i in 0..n {
            for j in i + 1..n {
                if rows[i][j] != rows[j][i] {
                    return Err(GeomError::Invalid(format!(
                        "metric is not symmetric: ({i},{j}) = `{}` but ({j},{i}) = `{}`",
                        rows[i][j], rows[j][i]
                    )));
                }
            }
        }
        MetricField::from_fn(chart, signature, |i, j| rows[i][j].clone())
    }

    pub fn diagonal(chart: &Arc<Chart>, signature: Signature, diag: Vec<Expr>) -> Result<MetricField> {
        if diag.len() != chart.dim() {
            return Err(GeomError::Invalid("diagonal length does not match chart".into()));
        }
        MetricField::from_fn(chart, signature, |i, j| {
            if i == j {
                diag[i].clone()
            } else {
                Expr::constant(chart, 0.0)
            }
        })
    }

    /// Constant diagonal metric with the given signs (`-1` or `+1`).
    pub fn flat(chart: &Arc<Chart>, signs: &[f64]) -> Result<MetricField> {
        let negative = signs.iter().filter(|s| **s < 0.0).count();
        let sig = Signature {
            negative,
            positive: signs.len() - negative,
        };
        let diag = signs.iter().map(|s| Expr::constant(chart, *s)).collect();
        MetricField::diagonal(chart, sig, diag)
    }

    pub fn euclidean(chart: &Arc<Chart>) -> MetricField {
        MetricField::flat(chart, &vec![1.0; chart.dim()]).expect("euclidean metric")
    }

    /// Round 2-sphere of radius `r`: `r^2 (du^2 + sin(u)^2 dv^2)`.
    pub fn round_sphere(chart: &Arc<Chart>, r: f64) -> Result<MetricField> {
        if chart.dim() != 2 {
            return Err(GeomError::Invalid("round sphere needs a 2-dimensional chart".into()));
        }
        let r2 = Expr::constant(chart, r * r);
        let u = Expr::var_index(chart, 0);
        MetricField::diagonal(chart, Signature::riemannian(2), vec![r2.clone(), r2 * u.sin().powi(2)])
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn with_signature(mut self, signature: Signature) -> MetricField {
        self.signature = signature;
        self
    }

    pub fn component(&self, i: usize, j: usize) -> &Expr {
        &self.upper[upper_index(self.dim(), i, j)]
    }
}

/// Rank-3 array indexed `[a][b][c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(n: usize) -> Tensor3 {
        Tensor3 {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[(a * self.n + b) * self.n + c]
    }

    pub fn set(&mut self, a: usize, b: usize, c: usize, v: f64) {
        self.data[(a * self.n + b) * self.n + c] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Rank-4 array indexed `[a][b][c][d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Tensor4 {
        Tensor4 {
            n,
            data: vec![0.0; n * n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.data[((a * self.n + b) * self.n + c) * self.n + d]
    }

    pub fn set(&mut self, a: usize, b: usize, c: usize, d: usize, v: f64) {
        self.data[((a * self.n + b) * self.n + c) * self.n + d] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// A metric and its first two partials at one point.
///
/// `dg.get(k, i, j)` is `∂_k g_ij` and `d2g.get(k, l, i, j)` is `∂_k ∂_l g_ij`.
#[derive(Debug, Clone)]
pub struct MetricAtPoint {
    pub point: Vec<f64>,
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    pub dg: Tensor3,
    pub d2g: Tensor4,
}

impl MetricAtPoint {
    pub fn dim(&self) -> usize {
        self.g.nrows()
    }
}

fn count_signs(g: &DMatrix<f64>) -> Signature {
    let eig = SymmetricEigen::new(g.clone());
    let negative = eig.eigenvalues.iter().filter(|v| **v < 0.0).count();
    Signature {
        negative,
        positive: g.nrows() - negative,
    }
}

fn assemble(m: &MetricField, p: &[f64], jets: Vec<Jet2>) -> Result<MetricAtPoint> {
    let n = m.dim();
    let mut g = DMatrix::zeros(n, n);
    let mut dg = Tensor3::zeros(n);
    let mut d2g = Tensor4::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let jet = &jets[upper_index(n, i, j)];
            g[(i, j)] = jet.value;
            for k in 0..n {
                dg.set(k, i, j, jet.gradient[k]);
                for l in 0..n {
                    d2g.set(k, l, i, j, jet.hessian[(k, l)]);
                }
            }
        }
    }
    let det = g.determinant();
    if det.is_nan() || det.abs() < SINGULAR_DET {
        return Err(GeomError::SingularMetric { point: p.to_vec(), det });
    }
    let found = count_signs(&g);
    if found != m.signature() {
        return Err(GeomError::SignatureMismatch {
            point: p.to_vec(),
            expected: m.signature().to_string(),
            found: found.to_string(),
        });
    }
    let inv = g
        .clone()
        .try_inverse()
        .ok_or_else(|| GeomError::SingularMetric { point: p.to_vec(), det })?;
    let g_inv = (&inv + inv.transpose()) * 0.5;
    Ok(MetricAtPoint {
        point: p.to_vec(),
        g,
        g_inv,
        dg,
        d2g,
    })
}

fn check_dim(m: &MetricField, p: &[f64]) -> Result<()> {
    if p.len() != m.dim() {
        return Err(GeomError::DimensionMismatch {
            expected: m.dim(),
            got: p.len(),
        });
    }
    Ok(())
}

/// Components, inverse and exact first/second partials at `p`.
pub fn metric_at(m: &MetricField, p: &[f64]) -> Result<MetricAtPoint> {
    check_dim(m, p)?;
    let jets = m.upper.iter().map(|e| eval_jet2(e, p)).collect::<Result<Vec<_>>>()?;
    assemble(m, p, jets)
}

/// Same as [`metric_at`] but with partials from Richardson-extrapolated
/// central differences of step `h`; an independent route for cross-checks.
pub fn metric_at_fd(m: &MetricField, p: &[f64], h: f64) -> Result<MetricAtPoint> {
    check_dim(m, p)?;
    let jets = m
        .upper
        .iter()
        .map(|e| finite_diff_jet2_richardson(e, p, h))
        .collect::<Result<Vec<_>>>()?;
    assemble(m, p, jets)
}
