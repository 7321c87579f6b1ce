//! Levi-Civita connection and curvature at a point.
//!
//! Conventions:
//! - `Γ^k_ij = ½ g^kl (∂_i g_jl + ∂_j g_il − ∂_l g_ij)`, stored as `gamma.get(k, i, j)`.
//! - `R^l_kij = ∂_i Γ^l_jk − ∂_j Γ^l_ik + Γ^l_im Γ^m_jk − Γ^l_jm Γ^m_ik`, stored as
//!   `riemann.get(l, k, i, j)`.
//! - `R_jk = R^i_jik` and `τ = g^jk R_jk`; the unit 2-sphere has `τ = +2`.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::field::ScalarField;
use crate::jet::Jet2;
use crate::metric::{metric_at, MetricAtPoint, MetricField, Tensor3, Tensor4};

#[derive(Debug, Clone)]
pub struct Christoffel {
    pub gamma: Tensor3,
}

impl Christoffel {
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.gamma.get(k, i, j)
    }
}

/// `Γ_{l,ij}`, symmetric in `i, j` by construction.
fn first_kind(m: &MetricAtPoint) -> Tensor3 {
    let n = m.dim();
    let mut low = Tensor3::zeros(n);
    for l in 0..n {
        for i in 0..n {
            for j in i..n {
                let v = 0.5 * (m.dg.get(i, j, l) + m.dg.get(j, i, l) - m.dg.get(l, i, j));
                low.set(l, i, j, v);
                low.set(l, j, i, v);
            }
        }
    }
    low
}

fn raise(m: &MetricAtPoint, low: &Tensor3) -> Tensor3 {
    let n = m.dim();
    let mut gamma = Tensor3::zeros(n);
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let v: f64 = (0..n).map(|l| m.g_inv[(k, l)] * low.get(l, i, j)).sum();
                gamma.set(k, i, j, v);
                gamma.set(k, j, i, v);
            }
        }
    }
    gamma
}

pub fn christoffel(m: &MetricAtPoint) -> Christoffel {
    Christoffel {
        gamma: raise(m, &first_kind(m)),
    }
}

#[derive(Debug, Clone)]
pub struct CurvatureAtPoint {
    pub riemann: Tensor4,
    pub ricci: DMatrix<f64>,
    pub tau: f64,
}

impl CurvatureAtPoint {
    /// `R_lkij = g_la R^a_kij`.
    pub fn lowered(&self, g: &DMatrix<f64>) -> Tensor4 {
        let n = self.ricci.nrows();
        let mut out = Tensor4::zeros(n);
        for l in 0..n {
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let v: f64 = (0..n).map(|a| g[(l, a)] * self.riemann.get(a, k, i, j)).sum();
                        out.set(l, k, i, j, v);
                    }
                }
            }
        }
        out
    }
}

/// `∂_m Γ^k_ij`, stored as `get(m, k, i, j)`; uses second metric partials only.
fn christoffel_partials(m: &MetricAtPoint, low: &Tensor3) -> Tensor4 {
    let n = m.dim();
    let gi = &m.g_inv;
    let mut out = Tensor4::zeros(n);
    for d in 0..n {
        // ∂_d g^kl = −g^ka ∂_d g_ab g^bl
        let dg_d = DMatrix::from_fn(n, n, |a, b| m.dg.get(d, a, b));
        let d_inv = -(gi * dg_d * gi);
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    let mut v = 0.0;
                    for l in 0..n {
                        let d_low = 0.5 * (m.d2g.get(d, i, j, l) + m.d2g.get(d, j, i, l) - m.d2g.get(d, l, i, j));
                        v += d_inv[(k, l)] * low.get(l, i, j) + gi[(k, l)] * d_low;
                    }
                    out.set(d, k, i, j, v);
                    out.set(d, k, j, i, v);
                }
            }
        }
    }
    out
}

pub fn curvature_from(m: &MetricAtPoint) -> CurvatureAtPoint {
    let n = m.dim();
    let low = first_kind(m);
    let gamma = raise(m, &low);
    let dgamma = christoffel_partials(m, &low);
    let mut riemann = Tensor4::zeros(n);
    for l in 0..n {
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut v = dgamma.get(i, l, j, k) - dgamma.get(j, l, i, k);
                    for a in 0..n {
                        v += gamma.get(l, i, a) * gamma.get(a, j, k) - gamma.get(l, j, a) * gamma.get(a, i, k);
                    }
                    riemann.set(l, k, i, j, v);
                }
            }
        }
    }
    let ricci = DMatrix::from_fn(n, n, |j, k| (0..n).map(|i| riemann.get(i, j, i, k)).sum());
    let tau = (0..n)
        .flat_map(|j| (0..n).map(move |k| (j, k)))
        .map(|(j, k)| m.g_inv[(j, k)] * ricci[(j, k)])
        .sum();
    CurvatureAtPoint { riemann, ricci, tau }
}

pub fn curvature_at(m: &MetricField, p: &[f64]) -> Result<CurvatureAtPoint> {
    Ok(curvature_from(&metric_at(m, p)?))
}

/// Metric data and connection at one point, shared by the derivative operators.
#[derive(Debug, Clone)]
pub struct PointGeometry {
    pub metric: MetricAtPoint,
    pub christoffel: Christoffel,
}

impl PointGeometry {
    pub fn at(m: &MetricField, p: &[f64]) -> Result<PointGeometry> {
        let metric = metric_at(m, p)?;
        let christoffel = christoffel(&metric);
        Ok(PointGeometry { metric, christoffel })
    }

    pub fn from_metric(metric: MetricAtPoint) -> PointGeometry {
        let christoffel = christoffel(&metric);
        PointGeometry { metric, christoffel }
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    /// `∂_i ∂_j f − Γ^k_ij ∂_k f`, symmetric bit for bit.
    pub fn hessian(&self, jet: &Jet2) -> DMatrix<f64> {
        let n = self.dim();
        let mut h = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let corr: f64 = (0..n).map(|k| self.christoffel.get(k, i, j) * jet.gradient[k]).sum();
                let v = jet.hessian[(i, j)] - corr;
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        h
    }

    pub fn raise(&self, covector: &DVector<f64>) -> DVector<f64> {
        &self.metric.g_inv * covector
    }

    /// `g^ij a_i b_j`.
    pub fn inner_covectors(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        a.dot(&(&self.metric.g_inv * b))
    }

    /// `g^ij T_ij`.
    pub fn trace(&self, t: &DMatrix<f64>) -> f64 {
        self.metric.g_inv.component_mul(t).sum()
    }

    pub fn laplacian(&self, jet: &Jet2) -> f64 {
        self.trace(&self.hessian(jet))
    }

    pub fn curvature(&self) -> CurvatureAtPoint {
        curvature_from(&self.metric)
    }
}

pub fn covariant_hessian(m: &MetricField, f: &dyn ScalarField, p: &[f64]) -> Result<DMatrix<f64>> {
    let geo = PointGeometry::at(m, p)?;
    Ok(geo.hessian(&f.jet(p)?))
}

/// `(∇f^i = g^ij ∂_j f, |∇f|²_g)`; the norm may be negative off Riemannian signature.
pub fn gradient_and_norm(m: &MetricField, f: &dyn ScalarField, p: &[f64]) -> Result<(DVector<f64>, f64)> {
    let geo = PointGeometry::at(m, p)?;
    let jet = f.jet(p)?;
    let up = geo.raise(&jet.gradient);
    let norm = up.dot(&jet.gradient);
    Ok((up, norm))
}

pub fn laplace_beltrami(m: &MetricField, f: &dyn ScalarField, p: &[f64]) -> Result<f64> {
    let geo = PointGeometry::at(m, p)?;
    Ok(geo.laplacian(&f.jet(p)?))
}
