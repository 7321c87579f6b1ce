//! Residuals of the gradient Yamabe and generalized quasi Yamabe soliton
//! equations, the `θ = exp(−φ/m)` substitution, λ inference and the
//! warped-product condition checker.
//!
//! For a metric `g` with scalar curvature `τ`, a potential `φ`, a constant
//! `λ` and a quasi parameter `μ`, the soliton residual is
//!
//! ```text
//! R_ij = Hess(φ)_ij − (τ − λ) g_ij − μ ∂_iφ ∂_jφ
//! ```
//!
//! and `μ = 0` is the gradient Yamabe case.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::curvature::PointGeometry;
use crate::error::{GeomError, Result};
use crate::expr::Expr;
use crate::families::assemble_warped_metric;
use crate::field::{theta_field, ScalarField};
use crate::jet::Jet2;
use crate::metric::MetricField;

/// Spread below which an inferred λ counts as constant for analytic constructions.
pub const CONSTANCY_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct SolitonData {
    pub phi: Arc<dyn ScalarField>,
    pub lambda: f64,
    /// `0` is the pure gradient Yamabe case; otherwise `m = 1/mu`.
    pub mu: f64,
}

impl SolitonData {
    pub fn new(phi: Arc<dyn ScalarField>, lambda: f64, mu: f64) -> SolitonData {
        SolitonData { phi, lambda, mu }
    }

    pub fn gradient_yamabe(phi: Arc<dyn ScalarField>, lambda: f64) -> SolitonData {
        SolitonData { phi, lambda, mu: 0.0 }
    }

    pub fn m(&self) -> Result<f64> {
        if self.mu == 0.0 {
            return Err(GeomError::Invalid("the theta substitution needs mu != 0".into()));
        }
        Ok(1.0 / self.mu)
    }
}

fn symmetric(n: usize, f: impl Fn(usize, usize) -> f64) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = f(i, j);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

fn gqy_from_parts(geo: &PointGeometry, tau: f64, jet: &Jet2, lambda: f64, mu: f64) -> DMatrix<f64> {
    let hess = geo.hessian(jet);
    let sigma = tau - lambda;
    let g = &geo.metric.g;
    let d = &jet.gradient;
    symmetric(geo.dim(), |i, j| hess[(i, j)] - sigma * g[(i, j)] - mu * d[i] * d[j])
}

/// `Hess(φ) − (τ−λ) g − μ dφ⊗dφ` at `p`.
pub fn gqy_residual(m: &MetricField, s: &SolitonData, p: &[f64]) -> Result<DMatrix<f64>> {
    let geo = PointGeometry::at(m, p)?;
    let tau = geo.curvature().tau;
    Ok(gqy_from_parts(&geo, tau, &s.phi.jet(p)?, s.lambda, s.mu))
}

/// `Hess(φ) − (τ−λ) g` at `p`; requires `mu = 0`.
pub fn gys_residual(m: &MetricField, s: &SolitonData, p: &[f64]) -> Result<DMatrix<f64>> {
    if s.mu != 0.0 {
        return Err(GeomError::Invalid(format!(
            "gradient Yamabe residual needs mu = 0, got {}",
            s.mu
        )));
    }
    gqy_residual(m, s, p)
}

#[derive(Debug, Clone)]
pub struct ThetaCheck {
    /// `Hess(θ) + (θ/m)(τ−λ) g`
    pub theta_residual: DMatrix<f64>,
    /// `Hess(φ) − (1/m) dφ⊗dφ + (m/θ) Hess(θ)`; vanishes for every `φ`.
    pub identity_residual: DMatrix<f64>,
}

pub fn theta_check(m: &MetricField, s: &SolitonData, p: &[f64]) -> Result<ThetaCheck> {
    let mm = s.m()?;
    let theta = theta_field(&s.phi, mm);
    let geo = PointGeometry::at(m, p)?;
    let tau = geo.curvature().tau;
    let phi_jet = s.phi.jet(p)?;
    let theta_jet = theta.jet(p)?;
    let th = theta_jet.value;
    let hess_theta = geo.hessian(&theta_jet);
    let hess_phi = geo.hessian(&phi_jet);
    let g = &geo.metric.g;
    let d = &phi_jet.gradient;
    let sigma = tau - s.lambda;
    let n = geo.dim();
    Ok(ThetaCheck {
        theta_residual: symmetric(n, |i, j| hess_theta[(i, j)] + th / mm * sigma * g[(i, j)]),
        identity_residual: symmetric(n, |i, j| {
            hess_phi[(i, j)] - d[i] * d[j] / mm + mm / th * hess_theta[(i, j)]
        }),
    })
}

/// Pointwise `λ(p) = τ − (Δφ − μ|∇φ|²)/n`, the trace of the GQY equation.
pub fn lambda_at(m: &MetricField, phi: &dyn ScalarField, mu: f64, p: &[f64]) -> Result<f64> {
    let geo = PointGeometry::at(m, p)?;
    let jet = phi.jet(p)?;
    Ok(lambda_from(&geo, geo.curvature().tau, &jet, mu))
}

fn lambda_from(geo: &PointGeometry, tau: f64, jet: &Jet2, mu: f64) -> f64 {
    let n = geo.dim() as f64;
    let lap = geo.laplacian(jet);
    let norm = geo.inner_covectors(&jet.gradient, &jet.gradient);
    tau - (lap - mu * norm) / n
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaFit {
    pub lambda_hat: f64,
    pub spread: f64,
    pub per_point: Vec<f64>,
}

pub fn infer_lambda(m: &MetricField, phi: &dyn ScalarField, mu: f64, points: &[Vec<f64>]) -> Result<LambdaFit> {
    if points.is_empty() {
        return Err(GeomError::Invalid("infer_lambda needs at least one point".into()));
    }
    let per_point = points
        .par_iter()
        .map(|p| lambda_at(m, phi, mu, p))
        .collect::<Result<Vec<f64>>>()?;
    let lambda_hat = per_point.iter().sum::<f64>() / per_point.len() as f64;
    let spread = per_point.iter().fold(0.0f64, |acc, l| acc.max((l - lambda_hat).abs()));
    Ok(LambdaFit {
        lambda_hat,
        spread,
        per_point,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolitonClass {
    Shrinking,
    Steady,
    Expanding,
}

impl fmt::Display for SolitonClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolitonClass::Shrinking => "shrinking",
            SolitonClass::Steady => "steady",
            SolitonClass::Expanding => "expanding",
        })
    }
}

pub fn classify(lambda: f64, tol: f64) -> SolitonClass {
    if lambda > tol {
        SolitonClass::Shrinking
    } else if lambda < -tol {
        SolitonClass::Expanding
    } else {
        SolitonClass::Steady
    }
}

/// Everything the verifier reports for one sample point.
#[derive(Debug, Clone)]
pub struct PointSample {
    pub point: Vec<f64>,
    pub residual: DMatrix<f64>,
    pub residual_max: f64,
    pub tau: f64,
    pub laplacian: f64,
    pub lambda_at: f64,
}

pub fn sample_point(m: &MetricField, s: &SolitonData, p: &[f64]) -> Result<PointSample> {
    let geo = PointGeometry::at(m, p)?;
    let tau = geo.curvature().tau;
    let jet = s.phi.jet(p)?;
    let residual = gqy_from_parts(&geo, tau, &jet, s.lambda, s.mu);
    Ok(PointSample {
        point: p.to_vec(),
        residual_max: residual.amax(),
        tau,
        laplacian: geo.laplacian(&jet),
        lambda_at: lambda_from(&geo, tau, &jet, s.mu),
        residual,
    })
}

pub fn sample_points(m: &MetricField, s: &SolitonData, points: &[Vec<f64>]) -> Result<Vec<PointSample>> {
    points.par_iter().map(|p| sample_point(m, s, p)).collect()
}

#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub points: Vec<Vec<f64>>,
    pub residual_grids: Vec<DMatrix<f64>>,
    pub max_abs: f64,
    pub mean_abs: f64,
    /// Index of the point holding `max_abs`.
    pub worst: usize,
    pub tolerance: f64,
    pub pass: bool,
}

impl ResidualReport {
    pub fn from_grids(points: Vec<Vec<f64>>, residual_grids: Vec<DMatrix<f64>>, tolerance: f64) -> ResidualReport {
        let mut max_abs = 0.0f64;
        let mut worst = 0;
        let mut total = 0.0;
        let mut count = 0usize;
        for (k, r) in residual_grids.iter().enumerate() {
            let here = r.amax();
            if here > max_abs {
                max_abs = here;
                worst = k;
            }
            total += r.iter().map(|v| v.abs()).sum::<f64>();
            count += r.len();
        }
        let mean_abs = if count == 0 { 0.0 } else { total / count as f64 };
        ResidualReport {
            points,
            residual_grids,
            max_abs,
            mean_abs,
            worst,
            tolerance,
            pass: max_abs <= tolerance,
        }
    }
}

/// Sweep [`gqy_residual`] over `points`; order is preserved.
pub fn residual_report(
    m: &MetricField,
    s: &SolitonData,
    points: &[Vec<f64>],
    tolerance: f64,
) -> Result<ResidualReport> {
    let grids = points
        .par_iter()
        .map(|p| gqy_residual(m, s, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(ResidualReport::from_grids(points.to_vec(), grids, tolerance))
}

/// Outcome of checking the four warped-product soliton conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpedConditions {
    /// `max |∂φ/∂(fiber coordinate)|`
    pub c1_fiber_dependence: f64,
    /// `max |g_B(∇θ, ∇b) − (λ−τ) b θ / m|`
    pub c2_gradient_identity: f64,
    /// `max |Hess^B(θ) − (θ/m)(λ−τ) g_B|`
    pub c3_base_conformal: f64,
    /// spread of the fiber scalar curvature over the fiber samples
    pub c4_fiber_tau_spread: f64,
    /// `min |g_B(∇θ, ∇b)|`; zero means `θ` and `b` are orthogonal somewhere.
    pub min_abs_gradient_pairing: f64,
}

impl WarpedConditions {
    pub fn all_within(&self, tol: f64) -> bool {
        self.c1_fiber_dependence <= tol
            && self.c2_gradient_identity <= tol
            && self.c3_base_conformal <= tol
            && self.c4_fiber_tau_spread <= tol
    }

    pub fn non_orthogonal(&self, tol: f64) -> bool {
        self.min_abs_gradient_pairing > tol
    }
}

fn restrict(jet: &Jet2, r: usize) -> Jet2 {
    Jet2 {
        value: jet.value,
        gradient: jet.gradient.rows(0, r).into_owned(),
        hessian: jet.hessian.view((0, 0), (r, r)).into_owned(),
    }
}

/// Check the warped-product conditions for `s` on `base ×_b fiber`.
///
/// `s.phi` lives on the product chart (base coordinates first); `b` lives on
/// the base chart.
pub fn warped_conditions_check(
    base: &MetricField,
    fiber: &MetricField,
    b: &Expr,
    s: &SolitonData,
    base_points: &[Vec<f64>],
    fiber_points: &[Vec<f64>],
) -> Result<WarpedConditions> {
    let mm = s.m()?;
    if base_points.is_empty() || fiber_points.is_empty() {
        return Err(GeomError::Invalid("warped check needs base and fiber samples".into()));
    }
    for pb in base_points {
        let v = b.eval(pb)?;
        if v <= 0.0 {
            return Err(GeomError::NonPositiveWarping {
                point: pb.clone(),
                value: v,
            });
        }
    }
    let product = assemble_warped_metric(base, fiber, b)?;
    let r = base.dim();
    let theta = theta_field(&s.phi, mm);

    let fiber_taus = fiber_points
        .par_iter()
        .map(|pf| Ok(PointGeometry::at(fiber, pf)?.curvature().tau))
        .collect::<Result<Vec<f64>>>()?;
    let mean = fiber_taus.iter().sum::<f64>() / fiber_taus.len() as f64;
    let c4 = fiber_taus.iter().fold(0.0f64, |a, t| a.max((t - mean).abs()));

    let pairs: Vec<(&Vec<f64>, &Vec<f64>)> = base_points
        .iter()
        .flat_map(|pb| fiber_points.iter().map(move |pf| (pb, pf)))
        .collect();
    let per_point = pairs
        .par_iter()
        .map(|(pb, pf)| -> Result<[f64; 4]> {
            let p: Vec<f64> = pb.iter().chain(pf.iter()).copied().collect();
            let phi_jet = s.phi.jet(&p)?;
            let c1 = phi_jet.gradient.rows(r, p.len() - r).amax();
            let tau = PointGeometry::at(&product, &p)?.curvature().tau;

            let base_geo = PointGeometry::at(base, pb)?;
            let theta_base = restrict(&theta.jet(&p)?, r);
            let b_jet = b.jet(pb)?;
            let pairing = base_geo.inner_covectors(&theta_base.gradient, &b_jet.gradient);
            let th = theta_base.value;
            let c2 = (pairing - (s.lambda - tau) * b_jet.value * th / mm).abs();

            let hess = base_geo.hessian(&theta_base);
            let target = &base_geo.metric.g * (th / mm * (s.lambda - tau));
            let c3 = (hess - target).amax();
            Ok([c1, c2, c3, pairing.abs()])
        })
        .collect::<Result<Vec<_>>>()?;

    let fold = |k: usize, init: f64, f: fn(f64, f64) -> f64| per_point.iter().fold(init, |a, v| f(a, v[k]));
    Ok(WarpedConditions {
        c1_fiber_dependence: fold(0, 0.0, f64::max),
        c2_gradient_identity: fold(1, 0.0, f64::max),
        c3_base_conformal: fold(2, 0.0, f64::max),
        c4_fiber_tau_spread: c4,
        min_abs_gradient_pairing: fold(3, f64::INFINITY, f64::min),
    })
}

/// `g(∇f, ∇h) = g^ij ∂_i f ∂_j h` at `p`.
pub fn gradient_pairing(m: &MetricField, f: &dyn ScalarField, h: &dyn ScalarField, p: &[f64]) -> Result<f64> {
    let geo = PointGeometry::at(m, p)?;
    let (a, b): (DVector<f64>, DVector<f64>) = (f.jet(p)?.gradient, h.jet(p)?.gradient);
    Ok(geo.inner_covectors(&a, &b))
}
