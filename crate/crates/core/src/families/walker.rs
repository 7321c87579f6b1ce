//! Walker metrics.
//!
//! * 3D Lorentzian: `2 dt dy + dx² + φ(t,x,y) dy²`, coordinates `(t, x, y)`.
//! * 4D neutral: `2 dx dz + 2 dy dt + b(t) dt²`, coordinates `(x, y, z, t)`.

use std::sync::Arc;

use nalgebra::DMatrix;

use super::Form;
use crate::error::{GeomError, Result};
use crate::expr::{Chart, Expr};
use crate::field::{Profile, ProfiledField, ScalarField};
use crate::metric::{MetricField, Signature};
use crate::quadrature::{CumulativeTable, QuadOptions};

const T: usize = 0;
const X: usize = 1;
const Y: usize = 2;

pub fn walker3_chart() -> Arc<Chart> {
    Chart::new(&["t", "x", "y"])
}

fn zero(chart: &Arc<Chart>) -> Expr {
    Expr::constant(chart, 0.0)
}

fn one(chart: &Arc<Chart>) -> Expr {
    Expr::constant(chart, 1.0)
}

pub fn walker3_metric(phi: &Expr) -> Result<MetricField> {
    let c = phi.chart();
    if c.names() != walker3_chart().names() {
        return Err(GeomError::Invalid(
            "Walker3 metric function must live on the (t, x, y) chart".into(),
        ));
    }
    let rows = vec![
        vec![zero(c), zero(c), one(c)],
        vec![zero(c), one(c), zero(c)],
        vec![one(c), zero(c), phi.clone()],
    ];
    MetricField::from_matrix(c, Signature::lorentzian(3), rows)
}

#[derive(Debug, Clone)]
pub struct Walker3Spec {
    pub phi: Expr,
}

impl Walker3Spec {
    pub fn metric(&self) -> Result<MetricField> {
        walker3_metric(&self.phi)
    }
}

/// Component formulas for the covariant Hessian and Laplacian of `f`.
///
/// The `yy` entry depends on `form`: the corrected entry is
/// `f_yy − ½(φφ_t + φ_y) f_t + ½φ_x f_x + ½φ_t f_y`, the literal one drops
/// the `φ_y f_t` and `φ_x f_x` terms.
pub fn walker3_closed_forms(
    phi: &dyn ScalarField,
    f: &dyn ScalarField,
    p: &[f64],
    form: Form,
) -> Result<(DMatrix<f64>, f64)> {
    let pj = phi.jet(p)?;
    let fj = f.jet(p)?;
    let (ph, dp) = (pj.value, &pj.gradient);
    let (df, h) = (&fj.gradient, &fj.hessian);
    let mut out = DMatrix::zeros(3, 3);
    let mut set = |i: usize, j: usize, v: f64| {
        out[(i, j)] = v;
        out[(j, i)] = v;
    };
    set(T, T, h[(T, T)]);
    set(T, X, h[(T, X)]);
    set(T, Y, h[(T, Y)] - 0.5 * dp[T] * df[T]);
    set(X, X, h[(X, X)]);
    set(X, Y, h[(X, Y)] - 0.5 * dp[X] * df[T]);
    let yy = match form {
        Form::Corrected => h[(Y, Y)] - 0.5 * (ph * dp[T] + dp[Y]) * df[T] + 0.5 * dp[X] * df[X] + 0.5 * dp[T] * df[Y],
        Form::PaperLiteral => h[(Y, Y)] - 0.5 * ph * dp[T] * df[T] + 0.5 * dp[T] * df[Y],
    };
    set(Y, Y, yy);
    let lap = -ph * h[(T, T)] + 2.0 * h[(T, Y)] - dp[T] * df[T] + h[(X, X)];
    Ok((out, lap))
}

/// The five soliton PDE residuals, in the order
/// `f_tt`, `f_tx`, `f_xy − ½φ_x f_t`, `f_xx − f_ty + ½φ_t f_t` and the `yy`
/// equation.
///
/// The corrected `yy` equation is
/// `f_yy − φ f_xx − ½(φφ_t + φ_y) f_t + ½φ_x f_x + ½φ_t f_y`; the literal one
/// is `f_yy − f_xx − ½φφ_t f_t + ½φ_t f_y`.
pub fn walker3_pde_residual(phi: &dyn ScalarField, f: &dyn ScalarField, p: &[f64], form: Form) -> Result<[f64; 5]> {
    let pj = phi.jet(p)?;
    let fj = f.jet(p)?;
    let (ph, dp) = (pj.value, &pj.gradient);
    let (df, h) = (&fj.gradient, &fj.hessian);
    let last = match form {
        Form::Corrected => {
            h[(Y, Y)] - ph * h[(X, X)] - 0.5 * (ph * dp[T] + dp[Y]) * df[T] + 0.5 * dp[X] * df[X] + 0.5 * dp[T] * df[Y]
        }
        Form::PaperLiteral => h[(Y, Y)] - h[(X, X)] - 0.5 * ph * dp[T] * df[T] + 0.5 * dp[T] * df[Y],
    };
    Ok([
        h[(T, T)],
        h[(T, X)],
        h[(X, Y)] - 0.5 * dp[X] * df[T],
        h[(X, X)] - h[(T, Y)] + 0.5 * dp[T] * df[T],
        last,
    ])
}

/// Data for the soliton `f = κx + η(y)` on a 3D Walker metric.
#[derive(Debug, Clone)]
pub struct Walker3Construction {
    pub kappa: f64,
    /// `η(y)` on the `(t, x, y)` chart.
    pub eta: Expr,
    /// `ζ(x, y)` on the `(t, x, y)` chart.
    pub zeta: Expr,
}

#[derive(Debug, Clone)]
pub struct Walker3Instance {
    pub f: Expr,
    pub phi: Expr,
}

impl Walker3Instance {
    pub fn spec(&self) -> Walker3Spec {
        Walker3Spec { phi: self.phi.clone() }
    }

    pub fn metric(&self) -> Result<MetricField> {
        walker3_metric(&self.phi)
    }
}

/// Build `f = κx + η(y)` and the metric function
/// `φ = −2t η''/η' + ζ` (corrected) or `φ = −2t ln η' + ζ` (literal).
///
/// `ys` are the sample ordinates at which `η' > 0` is enforced.
pub fn walker3_construct(c: &Walker3Construction, form: Form, ys: &[f64]) -> Result<Walker3Instance> {
    let chart = walker3_chart();
    for (name, e) in [("eta", &c.eta), ("zeta", &c.zeta)] {
        if e.chart().names() != chart.names() {
            return Err(GeomError::Invalid(format!("{name} must live on the (t, x, y) chart")));
        }
        if e.depends_on(T) {
            return Err(GeomError::Invalid(format!("{name} must not depend on t")));
        }
    }
    if c.eta.depends_on(X) {
        return Err(GeomError::Invalid("eta must depend on y only".into()));
    }
    let d1 = c.eta.derivative(Y);
    let d2 = d1.derivative(Y);
    for &y in ys {
        let v = d1.eval(&[0.0, 0.0, y])?;
        if v <= 0.0 {
            return Err(GeomError::NonPositiveEtaPrime { y, value: v });
        }
    }
    let t = Expr::var_index(&chart, T);
    let minus_two = -Expr::constant(&chart, 2.0);
    let rate = match form {
        Form::Corrected => d2 / d1,
        Form::PaperLiteral => d1.ln(),
    };
    let phi = (minus_two * t * rate + c.zeta.clone()).folded();
    let f = (Expr::constant(&chart, c.kappa) * Expr::var_index(&chart, X) + c.eta.clone()).folded();
    Ok(Walker3Instance { f, phi })
}

const W4X: usize = 0;
const W4Y: usize = 1;
const W4Z: usize = 2;
const W4T: usize = 3;

pub fn walker4_chart() -> Arc<Chart> {
    Chart::new(&["x", "y", "z", "t"])
}

pub fn walker4_metric(b: &Expr) -> Result<MetricField> {
    let c = b.chart();
    if c.names() != walker4_chart().names() {
        return Err(GeomError::Invalid(
            "Walker4 metric function must live on the (x, y, z, t) chart".into(),
        ));
    }
    if (0..3).any(|i| b.depends_on(i)) {
        return Err(GeomError::Invalid(
            "Walker4 metric function must depend on t only".into(),
        ));
    }
    let mut rows = vec![vec![zero(c); 4]; 4];
    rows[W4X][W4Z] = one(c);
    rows[W4Z][W4X] = one(c);
    rows[W4Y][W4T] = one(c);
    rows[W4T][W4Y] = one(c);
    rows[W4T][W4T] = b.clone();
    MetricField::from_matrix(c, Signature::neutral(4), rows)
}

#[derive(Debug, Clone)]
pub struct Walker4Spec {
    /// `b(t)` on the `(x, y, z, t)` chart.
    pub b: Expr,
    pub c: [f64; 4],
    pub t0: f64,
}

impl Walker4Spec {
    pub fn metric(&self) -> Result<MetricField> {
        walker4_metric(&self.b)
    }

    /// `[b, b_t]` at `t`.
    fn warp_at(&self, t: f64) -> Result<[f64; 2]> {
        let j = self.b.jet(&[0.0, 0.0, 0.0, t])?;
        Ok([j.value, j.gradient[W4T]])
    }
}

/// Component formulas: every Hessian entry is the plain partial except
/// `tt = f_tt − ½ b_t f_y`; `Δf = 2f_xz − b f_yy + 2f_yt`.
pub fn walker4_closed_forms(b: &dyn ScalarField, f: &dyn ScalarField, p: &[f64]) -> Result<(DMatrix<f64>, f64)> {
    let bj = b.jet(p)?;
    let fj = f.jet(p)?;
    let mut hess = fj.hessian.clone();
    hess[(W4T, W4T)] -= 0.5 * bj.gradient[W4T] * fj.gradient[W4Y];
    let h = &fj.hessian;
    let lap = 2.0 * h[(W4X, W4Z)] - bj.value * h[(W4Y, W4Y)] + 2.0 * h[(W4Y, W4T)];
    Ok((hess, lap))
}

/// Residuals of the ten soliton PDEs, in the order
/// `f_xx, f_xy, f_yy, f_yz, f_zz, f_xt, f_zt, f_xz − Δ/4, f_yt − Δ/4,
/// f_tt − ½b_t f_y − bΔ/4`.
pub fn walker4_pde_residual(b: &dyn ScalarField, f: &dyn ScalarField, p: &[f64]) -> Result<[f64; 10]> {
    let (_, lap) = walker4_closed_forms(b, f, p)?;
    let bj = b.jet(p)?;
    let fj = f.jet(p)?;
    let h = &fj.hessian;
    let q = lap / 4.0;
    Ok([
        h[(W4X, W4X)],
        h[(W4X, W4Y)],
        h[(W4Y, W4Y)],
        h[(W4Y, W4Z)],
        h[(W4Z, W4Z)],
        h[(W4X, W4T)],
        h[(W4Z, W4T)],
        h[(W4X, W4Z)] - q,
        h[(W4Y, W4T)] - q,
        h[(W4T, W4T)] - 0.5 * bj.gradient[W4T] * fj.gradient[W4Y] - bj.value * q,
    ])
}

/// `E(t)` solving `2E' − b(c₀t + c₁) = c₀ ∫_{t0}^t b` with `E(t0) = 0`.
///
/// Integrating once more by parts collapses the double integral:
/// `E(t) = ½(c₀t + c₁) B(t)` with `B(t) = ∫_{t0}^t b`, so only `B` is
/// tabulated. `E'` and `E''` come from the ODE, never from differencing.
#[derive(Debug, Clone)]
pub struct EProfile {
    spec: Walker4Spec,
    table: CumulativeTable,
}

impl EProfile {
    pub fn new(spec: &Walker4Spec, interval: (f64, f64), intervals: usize, opts: QuadOptions) -> Result<EProfile> {
        let b = |t: f64| Ok(spec.warp_at(t)?[0]);
        let table = CumulativeTable::build(&b, spec.t0, interval.0, interval.1, intervals, opts)?;
        Ok(EProfile {
            spec: spec.clone(),
            table,
        })
    }

    /// `∫_{t0}^t b`.
    pub fn integral_of_b(&self, t: f64) -> Result<f64> {
        self.table.eval(&|s| Ok(self.spec.warp_at(s)?[0]), t)
    }

    /// `(t, B(t), E(t))` at `count` evenly spaced points of the tabulated range.
    pub fn sample(&self, count: usize) -> Result<Vec<(f64, f64, f64)>> {
        let (lo, hi) = self.table.range();
        crate::grid::Axis::new(lo, hi, count.max(2))
            .samples()
            .into_iter()
            .map(|t| {
                let big_b = self.integral_of_b(t)?;
                Ok((t, big_b, self.eval(t)?[0]))
            })
            .collect()
    }
}

impl Profile for EProfile {
    fn eval(&self, t: f64) -> Result<[f64; 3]> {
        let [c0, c1, _, _] = self.spec.c;
        let [b, db] = self.spec.warp_at(t)?;
        let big_b = self.integral_of_b(t)?;
        let a = c0 * t + c1;
        Ok([
            0.5 * a * big_b,
            0.5 * (b * a + c0 * big_b),
            0.5 * (db * a + 2.0 * c0 * b),
        ])
    }

    fn name(&self) -> String {
        "E".into()
    }
}

#[derive(Debug, Clone)]
pub struct Walker4Instance {
    /// The polynomial part of the potential (everything except `E`).
    pub polynomial: Expr,
    pub e: Arc<EProfile>,
    pub f: ProfiledField,
}

/// `f = x(c₀z + c₂) + y(c₀t + c₁) + c₃z + E(t)`; the literal form puts
/// `c₀z + c₁` on `y`.
pub fn walker4_construct(
    spec: &Walker4Spec,
    interval: (f64, f64),
    form: Form,
    opts: QuadOptions,
) -> Result<Walker4Instance> {
    walker4_metric(&spec.b)?;
    let chart = spec.b.chart().clone();
    let [c0, c1, c2, c3] = spec.c;
    let k = |v: f64| Expr::constant(&chart, v);
    let v = |i: usize| Expr::var_index(&chart, i);
    let y_slope = match form {
        Form::Corrected => v(W4T),
        Form::PaperLiteral => v(W4Z),
    };
    let polynomial = (v(W4X) * (k(c0) * v(W4Z) + k(c2)) + v(W4Y) * (k(c0) * y_slope + k(c1)) + k(c3) * v(W4Z)).folded();
    let e = Arc::new(EProfile::new(spec, interval, 64, opts)?);
    let f = ProfiledField {
        expr: polynomial.clone(),
        profile: e.clone(),
        axis: W4T,
    };
    Ok(Walker4Instance { polynomial, e, f })
}
