//! Warped products `g_B ⊕ b² g_F`, GRW spacetimes `−dt² ⊕ b² g_F` and
//! standard static spacetimes `−f² dt² ⊕ g_F`.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::Form;
use crate::curvature::{curvature_at, PointGeometry};
use crate::error::{GeomError, Result};
use crate::expr::{Chart, Expr};
use crate::field::{Profile, ProfiledField, ScalarField};
use crate::metric::{MetricField, Signature};
use crate::quadrature::{adaptive_simpson, CumulativeTable, QuadOptions};

/// Knot count for cumulative integral tables.
const TABLE_INTERVALS: usize = 64;

fn product_chart(a: &Chart, b: &Chart) -> Result<Arc<Chart>> {
    let names: Vec<&str> = a.names().iter().chain(b.names()).map(String::as_str).collect();
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return Err(GeomError::Invalid(format!("coordinate `{n}` appears in both factors")));
        }
    }
    Ok(Chart::new(&names))
}

/// `g_B ⊕ b² g_F` on the product chart, base coordinates first.
#[allow(clippy::needless_range_loop)]
pub fn assemble_warped_metric(base: &MetricField, fiber: &MetricField, b: &Expr) -> Result<MetricField> {
    if b.chart() != base.chart() {
        return Err(GeomError::Invalid(
            "warping function must live on the base chart".into(),
        ));
    }
    let chart = product_chart(base.chart(), fiber.chart())?;
    let r = base.dim();
    let b2 = b.lift(&chart, 0)?.powi(2);
    let mut rows = vec![vec![Expr::constant(&chart, 0.0); chart.dim()]; chart.dim()];
    for i in 0..chart.dim() {
        for j in i..chart.dim() {
            let e = if j < r {
                base.component(i, j).lift(&chart, 0)?
            } else if i >= r {
                (b2.clone() * fiber.component(i - r, j - r).lift(&chart, r)?).folded()
            } else {
                continue;
            };
            rows[i][j] = e.clone();
            rows[j][i] = e;
        }
    }
    let sig = Signature {
        negative: base.signature().negative + fiber.signature().negative,
        positive: base.signature().positive + fiber.signature().positive,
    };
    MetricField::from_matrix(&chart, sig, rows)
}

fn check_positive(e: &Expr, points: &[Vec<f64>]) -> Result<()> {
    for p in points {
        let v = e.eval(p)?;
        if v <= 0.0 {
            return Err(GeomError::NonPositiveWarping {
                point: p.clone(),
                value: v,
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct WarpedProductSpec {
    pub base: MetricField,
    pub fiber: MetricField,
    /// Warping function on the base chart.
    pub b: Expr,
}

impl WarpedProductSpec {
    pub fn metric(&self) -> Result<MetricField> {
        assemble_warped_metric(&self.base, &self.fiber, &self.b)
    }

    pub fn check_warping(&self, base_points: &[Vec<f64>]) -> Result<()> {
        check_positive(&self.b, base_points)
    }
}

/// Spread of the fiber scalar curvature over `points`.
pub fn fiber_curvature_spread(fiber: &MetricField, points: &[Vec<f64>]) -> Result<f64> {
    let taus = points
        .par_iter()
        .map(|p| Ok(curvature_at(fiber, p)?.tau))
        .collect::<Result<Vec<f64>>>()?;
    let (lo, hi) = taus.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| {
        (lo.min(*t), hi.max(*t))
    });
    Ok(if taus.is_empty() { 0.0 } else { hi - lo })
}

/// Reject fibers whose scalar curvature varies by more than `tol`.
pub fn require_constant_fiber_curvature(fiber: &MetricField, points: &[Vec<f64>], tol: f64) -> Result<f64> {
    let spread = fiber_curvature_spread(fiber, points)?;
    if spread > tol {
        return Err(GeomError::NonConstantFiberCurvature { spread });
    }
    Ok(spread)
}

/// Which ODE the GRW potential integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GrwRule {
    /// `φ' = α / b`, solving `b φ'' + b' φ' = 0`.
    #[default]
    InverseWarp,
    /// `φ' = α b`, solving `b φ'' − b' φ' = 0`, which is what the
    /// Lorentzian `−dt²` sign actually produces.
    Warp,
}

impl GrwRule {
    pub fn name(self) -> &'static str {
        match self {
            GrwRule::InverseWarp => "inverse_warp",
            GrwRule::Warp => "warp",
        }
    }

    pub fn parse(s: &str) -> Result<GrwRule> {
        match s {
            "inverse_warp" => Ok(GrwRule::InverseWarp),
            "warp" => Ok(GrwRule::Warp),
            other => Err(GeomError::Invalid(format!(
                "unknown GRW rule `{other}` (expected inverse_warp or warp)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GrwSpec {
    /// Warping function on a one-coordinate chart.
    pub b: Expr,
    pub fiber: MetricField,
    pub interval: (f64, f64),
}

impl GrwSpec {
    pub fn new(b: Expr, fiber: MetricField, interval: (f64, f64)) -> Result<GrwSpec> {
        if b.dim() != 1 {
            return Err(GeomError::Invalid(
                "GRW warping function must depend on one coordinate".into(),
            ));
        }
        if fiber.signature().negative != 0 {
            return Err(GeomError::Invalid("GRW fiber must be Riemannian".into()));
        }
        if interval.0.is_nan() || interval.1.is_nan() || interval.0 >= interval.1 {
            return Err(GeomError::Invalid(format!(
                "GRW interval [{}, {}] is empty",
                interval.0, interval.1
            )));
        }
        Ok(GrwSpec { b, fiber, interval })
    }

    pub fn metric(&self) -> Result<MetricField> {
        let base = MetricField::flat(self.b.chart(), &[-1.0])?;
        assemble_warped_metric(&base, &self.fiber, &self.b)
    }

    pub fn check_warping(&self, ts: &[f64]) -> Result<()> {
        let pts: Vec<Vec<f64>> = ts.iter().map(|t| vec![*t]).collect();
        check_positive(&self.b, &pts)
    }

    /// `[b, b', b'']` at `t`.
    pub fn warp_at(&self, t: f64) -> Result<[f64; 3]> {
        let j = self.b.jet(&[t])?;
        Ok([j.value, j.gradient[0], j.hessian[(0, 0)]])
    }

    /// The potential `φ(t) = α ∫_{t0}^t w` with `w = 1/b` or `w = b`.
    pub fn potential(&self, alpha: f64, t0: f64, rule: GrwRule, opts: QuadOptions) -> Result<GrwPotential> {
        GrwPotential::new(self, alpha, t0, rule, opts)
    }
}

/// Quadrature-backed GRW potential.
#[derive(Debug, Clone)]
pub struct GrwPotential {
    b: Expr,
    pub alpha: f64,
    pub t0: f64,
    pub rule: GrwRule,
    table: CumulativeTable,
}

fn integrand(b: &Expr, rule: GrwRule, t: f64) -> Result<[f64; 2]> {
    let j = b.jet(&[t])?;
    let (v, d) = (j.value, j.gradient[0]);
    match rule {
        GrwRule::Warp => Ok([v, d]),
        GrwRule::InverseWarp => {
            if v <= 0.0 {
                return Err(GeomError::NonPositiveWarping {
                    point: vec![t],
                    value: v,
                });
            }
            Ok([1.0 / v, -d / (v * v)])
        }
    }
}

impl GrwPotential {
    fn new(spec: &GrwSpec, alpha: f64, t0: f64, rule: GrwRule, opts: QuadOptions) -> Result<GrwPotential> {
        let (lo, hi) = spec.interval;
        let b = spec.b.clone();
        let w = |t: f64| Ok(integrand(&b, rule, t)?[0]);
        let table = CumulativeTable::build(&w, t0, lo, hi, TABLE_INTERVALS, opts)?;
        Ok(GrwPotential {
            b: spec.b.clone(),
            alpha,
            t0,
            rule,
            table,
        })
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        Ok(self.eval(t)?[0])
    }

    /// The potential as a field on `chart`, depending on coordinate 0 only.
    pub fn field(self: &Arc<Self>, chart: &Arc<Chart>) -> ProfiledField {
        ProfiledField {
            expr: Expr::constant(chart, 0.0),
            profile: self.clone(),
            axis: 0,
        }
    }

    /// `(t, φ(t))` at `count` evenly spaced points of the tabulated range.
    pub fn sample(&self, count: usize) -> Result<Vec<(f64, f64)>> {
        let (lo, hi) = self.table.range();
        crate::grid::Axis::new(lo, hi, count.max(2))
            .samples()
            .into_iter()
            .map(|t| Ok((t, self.value(t)?)))
            .collect()
    }
}

impl Profile for GrwPotential {
    fn eval(&self, t: f64) -> Result<[f64; 3]> {
        let [w, dw] = integrand(&self.b, self.rule, t)?;
        let integral = self.table.eval(&|s| Ok(integrand(&self.b, self.rule, s)?[0]), t)?;
        Ok([self.alpha * integral, self.alpha * w, self.alpha * dw])
    }

    fn name(&self) -> String {
        "Phi".into()
    }
}

/// `α ∫_{t0}^t 1/b` by adaptive quadrature.
pub fn grw_potential(b: &Expr, alpha: f64, t0: f64, t: f64, opts: QuadOptions) -> Result<f64> {
    let v = adaptive_simpson(|s| Ok(integrand(b, GrwRule::InverseWarp, s)?[0]), t0, t, opts)?;
    Ok(alpha * v)
}

/// Residuals `(r1, r2, r3)` of the GRW ODE system at `(t, fiber_point)`.
///
/// `Form::PaperLiteral` uses `r2 = b'φ' − (τ−λ)b` and `r3 = bφ'' + b'φ'`;
/// `Form::Corrected` flips the sign that the `−dt²` factor introduces:
/// `r2 = b'φ' + (τ−λ)b` and `r3 = bφ'' − b'φ'`. In both, `r1 = φ'' + (τ−λ)`.
pub fn grw_system_residual(
    spec: &GrwSpec,
    phi: &dyn Profile,
    lambda: f64,
    t: f64,
    fiber_point: &[f64],
    form: Form,
) -> Result<[f64; 3]> {
    let metric = spec.metric()?;
    let p: Vec<f64> = std::iter::once(t).chain(fiber_point.iter().copied()).collect();
    let tau = curvature_at(&metric, &p)?.tau;
    let [b, db, _] = spec.warp_at(t)?;
    let [_, d1, d2] = phi.eval(t)?;
    let sigma = tau - lambda;
    let r1 = d2 + sigma;
    Ok(match form {
        Form::PaperLiteral => [r1, db * d1 - sigma * b, b * d2 + db * d1],
        Form::Corrected => [r1, db * d1 + sigma * b, b * d2 - db * d1],
    })
}

#[derive(Debug, Clone)]
pub struct StaticSpec {
    /// Lapse function on the fiber chart.
    pub f: Expr,
    pub fiber: MetricField,
}

impl StaticSpec {
    pub fn new(f: Expr, fiber: MetricField) -> Result<StaticSpec> {
        if f.chart() != fiber.chart() {
            return Err(GeomError::Invalid("static lapse must live on the fiber chart".into()));
        }
        if fiber.signature().negative != 0 {
            return Err(GeomError::Invalid("static fiber must be Riemannian".into()));
        }
        Ok(StaticSpec { f, fiber })
    }

    /// Time coordinate name: `t`, primed until it is free.
    fn time_name(&self) -> String {
        let mut name = String::from("t");
        while self.fiber.chart().index_of(&name).is_some() {
            name.push('\'');
        }
        name
    }

    #[allow(clippy::needless_range_loop)]
    pub fn metric(&self) -> Result<MetricField> {
        let time = Chart::new(&[self.time_name()]);
        let chart = product_chart(&time, self.fiber.chart())?;
        let n = chart.dim();
        let mut rows = vec![vec![Expr::constant(&chart, 0.0); n]; n];
        rows[0][0] = -self.f.lift(&chart, 1)?.powi(2);
        for i in 1..n {
            for j in 1..n {
                rows[i][j] = self.fiber.component(i - 1, j - 1).lift(&chart, 1)?;
            }
        }
        let sig = Signature {
            negative: 1,
            positive: self.fiber.dim(),
        };
        MetricField::from_matrix(&chart, sig, rows)
    }

    pub fn check_lapse(&self, fiber_points: &[Vec<f64>]) -> Result<()> {
        check_positive(&self.f, fiber_points)
    }

    /// Lift a fiber field to the spacetime chart (independent of `t`).
    pub fn lift_to_spacetime(&self, e: &Expr) -> Result<Expr> {
        let m = self.metric()?;
        e.lift(m.chart(), 1)
    }
}

#[derive(Debug, Clone)]
pub struct StaticResidual {
    /// `g_F(∇φ, ∇f) − (τ−λ) f`
    pub r1: f64,
    /// `Hess_F(φ) − (τ−λ) g_F`
    pub r2: DMatrix<f64>,
    /// `Δ_F φ − (s/f) g_F(∇φ, ∇f)`
    pub r3: f64,
    pub tau: f64,
}

/// Residuals of the static-spacetime system at a fiber point; `τ` is read
/// from the assembled metric at `t = 0`.
pub fn static_system_residual(
    spec: &StaticSpec,
    phi: &Expr,
    lambda: f64,
    fiber_point: &[f64],
) -> Result<StaticResidual> {
    if phi.chart() != spec.fiber.chart() {
        return Err(GeomError::Invalid(
            "static potential must live on the fiber chart".into(),
        ));
    }
    let fv = spec.f.eval(fiber_point)?;
    if fv <= 0.0 {
        return Err(GeomError::NonPositiveWarping {
            point: fiber_point.to_vec(),
            value: fv,
        });
    }
    let metric = spec.metric()?;
    let p: Vec<f64> = std::iter::once(0.0).chain(fiber_point.iter().copied()).collect();
    let tau = curvature_at(&metric, &p)?.tau;
    let sigma = tau - lambda;

    let geo = PointGeometry::at(&spec.fiber, fiber_point)?;
    let phi_jet = phi.jet(fiber_point)?;
    let f_jet = spec.f.jet(fiber_point)?;
    let pairing = geo.inner_covectors(&phi_jet.gradient, &f_jet.gradient);
    let r2 = geo.hessian(&phi_jet) - &geo.metric.g * sigma;
    let s = spec.fiber.dim() as f64;
    Ok(StaticResidual {
        r1: pairing - sigma * fv,
        r2,
        r3: geo.laplacian(&phi_jet) - s / fv * pairing,
        tau,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;

    #[test]
    fn cartesian_product_is_flat() {
        let base = MetricField::euclidean(&Chart::new(&["u"]));
        let fiber = MetricField::euclidean(&Chart::new(&["v"]));
        let b = Expr::constant(base.chart(), 1.0);
        let m = assemble_warped_metric(&base, &fiber, &b).unwrap();
        assert_eq!(m.component(0, 0).to_string(), "1");
        assert_eq!(m.component(1, 1).to_string(), "1");
        assert_eq!(m.component(0, 1).to_string(), "0");
    }

    #[test]
    fn clashing_names_are_rejected() {
        let base = MetricField::euclidean(&Chart::new(&["x"]));
        let fiber = MetricField::euclidean(&Chart::new(&["x"]));
        let b = Expr::constant(base.chart(), 1.0);
        assert!(assemble_warped_metric(&base, &fiber, &b).is_err());
    }

    #[test]
    fn grw_de_sitter_components() {
        let tc = Chart::new(&["t"]);
        let fiber = MetricField::euclidean(&Chart::new(&["u", "v"]));
        let spec = GrwSpec::new(parse_expression("exp(t)", &tc).unwrap(), fiber, (0.0, 1.0)).unwrap();
        let m = spec.metric().unwrap();
        assert_eq!(m.signature(), Signature::lorentzian(3));
        assert_eq!(m.component(0, 0).to_string(), "-1");
        assert!((m.component(1, 1).eval(&[0.5, 0.0, 0.0]).unwrap() - 1f64.exp()).abs() < 1e-15);
    }

    #[test]
    fn potential_of_unit_warp_is_linear() {
        let tc = Chart::new(&["t"]);
        let b = Expr::constant(&tc, 1.0);
        let v = grw_potential(&b, 3.0, 0.5, 2.0, QuadOptions::default()).unwrap();
        assert!((v - 4.5).abs() < 1e-12);
    }

    #[test]
    fn static_metric_layout() {
        let fc = Chart::new(&["x1", "x2"]);
        let spec = StaticSpec::new(parse_expression("exp(x2)", &fc).unwrap(), MetricField::euclidean(&fc)).unwrap();
        let m = spec.metric().unwrap();
        assert_eq!(m.chart().names(), &["t", "x1", "x2"]);
        let g00 = m.component(0, 0).eval(&[0.0, 0.0, 1.0]).unwrap();
        assert!((g00 + 2f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn nonpositive_warping_is_reported() {
        let tc = Chart::new(&["t"]);
        let fiber = MetricField::euclidean(&Chart::new(&["u"]));
        let spec = GrwSpec::new(parse_expression("t", &tc).unwrap(), fiber, (-1.0, 1.0)).unwrap();
        assert!(matches!(
            spec.check_warping(&[0.5, -0.5]),
            Err(GeomError::NonPositiveWarping { .. })
        ));
    }
}
