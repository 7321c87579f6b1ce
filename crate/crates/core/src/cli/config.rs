//! JSON job configuration.
//!
//! A config is one JSON object with a `family` discriminator. Keys that the
//! family does not use are rejected, as are keys nobody uses.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::Deserialize;
use serde_json::Value;

use crate::error::GeomError;
use crate::expr::{parse_expression, Chart, Expr};
use crate::families::{
    walker3_chart, walker3_construct, walker4_chart, walker4_construct, Form, GrwPotential, GrwRule, GrwSpec,
    StaticSpec, Walker3Construction, Walker3Instance, Walker3Spec, Walker4Instance, Walker4Spec, WarpedProductSpec,
};
use crate::field::ScalarField;
use crate::grid::{Axis, Grid};
use crate::metric::{MetricField, Signature};
use crate::quadrature::QuadOptions;

pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_COUNT: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: &str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "field `{}`: {}", self.field, self.message)
        }
    }
}

type CResult<T> = std::result::Result<T, ConfigError>;

/// Building a job fails either on the config itself or on the numerics of a
/// construction (quadrature, domain checks).
#[derive(Debug, Clone, PartialEq)]
pub enum JobError {
    Config(ConfigError),
    Numeric(GeomError),
}

impl From<ConfigError> for JobError {
    fn from(e: ConfigError) -> JobError {
        JobError::Config(e)
    }
}

impl fmt::Display for JobError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JobError::Config(e) => write!(f, "config error: {e}"),
            JobError::Numeric(e) => write!(f, "numeric failure: {e}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Custom,
    Warped,
    Grw,
    Static,
    Walker3,
    Walker4,
}

impl Family {
    fn parse(s: &str) -> CResult<Family> {
        Ok(match s {
            "custom" => Family::Custom,
            "warped" => Family::Warped,
            "grw" => Family::Grw,
            "static" => Family::Static,
            "walker3" => Family::Walker3,
            "walker4" => Family::Walker4,
            other => {
                return Err(ConfigError::new(
                    "family",
                    format!("unknown family `{other}` (expected custom, warped, grw, static, walker3 or walker4)"),
                ))
            }
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Custom => "custom",
            Family::Warped => "warped",
            Family::Grw => "grw",
            Family::Static => "static",
            Family::Walker3 => "walker3",
            Family::Walker4 => "walker4",
        }
    }

    fn keys(self) -> &'static [&'static str] {
        match self {
            Family::Custom => &["coords", "metric", "signature", "potential"],
            Family::Warped => &["base", "fiber", "warp", "potential"],
            Family::Grw => &["fiber", "warp", "interval", "alpha", "t0", "rule", "potential"],
            Family::Static => &["fiber", "lapse", "potential"],
            Family::Walker3 => &["phi", "potential", "kappa", "eta", "zeta"],
            Family::Walker4 => &["b", "c", "t0", "interval", "potential"],
        }
    }

    pub fn has_paper_literal(self) -> bool {
        matches!(self, Family::Walker3 | Family::Walker4)
    }
}

const COMMON_KEYS: [&str; 6] = ["family", "lambda", "mu", "tolerance", "grid", "output"];

/// A factor of a product: coordinates plus a metric description.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorDef {
    pub coords: Vec<String>,
    /// `flat` (default), `sphere` or `components`.
    #[serde(default)]
    pub kind: Option<String>,
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub components: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub signature: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub family: String,
    pub coords: Option<Vec<String>>,
    pub metric: Option<Vec<Vec<String>>>,
    pub signature: Option<String>,
    pub base: Option<FactorDef>,
    pub fiber: Option<FactorDef>,
    pub warp: Option<String>,
    pub lapse: Option<String>,
    pub phi: Option<String>,
    pub b: Option<String>,
    pub potential: Option<String>,
    pub kappa: Option<f64>,
    pub eta: Option<String>,
    pub zeta: Option<String>,
    pub c: Option<[f64; 4]>,
    pub t0: Option<f64>,
    pub alpha: Option<f64>,
    pub rule: Option<String>,
    pub interval: Option<[f64; 2]>,
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub tolerance: Option<f64>,
    pub grid: Option<Vec<Axis>>,
    pub output: Option<String>,
}

impl RawConfig {
    /// Parse JSON text, rejecting keys the named family does not use.
    pub fn from_json(text: &str) -> CResult<RawConfig> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| ConfigError::new("", format!("invalid JSON: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| ConfigError::new("", "config must be a JSON object"))?;
        let family = obj
            .get("family")
            .ok_or_else(|| ConfigError::new("family", "missing"))?
            .as_str()
            .ok_or_else(|| ConfigError::new("family", "must be a string"))?;
        let family = Family::parse(family)?;
        let allowed: BTreeSet<&str> = COMMON_KEYS.iter().chain(family.keys()).copied().collect();
        for key in obj.keys() {
            if !allowed.contains(key.as_str()) {
                return Err(ConfigError::new(
                    key,
                    format!("not a valid key for family `{}`", family.name()),
                ));
            }
        }
        serde_json::from_value(value).map_err(|e| {
            let msg = e.to_string();
            let field = msg
                .split('`')
                .nth(1)
                .filter(|_| msg.starts_with("unknown field") || msg.starts_with("missing field"))
                .unwrap_or("")
                .to_string();
            ConfigError { field, message: msg }
        })
    }

    pub fn family(&self) -> CResult<Family> {
        Family::parse(&self.family)
    }
}

/// Everything needed to run the soliton check for one job.
#[derive(Debug, Clone)]
pub enum Potential {
    /// The config gave no potential; only curvature can be reported.
    None,
    Field(Arc<dyn ScalarField>),
}

/// Output of a family construction, kept for the `construct` artifact.
#[derive(Debug, Clone)]
pub enum Construction {
    Grw {
        spec: GrwSpec,
        potential: Arc<GrwPotential>,
    },
    Walker3(Walker3Instance),
    Walker4 {
        spec: Walker4Spec,
        instance: Walker4Instance,
    },
}

#[derive(Debug, Clone)]
pub struct Job {
    pub family: Family,
    pub form: Form,
    pub metric: MetricField,
    pub potential: Potential,
    pub construction: Option<Construction>,
    pub lambda: Option<f64>,
    pub mu: f64,
    pub tolerance: f64,
    pub grid: Grid,
    pub output: Option<String>,
}

/// Command-line overrides applied on top of the config.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub tolerance: Option<f64>,
    pub grid_count: Option<usize>,
    pub paper_literal: bool,
}

fn expr(field: &str, source: &str, chart: &Arc<Chart>) -> CResult<Expr> {
    parse_expression(source, chart).map_err(|e| ConfigError::new(field, e.to_string()))
}

fn required<'a, T>(field: &str, v: &'a Option<T>) -> CResult<&'a T> {
    v.as_ref().ok_or_else(|| ConfigError::new(field, "missing"))
}

fn reject(field: &str, v: bool, why: &str) -> CResult<()> {
    if v {
        Err(ConfigError::new(field, why))
    } else {
        Ok(())
    }
}

fn chart_from(field: &str, coords: &[String]) -> CResult<Arc<Chart>> {
    if coords.is_empty() {
        return Err(ConfigError::new(field, "needs at least one coordinate"));
    }
    for (i, c) in coords.iter().enumerate() {
        let ok = c.chars().next().is_some_and(|ch| ch.is_ascii_alphabetic() || ch == '_')
            && c.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '_');
        if !ok || crate::expr::Func::from_name(c).is_some() {
            return Err(ConfigError::new(field, format!("`{c}` is not a valid coordinate name")));
        }
        if coords[..i].contains(c) {
            return Err(ConfigError::new(field, format!("coordinate `{c}` is repeated")));
        }
    }
    Ok(Chart::new(coords))
}

fn signature(field: &str, s: Option<&String>, n: usize) -> CResult<Signature> {
    match s {
        None => Ok(Signature::riemannian(n)),
        Some(s) => {
            let sig = Signature::parse(s).map_err(|e| ConfigError::new(field, e.to_string()))?;
            if sig.dim() != n {
                return Err(ConfigError::new(
                    field,
                    format!("has {} signs for {n} coordinates", sig.dim()),
                ));
            }
            Ok(sig)
        }
    }
}

fn matrix(field: &str, rows: &[Vec<String>], chart: &Arc<Chart>, sig: Signature) -> CResult<MetricField> {
    let n = chart.dim();
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(ConfigError::new(
            field,
            format!("must be a {n}x{n} matrix of expressions"),
        ));
    }
    let mut parsed = Vec::with_capacity(n);
    for (i, row) in rows.iter().enumerate() {
        let mut out = Vec::with_capacity(n);
        for (j, src) in row.iter().enumerate() {
            out.push(expr(&format!("{field}[{i}][{j}]"), src, chart)?);
        }
        parsed.push(out);
    }
    MetricField::from_matrix(chart, sig, parsed).map_err(|e| ConfigError::new(field, e.to_string()))
}

fn factor(field: &str, def: &FactorDef) -> CResult<MetricField> {
    let chart = chart_from(&format!("{field}.coords"), &def.coords)?;
    let kind = def
        .kind
        .as_deref()
        .unwrap_or(if def.components.is_some() { "components" } else { "flat" });
    let sig_field = format!("{field}.signature");
    match kind {
        "flat" => {
            reject(
                &format!("{field}.components"),
                def.components.is_some(),
                "not used by a flat factor",
            )?;
            reject(
                &format!("{field}.radius"),
                def.radius.is_some(),
                "not used by a flat factor",
            )?;
            let sig = signature(&sig_field, def.signature.as_ref(), chart.dim())?;
            let signs: Vec<f64> = (0..chart.dim())
                .map(|i| if i < sig.negative { -1.0 } else { 1.0 })
                .collect();
            MetricField::flat(&chart, &signs).map_err(|e| ConfigError::new(field, e.to_string()))
        }
        "sphere" => {
            reject(
                &format!("{field}.components"),
                def.components.is_some(),
                "not used by a sphere",
            )?;
            reject(&sig_field, def.signature.is_some(), "a sphere is Riemannian")?;
            let r = def.radius.unwrap_or(1.0);
            if !(r > 0.0 && r.is_finite()) {
                return Err(ConfigError::new(&format!("{field}.radius"), "must be positive"));
            }
            MetricField::round_sphere(&chart, r)
                .map_err(|e| ConfigError::new(&format!("{field}.coords"), e.to_string()))
        }
        "components" => {
            reject(
                &format!("{field}.radius"),
                def.radius.is_some(),
                "not used by explicit components",
            )?;
            let rows = required(&format!("{field}.components"), &def.components)?;
            let sig = signature(&sig_field, def.signature.as_ref(), chart.dim())?;
            matrix(&format!("{field}.components"), rows, &chart, sig)
        }
        other => Err(ConfigError::new(
            &format!("{field}.kind"),
            format!("unknown kind `{other}` (expected flat, sphere or components)"),
        )),
    }
}

/// Default sampling range for a factor coordinate: spheres keep away from the poles.
fn factor_axes(def: &FactorDef) -> Vec<Axis> {
    let sphere = def.kind.as_deref() == Some("sphere");
    (0..def.coords.len())
        .map(|i| {
            if sphere && i == 0 {
                Axis::new(0.5, 2.5, DEFAULT_COUNT)
            } else {
                Axis::new(-1.0, 1.0, DEFAULT_COUNT)
            }
        })
        .collect()
}

fn cube(n: usize) -> Vec<Axis> {
    vec![Axis::new(-1.0, 1.0, DEFAULT_COUNT); n]
}

fn interval(raw: &RawConfig) -> CResult<(f64, f64)> {
    let [a, b] = *required("interval", &raw.interval)?;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(ConfigError::new(
            "interval",
            format!("[{a}, {b}] is not a proper interval"),
        ));
    }
    Ok((a, b))
}

fn field_of(e: Expr) -> Arc<dyn ScalarField> {
    Arc::new(e)
}

impl Job {
    pub fn from_raw(raw: &RawConfig, ov: Overrides) -> Result<Job, JobError> {
        let family = raw.family()?;
        if ov.paper_literal && !family.has_paper_literal() {
            return Err(JobError::Config(ConfigError::new(
                "family",
                format!("--paper-literal is not defined for family `{}`", family.name()),
            )));
        }
        let form = Form::from_flag(ov.paper_literal);
        let mu = raw.mu.unwrap_or(0.0);
        if !mu.is_finite() {
            return Err(JobError::Config(ConfigError::new("mu", "must be finite")));
        }
        if let Some(l) = raw.lambda {
            if !l.is_finite() {
                return Err(JobError::Config(ConfigError::new("lambda", "must be finite")));
            }
        }
        let tolerance = ov.tolerance.or(raw.tolerance).unwrap_or(DEFAULT_TOLERANCE);
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return Err(JobError::Config(ConfigError::new("tolerance", "must be positive")));
        }
        let quad = QuadOptions::default();

        let mut construction = None;
        let (metric, potential, default_axes) = match family {
            Family::Custom => {
                let coords = required("coords", &raw.coords)?;
                let chart = chart_from("coords", coords)?;
                let sig = signature("signature", raw.signature.as_ref(), chart.dim())?;
                let metric = matrix("metric", required("metric", &raw.metric)?, &chart, sig)?;
                let pot = match &raw.potential {
                    Some(s) => Potential::Field(field_of(expr("potential", s, &chart)?)),
                    None => Potential::None,
                };
                (metric, pot, cube(chart.dim()))
            }
            Family::Warped => {
                let base_def = required("base", &raw.base)?;
                let fiber_def = required("fiber", &raw.fiber)?;
                let base = factor("base", base_def)?;
                let fiber = factor("fiber", fiber_def)?;
                let b = expr("warp", required("warp", &raw.warp)?, base.chart())?;
                let spec = WarpedProductSpec { base, fiber, b };
                let metric = spec
                    .metric()
                    .map_err(|e| ConfigError::new("fiber.coords", e.to_string()))?;
                let pot = match &raw.potential {
                    Some(s) => Potential::Field(field_of(expr("potential", s, metric.chart())?)),
                    None => Potential::None,
                };
                let mut axes = factor_axes(base_def);
                axes.extend(factor_axes(fiber_def));
                (metric, pot, axes)
            }
            Family::Grw => {
                let fiber_def = required("fiber", &raw.fiber)?;
                let fiber = factor("fiber", fiber_def)?;
                if fiber.signature().negative != 0 {
                    return Err(JobError::Config(ConfigError::new(
                        "fiber.signature",
                        "GRW fibers are Riemannian",
                    )));
                }
                if fiber_def.coords.iter().any(|c| c == "t") {
                    return Err(JobError::Config(ConfigError::new(
                        "fiber.coords",
                        "`t` is reserved for the time coordinate",
                    )));
                }
                let tchart = Chart::new(&["t"]);
                let b = expr("warp", required("warp", &raw.warp)?, &tchart)?;
                let (lo, hi) = interval(raw)?;
                let spec = GrwSpec::new(b, fiber, (lo, hi)).map_err(|e| ConfigError::new("warp", e.to_string()))?;
                let metric = spec
                    .metric()
                    .map_err(|e| ConfigError::new("fiber.coords", e.to_string()))?;
                let pot = match (&raw.potential, raw.alpha) {
                    (Some(_), Some(_)) => {
                        return Err(JobError::Config(ConfigError::new(
                            "potential",
                            "give either `potential` or `alpha`, not both",
                        )))
                    }
                    (Some(s), None) => {
                        reject("rule", raw.rule.is_some(), "only used with `alpha`")?;
                        reject("t0", raw.t0.is_some(), "only used with `alpha`")?;
                        Potential::Field(field_of(expr("potential", s, metric.chart())?))
                    }
                    (None, Some(alpha)) => {
                        let rule = match &raw.rule {
                            Some(r) => GrwRule::parse(r).map_err(|e| ConfigError::new("rule", e.to_string()))?,
                            None => GrwRule::InverseWarp,
                        };
                        let t0 = raw.t0.unwrap_or(lo);
                        if !(lo..=hi).contains(&t0) {
                            return Err(JobError::Config(ConfigError::new(
                                "t0",
                                format!("must lie in [{lo}, {hi}]"),
                            )));
                        }
                        let p = Arc::new(spec.potential(alpha, t0, rule, quad).map_err(JobError::Numeric)?);
                        let field: Arc<dyn ScalarField> = Arc::new(p.field(metric.chart()));
                        construction = Some(Construction::Grw {
                            spec: spec.clone(),
                            potential: p,
                        });
                        Potential::Field(field)
                    }
                    (None, None) => {
                        reject("rule", raw.rule.is_some(), "only used with `alpha`")?;
                        reject("t0", raw.t0.is_some(), "only used with `alpha`")?;
                        Potential::None
                    }
                };
                let mut axes = vec![Axis::new(lo, hi, DEFAULT_COUNT)];
                axes.extend(factor_axes(fiber_def));
                (metric, pot, axes)
            }
            Family::Static => {
                let fiber_def = required("fiber", &raw.fiber)?;
                let fiber = factor("fiber", fiber_def)?;
                let f = expr("lapse", required("lapse", &raw.lapse)?, fiber.chart())?;
                let spec = StaticSpec::new(f, fiber).map_err(|e| ConfigError::new("fiber", e.to_string()))?;
                let metric = spec
                    .metric()
                    .map_err(|e| ConfigError::new("fiber.coords", e.to_string()))?;
                let pot = match &raw.potential {
                    Some(s) => {
                        let e = expr("potential", s, spec.fiber.chart())?;
                        let lifted = e
                            .lift(metric.chart(), 1)
                            .map_err(|e| ConfigError::new("potential", e.to_string()))?;
                        Potential::Field(field_of(lifted))
                    }
                    None => Potential::None,
                };
                let mut axes = vec![Axis::new(-1.0, 1.0, DEFAULT_COUNT)];
                axes.extend(factor_axes(fiber_def));
                (metric, pot, axes)
            }
            Family::Walker3 => {
                let chart = walker3_chart();
                let (metric, pot) = if let Some(eta) = &raw.eta {
                    reject(
                        "phi",
                        raw.phi.is_some(),
                        "the construction determines `phi`; drop it or drop `eta`",
                    )?;
                    reject(
                        "potential",
                        raw.potential.is_some(),
                        "the construction determines the potential",
                    )?;
                    let c = Walker3Construction {
                        kappa: raw.kappa.unwrap_or(0.0),
                        eta: expr("eta", eta, &chart)?,
                        zeta: expr("zeta", raw.zeta.as_deref().unwrap_or("0"), &chart)?,
                    };
                    let ys = default_or_configured(raw, &cube(3), ov)?
                        .axes
                        .get(2)
                        .map(Axis::samples)
                        .unwrap_or_default();
                    let inst = walker3_construct(&c, form, &ys).map_err(|e| match e {
                        GeomError::Invalid(m) => JobError::Config(ConfigError::new("eta", m)),
                        other => JobError::Numeric(other),
                    })?;
                    let metric = inst.metric().map_err(JobError::Numeric)?;
                    let pot = Potential::Field(field_of(inst.f.clone()));
                    construction = Some(Construction::Walker3(inst));
                    (metric, pot)
                } else {
                    for k in ["kappa", "zeta"] {
                        let present = if k == "kappa" {
                            raw.kappa.is_some()
                        } else {
                            raw.zeta.is_some()
                        };
                        reject(k, present, "only used with `eta`")?;
                    }
                    let phi = expr("phi", required("phi", &raw.phi)?, &chart)?;
                    let metric = Walker3Spec { phi }
                        .metric()
                        .map_err(|e| ConfigError::new("phi", e.to_string()))?;
                    let pot = match &raw.potential {
                        Some(s) => Potential::Field(field_of(expr("potential", s, &chart)?)),
                        None => Potential::None,
                    };
                    (metric, pot)
                };
                (metric, pot, cube(3))
            }
            Family::Walker4 => {
                let chart = walker4_chart();
                let b = expr("b", required("b", &raw.b)?, &chart)?;
                let t0 = raw.t0.unwrap_or(0.0);
                let spec = Walker4Spec {
                    b,
                    c: raw.c.unwrap_or([0.0; 4]),
                    t0,
                };
                let metric = spec.metric().map_err(|e| ConfigError::new("b", e.to_string()))?;
                let pot = match (&raw.potential, raw.c) {
                    (Some(_), Some(_)) => {
                        return Err(JobError::Config(ConfigError::new(
                            "potential",
                            "give either `potential` or `c`, not both",
                        )))
                    }
                    (Some(s), None) => {
                        reject("interval", raw.interval.is_some(), "only used with `c`")?;
                        Potential::Field(field_of(expr("potential", s, &chart)?))
                    }
                    (None, Some(_)) => {
                        let grid = default_or_configured(raw, &cube(4), ov)?;
                        let (lo, hi) = match raw.interval {
                            Some(_) => interval(raw)?,
                            None => (grid.axes[3].min, grid.axes[3].max),
                        };
                        let inst = walker4_construct(&spec, (lo, hi), form, quad).map_err(JobError::Numeric)?;
                        let pot = Potential::Field(Arc::new(inst.f.clone()));
                        construction = Some(Construction::Walker4 { spec, instance: inst });
                        pot
                    }
                    (None, None) => {
                        reject("interval", raw.interval.is_some(), "only used with `c`")?;
                        Potential::None
                    }
                };
                (metric, pot, cube(4))
            }
        };
        if matches!(potential, Potential::None) {
            reject("lambda", raw.lambda.is_some(), "needs a potential")?;
        }
        let grid = default_or_configured(raw, &default_axes, ov)?;
        if grid.dim() != metric.dim() {
            return Err(JobError::Config(ConfigError::new(
                "grid",
                format!("has {} axes but the chart has {} coordinates", grid.dim(), metric.dim()),
            )));
        }
        Ok(Job {
            family,
            form,
            metric,
            potential,
            construction,
            lambda: raw.lambda,
            mu,
            tolerance,
            grid,
            output: raw.output.clone(),
        })
    }
}

fn default_or_configured(raw: &RawConfig, defaults: &[Axis], ov: Overrides) -> CResult<Grid> {
    let mut axes = raw.grid.clone().unwrap_or_else(|| defaults.to_vec());
    if let Some(n) = ov.grid_count {
        for a in &mut axes {
            a.count = n;
        }
    }
    Grid::new(axes).map_err(|e| ConfigError::new("grid", e.to_string()))
}
