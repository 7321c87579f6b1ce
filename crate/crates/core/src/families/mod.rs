//! Metric families with explicit soliton structures: warped products,
//! generalized Robertson–Walker and standard static spacetimes, and the 3D
//! and 4D Walker metrics.

mod walker;
mod warped;

pub use walker::{
    walker3_chart, walker3_closed_forms, walker3_construct, walker3_metric, walker3_pde_residual, walker4_chart,
    walker4_closed_forms, walker4_construct, walker4_metric, walker4_pde_residual, EProfile, Walker3Construction,
    Walker3Instance, Walker3Spec, Walker4Instance, Walker4Spec,
};
pub use warped::{
    assemble_warped_metric, fiber_curvature_spread, grw_potential, grw_system_residual,
    require_constant_fiber_curvature, static_system_residual, GrwPotential, GrwRule, GrwSpec, StaticResidual,
    StaticSpec, WarpedProductSpec,
};

use std::fmt;

use crate::curvature::laplace_beltrami;
use crate::error::Result;
use crate::field::ScalarField;
use crate::metric::MetricField;

/// Which version of a published formula to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Form {
    /// The form forced by the underlying PDE system.
    #[default]
    Corrected,
    /// The formula exactly as printed; kept to show that it fails.
    PaperLiteral,
}

impl Form {
    pub fn from_flag(paper_literal: bool) -> Form {
        if paper_literal {
            Form::PaperLiteral
        } else {
            Form::Corrected
        }
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Form::Corrected => "corrected",
            Form::PaperLiteral => "paper-literal",
        })
    }
}

/// One of the supported metric families.
#[derive(Debug, Clone)]
pub enum FamilySpec {
    Warped(WarpedProductSpec),
    Grw(GrwSpec),
    Static(StaticSpec),
    Walker3(Walker3Spec),
    Walker4(Walker4Spec),
}

impl FamilySpec {
    pub fn metric(&self) -> Result<MetricField> {
        match self {
            FamilySpec::Warped(s) => s.metric(),
            FamilySpec::Grw(s) => s.metric(),
            FamilySpec::Static(s) => s.metric(),
            FamilySpec::Walker3(s) => s.metric(),
            FamilySpec::Walker4(s) => s.metric(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianReport {
    pub values: Vec<f64>,
    pub mean: f64,
    /// `max |Δf(p) − mean|`
    pub max_dev: f64,
}

/// Sample `Δf` over `points` and report its deviation from a constant.
pub fn laplacian_report(m: &MetricField, f: &dyn ScalarField, points: &[Vec<f64>]) -> Result<LaplacianReport> {
    use rayon::prelude::*;
    let values = points
        .par_iter()
        .map(|p| laplace_beltrami(m, f, p))
        .collect::<Result<Vec<f64>>>()?;
    let mean = if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    };
    let max_dev = values.iter().fold(0.0f64, |a, v| a.max((v - mean).abs()));
    Ok(LaplacianReport { values, mean, max_dev })
}
