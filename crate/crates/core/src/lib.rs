//! Coordinate-chart tensor calculus and verification of Yamabe-type
//! gradient solitons.
//!
//! The pipeline is pointwise: an [`expr::Expr`] is evaluated as a
//! second-order [`jet::Jet2`], metric components are assembled into a
//! [`metric::MetricAtPoint`], and [`curvature`] turns that into Christoffel
//! symbols, curvature and covariant derivatives of scalars. [`soliton`]
//! evaluates soliton residuals on top, and [`families`] builds the concrete
//! warped-product and Walker constructions.

pub mod cli;
pub mod curvature;
pub mod error;
pub mod expr;
pub mod families;
pub mod fd;
pub mod field;
pub mod grid;
pub mod jet;
pub mod metric;
pub mod quadrature;
pub mod soliton;

pub use error::{GeomError, Result};
