//! Shared fixtures: a seeded generator of well-conditioned random
//! expressions and helpers for comparing jets.
#![allow(dead_code)]

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nalgebra::DMatrix;
use soliton_lab::expr::{parse_expression, Chart, Expr};
use soliton_lab::families::{
    assemble_warped_metric, walker3_chart, walker3_metric, walker4_chart, walker4_metric, GrwSpec, StaticSpec,
};
use soliton_lab::fd::finite_diff_jet2_extrapolated;
use soliton_lab::field::ScalarField;
use soliton_lab::jet::Jet2;
use soliton_lab::metric::MetricField;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random expression source over `names`. Every operation is guarded so the
/// result is smooth and finite on any bounded box: denominators, logarithm
/// and square-root arguments are `1 + (...)^2`.
pub fn random_source<R: Rng>(rng: &mut R, names: &[String], depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.25) {
        return if rng.gen_bool(0.7) {
            names[rng.gen_range(0..names.len())].clone()
        } else {
            let c: f64 = rng.gen_range(-2.0..2.0);
            format!("{:.3}", c)
        };
    }
    let a = random_source(rng, names, depth - 1);
    let sub = |rng: &mut R| random_source(rng, names, depth - 1);
    match rng.gen_range(0..11) {
        0 => format!("({a}) + ({})", sub(rng)),
        1 => format!("({a}) - ({})", sub(rng)),
        2 => format!("({a})*({})", sub(rng)),
        3 => format!("({a})/(1 + ({})^2)", sub(rng)),
        4 => format!("-({a})"),
        5 => format!("({a})^{}", rng.gen_range(2..4)),
        6 => format!("sin({a})"),
        7 => format!("cos({a})"),
        8 => format!("exp(sin({a}))"),
        9 => format!("ln(1 + ({a})^2)"),
        _ => format!("sqrt(1 + ({a})^2)"),
    }
}

pub fn random_expr<R: Rng>(rng: &mut R, chart: &Arc<Chart>, depth: u32) -> Expr {
    let src = random_source(rng, chart.names(), depth);
    parse_expression(&src, chart).unwrap_or_else(|e| panic!("generated `{src}` does not parse: {e}"))
}

pub fn random_point<R: Rng>(rng: &mut R, n: usize, half_width: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-half_width..half_width)).collect()
}

/// `|a - b| <= abs + rel * |b|`
pub fn close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    (a - b).abs() <= abs + rel * b.abs()
}

pub fn chart(n: usize) -> Arc<Chart> {
    let names: Vec<String> = ["t", "x", "y", "z"][..n].iter().map(|s| s.to_string()).collect();
    Chart::new(&names)
}

pub const FD_STEP: f64 = 4e-3;

pub const FD_LEVELS: usize = 2;

/// Oracle jet: two rounds of Richardson extrapolation over central
/// differences. Plain second differences at `1e-5` lose about `1e-6 |f|` to
/// round-off, the size of the comparison tolerance itself.
pub fn oracle_jet(field: &dyn ScalarField, p: &[f64]) -> Jet2 {
    finite_diff_jet2_extrapolated(field, p, FD_STEP, FD_LEVELS).expect("oracle jet")
}

/// Largest violation ratio `|a - b| / (abs + rel |b|)` over every jet entry.
pub fn jet_violation(a: &Jet2, b: &Jet2, rel: f64, abs: f64) -> f64 {
    let ratio = |x: f64, y: f64| (x - y).abs() / (abs + rel * y.abs());
    let mut worst = ratio(a.value, b.value);
    for (x, y) in a.gradient.iter().zip(b.gradient.iter()) {
        worst = worst.max(ratio(*x, *y));
    }
    for (x, y) in a.hessian.iter().zip(b.hessian.iter()) {
        worst = worst.max(ratio(*x, *y));
    }
    worst
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}

pub fn random_walker3_phi(rng: &mut rand_chacha::ChaCha8Rng) -> Expr {
    random_expr(rng, &walker3_chart(), 3)
}

/// A random positive warp `b(t)` on the Walker4 chart.
pub fn random_walker4_b(rng: &mut rand_chacha::ChaCha8Rng) -> Expr {
    let src = random_source(rng, &["t".to_string()], 3);
    parse_expression(&format!("1.5 + sin({src})"), &walker4_chart()).unwrap()
}

pub const FAMILY_COUNT: usize = 6;

/// A family metric and a point where it is valid, indexed by `k`: Walker3,
/// Walker4, round sphere, GRW over a sphere, static, warped over a line.
pub fn family_metric(k: usize, rng: &mut rand_chacha::ChaCha8Rng) -> (MetricField, Vec<f64>) {
    match k % 6 {
        0 => (
            walker3_metric(&random_walker3_phi(rng)).unwrap(),
            random_point(rng, 3, 1.0),
        ),
        1 => (
            walker4_metric(&random_walker4_b(rng)).unwrap(),
            random_point(rng, 4, 1.0),
        ),
        2 => {
            let chart = Chart::new(&["u", "v"]);
            let r = rng.gen_range(0.5..3.0);
            let u = rng.gen_range(0.3..2.8);
            (
                MetricField::round_sphere(&chart, r).unwrap(),
                vec![u, rng.gen_range(-3.0..3.0)],
            )
        }
        3 => {
            let tc = Chart::new(&["t"]);
            let b = parse_expression("0.5*exp(t) + 0.5*exp(-t)", &tc).unwrap();
            let sphere = MetricField::round_sphere(&Chart::new(&["u", "v"]), 1.0).unwrap();
            let spec = GrwSpec::new(b, sphere, (-1.0, 1.0)).unwrap();
            let mut p = random_point(rng, 3, 1.0);
            p[1] = rng.gen_range(0.3..2.8);
            (spec.metric().unwrap(), p)
        }
        4 => {
            let fc = Chart::new(&["x1", "x2"]);
            let src = random_source(rng, fc.names(), 3);
            let f = parse_expression(&format!("exp(sin({src}))"), &fc).unwrap();
            let spec = StaticSpec::new(f, MetricField::euclidean(&fc)).unwrap();
            (spec.metric().unwrap(), random_point(rng, 3, 1.0))
        }
        _ => {
            let tc = Chart::new(&["t"]);
            let src = random_source(rng, tc.names(), 3);
            let b = parse_expression(&format!("exp(sin({src}))"), &tc).unwrap();
            let fiber = MetricField::euclidean(&Chart::new(&["u", "v"]));
            let m = assemble_warped_metric(&MetricField::euclidean(&tc), &fiber, &b).unwrap();
            (m, random_point(rng, 3, 1.0))
        }
    }
}
