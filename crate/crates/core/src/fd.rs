//! Central finite differences: the independent oracle for the jet path.
//!
//! Only field values are sampled, so nothing here shares derivative rules
//! with [`crate::jet`].

use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};
use crate::field::ScalarField;
use crate::jet::Jet2;

/// Per-axis step `h * max(1, |x_i|)`.
pub fn axis_steps(p: &[f64], h: f64) -> Vec<f64> {
    p.iter().map(|x| h * x.abs().max(1.0)).collect()
}

/// Second-order central differences with base step `h` (scaled per axis).
pub fn finite_diff_jet2(field: &dyn ScalarField, p: &[f64], h: f64) -> Result<Jet2> {
    if h.is_nan() || h <= 0.0 {
        return Err(GeomError::Invalid(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    let n = p.len();
    let steps = axis_steps(p, h);
    let f = |offsets: &[(usize, f64)]| -> Result<f64> {
        let mut q = p.to_vec();
        for &(i, d) in offsets {
            q[i] += d;
        }
        field.value(&q)
    };
    let f0 = f(&[])?;
    let mut plus = vec![0.0; n];
    let mut minus = vec![0.0; n];
    for i in 0..n {
        plus[i] = f(&[(i, steps[i])])?;
        minus[i] = f(&[(i, -steps[i])])?;
    }
    let gradient = DVector::from_fn(n, |i, _| (plus[i] - minus[i]) / (2.0 * steps[i]));
    let mut hessian = DMatrix::zeros(n, n);
    for i in 0..n {
        let hi = steps[i];
        hessian[(i, i)] = (plus[i] - 2.0 * f0 + minus[i]) / (hi * hi);
        for j in i + 1..n {
            let hj = steps[j];
            let pp = f(&[(i, hi), (j, hj)])?;
            let pm = f(&[(i, hi), (j, -hj)])?;
            let mp = f(&[(i, -hi), (j, hj)])?;
            let mm = f(&[(i, -hi), (j, -hj)])?;
            let v = (pp - pm - mp + mm) / (4.0 * hi * hj);
            hessian[(i, j)] = v;
            hessian[(j, i)] = v;
        }
    }
    Ok(Jet2 {
        value: f0,
        gradient,
        hessian,
    })
}

/// One Richardson step on [`finite_diff_jet2`]: `(4 D(h/2) - D(h)) / 3`.
///
/// Cancels the leading `h^2` error term, which lets a larger base step keep
/// round-off in the second differences far below the comparison tolerance.
pub fn finite_diff_jet2_richardson(field: &dyn ScalarField, p: &[f64], h: f64) -> Result<Jet2> {
    finite_diff_jet2_extrapolated(field, p, h, 1)
}

/// `levels` rounds of Richardson extrapolation over the steps
/// `h, h/2, ..., h/2^levels`; round `k` cancels the `h^(2k)` term.
pub fn finite_diff_jet2_extrapolated(field: &dyn ScalarField, p: &[f64], h: f64, levels: usize) -> Result<Jet2> {
    let mut row = (0..=levels)
        .map(|k| finite_diff_jet2(field, p, h / f64::powi(2.0, k as i32)))
        .collect::<Result<Vec<_>>>()?;
    let mut factor = 1.0;
    for _ in 0..levels {
        factor *= 4.0;
        row = row
            .windows(2)
            .map(|w| Jet2 {
                value: w[1].value,
                gradient: (&w[1].gradient * factor - &w[0].gradient) / (factor - 1.0),
                hessian: (&w[1].hessian * factor - &w[0].hessian) / (factor - 1.0),
            })
            .collect();
    }
    Ok(row.pop().expect("at least one level"))
}
