//! Adaptive Simpson quadrature and cumulative integral tables.

use crate::error::{GeomError, Result};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_DEPTH: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub tol: f64,
    pub max_depth: u32,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            tol: DEFAULT_TOL,
            max_depth: DEFAULT_MAX_DEPTH,
        }
    }
}

struct Simpson<'f, F> {
    f: &'f F,
    a0: f64,
    b0: f64,
}

impl<F: Fn(f64) -> Result<f64>> Simpson<'_, F> {
    #[allow(clippy::too_many_arguments)]
    fn step(&self, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> Result<f64> {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = ((self.f)(lm)?, (self.f)(rm)?);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        if depth == 0 || m <= a || m >= b {
            return Err(GeomError::QuadratureFailure {
                a: self.a0,
                b: self.b0,
                reason: format!("tolerance {tol:e} not met near [{a}, {b}]"),
            });
        }
        Ok(self.step(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
            + self.step(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
    }
}

/// `∫_a^b f` by adaptive Simpson; `b < a` gives the negated integral.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if a == b {
        return Ok(0.0);
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(GeomError::QuadratureFailure {
            a,
            b,
            reason: "non-finite bounds".into(),
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let s = Simpson { f: &f, a0: a, b0: b };
    let (fa, fb) = (f(lo)?, f(hi)?);
    let fm = f(0.5 * (lo + hi))?;
    let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    let v = s.step(lo, hi, fa, fm, fb, whole, opts.tol, opts.max_depth)?;
    if !v.is_finite() {
        return Err(GeomError::QuadratureFailure {
            a,
            b,
            reason: "non-finite integral".into(),
        });
    }
    Ok(sign * v)
}

/// `F(t) = ∫_{origin}^t f` tabulated at uniform knots; evaluation adds a
/// short adaptive integral from the nearest knot, so there is no
/// interpolation error.
#[derive(Debug, Clone)]
pub struct CumulativeTable {
    origin: f64,
    knots: Vec<f64>,
    values: Vec<f64>,
    opts: QuadOptions,
}

impl CumulativeTable {
    pub fn build<F>(f: &F, origin: f64, lo: f64, hi: f64, intervals: usize, opts: QuadOptions) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let lo = lo.min(origin);
        let hi = hi.max(origin);
        let intervals = intervals.max(1);
        let mut knots: Vec<f64> = (0..=intervals)
            .map(|k| lo + (hi - lo) * k as f64 / intervals as f64)
            .collect();
        if !knots.contains(&origin) {
            knots.push(origin);
            knots.sort_by(f64::total_cmp);
        }
        let start = knots.iter().position(|k| *k == origin).expect("origin is a knot");
        let mut values = vec![0.0; knots.len()];
        for k in start + 1..knots.len() {
            values[k] = values[k - 1] + adaptive_simpson(f, knots[k - 1], knots[k], opts)?;
        }
        for k in (0..start).rev() {
            values[k] = values[k + 1] - adaptive_simpson(f, knots[k], knots[k + 1], opts)?;
        }
        Ok(CumulativeTable {
            origin,
            knots,
            values,
            opts,
        })
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn range(&self) -> (f64, f64) {
        (self.knots[0], self.knots[self.knots.len() - 1])
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.knots.iter().copied().zip(self.values.iter().copied())
    }

    pub fn eval<F>(&self, f: &F, t: f64) -> Result<f64>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let (lo, hi) = self.range();
        if !(lo..=hi).contains(&t) {
            return Err(GeomError::QuadratureFailure {
                a: self.origin,
                b: t,
                reason: format!("{t} lies outside the tabulated range [{lo}, {hi}]"),
            });
        }
        let k = match self.knots.binary_search_by(|k| k.total_cmp(&t)) {
            Ok(k) => return Ok(self.values[k]),
            Err(k) => k,
        };
        // nearest neighbouring knot
        let k = if k == 0 {
            0
        } else if k == self.knots.len() || (t - self.knots[k - 1]) <= (self.knots[k] - t) {
            k - 1
        } else {
            k
        };
        Ok(self.values[k] + adaptive_simpson(f, self.knots[k], t, self.opts)?)
    }
}
