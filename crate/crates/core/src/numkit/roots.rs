use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Cubic polynomial `c3 x³ + c2 x² + c1 x + c0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cubic {
    pub c3: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl Cubic {
    pub fn new(c3: f64, c2: f64, c1: f64, c0: f64) -> Self {
        Cubic { c3, c2, c1, c0 }
    }

    /// From ascending-power coefficients; missing high-order terms are zero.
    pub fn from_ascending(coeffs: &[f64]) -> Self {
        let c = |i: usize| coeffs.get(i).copied().unwrap_or(0.0);
        assert!(coeffs.len() <= 4, "degree above 3");
        Cubic::new(c(3), c(2), c(1), c(0))
    }

    pub fn eval(&self, x: f64) -> f64 {
        ((self.c3 * x + self.c2) * x + self.c1) * x + self.c0
    }

    fn derivative(&self, x: f64) -> f64 {
        (3.0 * self.c3 * x + 2.0 * self.c2) * x + self.c1
    }

    pub fn max_coeff(&self) -> f64 {
        [self.c3, self.c2, self.c1, self.c0]
            .iter()
            .map(|c| c.abs())
            .fold(0.0, f64::max)
    }
}

/// Real roots of `a x² + b x + c`, ascending. Degenerate `a` falls through
/// to the linear case.
pub fn real_roots_quadratic(a: f64, b: f64, c: f64) -> Result<Vec<f64>> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return Err(Error::domain("all-zero polynomial has no isolated roots"));
    }
    if a.abs() <= 1e-15 * scale {
        if b.abs() <= 1e-15 * scale {
            return Ok(Vec::new());
        }
        return Ok(vec![-c / b]);
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        // Tolerate a slightly negative discriminant from a double root.
        if disc > -1e-14 * b * b {
            return Ok(vec![-b / (2.0 * a)]);
        }
        return Ok(Vec::new());
    }
    let sq = disc.sqrt();
    let q = -0.5 * (b + b.signum_nonzero() * sq);
    let mut roots = if q == 0.0 {
        vec![0.0, 0.0]
    } else {
        vec![q / a, c / q]
    };
    roots.sort_by(f64::total_cmp);
    Ok(roots)
}

trait SignumNonzero {
    fn signum_nonzero(self) -> f64;
}

impl SignumNonzero for f64 {
    fn signum_nonzero(self) -> f64 {
        if self < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
}

/// All real roots of a cubic, ascending, computed in closed form
/// (trigonometric method for three real roots, Cardano otherwise) and
/// polished with Newton steps.
pub fn real_roots_cubic(c: &Cubic) -> Result<Vec<f64>> {
    let scale = c.max_coeff();
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::domain(
            "cubic must have finite, not all-zero coefficients",
        ));
    }
    if c.c3.abs() <= 1e-14 * scale {
        return real_roots_quadratic(c.c2, c.c1, c.c0);
    }
    let a2 = c.c2 / c.c3;
    let a1 = c.c1 / c.c3;
    let a0 = c.c0 / c.c3;
    let shift = a2 / 3.0;
    let p = a1 - a2 * a2 / 3.0;
    let q = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);

    let mut roots: Vec<f64> = if p == 0.0 && q == 0.0 {
        vec![-shift]
    } else if disc > 0.0 {
        let sq = disc.sqrt();
        let u = (-q / 2.0 + sq).cbrt();
        let v = (-q / 2.0 - sq).cbrt();
        vec![u + v - shift]
    } else {
        // Three real roots (some possibly repeated); p < 0 here.
        let r = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * r)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        (0..3)
            .map(|k| r * (phi - 2.0 * PI * k as f64 / 3.0).cos() - shift)
            .collect()
    };

    for x in roots.iter_mut() {
        *x = polish(c, *x);
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    Ok(roots)
}

fn polish(c: &Cubic, mut x: f64) -> f64 {
    let mut best = (c.eval(x).abs(), x);
    for _ in 0..8 {
        let d = c.derivative(x);
        if d == 0.0 {
            break;
        }
        let next = x - c.eval(x) / d;
        if !next.is_finite() {
            break;
        }
        x = next;
        let r = c.eval(x).abs();
        if r < best.0 {
            best = (r, x);
        }
        if r == 0.0 {
            break;
        }
    }
    best.1
}
