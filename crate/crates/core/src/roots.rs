//! Bracketing scalar root finding (Brent's method) and a golden-section minimiser.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub f: f64,
    pub iterations: usize,
}

/// Brent's method on `[lo, hi]`. Stops when the bracket is narrower than `x_tol`
/// or `|f| <= f_tol`.
pub fn brent<F>(mut f: F, lo: f64, hi: f64, x_tol: f64, f_tol: f64, max_iter: usize) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(Root {
            x: a,
            f: fa,
            iterations: 0,
        });
    }
    if fb == 0.0 {
        return Ok(Root {
            x: b,
            f: fb,
            iterations: 0,
        });
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::NoBracket {
            lo,
            hi,
            f_lo: fa,
            f_hi: fb,
        });
    }

    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;

    for iter in 1..=max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * x_tol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb.abs() <= f_tol {
            return Ok(Root {
                x: b,
                f: fb,
                iterations: iter,
            });
        }

        if e.abs() >= tol && fa.abs() > fb.abs() {
            // inverse quadratic interpolation, or secant when only two points differ
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }

        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }

    Err(Error::NoConvergence {
        iterations: max_iter,
        residual: fb,
    })
}

/// Golden-section search for a minimum of a unimodal function on `[lo, hi]`.
/// Returns `(x_min, f(x_min))`.
pub fn golden_min<F>(mut f: F, lo: f64, hi: f64, x_tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if (b - a).abs() <= x_tol {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    let candidates = [(a, f(a)), (x1, f1), (x2, f2), (b, f(b))];
    candidates
        .into_iter()
        .fold((f64::NAN, f64::INFINITY), |best, c| {
            if c.1 < best.1 {
                c
            } else {
                best
            }
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_cubic_root() {
        let r = brent(|x| Ok(x * x * x - 2.0 * x - 5.0), 2.0, 3.0, 1e-14, 0.0, 100).unwrap();
        assert!((r.x - 2.094_551_481_542_326_5).abs() < 1e-12);
    }

    #[test]
    fn brent_rejects_non_bracket() {
        let err = brent(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-12, 0.0, 50).unwrap_err();
        assert!(matches!(err, Error::NoBracket { .. }));
    }

    #[test]
    fn brent_reports_non_convergence() {
        let err = brent(|x| Ok(x.exp() - 1.5), 0.0, 1.0, 0.0, 0.0, 2).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { .. }));
    }

    #[test]
    fn golden_section_parabola() {
        let (x, fx) = golden_min(|x| (x - 0.7).powi(2), 0.0, 2.0, 1e-12);
        assert!((x - 0.7).abs() < 1e-10);
        assert!(fx < 1e-20);
    }
}
