//! Bracketed scalar root finding.

use crate::error::{GapError, Result};

/// Brent's method on `[a, b]` with `f(a)` and `f(b)` of opposite sign.
///
/// Stops when the bracket is narrower than `xtol + 4 eps |x|`.
pub fn brent<F>(mut f: F, a: f64, b: f64, xtol: f64, max_iter: usize) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (a, b);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(GapError::Convergence {
            method: "Brent",
            detail: format!("no sign change on [{a}, {b}]: f = {fa:e}, {fb:e}"),
        });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
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
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let mid = 0.5 * (c - b);
        if mid.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * mid * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * mid * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * mid * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = mid;
                e = d;
            }
        } else {
            d = mid;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(mid) };
        fb = f(b)?;
    }
    Err(GapError::Convergence { method: "Brent", detail: format!("{max_iter} iterations, last x = {b}") })
}

/// Plain bisection for a predicate that is false at `lo` and true at `hi`.
/// Returns the final `(lo, hi)` bracket.
pub fn bisect_predicate<P>(mut pred: P, mut lo: f64, mut hi: f64, rel: f64) -> Result<(f64, f64)>
where
    P: FnMut(f64) -> Result<bool>,
{
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= rel * lo.abs().max(hi.abs()) {
            return Ok((lo, hi));
        }
        if pred(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cosine_root() {
        let r = brent(|x| Ok(x.cos()), 1.0, 2.0, 0.0, 100).unwrap();
        assert!((r - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_bracket() {
        assert!(brent(|x| Ok(x * x + 1.0), -1.0, 1.0, 0.0, 100).is_err());
    }

    #[test]
    fn cubic_and_flat_regions() {
        let r = brent(|x| Ok((x - 1.0).powi(3)), 0.0, 3.0, 0.0, 200).unwrap();
        assert!((r - 1.0).abs() < 1e-5);
        let r = brent(|x| Ok(x.exp() - 2.0), -10.0, 10.0, 0.0, 200).unwrap();
        assert!((r - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn bisect_threshold() {
        let (lo, hi) = bisect_predicate(|x| Ok(x > 0.3), 0.0, 1.0, 1e-14).unwrap();
        assert!(lo <= 0.3 && hi > 0.3 && hi - lo < 1e-13);
    }
}
