//! Symmetric tridiagonal eigenvalues by Sturm-count bisection and
//! eigenvectors by shifted inverse iteration.

use crate::error::{GapError, Result};

/// Read access to a real symmetric tridiagonal matrix.
pub trait SymTridiagonal {
    fn dim(&self) -> usize;
    fn diag(&self, i: usize) -> f64;
    /// Entry `(i, i + 1)`.
    fn off(&self, i: usize) -> f64;

    /// Number of eigenvalues strictly below `x` (negative pivots of the
    /// `LDL^T` factorization of `A - x I`).
    fn sturm_count(&self, x: f64) -> usize {
        let n = self.dim();
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..n {
            let b2 = if i == 0 { 0.0 } else { self.off(i - 1).powi(2) };
            d = self.diag(i) - x - if i == 0 { 0.0 } else { b2 / d };
            if d == 0.0 {
                d = -f64::EPSILON * (self.diag(i).abs() + x.abs()).max(f64::MIN_POSITIVE);
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin interval containing the spectrum.
    fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off(i - 1).abs() } else { 0.0 } + if i + 1 < n { self.off(i).abs() } else { 0.0 };
            lo = lo.min(self.diag(i) - r);
            hi = hi.max(self.diag(i) + r);
        }
        (lo, hi)
    }
}

/// Explicitly stored symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(GapError::InvalidParams(format!(
                "tridiagonal shape mismatch: {} diagonal, {} off-diagonal",
                diag.len(),
                off.len()
            )));
        }
        Ok(Self { diag, off })
    }
}

impl SymTridiagonal for SymTridiag {
    fn dim(&self) -> usize {
        self.diag.len()
    }
    fn diag(&self, i: usize) -> f64 {
        self.diag[i]
    }
    fn off(&self, i: usize) -> f64 {
        self.off[i]
    }
}

/// The `j`-th smallest eigenvalue (0-based), bisected to full precision.
/// The final bracket is certified by a Sturm-count difference of exactly one.
pub fn eigenvalue<M: SymTridiagonal + ?Sized>(a: &M, j: usize) -> Result<f64> {
    let n = a.dim();
    if j >= n {
        return Err(GapError::InvalidParams(format!("eigenvalue index {j} out of range for dimension {n}")));
    }
    let (g_lo, g_hi) = a.gershgorin();
    let pad = 1e-12 * (g_hi - g_lo).abs().max(1.0);
    let mut lo = g_lo - pad;
    let mut hi = g_hi + pad;
    for _ in 0..2200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            break;
        }
        if a.sturm_count(mid) > j {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (c_lo, c_hi) = (a.sturm_count(lo), a.sturm_count(hi));
    if c_lo != j || c_hi != j + 1 {
        return Err(GapError::Convergence {
            method: "Sturm bisection",
            detail: format!("bracket [{lo:e}, {hi:e}] has counts {c_lo}, {c_hi}; expected {j}, {}", j + 1),
        });
    }
    Ok(0.5 * (lo + hi))
}

/// The `k` smallest eigenvalues, ascending.
pub fn smallest_eigenvalues<M: SymTridiagonal + ?Sized>(a: &M, k: usize) -> Result<Vec<f64>> {
    (0..k).map(|j| eigenvalue(a, j)).collect()
}

/// Solves `(A - sigma I) x = b` by Gaussian elimination with partial pivoting.
pub fn solve_shifted<M: SymTridiagonal + ?Sized>(a: &M, sigma: f64, b: &[f64]) -> Vec<f64> {
    let n = a.dim();
    // Row i of U has entries u0 (diagonal), u1, u2 (two superdiagonals after pivoting).
    let mut u0 = vec![0.0; n];
    let mut u1 = vec![0.0; n];
    let mut u2 = vec![0.0; n];
    let mut rhs = b.to_vec();
    let tiny = f64::EPSILON * a.gershgorin().1.abs().max(a.gershgorin().0.abs()).max(f64::MIN_POSITIVE);

    // Current working row i: (d, e) at columns (i, i+1), f at i+2.
    let mut d = a.diag(0) - sigma;
    let mut e = if n > 1 { a.off(0) } else { 0.0 };
    let mut f = 0.0;
    for i in 0..n {
        if i + 1 == n {
            u0[i] = if d == 0.0 { tiny } else { d };
            break;
        }
        let sub = a.off(i);
        let next_d = a.diag(i + 1) - sigma;
        let next_e = if i + 2 < n { a.off(i + 1) } else { 0.0 };
        if d.abs() >= sub.abs() {
            let piv = if d == 0.0 { tiny } else { d };
            let l = sub / piv;
            u0[i] = piv;
            u1[i] = e;
            u2[i] = f;
            rhs[i + 1] -= l * rhs[i];
            d = next_d - l * e;
            e = next_e - l * f;
            f = 0.0;
        } else {
            let l = d / sub;
            u0[i] = sub;
            u1[i] = next_d;
            u2[i] = next_e;
            rhs.swap(i, i + 1);
            rhs[i + 1] -= l * rhs[i];
            let nd = e - l * next_d;
            let ne = f - l * next_e;
            d = nd;
            e = ne;
            f = 0.0;
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut v = rhs[i];
        if i + 1 < n {
            v -= u1[i] * x[i + 1];
        }
        if i + 2 < n {
            v -= u2[i] * x[i + 2];
        }
        x[i] = v / u0[i];
    }
    x
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let nrm = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= nrm);
    nrm
}

fn orthogonalize(v: &mut [f64], against: &[Vec<f64>]) {
    for q in against {
        let c = dot(v, q);
        v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
    }
}

pub const MAX_INVERSE_ITERATIONS: usize = 10;

/// Unit eigenvector for the eigenvalue near `sigma`, kept orthogonal to the
/// (unit, mutually orthogonal) vectors in `against`.
pub fn inverse_iteration<M: SymTridiagonal + ?Sized>(a: &M, sigma: f64, against: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = a.dim();
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.25 * ((i as f64) * 0.7548776662).sin()).collect();
    orthogonalize(&mut x, against);
    normalize(&mut x);
    let mut last_change = f64::INFINITY;
    for _ in 0..MAX_INVERSE_ITERATIONS {
        let mut y = solve_shifted(a, sigma, &x);
        orthogonalize(&mut y, against);
        if !y.iter().all(|v| v.is_finite()) {
            return Err(GapError::Convergence {
                method: "inverse iteration",
                detail: format!("non-finite iterate at shift {sigma:e}"),
            });
        }
        normalize(&mut y);
        let c = dot(&x, &y);
        if c < 0.0 {
            y.iter_mut().for_each(|v| *v = -*v);
        }
        last_change = x.iter().zip(&y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        x = y;
        if last_change <= 1e-13 {
            return Ok(x);
        }
    }
    // Rounding in the solve can keep the change above 1e-13 on large grids.
    if last_change <= 1e-9 {
        return Ok(x);
    }
    Err(GapError::Convergence {
        method: "inverse iteration",
        detail: format!(
            "{MAX_INVERSE_ITERATIONS} iterations at shift {sigma:e}, last change {last_change:e}"
        ),
    })
}
