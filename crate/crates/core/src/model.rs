//! First two Dirichlet eigenpairs of `phi'' - (n-1) tn_K phi' = -lambda phi`
//! on `[-D/2, D/2]`.
//!
//! Two independent methods are provided: a finite-difference discretization of
//! the Schrodinger normal form `-u'' + V u = lambda u` (with
//! `phi = cs_K^{-(n-1)/2} u`), solved by Sturm bisection and Richardson
//! extrapolation, and shooting from the centre of symmetry.

use serde::{Deserialize, Serialize};

use crate::error::{GapError, Result};
use crate::kernels::{cs, potential, tn_unchecked, ModelParams};
use crate::ode::{Dopri, Trajectory};
use crate::roots::{bisect_predicate, brent};
use crate::tridiag::{eigenvalue, inverse_iteration, SymTridiagonal};

/// Default number of interior nodes of the coarse grid.
pub const DEFAULT_GRID_M: usize = 2000;
/// Default tolerance for the cross-method agreement test.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Diameters within this distance of `pi/sqrt(K)` are flagged as near-singular.
pub const NEAR_SINGULAR_MARGIN: f64 = 0.01;
/// Local tolerance of the shooting integrator.
pub const DEFAULT_ODE_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Tridiag,
    Shooting,
    Both,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Tridiag => "tridiag",
            Method::Shooting => "shooting",
            Method::Both => "both",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = GapError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tridiag" => Ok(Method::Tridiag),
            "shooting" => Ok(Method::Shooting),
            "both" => Ok(Method::Both),
            other => Err(GapError::InvalidParams(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn initial_state(self) -> [f64; 2] {
        match self {
            Parity::Even => [1.0, 0.0],
            Parity::Odd => [0.0, 1.0],
        }
    }
}

/// Uniform grid of `m` interior nodes on `(a, b)`; the endpoints carry the
/// Dirichlet data and are not nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub a: f64,
    pub b: f64,
    pub m: usize,
    pub h: f64,
}

impl Grid {
    pub fn new(a: f64, b: f64, m: usize) -> Result<Self> {
        if !(a < b) || m < 3 {
            return Err(GapError::InvalidParams(format!("grid needs a < b and m >= 3, got ({a}, {b}), m = {m}")));
        }
        Ok(Self { a, b, m, h: (b - a) / (m as f64 + 1.0) })
    }

    /// Grid on `[-D/2, D/2]`.
    pub fn symmetric(d: f64, m: usize) -> Result<Self> {
        Self::new(-0.5 * d, 0.5 * d, m)
    }

    pub fn node(&self, i: usize) -> f64 {
        // Symmetric construction keeps s_i = -s_{m-1-i} exactly.
        let c = 0.5 * (self.a + self.b);
        c + (i as f64 + 1.0 - 0.5 * (self.m as f64 + 1.0)) * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.m).map(|i| self.node(i)).collect()
    }

    /// Grid with `2m + 1` interior nodes and half the spacing.
    pub fn refined(&self) -> Self {
        Self { m: 2 * self.m + 1, h: 0.5 * self.h, ..*self }
    }

    /// Index of the node at the midpoint, if `m` is odd.
    pub fn centre(&self) -> Option<usize> {
        (self.m % 2 == 1).then_some(self.m / 2)
    }
}

/// `-d^2/ds^2 + V` discretized by second-order central differences.
#[derive(Debug, Clone)]
pub struct NormalFormMatrix {
    pub h: f64,
    pub potential: Vec<f64>,
}

impl NormalFormMatrix {
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.potential.len()).map(|i| SymTridiagonal::diag(self, i)).collect()
    }

    pub fn off_diagonal(&self) -> Vec<f64> {
        vec![-1.0 / (self.h * self.h); self.potential.len().saturating_sub(1)]
    }
}

impl SymTridiagonal for NormalFormMatrix {
    fn dim(&self) -> usize {
        self.potential.len()
    }

    fn diag(&self, i: usize) -> f64 {
        2.0 / (self.h * self.h) + self.potential[i]
    }

    fn off(&self, _i: usize) -> f64 {
        -1.0 / (self.h * self.h)
    }

    /// Pivots of `h^2 (A - x)` written as `1 + t_i`, with
    /// `t_i = h^2 (V_i - x) + t_{i-1} / (1 + t_{i-1})`. Near the bottom of the
    /// spectrum `t_i` is small and this avoids the cancellation of
    /// `2/h^2 - 1/(h^2 d)`, keeping the count correct to relative precision in `x`.
    fn sturm_count(&self, x: f64) -> usize {
        let h2 = self.h * self.h;
        let mut count = 0;
        let mut t = 0.0f64;
        for (i, &v) in self.potential.iter().enumerate() {
            let g = h2 * (v - x);
            t = if i == 0 { 1.0 + g } else { g + t / (1.0 + t) };
            let mut pivot = 1.0 + t;
            if pivot == 0.0 {
                pivot = -f64::EPSILON;
                t = pivot - 1.0;
            }
            if pivot < 0.0 {
                count += 1;
            }
        }
        count
    }
}

/// Finite-difference matrix of the normal form on the interior nodes of `g`.
pub fn build_normal_form_matrix(p: &ModelParams, g: &Grid) -> Result<NormalFormMatrix> {
    p.validate()?;
    let pot = g.nodes().into_iter().map(|s| potential(p.n, p.k, s)).collect::<Result<Vec<_>>>()?;
    Ok(NormalFormMatrix { h: g.h, potential: pot })
}

/// The two smallest eigenvalues of the finite-difference matrix with `m` interior nodes.
pub fn tridiag_eigenvalues(p: &ModelParams, m: usize) -> Result<[f64; 2]> {
    let a = build_normal_form_matrix(p, &Grid::symmetric(p.d, m)?)?;
    Ok([eigenvalue(&a, 0)?, eigenvalue(&a, 1)?])
}

/// `(4 lambda_fine - lambda_coarse) / 3` for a second-order scheme and halved spacing.
pub fn richardson(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

/// An eigenvalue with its eigenfunction sampled on the nodes of a grid.
///
/// Samples are values of the original unknown `phi` (not of the normal-form
/// variable), normalized to unit `L^2` norm with weight `cs_K^{n-1}` and
/// oriented so that `phi_1(0) > 0` and `phi_2 > 0` just right of the centre.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub index: usize,
    pub lambda: f64,
    pub samples: Vec<f64>,
    pub parity: Parity,
}

/// Raw finite-difference eigenvalues behind a solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TridiagEstimates {
    pub coarse: [f64; 2],
    pub fine: [f64; 2],
    pub extrapolated: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub params: ModelParams,
    pub pairs: [EigenPair; 2],
    pub method: Method,
    /// Grid carrying the samples (the refined grid when extrapolating).
    pub grid: Grid,
    pub extrapolated: bool,
    /// Max central-difference defect of the ODE over interior nodes, relative to `max |phi|`.
    pub residual: f64,
    pub tridiag: Option<TridiagEstimates>,
    pub shooting: Option<[f64; 2]>,
    /// `max_i |lambda_shoot - lambda_tridiag| / (1 + |lambda|)` when both ran.
    pub agreement: Option<f64>,
    pub near_singular: bool,
}

impl SolveReport {
    pub fn lambda1(&self) -> f64 {
        self.pairs[0].lambda
    }
    pub fn lambda2(&self) -> f64 {
        self.pairs[1].lambda
    }
    pub fn nodes(&self) -> Vec<f64> {
        self.grid.nodes()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub grid_m: usize,
    pub method: Method,
    pub tol: f64,
    pub ode_rtol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { grid_m: DEFAULT_GRID_M, method: Method::Both, tol: DEFAULT_TOL, ode_rtol: DEFAULT_ODE_RTOL }
    }
}

impl SolveOptions {
    pub fn with_method(method: Method) -> Self {
        Self { method, ..Self::default() }
    }
    pub fn with_grid(grid_m: usize) -> Self {
        Self { grid_m, ..Self::default() }
    }
}

fn model_rhs(p: &ModelParams, lambda: f64) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] {
    let c = f64::from(p.n) - 1.0;
    let k = p.k;
    move |s, y| {
        let drift = if c == 0.0 || k == 0.0 { 0.0 } else { c * tn_unchecked(k, s) * y[1] };
        [y[1], drift - lambda * y[0]]
    }
}

/// Integrates the model ODE from `s = 0` with parity-fixed initial data through `stops`.
pub fn shoot_trajectory(p: &ModelParams, lambda: f64, parity: Parity, stops: &[f64], rtol: f64) -> Result<Trajectory> {
    p.validate()?;
    Dopri::with_rtol(rtol).integrate(model_rhs(p, lambda), 0.0, parity.initial_state(), stops)
}

/// `phi(D/2)` for the solution with parity-fixed data at the centre.
pub fn shoot(p: &ModelParams, lambda: f64, parity: Parity) -> Result<f64> {
    Ok(shoot_trajectory(p, lambda, parity, &[p.half_width()], DEFAULT_ODE_RTOL)?.end()[0])
}

fn zeros_at(p: &ModelParams, lambda: f64, parity: Parity, rtol: f64) -> Result<(usize, f64)> {
    let tr = shoot_trajectory(p, lambda, parity, &[p.half_width()], rtol)?;
    Ok((tr.zeros, tr.end()[0]))
}

/// First eigenvalue of the given parity by shooting. `seed` brackets the
/// search as `seed * (1 +- 0.1)`, widened geometrically until the interior zero
/// counts certify the root.
pub fn shooting_eigenvalue(p: &ModelParams, parity: Parity, seed: f64, rtol: f64) -> Result<f64> {
    let width = 0.1 * seed.abs().max(1e-3);
    let mut lo = seed - width;
    let mut hi = seed + width;
    let mut w = width;
    let mut tries = 0;
    while zeros_at(p, lo, parity, rtol)?.0 > 0 {
        w *= 2.0;
        lo -= w;
        tries += 1;
        if tries > 60 {
            return Err(GapError::Convergence { method: "shooting bracket", detail: format!("no zero-free lower bound, reached {lo:e}") });
        }
    }
    let mut w = width;
    loop {
        let (z, _) = zeros_at(p, hi, parity, rtol)?;
        if z >= 1 {
            break;
        }
        w *= 2.0;
        hi += w;
        tries += 1;
        if tries > 120 {
            return Err(GapError::Convergence { method: "shooting bracket", detail: format!("no sign change up to {hi:e}") });
        }
    }
    if zeros_at(p, hi, parity, rtol)?.0 > 1 {
        let (_, h) = bisect_predicate(|x| Ok(zeros_at(p, x, parity, rtol)?.0 >= 1), lo, hi, 0.0)?;
        // Shrink the bracket until the upper end has exactly one zero.
        let (_, h2) = bisect_predicate(|x| Ok(zeros_at(p, x, parity, rtol)?.0 >= 2), h, hi, 1e-3)?;
        hi = 0.5 * (h + h2).min(h2);
        if zeros_at(p, hi, parity, rtol)?.0 != 1 {
            hi = h;
        }
    }
    let xtol = 4.0 * f64::EPSILON * hi.abs();
    brent(|x| Ok(shoot_trajectory(p, x, parity, &[p.half_width()], rtol)?.end()[0]), lo, hi, xtol, 200)
}

/// Eigenvector of the refined matrix converted to oriented, normalized `phi` samples.
fn tridiag_pairs(p: &ModelParams, a: &NormalFormMatrix, g: &Grid, fine: [f64; 2]) -> Result<[Vec<f64>; 2]> {
    let v1 = inverse_iteration(a, fine[0], &[])?;
    let v2 = inverse_iteration(a, fine[1], std::slice::from_ref(&v1))?;
    let nodes = g.nodes();
    let expo = -0.5 * (f64::from(p.n) - 1.0);
    let to_phi = |v: Vec<f64>| -> Vec<f64> { v.iter().zip(&nodes).map(|(u, &s)| u * cs(p.k, s).powf(expo)).collect() };
    Ok([to_phi(v1), to_phi(v2)])
}

fn shooting_samples(p: &ModelParams, g: &Grid, lambda: f64, parity: Parity, rtol: f64) -> Result<Vec<f64>> {
    let c = g.centre().ok_or_else(|| GapError::InvalidParams("shooting samples need a grid with a centre node".into()))?;
    let right: Vec<f64> = (c + 1..g.m).map(|i| g.node(i)).collect();
    let tr = shoot_trajectory(p, lambda, parity, &right, rtol)?;
    let mirror = match parity {
        Parity::Even => 1.0,
        Parity::Odd => -1.0,
    };
    Ok((0..g.m)
        .map(|i| match i.cmp(&c) {
            std::cmp::Ordering::Greater => tr.states[i - c - 1][0],
            std::cmp::Ordering::Less => mirror * tr.states[g.m - 1 - i - c - 1][0],
            std::cmp::Ordering::Equal => parity.initial_state()[0],
        })
        .collect())
}

/// `L^2` norm with weight `cs_K^{n-1}` by the composite trapezoid rule (zero endpoint values).
pub fn weighted_norm(p: &ModelParams, g: &Grid, samples: &[f64]) -> f64 {
    let nm1 = f64::from(p.n) - 1.0;
    let sum: f64 = samples
        .iter()
        .zip(g.nodes())
        .map(|(f, s)| f * f * cs(p.k, s).powf(nm1))
        .sum();
    (g.h * sum).sqrt()
}

/// Weighted inner product by the trapezoid rule.
pub fn weighted_inner(p: &ModelParams, g: &Grid, a: &[f64], b: &[f64]) -> f64 {
    let nm1 = f64::from(p.n) - 1.0;
    g.h * a.iter().zip(b).zip(g.nodes()).map(|((x, y), s)| x * y * cs(p.k, s).powf(nm1)).sum::<f64>()
}

fn orient_and_normalize(p: &ModelParams, g: &Grid, samples: &mut [f64], parity: Parity) {
    let nrm = weighted_norm(p, g, samples);
    // First node at or right of the centre.
    let first = (0..g.m).find(|&i| g.node(i) >= 0.0).unwrap_or(0);
    let reference = match parity {
        Parity::Even => samples[first],
        Parity::Odd => {
            let j = if g.node(first) == 0.0 { first + 1 } else { first };
            samples[j.min(g.m - 1)]
        }
    };
    let scale = if reference < 0.0 { -1.0 / nrm } else { 1.0 / nrm };
    samples.iter_mut().for_each(|x| *x *= scale);
}

/// Max central-difference defect of `phi'' - (n-1) tn phi' + lambda phi`,
/// relative to `max |phi|`.
pub fn ode_defect(p: &ModelParams, g: &Grid, pair: &EigenPair) -> f64 {
    let f = &pair.samples;
    let h = g.h;
    let c = f64::from(p.n) - 1.0;
    let scale = f.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let mut worst = 0.0f64;
    for i in 0..f.len() {
        let left = if i == 0 { 0.0 } else { f[i - 1] };
        let right = if i + 1 == f.len() { 0.0 } else { f[i + 1] };
        let s = g.node(i);
        let d2 = (right - 2.0 * f[i] + left) / (h * h);
        let d1 = (right - left) / (2.0 * h);
        let r = d2 - c * tn_unchecked(p.k, s) * d1 + pair.lambda * f[i];
        worst = worst.max(r.abs());
    }
    worst / scale
}

/// Solves for the first two eigenpairs.
///
/// With [`Method::Both`] eigenvalues come from shooting and samples from the
/// refined finite-difference grid; the two eigenvalue estimates must agree to
/// `100 tol (1 + |lambda|)` unless `D` is within [`NEAR_SINGULAR_MARGIN`] of
/// `pi/sqrt(K)`, where the finite-difference values are known to lag.
pub fn solve_model(p: &ModelParams, opts: &SolveOptions) -> Result<SolveReport> {
    p.validate()?;
    if !(opts.tol > 0.0) {
        return Err(GapError::InvalidParams(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let near_singular = p.singular_distance() < NEAR_SINGULAR_MARGIN;
    let coarse_grid = Grid::symmetric(p.d, opts.grid_m)?;
    let fine_grid = coarse_grid.refined();

    let parities = [Parity::Even, Parity::Odd];
    let (tridiag, fd_vectors) = if opts.method == Method::Shooting {
        (None, None)
    } else {
        let coarse = tridiag_eigenvalues(p, opts.grid_m)?;
        let a = build_normal_form_matrix(p, &fine_grid)?;
        let fine = [eigenvalue(&a, 0)?, eigenvalue(&a, 1)?];
        let extrapolated = [richardson(coarse[0], fine[0]), richardson(coarse[1], fine[1])];
        let vecs = tridiag_pairs(p, &a, &fine_grid, fine)?;
        (Some(TridiagEstimates { coarse, fine, extrapolated }), Some(vecs))
    };

    let shooting = if opts.method == Method::Tridiag {
        None
    } else {
        let seeds = match &tridiag {
            Some(t) => t.extrapolated,
            None => tridiag_eigenvalues(p, 200.min(opts.grid_m.max(3)))?,
        };
        Some([
            shooting_eigenvalue(p, Parity::Even, seeds[0], opts.ode_rtol)?,
            shooting_eigenvalue(p, Parity::Odd, seeds[1], opts.ode_rtol)?,
        ])
    };

    let agreement = match (&tridiag, &shooting) {
        (Some(t), Some(s)) => {
            let mut worst = 0.0f64;
            for (i, (&sh, &tr)) in s.iter().zip(&t.extrapolated).enumerate() {
                let diff = (sh - tr).abs();
                worst = worst.max(diff / (1.0 + sh.abs()));
                if !near_singular && diff > 100.0 * opts.tol * (1.0 + sh.abs()) {
                    return Err(GapError::Inconsistent { index: i + 1, shooting: sh, tridiag: tr });
                }
            }
            Some(worst)
        }
        _ => None,
    };

    let lambdas = match (&shooting, &tridiag) {
        (Some(s), _) => *s,
        (None, Some(t)) => t.extrapolated,
        (None, None) => unreachable!("at least one method runs"),
    };

    let samples: [Vec<f64>; 2] = match fd_vectors {
        Some(v) => v,
        None => [
            shooting_samples(p, &fine_grid, lambdas[0], Parity::Even, opts.ode_rtol)?,
            shooting_samples(p, &fine_grid, lambdas[1], Parity::Odd, opts.ode_rtol)?,
        ],
    };

    let mut pairs = Vec::with_capacity(2);
    for (i, mut s) in samples.into_iter().enumerate() {
        orient_and_normalize(p, &fine_grid, &mut s, parities[i]);
        pairs.push(EigenPair { index: i + 1, lambda: lambdas[i], samples: s, parity: parities[i] });
    }
    let pairs: [EigenPair; 2] = pairs.try_into().expect("two pairs");
    let residual = ode_defect(p, &fine_grid, &pairs[0]).max(ode_defect(p, &fine_grid, &pairs[1]));
    let method = match opts.method {
        Method::Both if near_singular => Method::Shooting,
        m => m,
    };

    Ok(SolveReport {
        params: *p,
        pairs,
        method,
        grid: fine_grid,
        extrapolated: tridiag.is_some(),
        residual,
        tridiag,
        shooting,
        agreement,
        near_singular,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn params(n: u32, k: f64, d: f64) -> ModelParams {
        ModelParams::new(n, k, d).unwrap()
    }

    #[test]
    fn grid_is_symmetric_and_interior() {
        let g = Grid::symmetric(1.0, 3).unwrap();
        assert_eq!(g.h, 0.25);
        assert_eq!(g.nodes(), vec![-0.25, 0.0, 0.25]);
        let f = Grid::symmetric(3.0, 2000).unwrap().refined();
        assert_eq!(f.m, 4001);
        assert_eq!(f.node(f.centre().unwrap()), 0.0);
        for i in 0..f.m {
            assert_eq!(f.node(i), -f.node(f.m - 1 - i));
        }
        assert!(f.node(0) > -1.5 && f.node(f.m - 1) < 1.5);
        assert!(Grid::new(0.0, 1.0, 2).is_err());
    }

    #[test]
    fn matrix_entries() {
        let g = Grid::symmetric(1.0, 3).unwrap();
        let a = build_normal_form_matrix(&params(1, 7.0, 1.0), &g).unwrap();
        assert_eq!(a.diagonal(), vec![32.0; 3]);
        assert_eq!(a.off_diagonal(), vec![-16.0; 2]);
        let a = build_normal_form_matrix(&params(3, 1.0, 1.0), &g).unwrap();
        for d in a.diagonal() {
            assert_relative_eq!(d, 32.0 - 1.0, epsilon = 1e-13);
        }
        let p = params(2, 1.0, 3.14159);
        let g = Grid::symmetric(p.d, 2000).unwrap();
        let a = build_normal_form_matrix(&p, &g).unwrap();
        let s = g.node(g.m - 1);
        assert_relative_eq!(a.potential[g.m - 1], potential(2, 1.0, s).unwrap());
        assert!(a.potential[g.m - 1] < -1e5);
        assert_relative_eq!(a.potential[g.m - 1], -0.25 / s.cos().powi(2) - 0.25, max_relative = 1e-12);
    }

    #[test]
    fn accurate_count_agrees_with_standard_recurrence() {
        let p = params(5, -1.0, 2.0);
        let g = Grid::symmetric(p.d, 300).unwrap();
        let a = build_normal_form_matrix(&p, &g).unwrap();
        let plain = crate::tridiag::SymTridiag::new(a.diagonal(), a.off_diagonal()).unwrap();
        for x in [-10.0, 0.0, 5.0, 20.0, 100.0, 1e3, 1e5] {
            assert_eq!(a.sturm_count(x), plain.sturm_count(x), "x = {x}");
        }
    }

    #[test]
    fn shooting_closed_forms() {
        let d = 1.3;
        let p1 = params(1, 0.0, d);
        assert!(shoot(&p1, PI * PI / (d * d), Parity::Even).unwrap().abs() < 1e-10);
        assert!(shoot(&p1, 4.0 * PI * PI / (d * d), Parity::Odd).unwrap().abs() < 1e-10);
        let p3 = params(3, 1.0, 1.0);
        assert!(shoot(&p3, PI * PI - 1.0, Parity::Even).unwrap().abs() < 1e-10);
    }

    #[test]
    fn flat_interval_solution() {
        let r = solve_model(&params(1, 0.0, 2.0), &SolveOptions::default()).unwrap();
        assert_relative_eq!(r.lambda1(), PI * PI / 4.0, max_relative = 1e-11);
        assert_relative_eq!(r.lambda2(), PI * PI, max_relative = 1e-11);
        assert!(!r.near_singular);
        assert!(r.agreement.unwrap() < 1e-9);
    }

    #[test]
    fn n3_closed_form() {
        let d: f64 = 1.57;
        let r = solve_model(&params(3, 1.0, d), &SolveOptions::default()).unwrap();
        let q = (PI / d).powi(2);
        assert_relative_eq!(r.lambda1(), q - 1.0, max_relative = 1e-10);
        assert_relative_eq!(r.lambda2(), 4.0 * q - 1.0, max_relative = 1e-10);
    }

    #[test]
    fn pair_conventions() {
        for p in [params(2, 1.0, 1.0), params(5, -1.0, 1.5), params(4, 1.0, 2.5)] {
            for method in [Method::Both, Method::Shooting, Method::Tridiag] {
                let r = solve_model(&p, &SolveOptions { grid_m: 400, ..SolveOptions::with_method(method) }).unwrap();
                let g = r.grid;
                let (f1, f2) = (&r.pairs[0].samples, &r.pairs[1].samples);
                let c = g.centre().unwrap();
                assert!(f1.iter().all(|&x| x > 0.0));
                assert!(f2[c + 1..].iter().all(|&x| x > 0.0));
                assert!(f2[..c].iter().all(|&x| x < 0.0));
                for i in 0..g.m {
                    assert!((f1[i] - f1[g.m - 1 - i]).abs() < 1e-8);
                    assert!((f2[i] + f2[g.m - 1 - i]).abs() < 1e-8);
                }
                assert!((weighted_norm(&p, &g, f1) - 1.0).abs() < 1e-12);
                assert!((weighted_norm(&p, &g, f2) - 1.0).abs() < 1e-12);
                assert!(weighted_inner(&p, &g, f1, f2).abs() < 1e-10);
                assert!(r.lambda1() < r.lambda2());
            }
        }
    }

    #[test]
    fn defect_is_second_order() {
        let p = params(2, 1.0, 1.0);
        let d = |m| {
            let r = solve_model(&p, &SolveOptions { grid_m: m, method: Method::Tridiag, ..Default::default() }).unwrap();
            r.residual
        };
        let (a, b) = (d(200), d(401));
        assert!(a / b > 3.0 && a / b < 5.0, "ratio {}", a / b);
    }

    #[test]
    fn method_choice_near_singularity() {
        let r = solve_model(&params(2, 1.0, 3.14159), &SolveOptions::default()).unwrap();
        assert!(r.near_singular);
        assert_eq!(r.method, Method::Shooting);
        assert_eq!(r.lambda1(), r.shooting.unwrap()[0]);
    }

    #[test]
    fn invalid_inputs() {
        let p = ModelParams { n: 2, k: 1.0, d: 4.0 };
        assert!(solve_model(&p, &SolveOptions::default()).is_err());
        assert!(solve_model(&params(2, 1.0, 1.0), &SolveOptions { tol: 0.0, ..Default::default() }).is_err());
        assert!("fd".parse::<Method>().is_err());
        assert_eq!("both".parse::<Method>().unwrap(), Method::Both);
    }
}
