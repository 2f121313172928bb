//! One-dimensional ingredients of the log-concavity estimate: the profile
//! `f = (log phi_1)'`, its first- and second-order equations, the two
//! conditions on a modulus `psi`, and eigenvalue lower bounds.
//!
//! Profiles are built from the discrete eigenvectors of the refined
//! finite-difference grid, regenerated from the centre by the three-term
//! recurrence of the scheme. Differences of `phi = cs_K^{-(n-1)/2} v` are then
//! formed through exact identities for the weight ratios, so no solver
//! rounding is amplified by `1/h^2`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{GapError, Result};
use crate::kernels::{potential, tn, ModelParams};
use crate::model::{build_normal_form_matrix, solve_model, SolveOptions, SolveReport};
use crate::tridiag::eigenvalue;

/// Outermost grid nodes excluded from quotient-based profiles.
pub const ENDPOINT_EXCLUSION: usize = 2;
/// Fraction of `[0, D/2]` over which residual maxima are taken.
pub const RESIDUAL_WINDOW: f64 = 0.5;
/// Relative one-sided tolerance of inequality verdicts.
pub const INEQUALITY_TOL: f64 = 1e-7;

/// Discrete even and odd eigenvectors on the right half `s_j = j h`, `j = 0..=half`.
#[derive(Debug, Clone)]
struct HalfModes {
    h: f64,
    s: Vec<f64>,
    v: [Vec<f64>; 2],
    /// `w(s_j +- h) / w(s_j) - 1` for `w = cs_K^{-(n-1)/2}`.
    rho_plus: Vec<f64>,
    rho_minus: Vec<f64>,
    pot: Vec<f64>,
    lambda_h: [f64; 2],
}

fn weight_ratio(p: &ModelParams, s: f64, h: f64, sign: f64) -> f64 {
    let a = 0.5 * (f64::from(p.n) - 1.0);
    if p.k == 0.0 || a == 0.0 {
        return 0.0;
    }
    // cs(s +- h)/cs(s) - 1 in a cancellation-free form.
    let r = if p.k > 0.0 {
        let q = p.k.sqrt();
        -2.0 * (0.5 * q * h).sin().powi(2) - sign * (q * s).tan() * (q * h).sin()
    } else {
        let q = (-p.k).sqrt();
        2.0 * (0.5 * q * h).sinh().powi(2) + sign * (q * s).tanh() * (q * h).sinh()
    };
    (-a * r.ln_1p()).exp_m1()
}

fn half_modes(r: &SolveReport) -> Result<HalfModes> {
    let p = &r.params;
    let g = &r.grid;
    let c = g.centre().ok_or_else(|| GapError::Precondition("profile needs a grid with a centre node".into()))?;
    let lambda_h = match &r.tridiag {
        Some(t) => t.fine,
        None => {
            let a = build_normal_form_matrix(p, g)?;
            [eigenvalue(&a, 0)?, eigenvalue(&a, 1)?]
        }
    };
    let h = g.h;
    let half = g.m - 1 - c;
    let s: Vec<f64> = (0..=half).map(|j| j as f64 * h).collect();
    let pot = s.iter().map(|&x| potential(p.n, p.k, x)).collect::<Result<Vec<_>>>()?;
    let h2 = h * h;
    let build = |lam: f64, even: bool| -> Vec<f64> {
        let mut v = vec![0.0; half + 1];
        if even {
            v[0] = 1.0;
            v[1] = 1.0 + 0.5 * h2 * (pot[0] - lam);
        } else {
            v[0] = 0.0;
            v[1] = h;
        }
        for j in 1..half {
            v[j + 1] = (2.0 + h2 * (pot[j] - lam)) * v[j] - v[j - 1];
        }
        v
    };
    let v = [build(lambda_h[0], true), build(lambda_h[1], false)];
    let rho_plus = s.iter().map(|&x| weight_ratio(p, x, h, 1.0)).collect();
    let rho_minus = s.iter().map(|&x| weight_ratio(p, x, h, -1.0)).collect();
    Ok(HalfModes { h, s, v, rho_plus, rho_minus, pot, lambda_h })
}

impl HalfModes {
    /// `(delta phi / phi, delta^2 phi / phi)` at node `j >= 1` for mode `k`, by
    /// central differences of `phi = w v`.
    fn log_differences(&self, k: usize, j: usize) -> (f64, f64) {
        let v = &self.v[k];
        let (vm, vi, vp) = (v[j - 1], v[j], v[j + 1]);
        let (rp, rm) = (self.rho_plus[j], self.rho_minus[j]);
        let h = self.h;
        let d1 = ((vp - vm) + rp * vp - rm * vm) / (2.0 * h);
        // v_{j+1} - 2 v_j + v_{j-1} = h^2 (V_j - lambda_h) v_j holds exactly for the recurrence.
        let d2 = (h * h * (self.pot[j] - self.lambda_h[k]) * vi + rp * vp + rm * vm) / (h * h);
        (d1 / vi, d2 / vi)
    }

    /// Even mode at the centre, where `v_{-1} = v_1`.
    fn centre_second_difference(&self) -> f64 {
        let v = &self.v[0];
        let h = self.h;
        let rp = self.rho_plus[0];
        (h * h * (self.pot[0] - self.lambda_h[0]) * v[0] + 2.0 * rp * v[1]) / (h * h * v[0])
    }

    fn half_norm2(&self, k: usize) -> f64 {
        let v = &self.v[k];
        v[0] * v[0] + 2.0 * v[1..].iter().map(|x| x * x).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogDerivativeProfile {
    pub params: ModelParams,
    /// Nodes in `(0, D/2)`, the last [`ENDPOINT_EXCLUSION`] interior nodes dropped.
    pub s_nodes: Vec<f64>,
    pub f_values: Vec<f64>,
    /// Discrete `f' = delta^2 phi / phi - f^2`.
    pub f_prime: Vec<f64>,
    pub lambda1: f64,
    /// `f'(0)` from the centre stencil.
    pub f_prime_at_zero: f64,
    pub h: f64,
}

pub fn log_derivative_profile(r: &SolveReport) -> Result<LogDerivativeProfile> {
    let modes = half_modes(r)?;
    if modes.v[0].iter().any(|&x| !(x > 0.0)) {
        return Err(GapError::PropertyViolation("first eigenfunction has a non-positive interior sample".into()));
    }
    let last = modes.s.len() - 1 - ENDPOINT_EXCLUSION;
    let mut s_nodes = Vec::with_capacity(last);
    let mut f_values = Vec::with_capacity(last);
    let mut f_prime = Vec::with_capacity(last);
    for j in 1..=last {
        let (f, d2) = modes.log_differences(0, j);
        s_nodes.push(modes.s[j]);
        f_values.push(f);
        f_prime.push(d2 - f * f);
    }
    Ok(LogDerivativeProfile {
        params: r.params,
        s_nodes,
        f_values,
        f_prime,
        lambda1: r.lambda1(),
        f_prime_at_zero: modes.centre_second_difference(),
        h: modes.h,
    })
}

impl LogDerivativeProfile {
    /// `f' - (n-1) tn f + lambda_1 + f^2` at each node, led by the value at `s = 0`.
    fn riccati_terms(&self, lambda: f64) -> Result<Vec<f64>> {
        let nm1 = f64::from(self.params.n) - 1.0;
        let mut out = Vec::with_capacity(self.s_nodes.len() + 1);
        out.push(self.f_prime_at_zero + lambda);
        for ((&s, &f), &fp) in self.s_nodes.iter().zip(&self.f_values).zip(&self.f_prime) {
            out.push(fp - nm1 * tn(self.params.k, s)? * f + lambda + f * f);
        }
        Ok(out)
    }

    /// `R1' - 2 tn R1` from central differences of the Riccati defect `R1`.
    /// Expanding the product rule shows this equals
    /// `f'' + 2 f f' - tn ((n+1) f' + 2 lambda + 2 f^2) - (n-1)(K - tn^2) f`.
    fn second_order_terms(&self, lambda: f64) -> Result<Vec<(f64, f64)>> {
        let r1 = self.riccati_terms(lambda)?;
        let h = self.h;
        let mut out = Vec::with_capacity(r1.len());
        for j in 1..r1.len() - 1 {
            let s = self.s_nodes[j - 1];
            let d = (r1[j + 1] - r1[j - 1]) / (2.0 * h);
            out.push((s, d - 2.0 * tn(self.params.k, s)? * r1[j]));
        }
        Ok(out)
    }

    fn window_limit(&self, fraction: f64) -> f64 {
        fraction * 0.5 * self.params.d * (1.0 + 1e-12)
    }
}

/// Max `|f' - (n-1) tn f + lambda_1 + f^2|` over nodes with `s <= fraction * D/2`.
pub fn riccati_residual_within(profile: &LogDerivativeProfile, fraction: f64) -> Result<f64> {
    let lim = profile.window_limit(fraction);
    let r1 = profile.riccati_terms(profile.lambda1)?;
    let mut worst = r1[0].abs();
    for (s, v) in profile.s_nodes.iter().zip(&r1[1..]) {
        if *s <= lim {
            worst = worst.max(v.abs());
        }
    }
    Ok(worst)
}

pub fn riccati_residual(profile: &LogDerivativeProfile) -> Result<f64> {
    riccati_residual_within(profile, RESIDUAL_WINDOW)
}

/// Max residual of the second-order equation for `f` over `s <= fraction * D/2`.
pub fn second_order_residual_within(profile: &LogDerivativeProfile, fraction: f64) -> Result<f64> {
    let lim = profile.window_limit(fraction);
    Ok(profile
        .second_order_terms(profile.lambda1)?
        .into_iter()
        .filter(|(s, _)| *s <= lim)
        .fold(0.0, |a, (_, v)| a.max(v.abs())))
}

pub fn second_order_residual(profile: &LogDerivativeProfile) -> Result<f64> {
    second_order_residual_within(profile, RESIDUAL_WINDOW)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualStudy {
    pub params: ModelParams,
    pub grid_m: usize,
    pub riccati: f64,
    pub second_order: f64,
    pub riccati_fine: f64,
    pub second_order_fine: f64,
}

impl ResidualStudy {
    pub fn riccati_ratio(&self) -> f64 {
        self.riccati / self.riccati_fine
    }
    pub fn second_order_ratio(&self) -> f64 {
        self.second_order / self.second_order_fine
    }
}

/// Residuals at `grid_m` and at the grid with half the spacing.
pub fn residual_study(p: &ModelParams, grid_m: usize) -> Result<ResidualStudy> {
    let run = |m: usize| -> Result<(f64, f64)> {
        let r = solve_model(p, &SolveOptions { grid_m: m, method: crate::model::Method::Tridiag, ..SolveOptions::default() })?;
        let prof = log_derivative_profile(&r)?;
        Ok((riccati_residual(&prof)?, second_order_residual(&prof)?))
    };
    let (a, b) = run(grid_m)?;
    let (c, d) = run(2 * grid_m + 1)?;
    Ok(ResidualStudy { params: *p, grid_m, riccati: a, second_order: b, riccati_fine: c, second_order_fine: d })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioProfile {
    pub params: ModelParams,
    /// Nodes `0, h, ...` up to the last interior node, then `D/2`.
    pub s_nodes: Vec<f64>,
    pub w_values: Vec<f64>,
}

/// `w = phi_2 / phi_1` on `[0, D/2]` for the normalized pair; the value at
/// `D/2` is the ratio of one-sided derivatives.
pub fn ratio_profile(r: &SolveReport) -> Result<RatioProfile> {
    let modes = half_modes(r)?;
    let scale = (modes.half_norm2(0) / modes.half_norm2(1)).sqrt();
    let (v1, v2) = (&modes.v[0], &modes.v[1]);
    let mut s_nodes = modes.s.clone();
    let mut w_values: Vec<f64> = v1.iter().zip(v2).map(|(a, b)| scale * b / a).collect();
    let n = v1.len();
    // v(b - jh) / (jh) = -v'(b) + O(j^2 h^2) since v(b) = v''(b) = 0.
    let end = scale * (8.0 * v2[n - 1] - v2[n - 2]) / (8.0 * v1[n - 1] - v1[n - 2]);
    s_nodes.push(0.5 * r.params.d);
    w_values.push(end);
    Ok(RatioProfile { params: r.params, s_nodes, w_values })
}

impl RatioProfile {
    pub fn is_non_decreasing(&self) -> bool {
        let tol = 1e-12 * self.w_values.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        self.w_values.windows(2).all(|w| w[1] >= w[0] - tol)
    }

    /// One-sided second-order estimate of `w'(D/2)`.
    pub fn endpoint_slope(&self) -> f64 {
        let n = self.w_values.len();
        let h = self.s_nodes[n - 1] - self.s_nodes[n - 2];
        (3.0 * self.w_values[n - 1] - 4.0 * self.w_values[n - 2] + self.w_values[n - 3]) / (2.0 * h)
    }
}

/// Max residual of `w'' - (n-1) tn w' + 2 f w' + (lambda_2 - lambda_1) w` over
/// interior nodes with `s <= fraction * D/2`.
pub fn ratio_equation_residual_within(r: &SolveReport, fraction: f64) -> Result<f64> {
    let rp = ratio_profile(r)?;
    let prof = log_derivative_profile(r)?;
    let nm1 = f64::from(r.params.n) - 1.0;
    let gap = r.lambda2() - r.lambda1();
    let h = prof.h;
    let lim = prof.window_limit(fraction);
    let w = &rp.w_values;
    let mut worst = 0.0f64;
    for (idx, &s) in prof.s_nodes.iter().enumerate() {
        if s > lim {
            break;
        }
        let j = idx + 1;
        let d1 = (w[j + 1] - w[j - 1]) / (2.0 * h);
        let d2 = (w[j + 1] - 2.0 * w[j] + w[j - 1]) / (h * h);
        let f = prof.f_values[idx];
        let res = d2 - nm1 * tn(r.params.k, s)? * d1 + 2.0 * f * d1 + gap * w[j];
        worst = worst.max(res.abs());
    }
    Ok(worst)
}

/// `phi_1` strictly decreasing on `(0, D/2)`, checked on the solver samples.
pub fn first_mode_decreasing(r: &SolveReport) -> bool {
    let f = &r.pairs[0].samples;
    let c = r.grid.centre().unwrap_or(f.len() / 2);
    let tol = 1e-12 * f.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    f[c..].windows(2).all(|w| w[1] - w[0] < -tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiVerdict {
    pub params: ModelParams,
    pub d_prime: f64,
    pub lambda1: f64,
    pub lambda1_d_prime: f64,
    /// Largest value of the elliptic expression over `[0, D/2]`, divided by `1 + lambda_1`.
    pub elliptic_max: f64,
    /// Largest value of `2 psi' - 4 tn psi - (n-1)(K - tn^2)` over `[0, D/2]`, divided by `1 + lambda_1`.
    pub slope_max: f64,
    pub elliptic_condition: bool,
    pub slope_condition: bool,
    /// For `n = 2`: `lambda_1 - 7K/2`, the bound the slope argument relies on.
    pub n2_margin: Option<f64>,
}

impl PsiVerdict {
    pub fn elliptic_margin(&self) -> f64 {
        -self.elliptic_max
    }
    pub fn slope_margin(&self) -> f64 {
        -self.slope_max
    }
}

/// Default enlarged diameter `D'` for the modulus construction.
pub fn default_d_prime(p: &ModelParams) -> f64 {
    let cap = if p.k > 0.0 { 0.5 * PI / p.k.sqrt() } else { f64::INFINITY };
    (p.d + 0.05).min(cap)
}

/// Checks both conditions on `psi = (log phi_1)'` of the model with diameter
/// `d_prime > D`, with the eigenvalue of the diameter-`D` model in the elliptic
/// condition.
pub fn psi_inequalities(p: &ModelParams, d_prime: f64, opts: &SolveOptions) -> Result<PsiVerdict> {
    p.validate()?;
    if p.k < 0.0 {
        return Err(GapError::Precondition(format!("modulus conditions are stated for K >= 0, got K = {}", p.k)));
    }
    if p.k > 0.0 && p.d > 0.5 * PI / p.k.sqrt() {
        return Err(GapError::Precondition(format!("needs D <= pi/(2 sqrt K), got D = {}", p.d)));
    }
    if !(d_prime > p.d) || (p.k > 0.0 && d_prime > 0.5 * PI / p.k.sqrt()) {
        return Err(GapError::Precondition(format!("needs D < D' <= pi/(2 sqrt K), got D' = {d_prime}")));
    }
    psi_margins(p, d_prime, opts)
}

/// The same evaluation without the curvature hypothesis, for exploring `K < 0`.
pub fn psi_margins(p: &ModelParams, d_prime: f64, opts: &SolveOptions) -> Result<PsiVerdict> {
    let outer = p.with_d(d_prime)?;
    let lambda1 = solve_model(p, opts)?.lambda1();
    let ro = solve_model(&outer, opts)?;
    let prof = log_derivative_profile(&ro)?;
    let lam_o = ro.lambda1();
    let nm1 = f64::from(p.n) - 1.0;
    let k = p.k;
    let lim = 0.5 * p.d * (1.0 + 1e-12);
    if prof.s_nodes.last().is_none_or(|&s| s < lim) {
        return Err(GapError::Precondition("D' grid does not cover [0, D/2] away from its endpoint".into()));
    }
    let scale = 1.0 + lambda1.abs();

    let mut elliptic_max = f64::NEG_INFINITY;
    for (s, r2) in prof.second_order_terms(lam_o)? {
        if s > lim {
            break;
        }
        let lhs = r2 - 2.0 * tn(k, s)? * (lambda1 - lam_o);
        elliptic_max = elliptic_max.max(lhs / scale);
    }
    // At s = 0, psi = 0 and tn = 0: the slope expression is 2 psi'(0) - (n-1) K.
    let mut slope_max = (2.0 * prof.f_prime_at_zero - nm1 * k) / scale;
    for ((&s, &f), &fp) in prof.s_nodes.iter().zip(&prof.f_values).zip(&prof.f_prime) {
        if s > lim {
            break;
        }
        let t = tn(k, s)?;
        slope_max = slope_max.max((2.0 * fp - 4.0 * t * f - nm1 * (k - t * t)) / scale);
    }
    Ok(PsiVerdict {
        params: *p,
        d_prime,
        lambda1,
        lambda1_d_prime: lam_o,
        elliptic_max,
        slope_max,
        elliptic_condition: elliptic_max <= INEQUALITY_TOL,
        slope_condition: slope_max <= INEQUALITY_TOL,
        n2_margin: (p.n == 2).then_some(lambda1 - 3.5 * k),
    })
}

/// Symmetric-difference estimate of `psi'(0)`, which should equal `-lambda_1`.
pub fn hessian_limit_check(profile: &LogDerivativeProfile) -> f64 {
    // f is odd, so (f(h) - f(-h)) / 2h = f(h) / h.
    profile.f_values[0] / profile.s_nodes[0]
}

/// Pointwise ordering `psi_{D'} >= psi_D` on `[0, D/2]`; returns the smallest
/// difference (negative means violated) after linear interpolation of the
/// `D'` profile onto the `D` nodes.
pub fn profile_ordering(p: &ModelParams, d_prime: f64, opts: &SolveOptions) -> Result<f64> {
    if !(d_prime > p.d) {
        return Err(GapError::Precondition(format!("needs D' > D, got {d_prime} <= {}", p.d)));
    }
    let inner = log_derivative_profile(&solve_model(p, opts)?)?;
    let outer = log_derivative_profile(&solve_model(&p.with_d(d_prime)?, opts)?)?;
    let mut worst = f64::INFINITY;
    for (&s, &f) in inner.s_nodes.iter().zip(&inner.f_values) {
        let j = ((s / outer.h).floor() as usize).max(1);
        // Outer nodes are j h for j = 1.., stored at index j - 1.
        let (x0, y0) = if j == 0 { (0.0, 0.0) } else { (outer.s_nodes[j - 1], outer.f_values[j - 1]) };
        let (x1, y1) = (outer.s_nodes[j], outer.f_values[j]);
        let fo = y0 + (y1 - y0) * (s - x0) / (x1 - x0);
        worst = worst.min(fo - f);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBounds {
    pub params: ModelParams,
    pub lambda1: f64,
    /// `max{pi^2/D^2 - (n-1)K/2, 0}`.
    pub bound: f64,
    /// `lambda_1 - bound`.
    pub margin: f64,
    pub holds: bool,
    /// For `n = 2` the potential satisfies `V <= -K/2`, so `lambda_1 <= pi^2/D^2 - K/2` instead.
    pub n2_upper_holds: Option<bool>,
    /// Reference values for geodesic balls: `n lambda_1`.
    pub ball_lambda1_floor: f64,
    /// `n lambda_1 + 3 pi^2 / D^2`.
    pub ball_lambda2_floor: f64,
}

pub fn lower_bound_suite(r: &SolveReport) -> LowerBounds {
    let p = &r.params;
    let n = f64::from(p.n);
    let l1 = r.lambda1();
    let base = PI * PI / (p.d * p.d);
    let bound = (base - 0.5 * (n - 1.0) * p.k).max(0.0);
    let tol = INEQUALITY_TOL * (1.0 + l1.abs());
    LowerBounds {
        params: *p,
        lambda1: l1,
        bound,
        margin: l1 - bound,
        holds: l1 >= bound - tol,
        n2_upper_holds: (p.n == 2).then_some(l1 <= base - 0.5 * p.k + tol),
        ball_lambda1_floor: n * l1,
        ball_lambda2_floor: n * l1 + 3.0 * base,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(n: u32, k: f64, d: f64) -> ModelParams {
        ModelParams::new(n, k, d).unwrap()
    }

    fn solve(p: &ModelParams) -> SolveReport {
        solve_model(p, &SolveOptions::default()).unwrap()
    }

    #[test]
    fn weight_ratio_matches_direct_quotient() {
        for (n, k) in [(4, 1.0), (5, -2.0), (2, 0.3)] {
            let p = params(n, k, 1.0);
            let (s, h) = (0.37, 1e-3);
            let w = |x: f64| crate::kernels::cs(k, x).powf(-0.5 * (f64::from(n) - 1.0));
            assert!((weight_ratio(&p, s, h, 1.0) - (w(s + h) / w(s) - 1.0)).abs() < 1e-13);
            assert!((weight_ratio(&p, s, h, -1.0) - (w(s - h) / w(s) - 1.0)).abs() < 1e-13);
        }
    }

    #[test]
    fn flat_profile_closed_form() {
        let prof = log_derivative_profile(&solve(&params(1, 0.0, 2.0))).unwrap();
        let j = prof.s_nodes.iter().position(|&s| (s - 0.5).abs() < prof.h).unwrap();
        let exact = -(PI / 2.0) * (PI * prof.s_nodes[j] / 2.0).tan();
        assert!((prof.f_values[j] - exact).abs() < 1e-6);
        assert!(prof.f_values.iter().all(|&f| f < 0.0));
        assert!((prof.f_values[0] + PI * PI / 4.0 * prof.h).abs() < 1e-9);
        assert!(riccati_residual(&prof).unwrap() <= 1e-6);
        assert!(second_order_residual(&prof).unwrap() <= 1e-6);
    }

    #[test]
    fn n3_profile_against_closed_form() {
        let d: f64 = 1.0;
        let prof = log_derivative_profile(&solve(&params(3, 1.0, d))).unwrap();
        // phi_1 = cos(pi s / D) / cos s, so f = -(pi/D) tan(pi s / D) + tan s.
        for (&s, &f) in prof.s_nodes.iter().zip(&prof.f_values).step_by(97) {
            let exact = -(PI / d) * (PI * s / d).tan() + s.tan();
            assert!((f - exact).abs() <= 1e-5 * (1.0 + exact.abs()), "s = {s}: {f} vs {exact}");
        }
        assert!(riccati_residual(&prof).unwrap() <= 1e-6);
        assert!(second_order_residual(&prof).unwrap() <= 1e-6);
        assert_relative_eq!(hessian_limit_check(&prof), -(PI * PI - 1.0), max_relative = 1e-6);
    }

    #[test]
    fn log_derivative_at_interior_point() {
        let r = solve(&params(2, 1.0, 1.0));
        let prof = log_derivative_profile(&r).unwrap();
        let j = prof.s_nodes.iter().position(|&s| (s - 0.3).abs() < 0.6 * prof.h).unwrap();
        // Oracle: centered difference quotient of the solver samples.
        let c = r.grid.centre().unwrap();
        let f = &r.pairs[0].samples;
        let i = c + j + 1;
        let oracle = (f[i + 1] - f[i - 1]) / (2.0 * r.grid.h * f[i]);
        assert!((prof.f_values[j] - oracle).abs() < 1e-6, "{} vs {oracle}", prof.f_values[j]);
    }

    #[test]
    fn residuals_converge_at_second_order() {
        for p in [params(2, 1.0, 1.0), params(4, -1.0, 1.5)] {
            let st = residual_study(&p, 500).unwrap();
            assert!((3.5..=4.5).contains(&st.riccati_ratio()), "{st:?}");
            assert!((3.5..=4.5).contains(&st.second_order_ratio()), "{st:?}");
        }
    }

    #[test]
    fn ratio_profile_properties() {
        for p in [params(2, 1.0, 1.0), params(5, -1.0, 1.2), params(1, 0.0, 2.0)] {
            let r = solve(&p);
            let rp = ratio_profile(&r).unwrap();
            assert_eq!(rp.w_values[0], 0.0);
            assert!(rp.is_non_decreasing());
            let end = *rp.w_values.last().unwrap();
            assert!(end.is_finite() && end > 0.0);
            let top = rp.w_values.iter().fold(0.0f64, |a, &x| a.max(x));
            assert!(rp.endpoint_slope().abs() < 1e-3 * top / p.d, "{}", rp.endpoint_slope());
            assert!(first_mode_decreasing(&r));
        }
    }

    #[test]
    fn ratio_equation_is_second_order() {
        let p = params(3, 1.0, 1.2);
        let res = |m: usize| {
            let r = solve_model(&p, &SolveOptions { grid_m: m, ..SolveOptions::default() }).unwrap();
            ratio_equation_residual_within(&r, RESIDUAL_WINDOW).unwrap()
        };
        let (a, b) = (res(500), res(1001));
        assert!(a / b > 3.5 && a / b < 4.5, "{a} {b}");
    }

    #[test]
    fn psi_conditions() {
        let opts = SolveOptions::default();
        let v = psi_inequalities(&params(3, 1.0, 1.4), 1.5, &opts).unwrap();
        assert!(v.elliptic_condition && v.slope_condition, "{v:?}");
        let v = psi_inequalities(&params(2, 1.0, 1.5), 1.55, &opts).unwrap();
        assert!(v.elliptic_condition && v.slope_condition, "{v:?}");
        assert!(v.n2_margin.unwrap() > 0.0);
        let v = psi_inequalities(&params(5, 0.0, 2.0), 2.05, &opts).unwrap();
        assert!(v.elliptic_condition && v.slope_condition);
        assert!(psi_inequalities(&params(3, -1.0, 1.0), 1.05, &opts).is_err());
        assert!(psi_inequalities(&params(3, 1.0, 1.6), 1.65, &opts).is_err());
        assert!(psi_inequalities(&params(3, 1.0, 1.0), 0.9, &opts).is_err());
    }

    #[test]
    fn hessian_limits() {
        let prof = log_derivative_profile(&solve(&params(1, 0.0, 2.0))).unwrap();
        assert_relative_eq!(hessian_limit_check(&prof), -PI * PI / 4.0, max_relative = 1e-6);
        let r = solve(&params(2, 1.0, 1.5));
        let prof = log_derivative_profile(&r).unwrap();
        assert_relative_eq!(hessian_limit_check(&prof), -r.lambda1(), max_relative = 1e-5);
        assert_relative_eq!(prof.f_prime_at_zero, -r.lambda1(), max_relative = 1e-5);
    }

    #[test]
    fn larger_interval_gives_larger_profile() {
        let opts = SolveOptions::default();
        assert!(profile_ordering(&params(3, 1.0, 1.0), 1.1, &opts).unwrap() >= -1e-7);
        assert!(profile_ordering(&params(2, 1.0, 1.4), 1.5, &opts).unwrap() >= -1e-7);
    }

    #[test]
    fn lower_bounds() {
        let b = lower_bound_suite(&solve(&params(3, 1.0, 1.0)));
        assert!(b.holds && b.margin.abs() < 1e-9);
        let b = lower_bound_suite(&solve(&params(1, 2.0, 1.3)));
        assert!(b.holds && b.margin.abs() < 1e-9);
        let b = lower_bound_suite(&solve(&params(5, -1.0, 1.0)));
        assert!(b.holds && b.margin > 0.0);
        assert_relative_eq!(b.ball_lambda1_floor, 5.0 * b.lambda1);
    }

    #[test]
    fn n2_bound_is_reversed() {
        // For n = 2 the potential lies below -K/2 (K > 0) so lambda_1 sits below pi^2/D^2 - K/2.
        for (k, d) in [(1.0, 0.5), (1.0, 2.0), (-1.0, 1.0)] {
            let b = lower_bound_suite(&solve(&params(2, k, d)));
            assert!(!b.holds, "{b:?}");
            assert_eq!(b.n2_upper_holds, Some(true));
        }
    }
}
