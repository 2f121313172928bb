//! Gap, normalized gap, parameter sweeps and the first-variation integrals
//! of the eigenvalues in `D`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{GapError, Result};
use crate::kernels::{a_of_k, cs, l_fn, m_fn, ModelParams};
use crate::model::{solve_model, Method, SolveOptions, SolveReport};

/// Tolerance on differences used by monotonicity verdicts.
pub const MONOTONE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    pub method: Method,
    pub grid_m: usize,
    pub residual: f64,
    pub agreement: Option<f64>,
    pub near_singular: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub params: ModelParams,
    pub lambda1: f64,
    pub lambda2: f64,
    pub gap: f64,
    pub normalized_gap: f64,
    pub convergence: Convergence,
}

impl GapReport {
    pub fn from_solve(r: &SolveReport, grid_m: usize) -> Self {
        let (l1, l2) = (r.lambda1(), r.lambda2());
        let gap = l2 - l1;
        Self {
            params: r.params,
            lambda1: l1,
            lambda2: l2,
            gap,
            normalized_gap: normalized_gap(r.params.d, gap),
            convergence: Convergence {
                method: r.method,
                grid_m,
                residual: r.residual,
                agreement: r.agreement,
                near_singular: r.near_singular,
            },
        }
    }

    /// `D^2 (lambda2 - lambda1)`.
    pub fn scaled_gap(&self) -> f64 {
        self.params.d * self.params.d * self.gap
    }
}

/// `D^2 gap / pi^2`.
pub fn normalized_gap(d: f64, gap: f64) -> f64 {
    d * d * gap / (PI * PI)
}

pub fn gap_report(p: &ModelParams, opts: &SolveOptions) -> Result<GapReport> {
    let r = solve_model(p, opts)?;
    Ok(GapReport::from_solve(&r, opts.grid_m))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    D,
    N,
}

impl std::str::FromStr for SweepAxis {
    type Err = GapError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "D" | "d" => Ok(SweepAxis::D),
            "n" | "N" => Ok(SweepAxis::N),
            other => Err(GapError::InvalidParams(format!("unknown sweep axis {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    Flat,
    NonMonotone,
}

impl Monotonicity {
    pub fn as_str(self) -> &'static str {
        match self {
            Monotonicity::Increasing => "increasing",
            Monotonicity::Decreasing => "decreasing",
            Monotonicity::Flat => "flat",
            Monotonicity::NonMonotone => "non-monotone",
        }
    }
}

/// Classifies a sequence by its consecutive differences. Differences within
/// `tol` count as ties; a sequence of only ties is flat.
pub fn classify(values: &[f64], tol: f64) -> Monotonicity {
    let mut up = false;
    let mut down = false;
    let mut tie = false;
    for w in values.windows(2) {
        let d = w[1] - w[0];
        if d > tol {
            up = true;
        } else if d < -tol {
            down = true;
        } else {
            tie = true;
        }
    }
    match (up, down, tie) {
        (false, false, _) => Monotonicity::Flat,
        (true, false, false) => Monotonicity::Increasing,
        (false, true, false) => Monotonicity::Decreasing,
        _ => Monotonicity::NonMonotone,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub points: Vec<(f64, GapReport)>,
    /// Verdict on the normalized gap along the sweep.
    pub verdict: Monotonicity,
}

impl SweepResult {
    pub fn new(axis: SweepAxis, points: Vec<(f64, GapReport)>) -> Result<Self> {
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(GapError::InvalidParams("sweep values must be strictly increasing".into()));
        }
        let ng: Vec<f64> = points.iter().map(|(_, g)| g.normalized_gap).collect();
        Ok(Self { axis, verdict: classify(&ng, MONOTONE_TOL), points })
    }
}

/// Model parameters at one sweep value.
pub fn sweep_params(axis: SweepAxis, value: f64, base: &ModelParams) -> Result<ModelParams> {
    match axis {
        SweepAxis::D => ModelParams::new(base.n, base.k, value),
        SweepAxis::N => {
            if value.fract() != 0.0 || value < 1.0 || value > f64::from(u32::MAX) {
                return Err(GapError::InvalidParams(format!("dimension must be a positive integer, got {value}")));
            }
            ModelParams::new(value as u32, base.k, base.d)
        }
    }
}

pub fn sweep(axis: SweepAxis, values: &[f64], base: &ModelParams, opts: &SolveOptions) -> Result<SweepResult> {
    let points = values
        .iter()
        .map(|&v| Ok((v, gap_report(&sweep_params(axis, v, base)?, opts)?)))
        .collect::<Result<Vec<_>>>()?;
    SweepResult::new(axis, points)
}

/// Samples on the right half `[0, D/2)` as `(s, phi, phi')`, with `phi'` from
/// fourth-order differences (the Dirichlet zero at `D/2` closes the stencil).
pub(crate) fn right_half_with_derivative(r: &SolveReport, i: usize) -> Vec<(f64, f64, f64)> {
    let g = &r.grid;
    let f = &r.pairs[i].samples;
    let c = g.centre().expect("refined grids have a centre node");
    let h = g.h;
    let m = g.m;
    let at = |j: isize| -> f64 {
        if j < 0 || j as usize >= m {
            0.0
        } else {
            f[j as usize]
        }
    };
    (c..m)
        .map(|j| {
            let jj = j as isize;
            let d = if j + 1 < m {
                (-at(jj + 2) + 8.0 * at(jj + 1) - 8.0 * at(jj - 1) + at(jj - 2)) / (12.0 * h)
            } else {
                (3.0 * at(jj + 1) + 10.0 * at(jj) - 18.0 * at(jj - 1) + 6.0 * at(jj - 2) - at(jj - 3)) / (12.0 * h)
            };
            (g.node(j), f[j], d)
        })
        .collect()
}

/// Trapezoid rule over `[0, D/2]` for an integrand given on the right-half
/// nodes; the integrand is taken to vanish at `D/2`.
fn half_trapezoid(h: f64, values: &[f64]) -> f64 {
    let interior: f64 = values.iter().skip(1).sum();
    h * (0.5 * values[0] + interior)
}

fn check_index(i: usize) -> Result<usize> {
    match i {
        1 | 2 => Ok(i - 1),
        _ => Err(GapError::InvalidParams(format!("eigenpair index must be 1 or 2, got {i}"))),
    }
}

/// `2(n-1) int_0^{D/2} l_K phi_i phi_i' cs_K^{n-1} ds`, which equals
/// `(1/D) d/dD (D^2 lambda_i)`.
pub fn perturbation_derivative(r: &SolveReport, i: usize) -> Result<f64> {
    let idx = check_index(i)?;
    let p = &r.params;
    let nm1 = f64::from(p.n) - 1.0;
    if nm1 == 0.0 || p.k == 0.0 {
        return Ok(0.0);
    }
    let vals = right_half_with_derivative(r, idx)
        .into_iter()
        .map(|(s, f, df)| Ok(l_fn(p.k, s)? * f * df * cs(p.k, s).powf(nm1)))
        .collect::<Result<Vec<_>>>()?;
    Ok(2.0 * nm1 * half_trapezoid(r.grid.h, &vals))
}

/// The same derivative after integrating by parts:
/// `(n-1) int_0^{D/2} phi_i^2 ((n-3) m_K - (n-1) K) cs_K^{n-1} ds`.
pub fn perturbation_derivative_by_parts(r: &SolveReport, i: usize) -> Result<f64> {
    let idx = check_index(i)?;
    let p = &r.params;
    let nm1 = f64::from(p.n) - 1.0;
    let nm3 = f64::from(p.n) - 3.0;
    let vals = right_half_with_derivative(r, idx)
        .into_iter()
        .map(|(s, f, _)| Ok(f * f * (nm3 * m_fn(p.k, s)? - nm1 * p.k) * cs(p.k, s).powf(nm1)))
        .collect::<Result<Vec<_>>>()?;
    Ok(nm1 * half_trapezoid(r.grid.h, &vals))
}

/// `(n-1)(n-3) int_0^{D/2} m_K (phi_2^2 - phi_1^2) cs_K^{n-1} ds`.
pub fn gap_derivative_integral(r: &SolveReport) -> Result<f64> {
    let p = &r.params;
    let nm1 = f64::from(p.n) - 1.0;
    let nm3 = f64::from(p.n) - 3.0;
    if nm1 == 0.0 || nm3 == 0.0 {
        return Ok(0.0);
    }
    let one = right_half_with_derivative(r, 0);
    let two = right_half_with_derivative(r, 1);
    let vals = one
        .iter()
        .zip(&two)
        .map(|(&(s, f1, _), &(_, f2, _))| Ok(m_fn(p.k, s)? * (f2 * f2 - f1 * f1) * cs(p.k, s).powf(nm1)))
        .collect::<Result<Vec<_>>>()?;
    Ok(nm1 * nm3 * half_trapezoid(r.grid.h, &vals))
}

/// Central-difference estimate of `d/dc [c^2 lambda_i(n, cD, K)]` at `c = 1`.
pub fn scaling_derivative_oracle(p: &ModelParams, i: usize, dc: f64, opts: &SolveOptions) -> Result<f64> {
    let idx = check_index(i)?;
    let lam = |c: f64| -> Result<f64> {
        let r = solve_model(&p.with_d(c * p.d)?, opts)?;
        Ok(c * c * r.pairs[idx].lambda)
    };
    Ok((lam(1.0 + dc)? - lam(1.0 - dc)?) / (2.0 * dc))
}

/// The unique `b` in `(0, D/2)` where the (equally normalized) first two
/// eigenfunctions cross. Errors if the difference changes sign more than once.
pub fn crossing_point(r: &SolveReport) -> Result<f64> {
    let one = right_half_with_derivative(r, 0);
    let two = right_half_with_derivative(r, 1);
    // Both pairs carry unit weighted norm, so no rescaling is needed.
    let diff: Vec<(f64, f64)> = one.iter().zip(&two).map(|(a, b)| (a.0, a.1 - b.1)).collect();
    let mut changes = vec![];
    for w in diff.windows(2) {
        if w[0].1 > 0.0 && w[1].1 <= 0.0 || w[0].1 < 0.0 && w[1].1 >= 0.0 {
            if w[1].1 == 0.0 {
                changes.push(w[1].0);
            } else {
                let t = w[0].1 / (w[0].1 - w[1].1);
                changes.push(w[0].0 + t * (w[1].0 - w[0].0));
            }
        }
    }
    // An exact zero at a node followed by the opposite sign is one crossing, not two.
    changes.dedup();
    if changes.len() != 1 {
        return Err(GapError::PropertyViolation(format!(
            "phi_1 - phi_2 changes sign {} times on (0, D/2)",
            changes.len()
        )));
    }
    let b = changes[0];
    let bad = one.iter().zip(&two).find(|(a, c)| {
        let d = c.1 * c.1 - a.1 * a.1;
        (a.0 < b && d > 0.0) || (a.0 > b && d < 0.0)
    });
    if let Some((a, _)) = bad {
        return Err(GapError::PropertyViolation(format!("sign pattern of phi_2^2 - phi_1^2 broken at s = {}", a.0)));
    }
    Ok(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioVerdict {
    pub d: f64,
    pub d_next: f64,
    pub ratio: f64,
    pub ratio_next: f64,
    pub non_decreasing: bool,
}

/// Compares `lambda2 / lambda1` at `D` and `D + dD`.
pub fn ratio_monotonicity_check(p: &ModelParams, dd: f64, opts: &SolveOptions) -> Result<RatioVerdict> {
    if p.n < 3 {
        return Err(GapError::Precondition(format!("ratio monotonicity needs n >= 3, got {}", p.n)));
    }
    if !(dd > 0.0) {
        return Err(GapError::InvalidParams(format!("dD must be positive, got {dd}")));
    }
    let d_next = p.d + dd;
    if p.k < 0.0 {
        let a = a_of_k(p.k)?;
        if d_next > a {
            return Err(GapError::Precondition(format!("D + dD = {d_next} exceeds a(K) = {a}")));
        }
    }
    let next = p.with_d(d_next)?;
    let r0 = solve_model(p, opts)?;
    let r1 = solve_model(&next, opts)?;
    let ratio = r0.lambda2() / r0.lambda1();
    let ratio_next = r1.lambda2() / r1.lambda1();
    Ok(RatioVerdict {
        d: p.d,
        d_next,
        ratio,
        ratio_next,
        non_decreasing: ratio_next - ratio >= -MONOTONE_TOL * ratio,
    })
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
    fn classify_sequences() {
        assert_eq!(classify(&[1.0, 2.0, 3.0], 1e-9), Monotonicity::Increasing);
        assert_eq!(classify(&[3.0, 2.0, 1.0], 1e-9), Monotonicity::Decreasing);
        assert_eq!(classify(&[3.0, 3.0 + 1e-12, 3.0], 1e-9), Monotonicity::Flat);
        assert_eq!(classify(&[1.0, 2.0, 1.0], 1e-9), Monotonicity::NonMonotone);
        assert_eq!(classify(&[1.0, 1.0, 2.0], 1e-9), Monotonicity::NonMonotone);
    }

    #[test]
    fn flat_normalized_gap_is_three() {
        let g = gap_report(&params(1, -1.0, 1.0), &SolveOptions::default()).unwrap();
        assert_relative_eq!(g.normalized_gap, 3.0, max_relative = 1e-11);
        assert_relative_eq!(g.normalized_gap, g.params.d.powi(2) * (g.lambda2 - g.lambda1) / (PI * PI));
    }

    #[test]
    fn sweep_rejects_unordered_values() {
        let base = params(2, 1.0, 1.0);
        let opts = SolveOptions::with_grid(100);
        assert!(sweep(SweepAxis::D, &[1.0, 0.5], &base, &opts).is_err());
        assert!(sweep(SweepAxis::N, &[2.5], &base, &opts).is_err());
        let r = sweep(SweepAxis::N, &[2.0, 3.0, 4.0], &base, &opts).unwrap();
        assert_eq!(r.verdict, Monotonicity::Increasing);
    }

    #[test]
    fn perturbation_vanishes_for_flat_space() {
        let r = solve(&params(4, 0.0, 1.0));
        assert_eq!(perturbation_derivative(&r, 1).unwrap(), 0.0);
        assert!(perturbation_derivative_by_parts(&r, 1).unwrap().abs() < 1e-12);
        assert!(perturbation_derivative(&r, 3).is_err());
    }

    #[test]
    fn perturbation_matches_scaling_oracle() {
        for (p, i) in [(params(2, 1.0, 1.0), 1), (params(5, -1.0, 1.0), 2)] {
            let r = solve(&p);
            let pd = perturbation_derivative(&r, i).unwrap();
            let oracle = scaling_derivative_oracle(&p, i, 1e-4, &SolveOptions::default()).unwrap();
            assert!(((pd - oracle) / oracle).abs() < 1e-5, "{pd} vs {oracle}");
            let bp = perturbation_derivative_by_parts(&r, i).unwrap();
            assert!(((pd - bp) / bp).abs() < 1e-5, "{pd} vs {bp}");
        }
    }

    #[test]
    fn gap_integral_signs() {
        assert!(gap_derivative_integral(&solve(&params(3, 1.0, 1.2))).unwrap().abs() < 1e-14);
        assert!(gap_derivative_integral(&solve(&params(2, 1.0, 1.0))).unwrap() < 0.0);
        let r = solve(&params(5, 1.0, 1.0));
        let g = gap_derivative_integral(&r).unwrap();
        let diff = perturbation_derivative(&r, 2).unwrap() - perturbation_derivative(&r, 1).unwrap();
        assert!(g > 0.0);
        assert!(((g - diff) / g).abs() < 1e-4, "{g} vs {diff}");
    }

    /// Crossing point of cos(pi s / 2) and sin(pi s) on (0, 1), both with unit L^2 norm on [-1, 1].
    fn flat_crossing_oracle() -> f64 {
        let f = |s: f64| (PI * s / 2.0).cos() - (PI * s).sin();
        let mut lo = 0.0;
        let n = 100_000;
        let mut hi = 1.0;
        for j in 1..n {
            let s = j as f64 / n as f64;
            if f(s) <= 0.0 {
                hi = s;
                lo = s - 1.0 / n as f64;
                break;
            }
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn crossing_point_flat_case() {
        let b = crossing_point(&solve(&params(1, 0.0, 2.0))).unwrap();
        assert!((b - flat_crossing_oracle()).abs() < 1e-6, "{b}");
    }

    #[test]
    fn crossing_point_curved_cases() {
        for p in [params(2, 1.0, 1.0), params(4, -1.0, 0.8)] {
            let r = solve(&p);
            let b = crossing_point(&r).unwrap();
            // Oracle: the sign change of phi_1 - phi_2 on a dense shooting grid.
            let opts = SolveOptions { method: Method::Shooting, ..SolveOptions::default() };
            let rs = solve_model(&p, &opts).unwrap();
            let bs = crossing_point(&rs).unwrap();
            assert!(b > 0.0 && b < p.d / 2.0);
            assert!((b - bs).abs() < 1e-6, "{b} vs {bs}");
        }
    }

    #[test]
    fn ratio_monotonicity() {
        let opts = SolveOptions::default();
        let v = ratio_monotonicity_check(&params(3, 1.0, 1.0), 0.1, &opts).unwrap();
        let exact = |d: f64| (4.0 * PI * PI / (d * d) - 1.0) / (PI * PI / (d * d) - 1.0);
        assert_relative_eq!(v.ratio, exact(1.0), max_relative = 1e-10);
        assert_relative_eq!(v.ratio_next, exact(1.1), max_relative = 1e-10);
        assert!(v.non_decreasing && v.ratio_next > v.ratio);
        assert!(ratio_monotonicity_check(&params(5, 1.0, 1.0), 0.05, &opts).unwrap().non_decreasing);
        assert!(ratio_monotonicity_check(&params(2, 1.0, 1.0), 0.05, &opts).is_err());
        assert!(ratio_monotonicity_check(&params(4, -1.0, 1.4), 0.5, &opts).is_err());
    }

    #[test]
    fn ratio_decreases_for_negative_curvature() {
        // n = 3, K = -1: lambda_i = i^2 pi^2 / D^2 + 1, so the ratio (4x + 1)/(x + 1) with x = pi^2/D^2 falls as D grows.
        let opts = SolveOptions::default();
        let v = ratio_monotonicity_check(&params(3, -1.0, 0.5), 0.05, &opts).unwrap();
        let exact = |d: f64| {
            let x = PI * PI / (d * d);
            (4.0 * x + 1.0) / (x + 1.0)
        };
        assert_relative_eq!(v.ratio, exact(0.5), max_relative = 1e-10);
        assert_relative_eq!(v.ratio_next, exact(0.55), max_relative = 1e-10);
        assert!(!v.non_decreasing);
        let v = ratio_monotonicity_check(&params(4, -1.0, 0.5), 0.05, &opts).unwrap();
        assert!(v.ratio_next < v.ratio);
    }
}
