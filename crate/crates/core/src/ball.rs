//! Dirichlet spectra of geodesic balls in the sphere and in Euclidean space by
//! separation of variables and radial shooting.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{GapError, Result};
use crate::kernels::{cs, sn, ModelParams};
use crate::model::{solve_model, SolveOptions};
use crate::ode::{Dopri, State, Trajectory};
use crate::roots::{bisect_predicate, brent};

/// Frobenius start offset relative to the radius.
pub const FROBENIUS_OFFSET: f64 = 1e-6;
pub const MAX_ANGULAR_ORDER: u32 = 2;
const RADIAL_RTOL: f64 = 1e-12;
const PROFILE_NODES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallSpec {
    pub n: u32,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "R")]
    pub radius: f64,
}

impl BallSpec {
    pub fn new(n: u32, k: f64, radius: f64) -> Result<Self> {
        let b = Self { n, k, radius };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(GapError::InvalidParams(format!("ball dimension must be >= 2, got {}", self.n)));
        }
        if !self.k.is_finite() || self.k < 0.0 {
            return Err(GapError::InvalidParams(format!("balls are supported for K >= 0, got K = {}", self.k)));
        }
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(GapError::InvalidParams(format!("radius must be positive, got {}", self.radius)));
        }
        if self.k > 0.0 && self.radius > 0.5 * PI / self.k.sqrt() * (1.0 + 1e-12) {
            return Err(GapError::InvalidParams(format!(
                "radius {} exceeds the hemisphere radius pi/(2 sqrt K)",
                self.radius
            )));
        }
        Ok(())
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    /// The one-dimensional model with the ball's dimension, curvature and diameter.
    pub fn model(&self) -> Result<ModelParams> {
        ModelParams::new(self.n, self.k, self.diameter())
    }
}

fn radial_rhs(b: &BallSpec, ell: u32, lambda: f64) -> impl Fn(f64, &State) -> State {
    let nm1 = f64::from(b.n) - 1.0;
    let ang = f64::from(ell) * (f64::from(ell) + f64::from(b.n) - 2.0);
    let k = b.k;
    move |s, y| {
        let (sv, cv) = (sn(k, s), cs(k, s));
        [y[1], -nm1 * cv / sv * y[1] - (lambda - ang / (sv * sv)) * y[0]]
    }
}

fn check_ell(ell: u32) -> Result<()> {
    if ell > MAX_ANGULAR_ORDER {
        return Err(GapError::InvalidParams(format!("angular order must be 0, 1 or 2, got {ell}")));
    }
    Ok(())
}

fn radial_trajectory(b: &BallSpec, ell: u32, lambda: f64, offset: f64, stops: &[f64]) -> Result<Trajectory> {
    b.validate()?;
    check_ell(ell)?;
    let eps = offset * b.radius;
    let l = f64::from(ell);
    let y0 = [eps.powi(ell as i32), if ell == 0 { 0.0 } else { l * eps.powi(ell as i32 - 1) }];
    Dopri::with_rtol(RADIAL_RTOL).integrate(radial_rhs(b, ell, lambda), eps, y0, stops)
}

/// `u(R)` for the regular solution of the radial equation with angular order `ell`.
pub fn radial_shoot(b: &BallSpec, ell: u32, lambda: f64) -> Result<f64> {
    Ok(radial_trajectory(b, ell, lambda, FROBENIUS_OFFSET, &[b.radius])?.end()[0])
}

/// The `index`-th (0-based) Dirichlet eigenvalue of angular order `ell`,
/// bracketed by interior zero counts and polished with Brent's method.
pub fn radial_eigenvalue(b: &BallSpec, ell: u32, index: usize) -> Result<f64> {
    radial_eigenvalue_with_offset(b, ell, index, FROBENIUS_OFFSET)
}

pub fn radial_eigenvalue_with_offset(b: &BallSpec, ell: u32, index: usize, offset: f64) -> Result<f64> {
    let zeros = |lam: f64| -> Result<usize> { Ok(radial_trajectory(b, ell, lam, offset, &[b.radius])?.zeros) };
    let mut hi = 10.0 / (b.radius * b.radius);
    let mut tries = 0;
    while zeros(hi)? <= index {
        hi *= 2.0;
        tries += 1;
        if tries > 60 {
            return Err(GapError::Convergence { method: "radial count bracketing", detail: format!("no upper bracket for mode {index}") });
        }
    }
    let (lo, hi) = bisect_predicate(|lam| Ok(zeros(lam)? > index), 0.0, hi, 1e-6)?;
    let end = |lam: f64| -> Result<f64> { Ok(radial_trajectory(b, ell, lam, offset, &[b.radius])?.end()[0]) };
    brent(end, lo, hi, 1e-13 * hi, 200)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallSpectrum {
    pub spec: BallSpec,
    pub lambda1: f64,
    pub lambda2: f64,
    /// `(ell, radial index)` of the mode realizing `lambda2`.
    pub mode2: (u32, usize),
    pub second_radial: f64,
    pub first_dipole: f64,
    pub first_quadrupole: f64,
    /// `first_dipole < second_radial`; a `false` here flags the spec for investigation.
    pub dipole_below_radial: bool,
    /// First radial eigenfunction `(s, u(s))` with `u(0) = 1`, `s` in `[0, R)`.
    pub radial_profile: Vec<(f64, f64)>,
}

impl BallSpectrum {
    pub fn gap(&self) -> f64 {
        self.lambda2 - self.lambda1
    }
}

pub fn ball_spectrum(b: &BallSpec) -> Result<BallSpectrum> {
    b.validate()?;
    let lambda1 = radial_eigenvalue(b, 0, 0)?;
    let second_radial = radial_eigenvalue(b, 0, 1)?;
    let first_dipole = radial_eigenvalue(b, 1, 0)?;
    let first_quadrupole = radial_eigenvalue(b, 2, 0)?;
    let (lambda2, mode2) = if first_dipole <= second_radial { (first_dipole, (1, 0)) } else { (second_radial, (0, 1)) };
    Ok(BallSpectrum {
        spec: *b,
        lambda1,
        lambda2,
        mode2,
        second_radial,
        first_dipole,
        first_quadrupole,
        dipole_below_radial: first_dipole < second_radial,
        radial_profile: radial_samples(b, 0, lambda1)?,
    })
}

/// `(s, u(s))` on `PROFILE_NODES` equally spaced nodes of `[0, R)`.
pub fn radial_samples(b: &BallSpec, ell: u32, lambda: f64) -> Result<Vec<(f64, f64)>> {
    let eps = FROBENIUS_OFFSET * b.radius;
    let step = b.radius / PROFILE_NODES as f64;
    let stops: Vec<f64> = (1..PROFILE_NODES).map(|j| j as f64 * step).collect();
    let tr = radial_trajectory(b, ell, lambda, FROBENIUS_OFFSET, &stops)?;
    let mut out = Vec::with_capacity(PROFILE_NODES);
    out.push((0.0, if ell == 0 { 1.0 } else { 0.0 }));
    out.extend(stops.iter().zip(&tr.states).map(|(&s, y)| (s, y[0])));
    debug_assert!(stops[0] > eps);
    Ok(out)
}

/// Sign changes in a sampled profile.
pub fn sign_changes(samples: &[(f64, f64)]) -> usize {
    samples
        .iter()
        .map(|&(_, u)| u)
        .filter(|u| *u != 0.0)
        .collect::<Vec<_>>()
        .windows(2)
        .filter(|w| w[0].signum() != w[1].signum())
        .count()
}

fn comparison_precondition(b: &BallSpec) -> Result<()> {
    b.validate()?;
    if b.k > 0.0 && b.diameter() > 0.5 * PI / b.k.sqrt() * (1.0 + 1e-12) {
        return Err(GapError::Precondition(format!(
            "gap comparison needs D = 2R <= pi/(2 sqrt K), got D = {}",
            b.diameter()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallGapVerdict {
    pub spec: BallSpec,
    pub ball_lambda1: f64,
    pub ball_lambda2: f64,
    pub model_lambda1: f64,
    pub model_lambda2: f64,
    /// `(lambda_2 - lambda_1)(ball) - (lambda_2 - lambda_1)(model)`.
    pub gap_margin: f64,
    /// `lambda_1(ball) - lambda_1(model)`.
    pub first_eigenvalue_margin: f64,
    /// `lambda_1(ball) - n lambda_1(model)`.
    pub scaled_first_margin: f64,
    /// `lambda_2(ball) - n lambda_1(model) - 3 pi^2 / D^2`, for `n >= 3`.
    pub second_eigenvalue_margin: Option<f64>,
}

impl BallGapVerdict {
    pub fn margins(&self) -> Vec<(&'static str, f64)> {
        let mut v = vec![
            ("gap comparison", self.gap_margin),
            ("first eigenvalue", self.first_eigenvalue_margin),
            ("scaled first eigenvalue", self.scaled_first_margin),
        ];
        if let Some(m) = self.second_eigenvalue_margin {
            v.push(("second eigenvalue", m));
        }
        v
    }

    pub fn passes(&self) -> bool {
        self.margins().iter().all(|(_, m)| *m > 0.0)
    }
}

pub fn gap_comparison_check(b: &BallSpec, opts: &SolveOptions) -> Result<BallGapVerdict> {
    comparison_precondition(b)?;
    let spec = ball_spectrum(b)?;
    let model = solve_model(&b.model()?, opts)?;
    let (m1, m2) = (model.lambda1(), model.lambda2());
    let n = f64::from(b.n);
    let d = b.diameter();
    Ok(BallGapVerdict {
        spec: *b,
        ball_lambda1: spec.lambda1,
        ball_lambda2: spec.lambda2,
        model_lambda1: m1,
        model_lambda2: m2,
        gap_margin: spec.gap() - (m2 - m1),
        first_eigenvalue_margin: spec.lambda1 - m1,
        scaled_first_margin: spec.lambda1 - n * m1,
        second_eigenvalue_margin: (b.n >= 3).then(|| spec.lambda2 - n * m1 - 3.0 * PI * PI / (d * d)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallHessianVerdict {
    pub spec: BallSpec,
    pub model_lambda1: f64,
    /// Largest radial eigenvalue `(log u)''` over the sample nodes.
    pub max_radial: f64,
    /// Largest tangential eigenvalue `(log u)' cs/sn` over the sample nodes.
    pub max_tangential: f64,
    /// `-lambda_1(ball)/n`, the common value of both at the centre.
    pub centre_value: f64,
    pub holds: bool,
}

/// Hessian eigenvalues of `log u(dist(x, centre))` at `s`, from the radial
/// state `(u, u')` and the equation for `u''`.
pub fn log_hessian_eigenvalues(b: &BallSpec, lambda: f64, s: f64, y: &State) -> (f64, f64) {
    let nm1 = f64::from(b.n) - 1.0;
    let cot = cs(b.k, s) / sn(b.k, s);
    let (u, up) = (y[0], y[1]);
    let upp = -nm1 * cot * up - lambda * u;
    let g = up / u;
    (upp / u - g * g, g * cot)
}

pub fn ball_hessian_check(b: &BallSpec, opts: &SolveOptions) -> Result<BallHessianVerdict> {
    comparison_precondition(b)?;
    let lambda = radial_eigenvalue(b, 0, 0)?;
    let model_lambda1 = solve_model(&b.model()?, opts)?.lambda1();
    let step = b.radius / PROFILE_NODES as f64;
    let stops: Vec<f64> = (1..PROFILE_NODES).map(|j| j as f64 * step).collect();
    let tr = radial_trajectory(b, 0, lambda, FROBENIUS_OFFSET, &stops)?;
    let (mut max_radial, mut max_tangential) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (&s, y) in stops.iter().zip(&tr.states) {
        let (r, t) = log_hessian_eigenvalues(b, lambda, s, y);
        max_radial = max_radial.max(r);
        max_tangential = max_tangential.max(t);
    }
    let centre_value = -lambda / f64::from(b.n);
    max_radial = max_radial.max(centre_value);
    max_tangential = max_tangential.max(centre_value);
    let tol = 1e-7 * (1.0 + model_lambda1.abs());
    Ok(BallHessianVerdict {
        spec: *b,
        model_lambda1,
        max_radial,
        max_tangential,
        centre_value,
        holds: max_radial <= -model_lambda1 + tol && max_tangential <= -model_lambda1 + tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// `J_nu(x)` from its power series; accurate to rounding for `x < 5`.
    fn bessel_j(nu: u32, x: f64) -> f64 {
        let mut term = (0.5 * x).powi(nu as i32) / (1..=nu).map(f64::from).product::<f64>();
        let mut sum = term;
        for k in 1..60 {
            term *= -(0.25 * x * x) / (f64::from(k) * f64::from(k + nu));
            sum += term;
        }
        sum
    }

    fn bessel_zero(nu: u32, mut lo: f64, mut hi: f64) -> f64 {
        let flo = bessel_j(nu, lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if bessel_j(nu, mid).signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn bessel_oracle_sanity() {
        assert!((bessel_zero(0, 2.0, 3.0) - 2.404825557695773).abs() < 1e-14);
        assert!((bessel_zero(1, 3.5, 4.0) - 3.831705970207512).abs() < 1e-14);
    }

    #[test]
    fn shoot_vanishes_at_known_eigenvalues() {
        let hemi = BallSpec::new(2, 1.0, PI / 2.0).unwrap();
        assert!(radial_shoot(&hemi, 0, 2.0).unwrap().abs() < 1e-9);
        let disk = BallSpec::new(2, 0.0, 1.0).unwrap();
        let j0 = bessel_zero(0, 2.0, 3.0);
        let j1 = bessel_zero(1, 3.5, 4.0);
        assert!(radial_shoot(&disk, 0, j0 * j0).unwrap().abs() < 1e-9);
        assert!(radial_shoot(&disk, 1, j1 * j1).unwrap().abs() < 1e-9);
    }

    #[test]
    fn hemisphere_spectra() {
        for n in 2..=4u32 {
            let s = ball_spectrum(&BallSpec::new(n, 1.0, PI / 2.0).unwrap()).unwrap();
            let nf = f64::from(n);
            assert!((s.lambda1 - nf).abs() < 1e-8, "{n}: {}", s.lambda1);
            assert!((s.lambda2 - 2.0 * (nf + 1.0)).abs() < 1e-8, "{n}: {}", s.lambda2);
            assert_eq!(s.mode2, (1, 0));
        }
    }

    #[test]
    fn unit_disk_matches_bessel_zeros() {
        let s = ball_spectrum(&BallSpec::new(2, 0.0, 1.0).unwrap()).unwrap();
        let j0 = bessel_zero(0, 2.0, 3.0);
        let j1 = bessel_zero(1, 3.5, 4.0);
        assert!((s.lambda1 - j0 * j0).abs() < 1e-8);
        assert!((s.lambda2 - j1 * j1).abs() < 1e-8);
        assert!(s.dipole_below_radial);
        assert!(s.first_quadrupole > s.first_dipole);
    }

    #[test]
    fn euclidean_scaling() {
        let a = ball_spectrum(&BallSpec::new(3, 0.0, 1.0).unwrap()).unwrap();
        let b = ball_spectrum(&BallSpec::new(3, 0.0, 0.5).unwrap()).unwrap();
        assert_relative_eq!(b.lambda1, 4.0 * a.lambda1, max_relative = 1e-8);
        assert_relative_eq!(b.lambda2, 4.0 * a.lambda2, max_relative = 1e-8);
        // n = 3: u = sin(pi s)/s, so lambda_1 = pi^2.
        assert_relative_eq!(a.lambda1, PI * PI, max_relative = 1e-9);
    }

    #[test]
    fn start_offset_insensitivity() {
        let b = BallSpec::new(3, 1.0, 0.7).unwrap();
        for ell in 0..=1 {
            let a = radial_eigenvalue_with_offset(&b, ell, 0, FROBENIUS_OFFSET).unwrap();
            let c = radial_eigenvalue_with_offset(&b, ell, 0, 0.5 * FROBENIUS_OFFSET).unwrap();
            assert!((a - c).abs() <= 1e-9 * a, "{ell}: {a} {c}");
        }
    }

    #[test]
    fn node_counts() {
        let b = BallSpec::new(4, 1.0, 0.6).unwrap();
        let s = ball_spectrum(&b).unwrap();
        assert_eq!(sign_changes(&s.radial_profile), 0);
        assert!(s.radial_profile.iter().all(|&(_, u)| u > 0.0));
        assert_eq!(sign_changes(&radial_samples(&b, 0, s.second_radial).unwrap()), 1);
        assert!(s.lambda1 < s.lambda2);
    }

    #[test]
    fn gap_comparison_examples() {
        let opts = SolveOptions::default();
        for b in [BallSpec::new(3, 1.0, PI / 8.0), BallSpec::new(2, 0.0, 0.5), BallSpec::new(4, 1.0, 0.7)] {
            let v = gap_comparison_check(&b.unwrap(), &opts).unwrap();
            assert!(v.passes(), "{v:?}");
        }
        let err = gap_comparison_check(&BallSpec::new(3, 1.0, 1.0).unwrap(), &opts);
        assert!(matches!(err, Err(GapError::Precondition(_))));
    }

    #[test]
    fn hessian_bound_on_balls() {
        let opts = SolveOptions::default();
        for (n, r) in [(2, PI / 4.0), (3, PI / 4.0), (4, 0.5)] {
            let v = ball_hessian_check(&BallSpec::new(n, 1.0, r).unwrap(), &opts).unwrap();
            assert!(v.holds, "{v:?}");
        }
    }

    #[test]
    fn hessian_near_centre_matches_origin_limit() {
        let b = BallSpec::new(3, 1.0, 0.7).unwrap();
        let lam = radial_eigenvalue(&b, 0, 0).unwrap();
        let s = 1e-3;
        let y = radial_trajectory(&b, 0, lam, FROBENIUS_OFFSET, &[s]).unwrap().end();
        let (r, t) = log_hessian_eigenvalues(&b, lam, s, &y);
        assert!((r + lam / 3.0).abs() < 1e-4 * lam);
        assert!((t + lam / 3.0).abs() < 1e-4 * lam);
    }

    #[test]
    fn invalid_specs() {
        assert!(BallSpec::new(1, 1.0, 0.5).is_err());
        assert!(BallSpec::new(3, -1.0, 0.5).is_err());
        assert!(BallSpec::new(3, 1.0, 1.6).is_err());
        assert!(radial_shoot(&BallSpec::new(3, 1.0, 0.5).unwrap(), 3, 1.0).is_err());
    }
}
