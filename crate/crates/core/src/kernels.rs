//! Generalized trigonometric functions of curvature `K` and the scalar
//! auxiliaries built from them.
//!
//! `sn_K` solves `y'' + K y = 0`, `y(0) = 0`, `y'(0) = 1`; `cs_K = sn_K'`;
//! `tn_K = K sn_K / cs_K = -cs_K' / cs_K`. With this sign convention
//! `tn_{-1}(s) = -tanh(s)`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{GapError, Result};

/// Below this value of `|K| s^2` the Taylor series is used instead of the
/// trigonometric or hyperbolic closed form, so values are continuous in `K`.
const SERIES_THRESHOLD: f64 = 1e-8;

/// Strict margin kept before the first zero of `cs_K` when `K > 0`.
const DOMAIN_MARGIN: f64 = 1e-12;

/// Sectional curvature of the model space.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, serde::Serialize, serde::Deserialize)]
pub struct Curvature(f64);

/// Which closed form a curvature value selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Spherical,
    Flat,
    Hyperbolic,
}

impl Curvature {
    pub fn new(k: f64) -> Result<Self> {
        if k.is_finite() {
            Ok(Self(k))
        } else {
            Err(GapError::InvalidParams(format!("curvature must be finite, got {k}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn branch(self) -> Branch {
        if self.0 > 0.0 {
            Branch::Spherical
        } else if self.0 < 0.0 {
            Branch::Hyperbolic
        } else {
            Branch::Flat
        }
    }

    /// First positive zero of `cs_K`, `pi / (2 sqrt K)`; infinite unless `K > 0`.
    pub fn cs_zero(self) -> f64 {
        if self.0 > 0.0 {
            FRAC_PI_2 / self.0.sqrt()
        } else {
            f64::INFINITY
        }
    }

    pub fn sn(self, s: f64) -> f64 {
        sn(self.0, s)
    }

    pub fn cs(self, s: f64) -> f64 {
        cs(self.0, s)
    }

    pub fn tn(self, s: f64) -> Result<f64> {
        tn(self.0, s)
    }
}

/// The triple `(n, K, D)` of the one-dimensional model problem on `[-D/2, D/2]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModelParams {
    pub n: u32,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "D")]
    pub d: f64,
}

impl ModelParams {
    pub fn new(n: u32, k: f64, d: f64) -> Result<Self> {
        let p = Self { n, k, d };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(GapError::InvalidParams("dimension n must be at least 1".into()));
        }
        if !self.k.is_finite() {
            return Err(GapError::InvalidParams(format!("curvature must be finite, got {}", self.k)));
        }
        if !(self.d.is_finite() && self.d > 0.0) {
            return Err(GapError::InvalidParams(format!("diameter must be positive, got {}", self.d)));
        }
        if self.k > 0.0 && self.d >= std::f64::consts::PI / self.k.sqrt() {
            return Err(GapError::InvalidParams(format!(
                "diameter {} must be below pi/sqrt(K) = {} for K = {}",
                self.d,
                std::f64::consts::PI / self.k.sqrt(),
                self.k
            )));
        }
        Ok(())
    }

    pub fn curvature(&self) -> Curvature {
        Curvature(self.k)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * self.d
    }

    /// Same model with the diameter replaced.
    pub fn with_d(&self, d: f64) -> Result<Self> {
        Self::new(self.n, self.k, d)
    }

    /// Distance of `D` from the singular diameter `pi / sqrt(K)` (infinite for `K <= 0`).
    pub fn singular_distance(&self) -> f64 {
        if self.k > 0.0 {
            std::f64::consts::PI / self.k.sqrt() - self.d
        } else {
            f64::INFINITY
        }
    }
}

/// Generalized sine: `sin(sqrt(K) s)/sqrt(K)`, `s`, or `sinh(sqrt(-K) s)/sqrt(-K)`.
pub fn sn(k: f64, s: f64) -> f64 {
    let x = k * s * s;
    if x.abs() < SERIES_THRESHOLD {
        return s * (1.0 - x / 6.0 + x * x / 120.0);
    }
    if k > 0.0 {
        let q = k.sqrt();
        (q * s).sin() / q
    } else {
        let q = (-k).sqrt();
        (q * s).sinh() / q
    }
}

/// Generalized cosine, the derivative of [`sn`].
pub fn cs(k: f64, s: f64) -> f64 {
    let x = k * s * s;
    if x.abs() < SERIES_THRESHOLD {
        return 1.0 - x / 2.0 + x * x / 24.0;
    }
    if k > 0.0 {
        (k.sqrt() * s).cos()
    } else {
        ((-k).sqrt() * s).cosh()
    }
}

/// Returns a domain error when `s` is at or beyond the first zero of `cs_K`.
pub fn check_domain(k: f64, s: f64) -> Result<()> {
    if k > 0.0 && k.sqrt() * s.abs() >= FRAC_PI_2 - DOMAIN_MARGIN {
        return Err(GapError::Domain(format!(
            "|s| = {} reaches the zero of cs_K at {} (K = {k})",
            s.abs(),
            FRAC_PI_2 / k.sqrt()
        )));
    }
    if !s.is_finite() {
        return Err(GapError::Domain(format!("non-finite abscissa {s}")));
    }
    Ok(())
}

/// `tn_K = K sn_K / cs_K`.
pub fn tn(k: f64, s: f64) -> Result<f64> {
    check_domain(k, s)?;
    Ok(tn_unchecked(k, s))
}

pub(crate) fn tn_unchecked(k: f64, s: f64) -> f64 {
    let x = k * s * s;
    if x.abs() < SERIES_THRESHOLD {
        return k * s * (1.0 + x / 3.0 + 2.0 * x * x / 15.0);
    }
    if k > 0.0 {
        let q = k.sqrt();
        q * (q * s).tan()
    } else {
        let q = (-k).sqrt();
        -q * (q * s).tanh()
    }
}

/// `K / cs_K^2`, which also equals `tn_K'` and `K + tn_K^2`.
fn k_over_cs2(k: f64, s: f64) -> f64 {
    let c = cs(k, s);
    k / (c * c)
}

/// `l_K(s) = tn_K(s) + s K cs_K(s)^-2`.
pub fn l_fn(k: f64, s: f64) -> Result<f64> {
    Ok(tn(k, s)? + s * k_over_cs2(k, s))
}

/// `m_K(s) = l_K'(s) / 2 = K cs_K^-2 (1 + s tn_K)`.
pub fn m_fn(k: f64, s: f64) -> Result<f64> {
    let t = tn(k, s)?;
    Ok(k_over_cs2(k, s) * (1.0 + s * t))
}

/// `m_K'(s) = K cs_K^-2 (3 tn_K + s (K + 3 tn_K^2))`.
pub fn m_prime(k: f64, s: f64) -> Result<f64> {
    let t = tn(k, s)?;
    Ok(k_over_cs2(k, s) * (3.0 * t + s * (k + 3.0 * t * t)))
}

/// For `K < 0`, the unique zero `a(K) > 0` of `m_K'`. `m_K` increases on `[0, a(K)]`.
pub fn a_of_k(k: f64) -> Result<f64> {
    if !(k < 0.0 && k.is_finite()) {
        return Err(GapError::Precondition(format!("a(K) is defined for K < 0, got {k}")));
    }
    // Scale invariance: a(K) = a(-1) / sqrt(-K). Work in t = sqrt(-K) s.
    let q = (-k).sqrt();
    let g = |t: f64| 3.0 * t.tanh() + t * (1.0 - 3.0 * t.tanh().powi(2));
    let (mut lo, mut hi) = (1e-3, 10.0);
    if !(g(lo) > 0.0 && g(hi) < 0.0) {
        return Err(GapError::Convergence {
            method: "a(K) bracketing",
            detail: format!("no sign change of m_K' on [{lo}, {hi}]"),
        });
    }
    while hi - lo > 4.0 * f64::EPSILON * hi {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi) / q)
}

/// Potential of the Schrodinger normal form `-u'' + V u = lambda u`:
/// `V(s) = ((n-1) K / 4) ((n-3) / cs_K^2(s) - (n-1))`.
pub fn potential(n: u32, k: f64, s: f64) -> Result<f64> {
    check_domain(k, s)?;
    Ok(potential_unchecked(n, k, s))
}

pub(crate) fn potential_unchecked(n: u32, k: f64, s: f64) -> f64 {
    let nm1 = f64::from(n) - 1.0;
    let nm3 = f64::from(n) - 3.0;
    let c = cs(k, s);
    0.25 * nm1 * k * (nm3 / (c * c) - nm1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn closed_form_values() {
        assert_relative_eq!(sn(1.0, PI / 2.0), 1.0, epsilon = 1e-15);
        assert_eq!(sn(0.0, 2.5), 2.5);
        assert_relative_eq!(sn(-1.0, 1.0), 1.1752011936, epsilon = 1e-10);
        assert_eq!(cs(1.0, 0.0), 1.0);
        assert_relative_eq!(cs(1.0, PI / 3.0), 0.5, epsilon = 1e-15);
        assert_relative_eq!(cs(-1.0, 1.0), 1.5430806348, epsilon = 1e-10);
        assert_relative_eq!(tn(1.0, PI / 4.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(tn(0.0, 5.0).unwrap(), 0.0);
        assert_relative_eq!(tn(-1.0, 1.0).unwrap(), -0.7615941560, epsilon = 1e-10);
    }

    #[test]
    fn l_and_m_values() {
        assert_eq!(l_fn(0.0, 1.0).unwrap(), 0.0);
        assert_relative_eq!(l_fn(1.0, PI / 4.0).unwrap(), 1.0 + PI / 2.0, epsilon = 1e-14);
        let direct = -(0.5f64).tanh() - 0.5 / (0.5f64).cosh().powi(2);
        assert_relative_eq!(l_fn(-1.0, 0.5).unwrap(), direct, epsilon = 1e-15);
        assert_eq!(m_fn(0.0, 3.0).unwrap(), 0.0);
        assert_relative_eq!(m_fn(1.0, 0.0).unwrap(), 1.0);
        let h = 1e-5;
        let fd = (l_fn(-1.0, 1.0 + h).unwrap() - l_fn(-1.0, 1.0 - h).unwrap()) / (2.0 * h) / 2.0;
        assert!((fd - m_fn(-1.0, 1.0).unwrap()).abs() <= 1e-8);
    }

    #[test]
    fn l_fn_matches_derivative_of_its_antiderivative() {
        // l_K = d/ds [ s tn_K(s) ] since (s tn)' = tn + s K/cs^2.
        let (k, s, h) = (-1.0, 0.5, 1e-4);
        let anti = |x: f64| x * tn(k, x).unwrap();
        let fd = (anti(s + h) - anti(s - h)) / (2.0 * h);
        assert!((fd - l_fn(k, s).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn tn_domain_guard() {
        assert!(matches!(tn(1.0, PI / 2.0), Err(GapError::Domain(_))));
        assert!(matches!(tn(4.0, PI / 4.0), Err(GapError::Domain(_))));
        assert!(tn(1.0, PI / 2.0 - 1e-9).is_ok());
        assert!(tn(-1.0, 100.0).is_ok());
        assert!(potential(2, 1.0, 2.0).is_err());
    }

    #[test]
    fn potential_special_cases() {
        assert_relative_eq!(potential(3, 1.0, 0.7).unwrap(), -1.0, epsilon = 1e-15);
        assert_eq!(potential(1, 5.0, 0.2).unwrap(), 0.0);
        assert_relative_eq!(potential(2, 1.0, 0.0).unwrap(), -0.5);
        assert_relative_eq!(potential(3, -2.0, 1.3).unwrap(), 2.0, epsilon = 1e-14);
    }

    /// Oracle for a(K): bisection on a central difference of m_K.
    fn a_oracle(k: f64) -> f64 {
        let h = 1e-5;
        let dm = |s: f64| (m_fn(k, s + h).unwrap() - m_fn(k, s - h).unwrap()) / (2.0 * h);
        let (mut lo, mut hi) = (1e-3, 10.0);
        assert!(dm(lo) > 0.0 && dm(hi) < 0.0);
        while hi - lo > 1e-10 {
            let mid = 0.5 * (lo + hi);
            if dm(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn a_of_k_matches_oracle_and_scaling() {
        let a1 = a_of_k(-1.0).unwrap();
        assert!((a1 - a_oracle(-1.0)).abs() < 1e-8, "{a1}");
        assert!((a_of_k(-4.0).unwrap() - a_oracle(-4.0)).abs() < 1e-8);
        assert!((a_of_k(-0.25).unwrap() - a_oracle(-0.25)).abs() < 1e-8);
        assert_relative_eq!(a_of_k(-4.0).unwrap(), a1 / 2.0, epsilon = 1e-13);
        assert_relative_eq!(a_of_k(-0.25).unwrap(), 2.0 * a1, epsilon = 1e-13);
        // m_K is increasing up to a(K) and decreasing after.
        assert!(m_fn(-1.0, 0.5 * a1).unwrap() < m_fn(-1.0, a1).unwrap());
        assert!(m_fn(-1.0, 1.5 * a1).unwrap() < m_fn(-1.0, a1).unwrap());
        assert!(a_of_k(1.0).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(2, 1.0, 3.14159).is_ok());
        assert!(ModelParams::new(2, 1.0, PI).is_err());
        assert!(ModelParams::new(0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(2, -1.0, 50.0).is_ok());
        assert!(ModelParams::new(2, 0.0, -1.0).is_err());
        assert!(ModelParams::new(2, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn series_branch_is_continuous_in_k() {
        let s: f64 = 0.7;
        // Just inside the series region both forms must agree to rounding.
        for k in [0.99e-8 / (s * s), -0.99e-8 / (s * s)] {
            let q = k.abs().sqrt();
            let (sn_c, cs_c, tn_c) = if k > 0.0 {
                ((q * s).sin() / q, (q * s).cos(), q * (q * s).tan())
            } else {
                ((q * s).sinh() / q, (q * s).cosh(), -q * (q * s).tanh())
            };
            assert!((sn(k, s) - sn_c).abs() <= 4.0 * f64::EPSILON * sn_c.abs());
            assert!((cs(k, s) - cs_c).abs() <= 4.0 * f64::EPSILON);
            assert!((tn(k, s).unwrap() - tn_c).abs() <= 1e-12 * tn_c.abs());
        }
        assert!((sn(1e-12, s) - s).abs() < 1e-12);
        assert!((cs(-1e-12, s) - 1.0).abs() < 1e-12);
    }

    fn ks() -> impl Strategy<Value = f64> {
        prop_oneof![-4.0..4.0f64, Just(0.0), -1e-9..1e-9f64]
    }

    /// Abscissa inside the tn domain for curvature `k`.
    fn s_in_domain(k: f64, u: f64) -> f64 {
        if k > 0.0 {
            u * 0.95 * FRAC_PI_2 / k.sqrt()
        } else {
            u * 3.0
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn sn_solves_its_ode(k in ks(), u in -1.0..1.0f64) {
            let s = s_in_domain(k, u);
            let h = 1e-4;
            let second = (sn(k, s + h) - 2.0 * sn(k, s) + sn(k, s - h)) / (h * h);
            prop_assert!((second + k * sn(k, s)).abs() <= 1e-6 * (1.0 + k.abs()) * (1.0 + sn(k, s).abs()));
        }

        #[test]
        fn pythagorean_identity(k in ks(), u in -1.0..1.0f64) {
            let s = s_in_domain(k, u);
            let c = cs(k, s);
            let sv = sn(k, s);
            let lhs = c * c + k * sv * sv;
            prop_assert!((lhs - 1.0).abs() <= 1e-12 * (c * c).max(1.0));
        }

        #[test]
        fn half_angle_identity(k in ks(), u in 0.01..1.0f64) {
            let d = s_in_domain(k, u) * if k > 0.0 { 2.0 } else { 1.0 };
            let lhs = tn(k, d / 2.0).unwrap() * sn(k, d);
            let rhs = 1.0 - cs(k, d);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        }

        #[test]
        fn m_is_half_derivative_of_l(k in ks(), u in 0.05..1.0f64) {
            let s = s_in_domain(k, u);
            let h = 1e-5 * (1.0 + s.abs());
            let fd = (l_fn(k, s + h).unwrap() - l_fn(k, s - h).unwrap()) / (2.0 * h);
            let m2 = 2.0 * m_fn(k, s).unwrap();
            prop_assert!((fd - m2).abs() <= 1e-6 * m2.abs().max(1e-3 * (1.0 + k.abs())));
        }

        #[test]
        fn parity(k in ks(), u in -1.0..1.0f64, n in 1u32..10) {
            let s = s_in_domain(k, u);
            prop_assert_eq!(sn(k, -s), -sn(k, s));
            prop_assert_eq!(cs(k, -s), cs(k, s));
            prop_assert_eq!(tn(k, -s).unwrap(), -tn(k, s).unwrap());
            prop_assert_eq!(l_fn(k, -s).unwrap(), -l_fn(k, s).unwrap());
            prop_assert_eq!(m_fn(k, -s).unwrap(), m_fn(k, s).unwrap());
            prop_assert_eq!(potential(n, k, -s).unwrap(), potential(n, k, s).unwrap());
        }

        #[test]
        fn l_sign_follows_curvature(k in prop_oneof![0.1..4.0f64, -4.0..-0.1f64], u in 0.01..1.0f64) {
            let s = s_in_domain(k, u);
            let l = l_fn(k, s).unwrap();
            let ok = if k > 0.0 { l > 0.0 } else { l < 0.0 };
            prop_assert!(ok, "l = {} at K = {}", l, k);
        }
    }
}
