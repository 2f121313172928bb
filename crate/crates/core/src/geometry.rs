//! Embedded models of the constant-curvature space forms: the sphere of
//! radius `1/sqrt K` in `R^{n+1}`, the upper sheet of the hyperboloid
//! `<x, x>_L = 1/K` with the Lorentz product, and for `K = 0` the affine chart
//! `R^n`. Geodesics, distances and the two-endpoint geodesic variation used
//! in second-variation arguments.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{GapError, Result};
use crate::kernels::{cs, sn, tn};

const MEMBERSHIP_TOL: f64 = 1e-10;
/// Step of the symmetric `d_r` fit.
pub const DR_STEP: f64 = 1e-3;
/// Step ladder of the fourth-order second-derivative estimates.
pub const R_LADDER: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

/// `<a, b>` for curvature `k`: Euclidean unless `k < 0`, where the last
/// coordinate enters with a minus sign.
pub fn inner(k: f64, a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let head: f64 = a[..n - 1].iter().zip(&b[..n - 1]).map(|(x, y)| x * y).sum();
    if k < 0.0 {
        head - a[n - 1] * b[n - 1]
    } else {
        head + a[n - 1] * b[n - 1]
    }
}

fn axpy(a: f64, x: &[f64], b: f64, y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(u, v)| a * u + b * v).collect()
}

fn sub(x: &[f64], y: &[f64]) -> Vec<f64> {
    axpy(1.0, x, -1.0, y)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelPoint {
    pub coords: Vec<f64>,
    #[serde(rename = "K")]
    pub k: f64,
}

impl ModelPoint {
    pub fn new(coords: Vec<f64>, k: f64) -> Result<Self> {
        let p = Self { coords, k };
        let res = p.membership_residual();
        if res > MEMBERSHIP_TOL {
            return Err(GapError::InvalidParams(format!("point is off the model by {res:e}")));
        }
        if k < 0.0 && *p.coords.last().unwrap_or(&0.0) <= 0.0 {
            return Err(GapError::InvalidParams("hyperboloid points need a positive last coordinate".into()));
        }
        Ok(p)
    }

    /// `|K <x, x> - 1|`, or zero in the flat chart.
    pub fn membership_residual(&self) -> f64 {
        if self.k == 0.0 {
            return 0.0;
        }
        (self.k * inner(self.k, &self.coords, &self.coords) - 1.0).abs()
    }

    /// Base point `(0, ..., 0, 1/sqrt|K|)`, or the origin of the flat chart in `R^n`.
    pub fn origin(n: usize, k: f64) -> Self {
        if k == 0.0 {
            return Self { coords: vec![0.0; n], k };
        }
        let mut c = vec![0.0; n + 1];
        c[n] = 1.0 / k.abs().sqrt();
        Self { coords: c, k }
    }

    pub fn dim(&self) -> usize {
        if self.k == 0.0 {
            self.coords.len()
        } else {
            self.coords.len() - 1
        }
    }

    /// Tangential part `w - K <w, x> x` of an ambient vector.
    pub fn project(&self, w: &[f64]) -> Vec<f64> {
        axpy(1.0, w, -self.k * inner(self.k, w, &self.coords), &self.coords)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentVec {
    pub base: ModelPoint,
    pub coords: Vec<f64>,
}

impl TangentVec {
    pub fn new(base: ModelPoint, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != base.coords.len() {
            return Err(GapError::InvalidParams("tangent vector and base point differ in length".into()));
        }
        let scale = base.k.abs().sqrt();
        let off = inner(base.k, &coords, &base.coords).abs() * scale;
        if off > MEMBERSHIP_TOL * (1.0 + inner(base.k, &coords, &coords).abs().sqrt()) {
            return Err(GapError::InvalidParams(format!("vector is not tangent: <v, x> K^(1/2) = {off:e}")));
        }
        Ok(Self { base, coords })
    }

    pub fn norm2(&self) -> f64 {
        inner(self.base.k, &self.coords, &self.coords)
    }
}

/// `cs_K(r) x + sn_K(r) v` for a unit tangent vector `v` at `x`.
pub fn exp_map(x: &ModelPoint, v: &TangentVec, r: f64) -> Result<ModelPoint> {
    if (v.norm2() - 1.0).abs() > MEMBERSHIP_TOL {
        return Err(GapError::Precondition(format!("exp_map needs a unit vector, got |v|^2 = {}", v.norm2())));
    }
    if v.base.coords.len() != x.coords.len() || v.base.k != x.k {
        return Err(GapError::InvalidParams("tangent vector belongs to a different model".into()));
    }
    Ok(ModelPoint { coords: axpy(cs(x.k, r), &x.coords, sn(x.k, r), &v.coords), k: x.k })
}

/// Geodesic distance, from the chord length for numerical stability.
pub fn distance(x: &ModelPoint, y: &ModelPoint) -> Result<f64> {
    if x.k != y.k || x.coords.len() != y.coords.len() {
        return Err(GapError::InvalidParams("points belong to different models".into()));
    }
    let k = x.k;
    let diff = sub(&x.coords, &y.coords);
    let chord2 = inner(k, &diff, &diff);
    if k == 0.0 {
        return Ok(chord2.sqrt());
    }
    let q = k.abs().sqrt();
    let cos_like = k * inner(k, &x.coords, &y.coords);
    if k > 0.0 {
        if cos_like.abs() > 1.0 + 1e-10 {
            return Err(GapError::NumericalDrift(format!("K <x, y> = {cos_like} outside [-1, 1]")));
        }
        let half = 0.5 * q * chord2.max(0.0).sqrt();
        Ok(2.0 * half.min(1.0).asin() / q)
    } else {
        if cos_like < 1.0 - 1e-10 {
            return Err(GapError::NumericalDrift(format!("K <x, y> = {cos_like} below 1 on the hyperboloid")));
        }
        Ok(2.0 * (0.5 * q * chord2.max(0.0).sqrt()).asinh() / q)
    }
}

/// A unit-speed geodesic `gamma` on `[-d0/2, d0/2]` with a normal direction
/// `e_i`, for the variation through geodesics with endpoints moving along
/// `e_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationProbe {
    pub x0: ModelPoint,
    pub y0: ModelPoint,
    /// `gamma'(-d0/2)`.
    pub tangent: Vec<f64>,
    /// Orthonormal normals to `gamma`, constant in ambient coordinates and so
    /// parallel along it.
    pub normals: Vec<Vec<f64>>,
    pub d0: f64,
    /// Index into `normals` of the variation direction.
    pub normal_index: usize,
}

impl VariationProbe {
    pub fn from_points(x0: ModelPoint, y0: ModelPoint, normal_index: usize) -> Result<Self> {
        let k = x0.k;
        let d0 = distance(&x0, &y0)?;
        if !(d0 > 0.0) {
            return Err(GapError::Precondition("endpoints coincide".into()));
        }
        if k > 0.0 && d0 >= PI / k.sqrt() * (1.0 - 1e-12) {
            return Err(GapError::Domain(format!("endpoints are conjugate: d0 = {d0} reaches pi/sqrt K")));
        }
        let raw = if k == 0.0 { sub(&y0.coords, &x0.coords) } else { x0.project(&y0.coords) };
        let len = inner(k, &raw, &raw).sqrt();
        let tangent: Vec<f64> = raw.iter().map(|v| v / len).collect();

        let mut basis: Vec<(Vec<f64>, f64)> = Vec::new();
        if k != 0.0 {
            basis.push((x0.coords.clone(), 1.0 / k));
        }
        basis.push((tangent.clone(), 1.0));
        let dim = x0.coords.len();
        let mut normals: Vec<Vec<f64>> = Vec::new();
        for e in 0..dim {
            let mut v = vec![0.0; dim];
            v[e] = 1.0;
            // Two passes of Gram-Schmidt under the model inner product.
            for _ in 0..2 {
                for (b, bb) in &basis {
                    let c = inner(k, &v, b) / bb;
                    v = axpy(1.0, &v, -c, b);
                }
                for b in &normals {
                    let c = inner(k, &v, b);
                    v = axpy(1.0, &v, -c, b);
                }
            }
            let nv = inner(k, &v, &v);
            if nv > 1e-6 {
                let s = nv.sqrt();
                normals.push(v.iter().map(|x| x / s).collect());
            }
        }
        if normal_index >= normals.len() {
            return Err(GapError::InvalidParams(format!(
                "normal index {normal_index} out of range, {} normals available",
                normals.len()
            )));
        }
        Ok(Self { x0, y0, tangent, normals, d0, normal_index })
    }

    /// The geodesic through the base point along the last chart axis, with
    /// normals the remaining coordinate axes.
    pub fn canonical(n: usize, k: f64, d0: f64, normal_index: usize) -> Result<Self> {
        if n < 2 {
            return Err(GapError::InvalidParams(format!("need dimension >= 2, got {n}")));
        }
        if !(d0 > 0.0) || (k > 0.0 && d0 >= PI / k.sqrt()) {
            return Err(GapError::Domain(format!("need 0 < d0 < pi/sqrt K, got d0 = {d0}")));
        }
        let o = ModelPoint::origin(n, k);
        let mut e = vec![0.0; o.coords.len()];
        e[n - 1] = 1.0;
        let point = |s: f64| ModelPoint { coords: axpy(cs(k, s), &o.coords, sn(k, s), &e), k };
        Self::from_points(point(-0.5 * d0), point(0.5 * d0), normal_index)
    }

    pub fn k(&self) -> f64 {
        self.x0.k
    }

    pub fn normal(&self) -> &[f64] {
        &self.normals[self.normal_index]
    }

    /// `gamma(s)` and `gamma'(s)`.
    pub fn gamma(&self, s: f64) -> (Vec<f64>, Vec<f64>) {
        let k = self.k();
        let t = s + 0.5 * self.d0;
        (
            axpy(cs(k, t), &self.x0.coords, sn(k, t), &self.tangent),
            axpy(-k * sn(k, t), &self.x0.coords, cs(k, t), &self.tangent),
        )
    }

    /// Largest deviation from orthonormality of `{gamma', normals}` and from
    /// tangency at `gamma(s)`.
    pub fn frame_defect(&self, s: f64) -> f64 {
        let k = self.k();
        let (g, gp) = self.gamma(s);
        let mut frame = vec![gp];
        frame.extend(self.normals.iter().cloned());
        let mut worst = 0.0f64;
        for (a, u) in frame.iter().enumerate() {
            if k != 0.0 {
                worst = worst.max(inner(k, u, &g).abs() * k.abs().sqrt());
            }
            for (b, v) in frame.iter().enumerate() {
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((inner(k, u, v) - target).abs());
            }
        }
        worst
    }

    /// Endpoint curves `p(r)`, `q(r)`.
    pub fn endpoints(&self, r: f64) -> (Vec<f64>, Vec<f64>) {
        let k = self.k();
        let e = self.normal();
        (axpy(cs(k, r), &self.x0.coords, sn(k, r), e), axpy(cs(k, r), &self.y0.coords, sn(k, r), e))
    }

    /// `d_r = d(p(r), q(r))`.
    pub fn d_r(&self, r: f64) -> Result<f64> {
        let (p, q) = self.endpoints(r);
        distance(&ModelPoint { coords: p, k: self.k() }, &ModelPoint { coords: q, k: self.k() })
    }

    /// `(p, U, d_r)` with `U` the unit initial direction from `p(r)` to `q(r)`.
    fn frame_at(&self, r: f64) -> Result<(Vec<f64>, Vec<f64>, f64)> {
        let k = self.k();
        let (p, q) = self.endpoints(r);
        let dr = self.d_r(r)?;
        let u = if k == 0.0 {
            let w = sub(&q, &p);
            let l = inner(k, &w, &w).sqrt();
            w.iter().map(|x| x / l).collect()
        } else {
            let pq = inner(k, &p, &q);
            let den = 1.0 / k - k * pq * pq;
            if !(den > 0.0) {
                return Err(GapError::NumericalDrift(format!("normalization 1/K - K <p,q>^2 = {den:e} is not positive")));
            }
            axpy(1.0, &q, -k * pq, &p).iter().map(|x| x / den.sqrt()).collect()
        };
        Ok((p, u, dr))
    }
}

/// `eta(r, s)`: the geodesic from `p(r)` to `q(r)` at parameter `s` in `[-d0/2, d0/2]`.
pub fn variation_eta(probe: &VariationProbe, r: f64, s: f64) -> Result<ModelPoint> {
    if s.abs() > 0.5 * probe.d0 * (1.0 + 1e-12) {
        return Err(GapError::Precondition(format!("|s| must be <= d0/2, got s = {s}")));
    }
    let k = probe.k();
    let (p, u, dr) = probe.frame_at(r)?;
    let th = dr / probe.d0 * s + 0.5 * dr;
    Ok(ModelPoint { coords: axpy(cs(k, th), &p, sn(k, th), &u), k })
}

/// `d/ds eta(r, s)` in ambient coordinates.
pub fn variation_eta_s(probe: &VariationProbe, r: f64, s: f64) -> Result<Vec<f64>> {
    let k = probe.k();
    let (p, u, dr) = probe.frame_at(r)?;
    let c = dr / probe.d0;
    let th = c * s + 0.5 * dr;
    Ok(axpy(-c * k * sn(k, th), &p, c * cs(k, th), &u))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrExpansion {
    pub coefficient: f64,
    /// `-tn_K(d0/2)`.
    pub target: f64,
    pub relative_error: f64,
    /// `(d_h - d_{-h}) / 2h`, the first variation of length.
    pub first_variation: f64,
}

/// Fits the `r^2` coefficient of `d_r` from the even part of `d` at `+-h, +-2h`.
pub fn dr_expansion_check(probe: &VariationProbe) -> Result<DrExpansion> {
    let h = DR_STEP;
    let even = |r: f64| -> Result<f64> { Ok(0.5 * (probe.d_r(r)? + probe.d_r(-r)?) - probe.d0) };
    let (s1, s2) = (even(h)?, even(2.0 * h)?);
    let coefficient = (16.0 * s1 - s2) / (12.0 * h * h);
    if !coefficient.is_finite() {
        return Err(GapError::NumericalDrift("d_r fit produced a non-finite coefficient".into()));
    }
    let target = -tn(probe.k(), 0.5 * probe.d0)?;
    let relative_error = if target == 0.0 { coefficient.abs() } else { ((coefficient - target) / target).abs() };
    Ok(DrExpansion {
        coefficient,
        target,
        relative_error,
        first_variation: (probe.d_r(h)? - probe.d_r(-h)?) / (2.0 * h),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointSecondDerivative {
    pub s: f64,
    /// Component along `gamma'(s)`.
    pub tangential: f64,
    /// Largest component along the normals.
    pub normal_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondDerivativeCheck {
    /// `-(2/d0) tn_K(d0/2) - tn_K(d0/2)^2`.
    pub target: f64,
    pub endpoints: [EndpointSecondDerivative; 2],
}

impl SecondDerivativeCheck {
    pub fn max_error(&self) -> f64 {
        self.endpoints
            .iter()
            .map(|e| (e.tangential - self.target).abs().max(e.normal_max))
            .fold(0.0, f64::max)
    }
}

fn second_difference(probe: &VariationProbe, s: f64, h: f64) -> Result<Vec<f64>> {
    let w = |r: f64| variation_eta_s(probe, r, s);
    let (m2, m1, z, p1, p2) = (w(-2.0 * h)?, w(-h)?, w(0.0)?, w(h)?, w(2.0 * h)?);
    Ok((0..z.len())
        .map(|i| (-m2[i] + 16.0 * m1[i] - 30.0 * z[i] + 16.0 * p1[i] - p2[i]) / (12.0 * h * h))
        .collect())
}

/// Second covariant derivative in `r` of `d/ds eta` at both endpoints, from a
/// fourth-order difference ladder with two Richardson levels.
pub fn second_derivative_in_r_check(probe: &VariationProbe) -> Result<SecondDerivativeCheck> {
    let k = probe.k();
    let t = tn(k, 0.5 * probe.d0)?;
    let target = -(2.0 / probe.d0) * t - t * t;
    let mut out = Vec::with_capacity(2);
    for s in [-0.5 * probe.d0, 0.5 * probe.d0] {
        let est = R_LADDER.iter().map(|&h| second_difference(probe, s, h)).collect::<Result<Vec<_>>>()?;
        let rich = |a: &[f64], b: &[f64], f: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| (f * y - x) / (f - 1.0)).collect() };
        let l1a = rich(&est[0], &est[1], 16.0);
        let l1b = rich(&est[1], &est[2], 16.0);
        let acc = rich(&l1a, &l1b, 64.0);
        let (g, gp) = probe.gamma(s);
        // The correction K <W, sigma'> sigma' to the projected ambient
        // derivative vanishes at r = 0 since W = gamma' is normal to e_i.
        let v = ModelPoint { coords: g, k }.project(&acc);
        let normal_max = probe.normals.iter().map(|e| inner(k, &v, e).abs()).fold(0.0, f64::max);
        out.push(EndpointSecondDerivative { s, tangential: inner(k, &v, &gp), normal_max });
    }
    let endpoints = [out[0].clone(), out[1].clone()];
    Ok(SecondDerivativeCheck { target, endpoints })
}

/// `max_s |<gamma'(s), d/dr d/ds eta(0, s)>|` over `samples` interior points,
/// by symmetric differences in `r`.
pub fn jacobi_orthogonality(probe: &VariationProbe, samples: usize) -> Result<f64> {
    let h = 1e-4;
    let mut worst = 0.0f64;
    for j in 0..=samples {
        let s = -0.5 * probe.d0 + probe.d0 * j as f64 / samples as f64;
        let a = variation_eta_s(probe, h, s)?;
        let b = variation_eta_s(probe, -h, s)?;
        let jp: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x - y) / (2.0 * h)).collect();
        let (_, gp) = probe.gamma(s);
        worst = worst.max(inner(probe.k(), &gp, &jp).abs());
    }
    Ok(worst)
}
