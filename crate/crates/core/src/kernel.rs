//! Helmholtz Green's function g(x,t) = exp(ik|x−t|)/(4π|x−t|) and its
//! first and second derivatives with respect to x.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::vector::{CMat3, CVec3, Vec3, C64, I};

const FOUR_PI: f64 = 4.0 * PI;

/// Value, x-gradient and x-Hessian of the kernel at one point pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEval {
    pub value: C64,
    pub gradient: CVec3,
    pub hessian: CMat3,
}

/// Separation below which two points are treated as coincident.
pub fn min_separation(x: Vec3, t: Vec3) -> f64 {
    1e-15 * 1f64.max(x.norm()).max(t.norm())
}

fn check_separation(x: Vec3, t: Vec3) -> Result<Vec3> {
    let d = x - t;
    let r = d.norm();
    let threshold = min_separation(x, t);
    if r < threshold || !r.is_finite() {
        return Err(Error::CoincidentPoints { distance: r, threshold });
    }
    Ok(d)
}

/// Kernel value, gradient and Hessian.
pub fn green(k: f64, x: Vec3, t: Vec3) -> Result<KernelEval> {
    let d = check_separation(x, t)?;
    let (value, gradient, hessian) = full_at(k, d);
    Ok(KernelEval { value, gradient, hessian })
}

/// Static kernel 1/(4π|x−t|).
pub fn green_static(x: Vec3, t: Vec3) -> Result<f64> {
    let d = check_separation(x, t)?;
    Ok(1.0 / (FOUR_PI * d.norm()))
}

/// g at separation `d = x − t`; no coincidence check.
#[inline]
pub fn value_at(k: f64, d: Vec3) -> C64 {
    let r = d.norm();
    (I * (k * r)).exp() / (FOUR_PI * r)
}

/// ∇ₓg at separation `d = x − t`: (ik − 1/r) g d/r.
#[inline]
pub fn gradient_at(k: f64, d: Vec3) -> CVec3 {
    let r = d.norm();
    let g = (I * (k * r)).exp() / (FOUR_PI * r);
    let f = (I * k - 1.0 / r) * g / r;
    CVec3::new(f * d.x, f * d.y, f * d.z)
}

/// ∇ₛg₀(s,t) for the static kernel at separation `d = s − t`: −d/(4π r³).
#[inline]
pub fn static_gradient_at(d: Vec3) -> Vec3 {
    let r = d.norm();
    d * (-1.0 / (FOUR_PI * r * r * r))
}

/// Value, gradient and Hessian at separation `d = x − t`.
///
/// ∂²g/∂x_p∂x_q = g [ (ik − 1/r) δ_pq / r + (−k² − 3ik/r + 3/r²) u_p u_q ],
/// u = d/r.
pub fn full_at(k: f64, d: Vec3) -> (C64, CVec3, CMat3) {
    let r = d.norm();
    let g = (I * (k * r)).exp() / (FOUR_PI * r);
    let a = I * k - 1.0 / r;
    let grad_f = a * g / r;
    let gradient = CVec3::new(grad_f * d.x, grad_f * d.y, grad_f * d.z);
    let u = d * (1.0 / r);
    let diag = g * a / r;
    let outer = g * (C64::new(-k * k + 3.0 / (r * r), -3.0 * k / r));
    let mut h = CMat3::zeros();
    for p in 0..3 {
        for q in 0..3 {
            h.0[p][q] = outer * (u[p] * u[q]);
        }
        h.0[p][p] += diag;
    }
    (g, gradient, h)
}
