//! Biot-Savart kernels in the plane and the radial weight of the
//! structure-function identity.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::vec2::Vec2;

pub(crate) const INV_2PI: f64 = 0.5 / PI;
pub(crate) const INV_4PI: f64 = 0.25 / PI;

/// Singular Biot-Savart kernel `K(z) = z^⊥ / (2π |z|²)`.
pub fn kernel(z: Vec2) -> Result<Vec2> {
    if !z.is_finite() {
        return Err(Error::domain("kernel: non-finite argument"));
    }
    let r2 = z.norm_sq();
    if r2 == 0.0 {
        return Err(Error::domain("kernel: singular at the origin"));
    }
    Ok(z.perp() * (INV_2PI / r2))
}

/// Krasny-regularized kernel `K_ε(z) = z^⊥ / (2π (|z|² + ε²))`.
///
/// Finite everywhere, with `K_ε(0) = 0`.
pub fn kernel_reg(z: Vec2, eps: f64) -> Result<Vec2> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::domain(format!(
            "kernel_reg: eps must be positive, got {eps}"
        )));
    }
    if !z.is_finite() {
        return Err(Error::domain("kernel_reg: non-finite argument"));
    }
    Ok(kernel_reg_unchecked(z, eps * eps))
}

#[inline(always)]
pub(crate) fn kernel_reg_unchecked(z: Vec2, eps2: f64) -> Vec2 {
    z.perp() * (INV_2PI / (z.norm_sq() + eps2))
}

/// The weight `Σ(ρ) = (|log ρ²| − 1 + ρ²) / 4π` on `(0, 1]`, extended by zero for `ρ > 1`.
///
/// `Σ(0)` is infinite; it is rejected so that coincident points are handled by the caller.
pub fn sigma(rho: f64) -> Result<f64> {
    if rho.is_nan() || rho < 0.0 {
        return Err(Error::domain(format!(
            "sigma: rho must be nonnegative, got {rho}"
        )));
    }
    if rho == 0.0 {
        return Err(Error::domain("sigma: diverges at rho = 0"));
    }
    Ok(sigma_positive(rho))
}

#[inline]
pub(crate) fn sigma_positive(rho: f64) -> f64 {
    if rho > 1.0 {
        0.0
    } else {
        let rho2 = rho * rho;
        // |log ρ²| ≥ 1 − ρ² holds after rounding in this grouping
        INV_4PI * (rho2.ln().abs() - (1.0 - rho2))
    }
}
