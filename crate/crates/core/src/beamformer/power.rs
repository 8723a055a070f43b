//! Input-power constraint expressed in output amplitudes.
//!
//! With `ν_i` the rising-branch inverse of the AM/AM curve,
//! `f(z̄) = Σ ν_i(z̄_i)² − P`. `f` is separable, so its Hessian is diagonal.

use crate::error::{Error, Result};
use crate::pa::{am_am_inverse, PaBank, SalehParams};

use super::SubstitutedPoint;

/// `d(ν²)/dz̄` at input amplitude `nu` on the rising branch.
///
/// `2ν·β(1/β + ν²)² / (α(1/β − ν²))`, i.e. `2ν · dν/dz̄` with
/// `dν/dz̄ = (1 + βν²)² / (α(1 − βν²))`.
pub fn power_d1(p: &SalehParams, nu: f64) -> f64 {
    let inv_beta = 1.0 / p.beta;
    let nu2 = nu * nu;
    2.0 * nu * p.beta * (inv_beta + nu2).powi(2) / (p.alpha * (inv_beta - nu2))
}

/// `d²(ν²)/dz̄²` at input amplitude `nu` on the rising branch.
///
/// `2β²(1/β + ν²)³ / (α²(1/β − ν²)³) · [1/β² − ν⁴ + 2ν²(3/β − ν²)]`.
pub fn power_d2(p: &SalehParams, nu: f64) -> f64 {
    let inv_beta = 1.0 / p.beta;
    let nu2 = nu * nu;
    let ratio = (inv_beta + nu2) / (inv_beta - nu2);
    let bracket = inv_beta * inv_beta - nu2 * nu2 + 2.0 * nu2 * (3.0 * inv_beta - nu2);
    2.0 * p.beta * p.beta * ratio.powi(3) / (p.alpha * p.alpha) * bracket
}

fn check_len(pa: &PaBank, zbar: &SubstitutedPoint) -> Result<()> {
    if zbar.zbar.len() != pa.len() {
        return Err(Error::Dimension {
            what: "zbar",
            got: zbar.zbar.len(),
            expected: pa.len(),
        });
    }
    Ok(())
}

// ν_i(z̄_i) for an interior point: z̄_i strictly below saturation.
fn interior_inputs(pa: &PaBank, zbar: &SubstitutedPoint) -> Result<Vec<f64>> {
    check_len(pa, zbar)?;
    pa.iter()
        .zip(&zbar.zbar)
        .enumerate()
        .map(|(i, (p, &z))| {
            if z >= p.z_max() {
                return Err(Error::SingularDerivative { index: i });
            }
            am_am_inverse(p, z)
        })
        .collect()
}

/// `f(z̄) = Σ ν_i(z̄_i)² − P`; non-positive exactly when the implied input
/// power fits the budget.
pub fn power_constraint_f(pa: &PaBank, zbar: &SubstitutedPoint, power_limit: f64) -> Result<f64> {
    check_len(pa, zbar)?;
    let mut total = 0.0;
    for (p, &z) in pa.iter().zip(&zbar.zbar) {
        let r = am_am_inverse(p, z)?;
        total += r * r;
    }
    Ok(total - power_limit)
}

/// `∂f/∂z̄_i`. Unbounded at saturated outputs, which are rejected.
pub fn power_constraint_gradient(pa: &PaBank, zbar: &SubstitutedPoint) -> Result<Vec<f64>> {
    let nu = interior_inputs(pa, zbar)?;
    Ok(pa.iter().zip(nu).map(|(p, nu)| power_d1(p, nu)).collect())
}

/// Diagonal of the Hessian of `f`; off-diagonal entries are identically zero.
pub fn power_constraint_hessian_diag(pa: &PaBank, zbar: &SubstitutedPoint) -> Result<Vec<f64>> {
    let nu = interior_inputs(pa, zbar)?;
    Ok(pa.iter().zip(nu).map(|(p, nu)| power_d2(p, nu)).collect())
}
