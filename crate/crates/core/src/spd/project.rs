//! Projections of symmetric matrices onto spectrally bounded SPD sets and
//! onto the log-ball `{A : ‖Log A‖_F ≤ z}`.

use smallvec::SmallVec;

use super::eigen::sym_eig;
use super::sym::SymMat;
use super::tensor::SpdTensor;
use crate::error::{Error, Result};

/// Default lower eigenvalue clamp: `f64` machine epsilon.
pub const DEFAULT_EPSILON: f64 = f64::EPSILON;
/// Default log-ball radius.
pub const DEFAULT_Z: f64 = 36.0;

/// Clamps the spectrum of `a` to `[lo, hi]`; the Frobenius-nearest element of
/// that spectral set.
pub fn project_spec(a: &SymMat, lo: f64, hi: f64) -> Result<SpdTensor> {
    if lo.is_nan() || hi.is_nan() || lo <= 0.0 || lo > hi {
        return Err(Error::InvalidInput(format!("invalid spectral interval [{lo}, {hi}]")));
    }
    let eig = sym_eig(a)?;
    let values: SmallVec<[f64; 3]> = eig.values().iter().map(|v| v.clamp(lo, hi)).collect();
    let mut t = SpdTensor::from_eigen(eig.with_values(values), 0.0);
    let norm = t.log_norm();
    t = t.certify(norm)?;
    Ok(t)
}

/// Scales log-eigenvalues so that `‖Log A‖_F ≤ z`; identity inside the ball.
pub fn project_log_ball(a: &SpdTensor, z: f64) -> Result<SpdTensor> {
    if z.is_nan() || z <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "log-ball radius must be positive, got {z}"
        )));
    }
    let c_frob: f64 = a.eigenvalues().iter().map(|v| v.ln().powi(2)).sum();
    if c_frob <= z * z {
        return a.clone().certify(z.max(c_frob.sqrt()));
    }
    let k = z / c_frob.sqrt();
    let values: SmallVec<[f64; 3]> = a.eigenvalues().iter().map(|v| (k * v.ln()).exp()).collect();
    Ok(SpdTensor::from_eigen(a.eigen().with_values(values), z))
}

/// `project_log_ball(project_spec(a, ε, ∞), z)`.
pub fn project_full(a: &SymMat, epsilon: f64, z: f64) -> Result<SpdTensor> {
    project_log_ball(&project_spec(a, epsilon, f64::INFINITY)?, z)
}

/// The same projection expressed on the logarithm: returns
/// `Log(project_full(Exp(l)))` without forming `Exp(l)`, so arbitrarily large
/// log-coordinates are handled.
pub fn project_log_coords(l: &SymMat, epsilon: f64, z: f64) -> Result<SymMat> {
    let floor = epsilon.ln();
    // Inside the ball every |log-eigenvalue| ≤ z, so the clamp is inactive too.
    if l.frobenius() <= z && -z >= floor {
        return Ok(l.clone());
    }
    let eig = sym_eig(l)?;
    let mut values: SmallVec<[f64; 3]> = eig.values().iter().map(|v| v.max(floor)).collect();
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > z {
        let k = z / norm;
        values.iter_mut().for_each(|v| *v *= k);
    }
    Ok(eig.with_values(values).reassemble())
}
