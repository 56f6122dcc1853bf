//! Matrix exponential and logarithm, distances, geodesics and anisotropy.

use smallvec::SmallVec;

use super::eigen::sym_eig;
use super::sym::{matmul, SymMat};
use super::tensor::SpdTensor;
use crate::error::{Error, Result};

/// Largest eigenvalue whose exponential is still a finite `f64`.
pub const MAX_EXP_ARG: f64 = 709.0;

/// Matrix exponential of a symmetric matrix. The certified bound is `‖S‖_F`.
pub fn mat_exp(s: &SymMat) -> Result<SpdTensor> {
    let eig = sym_eig(s)?;
    if let Some(&v) = eig.values().iter().find(|v| **v > MAX_EXP_ARG) {
        return Err(Error::Range(v));
    }
    let values: SmallVec<[f64; 3]> = eig.values().iter().map(|v| v.exp()).collect();
    Ok(SpdTensor::from_eigen(eig.with_values(values), s.frobenius()))
}

/// Principal matrix logarithm.
pub fn mat_log(a: &SpdTensor) -> Result<SymMat> {
    let eig = a.eigen();
    if let Some(&v) = eig.values().iter().find(|v| **v <= 0.0) {
        return Err(Error::Domain(v));
    }
    Ok(eig.reassemble_with(f64::ln))
}

/// Logarithm of a raw symmetric matrix; fails unless it is positive definite.
pub fn log_sym(m: &SymMat) -> Result<SymMat> {
    mat_log(&SpdTensor::new(m.clone())?)
}

pub fn frobenius(m: &SymMat) -> f64 {
    m.frobenius()
}

/// `‖Log A − Log B‖_F`.
pub fn dist_log_euclidean(a: &SpdTensor, b: &SpdTensor) -> Result<f64> {
    check_dims(a, b)?;
    Ok(mat_log(a)?.sub(&mat_log(b)?).frobenius())
}

/// `‖A − B‖_F`.
pub fn dist_euclidean(a: &SpdTensor, b: &SpdTensor) -> Result<f64> {
    check_dims(a, b)?;
    Ok(a.matrix().sub(b.matrix()).frobenius())
}

/// `‖Log(A^{-1/2} B A^{-1/2})‖_F`.
pub fn dist_affine_invariant(a: &SpdTensor, b: &SpdTensor) -> Result<f64> {
    check_dims(a, b)?;
    let n = a.dim();
    let a_isqrt = a.dense_function(|v| 1.0 / v.sqrt());
    let inner = matmul(&a_isqrt, &matmul(&b.matrix().to_dense(), &a_isqrt, n), n);
    let eig = sym_eig(&SymMat::from_dense(n, &inner)?)?;
    let mut acc = 0.0;
    for &v in eig.values() {
        if v <= 0.0 {
            return Err(Error::Domain(v));
        }
        acc += v.ln().powi(2);
    }
    Ok(acc.sqrt())
}

/// Log-Euclidean geodesic `Exp((1 − t) Log A + t Log B)`, equal to `A` at
/// `t = 0` and `B` at `t = 1`.
pub fn geodesic(a: &SpdTensor, b: &SpdTensor, t: f64) -> Result<SpdTensor> {
    check_dims(a, b)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidInput(format!("geodesic parameter {t} outside [0, 1]")));
    }
    if t == 0.0 {
        return Ok(a.clone());
    }
    if t == 1.0 {
        return Ok(b.clone());
    }
    let s = mat_log(a)?.scale(1.0 - t).add(&mat_log(b)?.scale(t));
    mat_exp(&s)
}

/// Fractional anisotropy from the eigenvalues; zero for isotropic tensors.
pub fn fractional_anisotropy(a: &SpdTensor) -> f64 {
    fa_from_eigenvalues(a.eigenvalues())
}

pub fn fa_from_eigenvalues(values: &[f64]) -> f64 {
    let mut num = 0.0;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            num += (values[i] - values[j]).powi(2);
        }
    }
    let den = 2.0 * values.iter().map(|v| v * v).sum::<f64>();
    if den == 0.0 {
        return 0.0;
    }
    (num / den).sqrt().clamp(0.0, 1.0)
}

fn check_dims(a: &SpdTensor, b: &SpdTensor) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", a.dim(), b.dim())));
    }
    Ok(())
}
