//! Synthetic ground-truth tensor fields.

use crate::error::{Error, Result};
use crate::field::TensorField;
use crate::spd::{SpdTensor, SymMat, DEFAULT_Z};

/// Eigenvalue of isotropic background tensors.
pub const BACKGROUND_EIGENVALUE: f64 = 0.5e-3;
/// Principal eigenvalue inside the band of the main-direction phantom.
pub const BAND_EIGENVALUE: f64 = 3e-3;
/// Increase of the principal eigenvalue across the staircase.
const STAIRCASE_RISE: f64 = 3e-3;

/// `λ_perp I + (λ_par − λ_perp) v vᵀ` for a unit `v`.
fn axial(v: [f64; 3], par: f64, perp: f64) -> Result<SpdTensor> {
    let mut dense = [0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            dense[i * 3 + j] = (par - perp) * v[i] * v[j] + if i == j { perp } else { 0.0 };
        }
    }
    SpdTensor::new(SymMat::from_dense(3, &dense)?)
}

/// `N × N` field whose column `j` has eigenvalues
/// `(0.5e-3 + j/(N−1) · 3e-3, 0.5e-3, 0.5e-3)` with the large one along x.
pub fn make_staircase_phantom(n: usize) -> Result<TensorField> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("staircase phantom needs N ≥ 2, got {n}")));
    }
    TensorField::from_fn(n, n, DEFAULT_Z, |col, _| {
        let lambda = BACKGROUND_EIGENVALUE + col as f64 / (n - 1) as f64 * STAIRCASE_RISE;
        SpdTensor::new(SymMat::diag(&[lambda, BACKGROUND_EIGENVALUE, BACKGROUND_EIGENVALUE])?)
    })
}

/// Isotropic background with an L-shaped band of anisotropic tensors.
///
/// With `m = N/5` and band width `t = max(1, N/6)`, the band runs down the
/// columns `[m, m+t)` from row `m` to the corner block at rows `[N−m−t, N−m)`
/// and then right along those rows up to column `N−m`. Principal axes point
/// along y in the vertical arm, along x in the horizontal arm and along the
/// diagonal in the corner block.
pub fn make_main_direction_phantom(n: usize) -> Result<TensorField> {
    if n < 5 {
        return Err(Error::InvalidInput(format!(
            "main-direction phantom needs N ≥ 5, got {n}"
        )));
    }
    let m = n / 5;
    let t = (n / 6).max(1);
    let (col0, col1) = (m, m + t);
    let (row0, row1) = (n - m - t, n - m);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    TensorField::from_fn(n, n, DEFAULT_Z, |col, row| {
        let in_vertical = (col0..col1).contains(&col) && (m..row1).contains(&row);
        let in_horizontal = (row0..row1).contains(&row) && (col0..n - m).contains(&col);
        let axis = match (in_vertical, in_horizontal) {
            (true, true) => Some([s, s, 0.0]),
            (true, false) => Some([0.0, 1.0, 0.0]),
            (false, true) => Some([1.0, 0.0, 0.0]),
            (false, false) => None,
        };
        match axis {
            Some(v) => axial(v, BAND_EIGENVALUE, BACKGROUND_EIGENVALUE),
            None => SpdTensor::new(SymMat::diag(&[BACKGROUND_EIGENVALUE; 3])?),
        }
    })
}
