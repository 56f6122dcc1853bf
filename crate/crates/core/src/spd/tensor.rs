use smallvec::SmallVec;

use super::eigen::{sym_eig, EigenPair};
use super::sym::{matmul, transpose, SymMat};
use crate::error::{Error, Result};

/// Absolute-plus-relative slack allowed when certifying `‖Log A‖_F ≤ z`.
pub const LOG_BOUND_SLACK: f64 = 1e-9;

/// Symmetric positive-definite matrix with a certified bound on `‖Log A‖_F`.
///
/// The eigendecomposition is cached at construction. Matrices built from a
/// spectrum (exponentials, projections, rescalings) keep that spectrum exactly,
/// so `Log` stays accurate even when the eigenvalues span many decades.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdTensor {
    mat: SymMat,
    eig: EigenPair,
    log_bound: f64,
}

pub(crate) fn within_bound(norm: f64, z: f64) -> bool {
    norm <= z + LOG_BOUND_SLACK * z.max(1.0)
}

impl SpdTensor {
    /// Validates positivity; the certified bound is the actual `‖Log A‖_F`.
    pub fn new(mat: SymMat) -> Result<Self> {
        let eig = sym_eig(&mat)?;
        if let Some(&v) = eig.values().iter().find(|v| **v <= 0.0) {
            return Err(Error::Domain(v));
        }
        let mut t = Self {
            mat,
            eig,
            log_bound: 0.0,
        };
        t.log_bound = t.log_norm();
        Ok(t)
    }

    /// Validates positivity and membership in the log-ball of radius `z`.
    pub fn with_bound(mat: SymMat, z: f64) -> Result<Self> {
        let t = Self::new(mat)?;
        t.certify(z)
    }

    /// Builds `V · diag(values) · Vᵀ` keeping the given spectrum as the cache.
    pub(crate) fn from_eigen(eig: EigenPair, log_bound: f64) -> Self {
        let mat = eig.reassemble();
        Self { mat, eig, log_bound }
    }

    /// Re-certifies against bound `z`, failing if the tensor lies outside.
    pub fn certify(mut self, z: f64) -> Result<Self> {
        let norm = self.log_norm();
        if !within_bound(norm, z) {
            return Err(Error::InvalidInput(format!(
                "‖Log A‖_F = {norm} exceeds the bound z = {z}"
            )));
        }
        self.log_bound = z;
        Ok(self)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_eigen(sym_eig(&SymMat::identity(dim)).expect("finite"), 0.0)
    }

    pub fn matrix(&self) -> &SymMat {
        &self.mat
    }

    pub fn eigen(&self) -> &EigenPair {
        &self.eig
    }

    pub fn eigenvalues(&self) -> &[f64] {
        self.eig.values()
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn log_bound(&self) -> f64 {
        self.log_bound
    }

    /// `‖Log A‖_F = √(Σ log² λᵢ)`.
    pub fn log_norm(&self) -> f64 {
        self.eig.values().iter().map(|v| v.ln().powi(2)).sum::<f64>().sqrt()
    }

    pub fn is_in_log_ball(&self, z: f64) -> bool {
        within_bound(self.log_norm(), z)
    }

    /// `c · A` for `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidInput(format!("scale factor must be positive, got {c}")));
        }
        let eig = self.eig.with_values(self.eig.values().iter().map(|v| v * c).collect());
        let mut t = Self::from_eigen(eig, 0.0);
        t.log_bound = t.log_norm();
        Ok(t)
    }

    /// `A⁻¹`; shares the log-norm of `A`.
    pub fn inverse(&self) -> Self {
        let n = self.dim();
        let values: SmallVec<[f64; 3]> = self.eig.values().iter().rev().map(|v| 1.0 / v).collect();
        let mut vectors: SmallVec<[f64; 9]> = SmallVec::from_elem(0.0, n * n);
        for col in 0..n {
            let src = n - 1 - col;
            for r in 0..n {
                vectors[r * n + col] = self.eig.vectors()[r * n + src];
            }
        }
        Self::from_eigen(
            EigenPair {
                dim: n,
                values,
                vectors,
            },
            self.log_bound,
        )
    }

    /// `U · A · Uᵀ` for a row-major orthogonal `U`.
    pub fn rotated(&self, u: &[f64]) -> Result<Self> {
        let n = self.dim();
        if u.len() != n * n {
            return Err(Error::DimensionMismatch("rotation size".into()));
        }
        let rotated = matmul(u, self.eig.vectors(), n);
        let mut eig = EigenPair {
            dim: n,
            values: self.eig.values.clone(),
            vectors: rotated.into_iter().collect(),
        };
        eig.normalize_signs();
        Ok(Self::from_eigen(eig, self.log_bound))
    }

    /// `Mᵀ · A · M` for an invertible row-major `M`, eigendecomposed afresh.
    pub fn congruence(&self, m: &[f64]) -> Result<Self> {
        Self::new(self.mat.congruence(m)?)
    }

    /// `V · diag(f(λ)) · Vᵀ` as a dense row-major matrix.
    pub(crate) fn dense_function(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        let n = self.dim();
        let v = self.eig.vectors().to_vec();
        let mut scaled = v.clone();
        for r in 0..n {
            for c in 0..n {
                scaled[r * n + c] *= f(self.eig.values()[c]);
            }
        }
        matmul(&scaled, &transpose(&v, n), n)
    }
}
