use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Inline storage for the independent coefficients of a small symmetric matrix.
pub type Coeffs = SmallVec<[f64; 6]>;

/// Dense real symmetric matrix stored by its independent coefficients.
///
/// Layout: the `dim` diagonal entries first, then the strict upper triangle in
/// row-major order. For `dim = 3` this is `[a11, a22, a33, a12, a13, a23]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMat {
    dim: usize,
    coeffs: Coeffs,
}

/// Number of independent coefficients of a `dim × dim` symmetric matrix.
pub const fn n_coeffs(dim: usize) -> usize {
    dim * (dim + 1) / 2
}

/// Position of entry `(i, j)` in the coefficient layout.
pub fn coeff_index(dim: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    if i == j {
        i
    } else {
        // pairs in rows above i, then offset within row i
        dim + i * dim - i * (i + 1) / 2 + (j - i - 1)
    }
}

/// Multiplicity of coefficient `k` in the full matrix: 1 on the diagonal, 2 off it.
#[inline]
pub fn coeff_weight(dim: usize, k: usize) -> f64 {
    if k < dim {
        1.0
    } else {
        2.0
    }
}

/// Squared Frobenius norm of the full matrix described by `coeffs`.
#[inline]
pub fn coeff_norm_sq(dim: usize, coeffs: &[f64]) -> f64 {
    let (diag, off) = coeffs.split_at(dim);
    diag.iter().map(|v| v * v).sum::<f64>() + 2.0 * off.iter().map(|v| v * v).sum::<f64>()
}

impl SymMat {
    pub fn from_coeffs(dim: usize, coeffs: &[f64]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("matrix dimension must be positive".into()));
        }
        if coeffs.len() != n_coeffs(dim) {
            return Err(Error::DimensionMismatch(format!(
                "expected {} coefficients for dim {dim}, got {}",
                n_coeffs(dim),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        Ok(Self {
            dim,
            coeffs: Coeffs::from_slice(coeffs),
        })
    }

    /// Symmetrizes a row-major square matrix as `(A + Aᵀ) / 2`.
    pub fn from_dense(dim: usize, dense: &[f64]) -> Result<Self> {
        if dense.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {} dense entries for dim {dim}, got {}",
                dim * dim,
                dense.len()
            )));
        }
        let mut coeffs = Coeffs::from_elem(0.0, n_coeffs(dim));
        for i in 0..dim {
            for j in i..dim {
                coeffs[coeff_index(dim, i, j)] = 0.5 * (dense[i * dim + j] + dense[j * dim + i]);
            }
        }
        Self::from_coeffs(dim, &coeffs)
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            coeffs: Coeffs::from_elem(0.0, n_coeffs(dim)),
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        m.coeffs[..dim].fill(1.0);
        m
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        let dim = values.len();
        let mut coeffs = Coeffs::from_elem(0.0, n_coeffs(dim));
        coeffs[..dim].copy_from_slice(values);
        Self::from_coeffs(dim, &coeffs)
    }

    /// `V · diag(values) · Vᵀ` for a row-major `V` whose columns are the vectors.
    pub(crate) fn from_spectrum(dim: usize, values: &[f64], vectors: &[f64]) -> Self {
        let mut coeffs = Coeffs::from_elem(0.0, n_coeffs(dim));
        for i in 0..dim {
            for j in i..dim {
                let mut acc = 0.0;
                for (k, lambda) in values.iter().enumerate() {
                    acc += vectors[i * dim + k] * lambda * vectors[j * dim + k];
                }
                coeffs[coeff_index(dim, i, j)] = acc;
            }
        }
        Self { dim, coeffs }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.coeffs[coeff_index(self.dim, i, j)]
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let d = self.dim;
        let mut out = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                out[i * d + j] = self.get(i, j);
            }
        }
        out
    }

    /// Frobenius norm of the full matrix (off-diagonal entries counted twice).
    pub fn frobenius(&self) -> f64 {
        coeff_norm_sq(self.dim, &self.coeffs).sqrt()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        Self {
            dim: self.dim,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        Self {
            dim: self.dim,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        }
    }

    /// `Mᵀ · self · M` for a row-major square `M`.
    pub fn congruence(&self, m: &[f64]) -> Result<Self> {
        let d = self.dim;
        let a = self.to_dense();
        let am = matmul(&a, m, d);
        let mt = transpose(m, d);
        Self::from_dense(d, &matmul(&mt, &am, d))
    }
}

pub(crate) fn matmul(a: &[f64], b: &[f64], d: usize) -> Vec<f64> {
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for k in 0..d {
            let aik = a[i * d + k];
            for j in 0..d {
                out[i * d + j] += aik * b[k * d + j];
            }
        }
    }
    out
}

pub(crate) fn transpose(a: &[f64], d: usize) -> Vec<f64> {
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            out[j * d + i] = a[i * d + j];
        }
    }
    out
}
