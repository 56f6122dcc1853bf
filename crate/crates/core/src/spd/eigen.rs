//! Cyclic Jacobi eigendecomposition for small symmetric matrices.

use smallvec::SmallVec;

use super::sym::SymMat;
use crate::error::{Error, Result};

const OFF_DIAGONAL_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 100;

/// Eigenvalues sorted in descending order with matching orthonormal eigenvectors.
///
/// `vectors` is row-major `dim × dim`; column `i` belongs to `values[i]`. Each
/// column is signed so that its largest-magnitude component is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub(crate) dim: usize,
    pub(crate) values: SmallVec<[f64; 3]>,
    pub(crate) vectors: SmallVec<[f64; 9]>,
}

impl EigenPair {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &[f64] {
        &self.vectors
    }

    /// Column `i` of the eigenvector matrix.
    pub fn vector(&self, i: usize) -> Vec<f64> {
        (0..self.dim).map(|r| self.vectors[r * self.dim + i]).collect()
    }

    /// Reassembles `V · diag(f(λ)) · Vᵀ`.
    pub fn reassemble_with(&self, f: impl Fn(f64) -> f64) -> SymMat {
        let mapped: SmallVec<[f64; 3]> = self.values.iter().map(|&v| f(v)).collect();
        SymMat::from_spectrum(self.dim, &mapped, &self.vectors)
    }

    pub fn reassemble(&self) -> SymMat {
        SymMat::from_spectrum(self.dim, &self.values, &self.vectors)
    }

    /// Flips each column so its largest-magnitude component is positive.
    pub(crate) fn normalize_signs(&mut self) {
        let n = self.dim;
        for col in 0..n {
            let mut lead = 0;
            for r in 1..n {
                if self.vectors[r * n + col].abs() > self.vectors[lead * n + col].abs() {
                    lead = r;
                }
            }
            if self.vectors[lead * n + col] < 0.0 {
                for r in 0..n {
                    self.vectors[r * n + col] = -self.vectors[r * n + col];
                }
            }
        }
    }

    /// Same eigenvectors, new spectrum. The caller keeps the descending order.
    pub(crate) fn with_values(&self, values: SmallVec<[f64; 3]>) -> Self {
        debug_assert!(values.windows(2).all(|w| w[0] >= w[1]));
        Self {
            dim: self.dim,
            values,
            vectors: self.vectors.clone(),
        }
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
pub fn sym_eig(m: &SymMat) -> Result<EigenPair> {
    if m.coeffs().iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite matrix entry".into()));
    }
    let n = m.dim();
    let mut a = m.to_dense();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let scale = m.frobenius();
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off.sqrt() <= OFF_DIAGONAL_TOL * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, n, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));

    let values: SmallVec<[f64; 3]> = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors: SmallVec<[f64; 9]> = SmallVec::from_elem(0.0, n * n);
    for (col, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors[r * n + col] = v[r * n + src];
        }
    }
    let mut pair = EigenPair {
        dim: n,
        values,
        vectors,
    };
    pair.normalize_signs();
    Ok(pair)
}

/// One Jacobi rotation annihilating `a[p][q]`, accumulated into `v`.
fn rotate(a: &mut [f64], v: &mut [f64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    if apq == 0.0 {
        return;
    }
    let app = a[p * n + p];
    let aqq = a[q * n + q];
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let tau = s / (1.0 + c);

    a[p * n + p] = app - t * apq;
    a[q * n + q] = aqq + t * apq;
    a[p * n + q] = 0.0;
    a[q * n + p] = 0.0;
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let g = a[r * n + p];
        let h = a[r * n + q];
        let rp = g - s * (h + g * tau);
        let rq = h + s * (g - h * tau);
        a[r * n + p] = rp;
        a[p * n + r] = rp;
        a[r * n + q] = rq;
        a[q * n + r] = rq;
    }
    for r in 0..n {
        let g = v[r * n + p];
        let h = v[r * n + q];
        v[r * n + p] = g - s * (h + g * tau);
        v[r * n + q] = h + s * (g - h * tau);
    }
}
