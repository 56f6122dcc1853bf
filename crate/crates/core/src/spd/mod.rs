//! Symmetric and SPD matrix kernel.
//!
//! Symmetric matrices are stored by their independent coefficients
//! ([`SymMat`]); SPD tensors ([`SpdTensor`]) carry a cached eigendecomposition
//! and a certified bound `z` on `‖Log A‖_F`, which pins every eigenvalue to
//! `[e^{-z}, e^{z}]`.

mod eigen;
mod metric;
mod project;
mod sym;
mod tensor;

pub use eigen::{sym_eig, EigenPair};
pub use metric::{
    dist_affine_invariant, dist_euclidean, dist_log_euclidean, fa_from_eigenvalues, fractional_anisotropy, frobenius,
    geodesic, log_sym, mat_exp, mat_log, MAX_EXP_ARG,
};
pub use project::{project_full, project_log_ball, project_log_coords, project_spec, DEFAULT_EPSILON, DEFAULT_Z};
pub use sym::{coeff_index, coeff_norm_sq, coeff_weight, n_coeffs, Coeffs, SymMat};
pub use tensor::{SpdTensor, LOG_BOUND_SLACK};

/// `Exp(s)` certified against bound `z`; used after a log-coordinate projection.
pub(crate) fn exp_within(s: &SymMat, z: f64) -> crate::Result<SpdTensor> {
    mat_exp(s)?.certify(z)
}
