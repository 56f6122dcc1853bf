//! Reconstruction quality, eigenvalue profiles, the noise-level convergence
//! study and SVG glyph rendering.

mod render;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use render::{render_svg, write_svg, ColorScale, MAX_GLYPH_RADIUS};

use crate::error::{Error, Result};
use crate::field::{FunctionalParams, Mask, TensorField};
use crate::optim::{solve, Objective, SolverConfig};
use crate::spd::{coeff_norm_sq, dist_log_euclidean};
use crate::synth::{corrupt_field, default_directions, NoiseSpec, DEFAULT_A0, DEFAULT_B};

fn check_shape(a: &TensorField, b: &TensorField) -> Result<()> {
    if !a.same_shape(b) {
        return Err(Error::DimensionMismatch(format!(
            "{}×{} (dim {}) vs {}×{} (dim {})",
            a.width(),
            a.height(),
            a.dim(),
            b.width(),
            b.height(),
            b.dim()
        )));
    }
    Ok(())
}

/// `‖orig‖ / ‖orig − rec‖` with field norms `√(Σ_x ‖·‖²_F)`; `+∞` when the fields coincide.
pub fn snr(orig: &TensorField, rec: &TensorField) -> Result<f64> {
    check_shape(orig, rec)?;
    let dim = orig.dim();
    let num: f64 = orig.tensors().iter().map(|t| t.matrix().frobenius().powi(2)).sum();
    if num == 0.0 {
        return Err(Error::Undefined("SNR of a zero reference field".into()));
    }
    let den: f64 = orig
        .tensors()
        .iter()
        .zip(rec.tensors())
        .map(|(a, b)| coeff_norm_sq(dim, a.matrix().sub(b.matrix()).coeffs()))
        .sum();
    if den == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((num / den).sqrt())
}

/// `Σ_x d_LE(a(x), b(x))`.
pub fn summed_log_distance(a: &TensorField, b: &TensorField) -> Result<f64> {
    check_shape(a, b)?;
    let mut acc = 0.0;
    for (x, y) in a.tensors().iter().zip(b.tensors()) {
        acc += dist_log_euclidean(x, y)?;
    }
    Ok(acc)
}

/// Which eigenvalue a profile tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EigenvalueRank {
    Largest,
    Smallest,
}

/// Per-column mean over rows of the selected eigenvalue.
pub fn column_eigen_profile(w: &TensorField, which: EigenvalueRank) -> Vec<f64> {
    (0..w.width())
        .map(|col| {
            let sum: f64 = (0..w.height())
                .map(|row| {
                    let ev = w.get(col, row).eigenvalues();
                    match which {
                        EigenvalueRank::Largest => ev[0],
                        EigenvalueRank::Smallest => ev[ev.len() - 1],
                    }
                })
                .sum();
            sum / w.height() as f64
        })
        .collect()
}

/// The regularization weight `α(δ) = δ^{p/2}`.
pub fn default_alpha_rule(p: f64) -> impl Fn(f64) -> f64 {
    move |delta| delta.powf(0.5 * p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    /// Rician noise standard deviation in raw signal units.
    pub delta: f64,
    pub alpha: f64,
    /// Summed log-distance of the reconstruction to the ground truth.
    pub distance: f64,
}

/// Settings of [`convergence_study`] besides the noise levels.
#[derive(Debug, Clone)]
pub struct StudySetup {
    pub params: FunctionalParams,
    pub solver: SolverConfig,
    pub seed: u64,
}

/// Corrupts `phantom` at each noise level `δ` (Rician `σ = δ`), denoises with
/// `α = alpha_rule(δ)` and records the distance to the phantom. Levels must
/// be non-increasing; rows follow their order.
pub fn convergence_study(
    phantom: &TensorField,
    levels: &[f64],
    alpha_rule: impl Fn(f64) -> f64 + Sync,
    setup: &StudySetup,
) -> Result<Vec<ConvergenceRow>> {
    if levels.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidInput("noise levels must be non-increasing".into()));
    }
    let dirs = default_directions();
    let mask = Mask::full(phantom.width(), phantom.height());
    levels
        .par_iter()
        .map(|&delta| {
            if delta.is_nan() || delta < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "noise level must be non-negative, got {delta}"
                )));
            }
            let alpha = alpha_rule(delta);
            let noise = NoiseSpec::new(delta * delta, setup.seed)?;
            let data = corrupt_field(phantom, &noise, DEFAULT_B, DEFAULT_A0, &dirs)?;
            let params = FunctionalParams {
                alpha,
                ..setup.params.clone()
            };
            let (rec, _) = solve(&data, &mask, &params, Objective::LogEuclidean, &setup.solver, None)?;
            Ok(ConvergenceRow {
                delta,
                alpha,
                distance: summed_log_distance(&rec, phantom)?,
            })
        })
        .collect()
}

/// CSV with header `delta,alpha,distance`.
pub fn write_convergence_csv<W: Write>(rows: &[ConvergenceRow], mut out: W) -> Result<()> {
    writeln!(out, "delta,alpha,distance")?;
    for r in rows {
        writeln!(out, "{},{},{}", r.delta, r.alpha, r.distance)?;
    }
    Ok(())
}
