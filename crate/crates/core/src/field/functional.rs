//! Discrete fidelity, double-integral regularizer `Φ`, first-order Sobolev
//! term `Θ`, and the functionals `F` and `F_C` built from them.
//!
//! Everything is evaluated on coefficient fields ([`SymField`]). With the
//! log-Euclidean metric the coefficients are per-pixel logarithms, so
//! `d(w(x), w(y)) = ‖L(x) − L(y)‖_F`; with the Euclidean metric they are the
//! raw matrix entries. Per-pixel partial sums are reduced in index order, so
//! results do not depend on the thread schedule.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Mask, Mollifier, SymField, TensorField};
use crate::error::{Error, Result};
use crate::spd::{coeff_norm_sq, DEFAULT_EPSILON, DEFAULT_Z};

/// Spatial dimension of the pixel grid.
pub const GRID_DIM: f64 = 2.0;

/// Fields smaller than this are evaluated on the calling thread.
pub(crate) const PARALLEL_MIN_PIXELS: usize = 256;

/// Distance used between tensors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// `‖Log A − Log B‖_F`.
    LogEuclidean,
    /// `‖A − B‖_F`.
    Euclidean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalParams {
    /// Exponent of the distance, `p > 1`.
    pub p: f64,
    /// Fractional order, `0 < s < 1`.
    pub s: f64,
    /// Weight of `Φ` in `F`.
    pub alpha: f64,
    /// Weight of `Θ` in `F_C`.
    pub beta: f64,
    /// 1 gates `Φ` with the mollifier, 0 integrates over all pairs.
    pub l: u8,
    /// Mollifier radius in pixels.
    pub n_rho: usize,
    pub z: f64,
    pub epsilon: f64,
}

impl Default for FunctionalParams {
    fn default() -> Self {
        Self {
            p: 1.1,
            s: 0.5,
            alpha: 1.0,
            beta: 1.0,
            l: 1,
            n_rho: 3,
            z: DEFAULT_Z,
            epsilon: DEFAULT_EPSILON,
        }
    }
}

impl FunctionalParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidInput(what.to_string()));
        if !(self.p > 1.0 && self.p.is_finite()) {
            return bad("p must lie in (1, ∞)");
        }
        if !(self.s > 0.0 && self.s < 1.0) {
            return bad("s must lie in (0, 1)");
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad("alpha must be nonnegative");
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return bad("beta must be nonnegative");
        }
        if self.l > 1 {
            return bad("l must be 0 or 1");
        }
        if self.n_rho < 1 {
            return bad("n_rho must be at least 1");
        }
        if !(self.z > 0.0 && self.z.is_finite()) {
            return bad("z must be positive");
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon must be positive");
        }
        Ok(())
    }

    /// The bump mollifier of radius `n_rho`.
    pub fn mollifier(&self) -> Result<Mollifier> {
        Mollifier::bump(self.n_rho)
    }
}

/// Pair weights `ρ^l(d) / |d|^{n + ps}` over the admissible nonzero offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct PairKernel {
    offsets: Vec<(i64, i64, f64)>,
}

impl PairKernel {
    pub fn new(width: usize, height: usize, p: f64, s: f64, l: u8, mollifier: &Mollifier) -> Self {
        let exponent = GRID_DIM + p * s;
        let decay = |dx: i64, dy: i64| ((dx * dx + dy * dy) as f64).powf(-0.5 * exponent);
        let offsets = if l == 1 {
            mollifier
                .support()
                .filter(|&(dx, dy, _)| (dx, dy) != (0, 0))
                .filter(|&(dx, dy, _)| dx.unsigned_abs() < width as u64 && dy.unsigned_abs() < height as u64)
                .map(|(dx, dy, w)| (dx, dy, w * decay(dx, dy)))
                .collect()
        } else {
            let (w, h) = (width as i64, height as i64);
            (1 - h..h)
                .flat_map(|dy| (1 - w..w).map(move |dx| (dx, dy)))
                .filter(|&d| d != (0, 0))
                .map(|(dx, dy)| (dx, dy, decay(dx, dy)))
                .collect()
        };
        Self { offsets }
    }

    pub fn from_params(width: usize, height: usize, params: &FunctionalParams, mollifier: &Mollifier) -> Self {
        Self::new(width, height, params.p, params.s, params.l, mollifier)
    }

    pub fn offsets(&self) -> &[(i64, i64, f64)] {
        &self.offsets
    }

    /// Neighbours `(flat index, weight)` of pixel `(col, row)` inside the grid.
    pub(crate) fn neighbours(
        &self,
        width: usize,
        height: usize,
        col: usize,
        row: usize,
    ) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.offsets.iter().filter_map(move |&(dx, dy, w)| {
            let c = col as i64 + dx;
            let r = row as i64 + dy;
            if c < 0 || r < 0 || c >= width as i64 || r >= height as i64 {
                None
            } else {
                Some((r as usize * width + c as usize, w))
            }
        })
    }
}

/// `‖a − b‖^p_F` on coefficient slices.
#[inline]
pub(crate) fn dist_pow(dim: usize, a: &[f64], b: &[f64], p: f64) -> f64 {
    let mut diff = [0.0f64; 16];
    let k = a.len();
    if k <= diff.len() {
        for i in 0..k {
            diff[i] = a[i] - b[i];
        }
        norm_pow(coeff_norm_sq(dim, &diff[..k]), p)
    } else {
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        norm_pow(coeff_norm_sq(dim, &d), p)
    }
}

#[inline]
pub(crate) fn norm_pow(norm_sq: f64, p: f64) -> f64 {
    if norm_sq == 0.0 {
        0.0
    } else if p == 2.0 {
        norm_sq
    } else {
        norm_sq.powf(0.5 * p)
    }
}

/// Evaluates `f` per pixel (possibly in parallel) and sums in index order.
pub(crate) fn ordered_sum(n: usize, f: impl Fn(usize) -> f64 + Sync) -> f64 {
    if n >= PARALLEL_MIN_PIXELS {
        let parts: Vec<f64> = (0..n).into_par_iter().map(&f).collect();
        parts.iter().sum()
    } else {
        (0..n).map(f).sum()
    }
}

fn check_shapes(a: &SymField, b: &SymField) -> Result<()> {
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

fn check_mask(c: &SymField, mask: &Mask) -> Result<()> {
    if !mask.matches(c.width(), c.height()) {
        return Err(Error::DimensionMismatch(format!(
            "mask {}×{} vs field {}×{}",
            mask.width(),
            mask.height(),
            c.width(),
            c.height()
        )));
    }
    Ok(())
}

/// `Σ_{mask} ‖c(x) − data(x)‖^p_F`.
pub fn fidelity_coords(c: &SymField, data: &SymField, mask: &Mask, p: f64) -> Result<f64> {
    check_shapes(c, data)?;
    check_mask(c, mask)?;
    let dim = c.dim();
    Ok(ordered_sum(c.n_pixels(), |i| {
        if mask.is_set(i) {
            dist_pow(dim, c.pixel(i), data.pixel(i), p)
        } else {
            0.0
        }
    }))
}

/// `Σ_x Σ_{y ≠ x} K(x − y) ‖c(x) − c(y)‖^p_F` over ordered pairs.
pub fn phi_coords(c: &SymField, kernel: &PairKernel, p: f64) -> f64 {
    let (w, h, dim) = (c.width(), c.height(), c.dim());
    ordered_sum(c.n_pixels(), |i| {
        let (col, row) = (i % w, i / w);
        let ci = c.pixel(i);
        kernel
            .neighbours(w, h, col, row)
            .map(|(j, k)| k * dist_pow(dim, ci, c.pixel(j), p))
            .sum()
    })
}

/// Forward differences of pixel `i`; zero across the right and bottom edges.
pub(crate) fn forward_diffs(c: &SymField, i: usize, dx: &mut [f64], dy: &mut [f64]) {
    let (w, h) = (c.width(), c.height());
    let (col, row) = (i % w, i / w);
    let ci = c.pixel(i);
    if col + 1 < w {
        for ((d, a), b) in dx.iter_mut().zip(c.pixel(i + 1)).zip(ci) {
            *d = a - b;
        }
    } else {
        dx.fill(0.0);
    }
    if row + 1 < h {
        for ((d, a), b) in dy.iter_mut().zip(c.pixel(i + w)).zip(ci) {
            *d = a - b;
        }
    } else {
        dy.fill(0.0);
    }
}

/// `Σ_x ‖∇c(x)‖^p_F` with forward differences.
pub fn theta_coords(c: &SymField, p: f64) -> f64 {
    let (dim, k) = (c.dim(), c.k());
    ordered_sum(c.n_pixels(), |i| {
        let mut dx = vec![0.0; k];
        let mut dy = vec![0.0; k];
        forward_diffs(c, i, &mut dx, &mut dy);
        norm_pow(coeff_norm_sq(dim, &dx) + coeff_norm_sq(dim, &dy), p)
    })
}

pub(crate) fn coords(w: &TensorField, metric: Metric) -> Result<SymField> {
    match metric {
        Metric::LogEuclidean => w.to_log_coords(),
        Metric::Euclidean => Ok(w.to_coeffs()),
    }
}

fn check_fields(w: &TensorField, data: &TensorField) -> Result<()> {
    if !w.same_shape(data) {
        return Err(Error::DimensionMismatch(format!(
            "field {}×{} vs data {}×{}",
            w.width(),
            w.height(),
            data.width(),
            data.height()
        )));
    }
    Ok(())
}

/// Data term `Σ_{x ∈ mask} d^p(w(x), data(x))`.
pub fn fidelity(w: &TensorField, data: &TensorField, mask: &Mask, p: f64, metric: Metric) -> Result<f64> {
    check_fields(w, data)?;
    fidelity_coords(&coords(w, metric)?, &coords(data, metric)?, mask, p)
}

/// Double-integral regularizer `Φ` over ordered pixel pairs.
pub fn phi_regularizer(
    w: &TensorField,
    params: &FunctionalParams,
    metric: Metric,
    mollifier: &Mollifier,
) -> Result<f64> {
    let kernel = PairKernel::from_params(w.width(), w.height(), params, mollifier);
    Ok(phi_coords(&coords(w, metric)?, &kernel, params.p))
}

/// `F = fidelity + α Φ`, with the bump mollifier of radius `n_rho`.
pub fn functional_f(
    w: &TensorField,
    data: &TensorField,
    mask: &Mask,
    params: &FunctionalParams,
    metric: Metric,
) -> Result<f64> {
    params.validate()?;
    let fid = fidelity(w, data, mask, params.p, metric)?;
    if params.alpha == 0.0 {
        return Ok(fid);
    }
    Ok(fid + params.alpha * phi_regularizer(w, params, metric, &params.mollifier()?)?)
}

/// `Θ(w) = Σ_x ‖∇w(x)‖^p_F` on raw matrix coefficients.
pub fn theta_regularizer(w: &TensorField, p: f64) -> f64 {
    theta_coords(&w.to_coeffs(), p)
}

/// `F_C = Σ_{mask} ‖w − data‖^p_F + β Θ(w)`.
pub fn functional_fc(w: &TensorField, data: &TensorField, mask: &Mask, params: &FunctionalParams) -> Result<f64> {
    params.validate()?;
    let fid = fidelity(w, data, mask, params.p, Metric::Euclidean)?;
    if params.beta == 0.0 {
        return Ok(fid);
    }
    Ok(fid + params.beta * theta_regularizer(w, params.p))
}
