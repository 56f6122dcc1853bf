//! Tensor fields on a 2-D pixel grid, inpainting masks, the discrete
//! mollifier, and evaluation of the variational functionals.

pub(crate) mod functional;
pub mod io;
mod mollifier;

pub use functional::{
    fidelity, fidelity_coords, functional_f, functional_fc, phi_coords, phi_regularizer, theta_coords,
    theta_regularizer, FunctionalParams, Metric, PairKernel,
};
pub use mollifier::Mollifier;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spd::{self, coeff_norm_sq, n_coeffs, SpdTensor, SymMat};

/// Flat row-major field of symmetric-matrix coefficients.
///
/// Used both for log-coordinates (`Log w(x)` per pixel) and for raw matrix
/// coefficients. Each pixel holds `n_coeffs(dim)` values in [`SymMat`] layout.
#[derive(Debug, Clone, PartialEq)]
pub struct SymField {
    width: usize,
    height: usize,
    dim: usize,
    data: Vec<f64>,
}

impl SymField {
    pub fn zeros(width: usize, height: usize, dim: usize) -> Self {
        Self {
            width,
            height,
            dim,
            data: vec![0.0; width * height * n_coeffs(dim)],
        }
    }

    pub fn from_vec(width: usize, height: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput("field dimensions must be positive".into()));
        }
        if data.len() != width * height * n_coeffs(dim) {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for a {width}×{height} field of dim {dim}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            dim,
            data,
        })
    }

    pub fn from_mats(width: usize, height: usize, mats: &[SymMat]) -> Result<Self> {
        let dim = mats.first().map(SymMat::dim).unwrap_or(3);
        if mats.iter().any(|m| m.dim() != dim) {
            return Err(Error::DimensionMismatch("mixed matrix dimensions".into()));
        }
        let data = mats.iter().flat_map(|m| m.coeffs().iter().copied()).collect();
        Self::from_vec(width, height, dim, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coefficients per pixel.
    pub fn k(&self) -> usize {
        n_coeffs(self.dim)
    }

    pub fn n_pixels(&self) -> usize {
        self.width * self.height
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn pixel(&self, i: usize) -> &[f64] {
        let k = self.k();
        &self.data[i * k..(i + 1) * k]
    }

    pub fn pixel_mut(&mut self, i: usize) -> &mut [f64] {
        let k = self.k();
        &mut self.data[i * k..(i + 1) * k]
    }

    pub fn mat(&self, i: usize) -> SymMat {
        SymMat::from_coeffs(self.dim, self.pixel(i)).expect("finite coefficients")
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.width == other.width && self.height == other.height && self.dim == other.dim
    }

    /// Field norm `√(Σ_x ‖·‖²_F)` with full-matrix Frobenius norms.
    pub fn norm(&self) -> f64 {
        (0..self.n_pixels())
            .map(|i| coeff_norm_sq(self.dim, self.pixel(i)))
            .sum::<f64>()
            .sqrt()
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert!(self.same_shape(other), "field shape mismatch");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Self { data, ..*self }
    }

    /// `Σ_x ‖a(x) − b(x)‖_F`.
    pub fn summed_distance(&self, other: &Self) -> f64 {
        assert!(self.same_shape(other), "field shape mismatch");
        (0..self.n_pixels())
            .map(|i| {
                let d: Vec<f64> = self.pixel(i).iter().zip(other.pixel(i)).map(|(a, b)| a - b).collect();
                coeff_norm_sq(self.dim, &d).sqrt()
            })
            .sum()
    }

    /// Applies the SPD projection to every pixel, in log-coordinates.
    pub fn project_log_coords(&mut self, epsilon: f64, z: f64) -> Result<()> {
        let dim = self.dim;
        let k = self.k();
        self.data.par_chunks_mut(k).try_for_each(|px| -> Result<()> {
            let m = SymMat::from_coeffs(dim, px)?;
            let p = spd::project_log_coords(&m, epsilon, z)?;
            px.copy_from_slice(p.coeffs());
            Ok(())
        })
    }

    /// Applies `project_full` to every pixel, in raw coefficients.
    pub fn project_raw(&mut self, epsilon: f64, z: f64) -> Result<()> {
        let dim = self.dim;
        let k = self.k();
        self.data.par_chunks_mut(k).try_for_each(|px| -> Result<()> {
            let m = SymMat::from_coeffs(dim, px)?;
            let p = spd::project_full(&m, epsilon, z)?;
            px.copy_from_slice(p.matrix().coeffs());
            Ok(())
        })
    }
}

/// Grid of SPD tensors sharing a log-ball bound `z`, row-major, unit pixel spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    width: usize,
    height: usize,
    z: f64,
    tensors: Vec<SpdTensor>,
}

impl TensorField {
    pub fn new(width: usize, height: usize, z: f64, tensors: Vec<SpdTensor>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput("field dimensions must be positive".into()));
        }
        if tensors.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} tensors for a {width}×{height} field",
                tensors.len()
            )));
        }
        let dim = tensors[0].dim();
        let tensors = tensors
            .into_iter()
            .enumerate()
            .map(|(i, t)| {
                if t.dim() != dim {
                    return Err(Error::DimensionMismatch(format!("pixel {i} has dim {}", t.dim())));
                }
                t.certify(z)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            width,
            height,
            z,
            tensors,
        })
    }

    /// Fills a field from a per-pixel constructor `f(col, row)`.
    pub fn from_fn(
        width: usize,
        height: usize,
        z: f64,
        mut f: impl FnMut(usize, usize) -> Result<SpdTensor>,
    ) -> Result<Self> {
        let mut tensors = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                tensors.push(f(col, row)?);
            }
        }
        Self::new(width, height, z, tensors)
    }

    pub fn constant(width: usize, height: usize, z: f64, t: SpdTensor) -> Result<Self> {
        Self::new(width, height, z, vec![t; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn dim(&self) -> usize {
        self.tensors[0].dim()
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn tensors(&self) -> &[SpdTensor] {
        &self.tensors
    }

    pub fn get(&self, col: usize, row: usize) -> &SpdTensor {
        &self.tensors[row * self.width + col]
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.width == other.width && self.height == other.height && self.dim() == other.dim()
    }

    /// Per-pixel matrix logarithms.
    pub fn to_log_coords(&self) -> Result<SymField> {
        let mats = self.tensors.iter().map(spd::mat_log).collect::<Result<Vec<_>>>()?;
        SymField::from_mats(self.width, self.height, &mats)
    }

    /// Inverse of [`TensorField::to_log_coords`]: each pixel is projected in
    /// log-coordinates (clamping `‖L‖_F > z` to the ball boundary) and
    /// exponentiated.
    pub fn from_log_coords(l: &SymField, z: f64, epsilon: f64) -> Result<Self> {
        let tensors = (0..l.n_pixels())
            .into_par_iter()
            .map(|i| {
                let p = spd::project_log_coords(&l.mat(i), epsilon, z)?;
                spd::exp_within(&p, z)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(l.width(), l.height(), z, tensors)
    }

    /// Raw matrix coefficients.
    pub fn to_coeffs(&self) -> SymField {
        let mats: Vec<SymMat> = self.tensors.iter().map(|t| t.matrix().clone()).collect();
        SymField::from_mats(self.width, self.height, &mats).expect("consistent shape")
    }

    /// Projects raw coefficients pixelwise with `project_full`.
    pub fn from_coeffs(c: &SymField, z: f64, epsilon: f64) -> Result<Self> {
        let tensors = (0..c.n_pixels())
            .into_par_iter()
            .map(|i| spd::project_full(&c.mat(i), epsilon, z))
            .collect::<Result<Vec<_>>>()?;
        Self::new(c.width(), c.height(), z, tensors)
    }

    pub fn map(&self, f: impl Fn(&SpdTensor) -> Result<SpdTensor>) -> Result<Self> {
        let tensors = self.tensors.iter().map(f).collect::<Result<Vec<_>>>()?;
        Self::new(self.width, self.height, self.z, tensors)
    }

    /// Replaces the tensor at flat index `i`.
    pub fn set(&mut self, i: usize, t: SpdTensor) -> Result<()> {
        if t.dim() != self.dim() {
            return Err(Error::DimensionMismatch("tensor dimension".into()));
        }
        self.tensors[i] = t.certify(self.z)?;
        Ok(())
    }
}

/// Indicator of the pixels carrying data; `true` outside the inpainting domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} mask entries for a {width}×{height} grid",
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    /// Every pixel carries data (pure denoising).
    pub fn full(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![true; width * height],
        }
    }

    /// Full mask with an axis-aligned hole `[col0, col0+w) × [row0, row0+h)`.
    pub fn with_hole(width: usize, height: usize, col0: usize, row0: usize, w: usize, h: usize) -> Self {
        let mut m = Self::full(width, height);
        for row in row0..(row0 + h).min(height) {
            for col in col0..(col0 + w).min(width) {
                m.data[row * width + col] = false;
            }
        }
        m
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn is_set(&self, i: usize) -> bool {
        self.data[i]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.data
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|b| **b).count()
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.data[i] = value;
    }

    /// Fails when no pixel carries data.
    pub fn require_data(&self) -> Result<()> {
        if self.count() == 0 {
            return Err(Error::InvalidInput("mask has no data pixels".into()));
        }
        Ok(())
    }

    pub fn matches(&self, width: usize, height: usize) -> bool {
        self.width == width && self.height == height
    }
}
