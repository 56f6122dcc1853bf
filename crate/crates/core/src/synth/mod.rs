//! Synthetic diffusion data: phantoms, DWI forward simulation with Rician
//! noise, and least-squares tensor refitting.
//!
//! Noise is drawn from a ChaCha8 generator seeded with `NoiseSpec::seed`;
//! pixel `i` uses stream `i` of that seed. Within a pixel the draws are taken
//! per direction in order, `n₁` then `n₂`. Results therefore do not depend on
//! how pixels are scheduled across threads.

pub mod io;
mod phantom;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use phantom::{make_main_direction_phantom, make_staircase_phantom, BACKGROUND_EIGENVALUE, BAND_EIGENVALUE};

use crate::error::{Error, Result};
use crate::field::TensorField;
use crate::spd::{project_full, sym_eig, SpdTensor, SymMat, DEFAULT_EPSILON};

/// Default b-value in s/mm².
pub const DEFAULT_B: f64 = 800.0;
/// Default unweighted signal.
pub const DEFAULT_A0: f64 = 1000.0;
/// Signals are clamped to this before taking logarithms.
pub const MIN_SIGNAL: f64 = 1e-12;

pub type Direction = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Variance of each Gaussian component.
    pub sigma2: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(sigma2: f64, seed: u64) -> Result<Self> {
        if !(sigma2 >= 0.0 && sigma2.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "sigma2 must be non-negative, got {sigma2}"
            )));
        }
        Ok(Self { sigma2, seed })
    }

    /// Generator for pixel `pixel`.
    pub fn pixel_rng(&self, pixel: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(pixel as u64);
        rng
    }
}

/// `a0 · exp(−b gᵀ w g)`.
pub fn stejskal_tanner_forward(w: &SpdTensor, b: f64, g: &Direction, a0: f64) -> f64 {
    a0 * (-b * quadratic_form(w.matrix(), g)).exp()
}

fn quadratic_form(m: &SymMat, g: &Direction) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            acc += g[i] * m.get(i, j) * g[j];
        }
    }
    acc
}

/// Vertices of a regular icosahedron on the unit sphere; six antipodal pairs.
pub fn default_directions() -> Vec<Direction> {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let norm = (1.0 + phi * phi).sqrt();
    let mut dirs = Vec::with_capacity(12);
    for s1 in [1.0, -1.0] {
        for s2 in [1.0, -1.0] {
            dirs.push([0.0, s1, s2 * phi]);
            dirs.push([s1, s2 * phi, 0.0]);
            dirs.push([s2 * phi, 0.0, s1]);
        }
    }
    dirs.iter().map(|d| [d[0] / norm, d[1] / norm, d[2] / norm]).collect()
}

/// Row of the linear model `gᵀ w g = row · coeffs` in the `SymMat` layout.
pub fn design_row(g: &Direction) -> [f64; 6] {
    let [x, y, z] = *g;
    [x * x, y * y, z * z, 2.0 * x * y, 2.0 * x * z, 2.0 * y * z]
}

fn normal_matrix(directions: &[Direction]) -> [[f64; 6]; 6] {
    let mut a = [[0.0; 6]; 6];
    for g in directions {
        let r = design_row(g);
        for i in 0..6 {
            for j in 0..6 {
                a[i][j] += r[i] * r[j];
            }
        }
    }
    a
}

/// 2-norm condition number of the design matrix built from `directions`.
pub fn design_condition_number(directions: &[Direction]) -> Result<f64> {
    let a = normal_matrix(directions);
    let dense: Vec<f64> = a.iter().flatten().copied().collect();
    let eig = sym_eig(&SymMat::from_dense(6, &dense)?)?;
    let (max, min) = (eig.values()[0], eig.values()[5]);
    if min <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((max / min).sqrt())
}

/// `√((value + n₁)² + n₂²)` with `n₁, n₂ ~ N(0, σ²)`.
pub fn add_rician<R: Rng + ?Sized>(value: f64, spec: &NoiseSpec, rng: &mut R) -> f64 {
    let sigma = spec.sigma2.sqrt();
    let n1: f64 = rng.sample(StandardNormal);
    let n2: f64 = rng.sample(StandardNormal);
    if spec.sigma2 == 0.0 {
        return value;
    }
    (value + sigma * n1).hypot(sigma * n2)
}

/// Diffusion-weighted images, one row-major scalar image per direction.
#[derive(Debug, Clone, PartialEq)]
pub struct DwiSet {
    width: usize,
    height: usize,
    directions: Vec<Direction>,
    b_value: f64,
    a0: f64,
    images: Vec<Vec<f64>>,
}

impl DwiSet {
    pub fn new(
        width: usize,
        height: usize,
        directions: Vec<Direction>,
        b_value: f64,
        a0: f64,
        images: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput("image dimensions must be positive".into()));
        }
        for (k, g) in directions.iter().enumerate() {
            let n = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
            if (n - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidInput(format!("direction {k} has norm {n}")));
            }
        }
        if images.len() != directions.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} images for {} directions",
                images.len(),
                directions.len()
            )));
        }
        for (k, img) in images.iter().enumerate() {
            if img.len() != width * height {
                return Err(Error::DimensionMismatch(format!("image {k} has {} values", img.len())));
            }
            if img.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                return Err(Error::InvalidInput(format!(
                    "image {k} has a negative or non-finite value"
                )));
            }
        }
        if !(b_value > 0.0 && a0 > 0.0) {
            return Err(Error::InvalidInput("b-value and a0 must be positive".into()));
        }
        Ok(Self {
            width,
            height,
            directions,
            b_value,
            a0,
            images,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn b_value(&self) -> f64 {
        self.b_value
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn images(&self) -> &[Vec<f64>] {
        &self.images
    }

    /// Signals of all directions at one pixel.
    pub fn signals(&self, pixel: usize) -> Vec<f64> {
        self.images.iter().map(|img| img[pixel]).collect()
    }
}

/// Forward-simulates one image per direction, optionally with Rician noise.
pub fn simulate_dwis(
    w: &TensorField,
    b: f64,
    a0: f64,
    directions: &[Direction],
    noise: Option<&NoiseSpec>,
) -> Result<DwiSet> {
    if w.dim() != 3 {
        return Err(Error::DimensionMismatch(format!(
            "DWI simulation needs 3×3 tensors, got {}",
            w.dim()
        )));
    }
    let per_pixel: Vec<Vec<f64>> = w
        .tensors()
        .par_iter()
        .enumerate()
        .map(|(i, t)| {
            let clean = directions.iter().map(|g| stejskal_tanner_forward(t, b, g, a0));
            match noise {
                Some(spec) => {
                    let mut rng = spec.pixel_rng(i);
                    clean.map(|v| add_rician(v, spec, &mut rng)).collect()
                }
                None => clean.collect(),
            }
        })
        .collect();
    let images = (0..directions.len())
        .map(|k| per_pixel.iter().map(|px| px[k]).collect())
        .collect();
    DwiSet::new(w.width(), w.height(), directions.to_vec(), b, a0, images)
}

/// Cholesky factor of the normal equations of a direction set.
#[derive(Debug, Clone)]
pub struct LsFitter {
    directions: Vec<Direction>,
    chol: [[f64; 6]; 6],
}

impl LsFitter {
    pub fn new(directions: &[Direction]) -> Result<Self> {
        let rank_err = || Error::RankDeficient(format!("{:?} ({} directions)", directions, directions.len()));
        if directions.len() < 6 {
            return Err(rank_err());
        }
        let a = normal_matrix(directions);
        let scale = (0..6).map(|i| a[i][i]).fold(0.0f64, f64::max);
        let mut l = [[0.0; 6]; 6];
        for j in 0..6 {
            let d = a[j][j] - (0..j).map(|k| l[j][k] * l[j][k]).sum::<f64>();
            if d.is_nan() || d <= 1e-10 * scale {
                return Err(rank_err());
            }
            l[j][j] = d.sqrt();
            for i in j + 1..6 {
                l[i][j] = (a[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>()) / l[j][j];
            }
        }
        Ok(Self {
            directions: directions.to_vec(),
            chol: l,
        })
    }

    /// Least-squares coefficients for `gₖᵀ w gₖ = yₖ`.
    pub fn solve(&self, y: &[f64]) -> [f64; 6] {
        let mut rhs = [0.0; 6];
        for (g, yk) in self.directions.iter().zip(y) {
            let r = design_row(g);
            for i in 0..6 {
                rhs[i] += r[i] * yk;
            }
        }
        let l = &self.chol;
        let mut u = [0.0; 6];
        for i in 0..6 {
            u[i] = (rhs[i] - (0..i).map(|k| l[i][k] * u[k]).sum::<f64>()) / l[i][i];
        }
        let mut x = [0.0; 6];
        for i in (0..6).rev() {
            x[i] = (u[i] - (i + 1..6).map(|k| l[k][i] * x[k]).sum::<f64>()) / l[i][i];
        }
        x
    }

    /// Fits one pixel's signals and projects the result with `project_full`.
    pub fn fit(&self, signals: &[f64], b: f64, a0: f64, epsilon: f64, z: f64) -> Result<SpdTensor> {
        if signals.len() != self.directions.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} signals for {} directions",
                signals.len(),
                self.directions.len()
            )));
        }
        let y: Vec<f64> = signals.iter().map(|a| -(a.max(MIN_SIGNAL) / a0).ln() / b).collect();
        project_full(&SymMat::from_coeffs(3, &self.solve(&y))?, epsilon, z)
    }
}

/// Least-squares tensor at one pixel, projected into the admissible set.
pub fn fit_tensor_ls(dwis: &DwiSet, pixel: usize, epsilon: f64, z: f64) -> Result<SpdTensor> {
    LsFitter::new(&dwis.directions)?.fit(&dwis.signals(pixel), dwis.b_value, dwis.a0, epsilon, z)
}

/// Fits every pixel.
pub fn fit_field(dwis: &DwiSet, epsilon: f64, z: f64) -> Result<TensorField> {
    let fitter = LsFitter::new(&dwis.directions)?;
    let tensors = (0..dwis.width * dwis.height)
        .into_par_iter()
        .map(|i| fitter.fit(&dwis.signals(i), dwis.b_value, dwis.a0, epsilon, z))
        .collect::<Result<Vec<_>>>()?;
    TensorField::new(dwis.width, dwis.height, z, tensors)
}

/// Simulates noisy DWIs from `w` and refits them.
pub fn corrupt_field(
    w: &TensorField,
    spec: &NoiseSpec,
    b: f64,
    a0: f64,
    directions: &[Direction],
) -> Result<TensorField> {
    let dwis = simulate_dwis(w, b, a0, directions, Some(spec))?;
    fit_field(&dwis, DEFAULT_EPSILON, w.z())
}
