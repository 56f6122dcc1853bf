//! Objective evaluation and gradients on coefficient fields.
//!
//! The analytic gradient uses `∇_u ‖u‖^p_F = p ‖u‖^{p−2}_F · W u`, where `W`
//! weights off-diagonal coefficients by 2 (each appears twice in the full
//! matrix). At `u = 0` the gradient is taken as 0, the one-sided derivative
//! for `p > 1`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::functional::{forward_diffs, PARALLEL_MIN_PIXELS};
use crate::field::{
    fidelity_coords, phi_coords, theta_coords, FunctionalParams, Mask, Mollifier, PairKernel, SymField,
};
use crate::spd::{coeff_norm_sq, coeff_weight, project_full, project_log_coords, SymMat, LOG_BOUND_SLACK};

use super::Objective;

/// A prepared minimization problem over a coefficient field.
#[derive(Debug, Clone)]
pub struct Problem {
    objective: Objective,
    data: SymField,
    mask: Mask,
    params: FunctionalParams,
    kernel: PairKernel,
}

impl Problem {
    /// `data` must already be in the objective's coordinates: logarithms for
    /// [`Objective::LogEuclidean`], raw coefficients otherwise.
    pub fn new(
        objective: Objective,
        data: SymField,
        mask: Mask,
        params: FunctionalParams,
        mollifier: &Mollifier,
    ) -> Result<Self> {
        params.validate()?;
        if !mask.matches(data.width(), data.height()) {
            return Err(Error::DimensionMismatch(format!(
                "mask {}×{} vs data {}×{}",
                mask.width(),
                mask.height(),
                data.width(),
                data.height()
            )));
        }
        let kernel = PairKernel::from_params(data.width(), data.height(), &params, mollifier);
        Ok(Self {
            objective,
            data,
            mask,
            params,
            kernel,
        })
    }

    pub fn objective(&self) -> Objective {
        self.objective
    }

    pub fn params(&self) -> &FunctionalParams {
        &self.params
    }

    pub fn data(&self) -> &SymField {
        &self.data
    }

    pub fn mask(&self) -> &Mask {
        &self.mask
    }

    fn check(&self, c: &SymField) -> Result<()> {
        if !c.same_shape(&self.data) {
            return Err(Error::DimensionMismatch("iterate and data differ in shape".into()));
        }
        Ok(())
    }

    pub fn value(&self, c: &SymField) -> Result<f64> {
        self.check(c)?;
        let p = self.params.p;
        let fid = fidelity_coords(c, &self.data, &self.mask, p)?;
        let reg = match self.objective {
            Objective::LogEuclidean | Objective::Euclidean if self.params.alpha > 0.0 => {
                self.params.alpha * phi_coords(c, &self.kernel, p)
            }
            Objective::Sobolev if self.params.beta > 0.0 => self.params.beta * theta_coords(c, p),
            _ => 0.0,
        };
        Ok(fid + reg)
    }

    /// Exact gradient with respect to the independent coefficients.
    pub fn gradient(&self, c: &SymField) -> Result<SymField> {
        self.check(c)?;
        let (w, h, dim, k) = (c.width(), c.height(), c.dim(), c.k());
        let p = self.params.p;
        let mut out = SymField::zeros(w, h, dim);

        // Per-pixel Sobolev weights q(j) = p S_j^{p/2 − 1}, S_j = ‖∇c(j)‖².
        let theta_q: Vec<(f64, Vec<f64>, Vec<f64>)> = if self.objective == Objective::Sobolev && self.params.beta > 0.0
        {
            (0..c.n_pixels())
                .map(|i| {
                    let mut dx = vec![0.0; k];
                    let mut dy = vec![0.0; k];
                    forward_diffs(c, i, &mut dx, &mut dy);
                    let s = coeff_norm_sq(dim, &dx) + coeff_norm_sq(dim, &dy);
                    (pow_grad_scale(s, p), dx, dy)
                })
                .collect()
        } else {
            Vec::new()
        };

        let pixel_grad = |i: usize, g: &mut [f64]| {
            g.fill(0.0);
            let ci = c.pixel(i);
            if self.mask.is_set(i) {
                accumulate_pow_grad(dim, ci, self.data.pixel(i), p, 1.0, g);
            }
            match self.objective {
                Objective::LogEuclidean | Objective::Euclidean if self.params.alpha > 0.0 => {
                    let (col, row) = (i % w, i / w);
                    for (j, kw) in self.kernel.neighbours(w, h, col, row) {
                        accumulate_pow_grad(dim, ci, c.pixel(j), p, 2.0 * self.params.alpha * kw, g);
                    }
                }
                Objective::Sobolev if !theta_q.is_empty() => {
                    let beta = self.params.beta;
                    let (col, row) = (i % w, i / w);
                    let (q, dx, dy) = &theta_q[i];
                    for m in 0..k {
                        let wm = coeff_weight(dim, m);
                        let mut acc = -q * (dx[m] + dy[m]);
                        if col > 0 {
                            let (ql, dxl, _) = &theta_q[i - 1];
                            acc += ql * dxl[m];
                        }
                        if row > 0 {
                            let (qu, _, dyu) = &theta_q[i - w];
                            acc += qu * dyu[m];
                        }
                        g[m] += beta * wm * acc;
                    }
                }
                _ => {}
            }
        };

        if c.n_pixels() >= PARALLEL_MIN_PIXELS {
            out.as_mut_slice()
                .par_chunks_mut(k)
                .enumerate()
                .for_each(|(i, g)| pixel_grad(i, g));
        } else {
            out.as_mut_slice()
                .chunks_mut(k)
                .enumerate()
                .for_each(|(i, g)| pixel_grad(i, g));
        }
        Ok(out)
    }

    /// Projects every pixel back onto the admissible set, in the problem's coordinates.
    pub fn project(&self, c: &mut SymField) -> Result<()> {
        match self.objective {
            Objective::LogEuclidean => c.project_log_coords(self.params.epsilon, self.params.z),
            Objective::Euclidean | Objective::Sobolev => c.project_raw(self.params.epsilon, self.params.z),
        }
    }

    /// Whether pixel coefficients lie in the admissible set (projection inactive).
    fn admissible(&self, coeffs: &[f64], dim: usize) -> bool {
        let Ok(m) = SymMat::from_coeffs(dim, coeffs) else {
            return false;
        };
        let (eps, z) = (self.params.epsilon, self.params.z);
        match self.objective {
            Objective::LogEuclidean => match project_log_coords(&m, eps, z) {
                Ok(p) => p.sub(&m).frobenius() <= LOG_BOUND_SLACK * z.max(1.0),
                Err(_) => false,
            },
            _ => match project_full(&m, eps, z) {
                Ok(p) => p.matrix().sub(&m).frobenius() <= 1e-12 * m.frobenius().max(f64::MIN_POSITIVE),
                Err(_) => false,
            },
        }
    }

    /// Central finite differences of the objective, one-sided where a
    /// perturbation would leave the admissible set.
    pub fn gradient_fd(&self, c: &SymField, step: f64) -> Result<SymField> {
        self.check(c)?;
        if step.is_nan() || step <= 0.0 {
            return Err(Error::InvalidInput("finite-difference step must be positive".into()));
        }
        let (dim, k) = (c.dim(), c.k());
        let f0 = self.value(c)?;
        let grads = (0..c.n_pixels() * k)
            .into_par_iter()
            .map(|idx| -> Result<f64> {
                let (i, m) = (idx / k, idx % k);
                let mut work = c.clone();
                let base = c.pixel(i)[m];
                let mut probe = c.pixel(i).to_vec();
                probe[m] = base + step;
                let fwd_ok = self.admissible(&probe, dim);
                probe[m] = base - step;
                let bwd_ok = self.admissible(&probe, dim);

                let mut eval = |delta: f64| -> Result<f64> {
                    work.pixel_mut(i)[m] = base + delta;
                    self.value(&work)
                };
                Ok(match (fwd_ok, bwd_ok) {
                    (true, true) | (false, false) => (eval(step)? - eval(-step)?) / (2.0 * step),
                    (true, false) => (eval(step)? - f0) / step,
                    (false, true) => (f0 - eval(-step)?) / step,
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        SymField::from_vec(c.width(), c.height(), dim, grads)
    }
}

#[inline]
fn pow_grad_scale(norm_sq: f64, p: f64) -> f64 {
    if norm_sq == 0.0 {
        0.0
    } else if p == 2.0 {
        2.0
    } else {
        p * norm_sq.powf(0.5 * p - 1.0)
    }
}

/// `g += scale · p ‖a − b‖^{p−2} W (a − b)`.
#[inline]
fn accumulate_pow_grad(dim: usize, a: &[f64], b: &[f64], p: f64, scale: f64, g: &mut [f64]) {
    let mut diff = [0.0f64; 16];
    let k = a.len();
    let mut norm_sq = 0.0;
    for m in 0..k {
        diff[m] = a[m] - b[m];
        norm_sq += coeff_weight(dim, m) * diff[m] * diff[m];
    }
    let q = pow_grad_scale(norm_sq, p);
    if q == 0.0 {
        return;
    }
    for m in 0..k {
        g[m] += scale * q * coeff_weight(dim, m) * diff[m];
    }
}

/// Analytic gradient of `F` in log-coordinates.
pub fn grad_f_log(
    l: &SymField,
    data: &SymField,
    mask: &Mask,
    params: &FunctionalParams,
    mollifier: &Mollifier,
) -> Result<SymField> {
    Problem::new(
        Objective::LogEuclidean,
        data.clone(),
        mask.clone(),
        params.clone(),
        mollifier,
    )?
    .gradient(l)
}

/// Finite-difference gradient of `F` in log-coordinates.
pub fn grad_f_fd(
    l: &SymField,
    data: &SymField,
    mask: &Mask,
    params: &FunctionalParams,
    mollifier: &Mollifier,
    step: f64,
) -> Result<SymField> {
    Problem::new(
        Objective::LogEuclidean,
        data.clone(),
        mask.clone(),
        params.clone(),
        mollifier,
    )?
    .gradient_fd(l, step)
}
