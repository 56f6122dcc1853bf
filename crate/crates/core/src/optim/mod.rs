//! Projected descent for `F` and `F_C`.
//!
//! The iterate lives in coefficient coordinates: per-pixel logarithms for the
//! log-Euclidean objective, raw matrix entries otherwise. Each iteration takes
//! a step, projects every pixel back onto the admissible set and accepts the
//! step by Armijo backtracking. The direction is the Frobenius gradient,
//! optionally corrected by a limited-memory BFGS recursion; steepest-descent
//! trials start from the Barzilai-Borwein length of the previous step.

mod gradient;

use std::collections::VecDeque;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use gradient::{grad_f_fd, grad_f_log, Problem};

use crate::error::{Error, Result};
use crate::field::{FunctionalParams, Mask, SymField, TensorField};
use crate::spd::{coeff_weight, project_full, SymMat};

/// Largest number of step halvings before the line search gives up.
pub const MAX_BACKTRACKS: usize = 60;
/// Consecutive steps below `rel_tol` that end a run.
pub const STALL_LIMIT: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// `F` with the log-Euclidean metric, optimized in log-coordinates.
    LogEuclidean,
    /// `F` with the Euclidean metric, optimized in raw coefficients.
    Euclidean,
    /// The first-order Sobolev comparison functional `F_C`.
    Sobolev,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradMode {
    Analytic,
    FiniteDifference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub grad_mode: GradMode,
    pub fd_step: f64,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    pub init_step: f64,
    /// Correction pairs kept for the quasi-Newton direction; 0 gives plain projected gradient steps.
    pub memory: usize,
    /// Stop once the relative objective decrease stays below this for
    /// [`STALL_LIMIT`] consecutive accepted steps.
    pub rel_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 50,
            grad_mode: GradMode::Analytic,
            fd_step: 1e-6,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            init_step: 1.0,
            memory: 8,
            rel_tol: 1e-8,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("fd_step", self.fd_step),
            ("armijo_c", self.armijo_c),
            ("init_step", self.init_step),
            ("rel_tol", self.rel_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidInput("max_iters must be positive".into()));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(Error::InvalidInput(format!(
                "backtrack_factor must lie in (0, 1), got {}",
                self.backtrack_factor
            )));
        }
        if self.armijo_c >= 1.0 {
            return Err(Error::InvalidInput("armijo_c must be below 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// Accepted steps.
    pub iterations: usize,
    /// Objective at the initial point followed by one value per accepted step.
    pub objective_trajectory: Vec<f64>,
    pub final_objective: f64,
    pub converged: bool,
    pub seconds: Option<f64>,
}

struct Pair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Two-loop recursion with the initial inverse Hessian `γ W⁻¹`.
fn lbfgs_direction(g: &[f64], history: &VecDeque<Pair>, inv_w: &[f64]) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for pair in history.iter().rev() {
        let a = pair.rho * dot(&pair.s, &q);
        q.iter_mut().zip(&pair.y).for_each(|(qv, yv)| *qv -= a * yv);
        alphas.push(a);
    }
    let last = history.back().expect("non-empty history");
    let yhy: f64 = last.y.iter().zip(inv_w).map(|(v, iw)| v * v * iw).sum();
    let gamma = 1.0 / (last.rho * yhy);
    q.iter_mut().zip(inv_w).for_each(|(qv, iw)| *qv *= gamma * iw);
    for (pair, a) in history.iter().zip(alphas.iter().rev()) {
        let b = pair.rho * dot(&pair.y, &q);
        q.iter_mut().zip(&pair.s).for_each(|(qv, sv)| *qv += (a - b) * sv);
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

/// Default starting point: the data, with pixels outside the mask replaced by `project_full(0)`.
pub fn default_init(data: &TensorField, mask: &Mask, params: &FunctionalParams) -> Result<TensorField> {
    let seed = project_full(&SymMat::zeros(data.dim()), params.epsilon, params.z)?;
    let mut out = data.clone();
    for i in 0..data.len() {
        if !mask.is_set(i) {
            out.set(i, seed.clone())?;
        }
    }
    Ok(out)
}

fn to_coords(w: &TensorField, objective: Objective) -> Result<SymField> {
    match objective {
        Objective::LogEuclidean => w.to_log_coords(),
        Objective::Euclidean | Objective::Sobolev => Ok(w.to_coeffs()),
    }
}

fn from_coords(c: &SymField, objective: Objective, params: &FunctionalParams) -> Result<TensorField> {
    match objective {
        Objective::LogEuclidean => TensorField::from_log_coords(c, params.z, params.epsilon),
        Objective::Euclidean | Objective::Sobolev => TensorField::from_coeffs(c, params.z, params.epsilon),
    }
}

/// Minimizes the selected objective. `init` defaults to [`default_init`].
pub fn solve(
    data: &TensorField,
    mask: &Mask,
    params: &FunctionalParams,
    objective: Objective,
    config: &SolverConfig,
    init: Option<&TensorField>,
) -> Result<(TensorField, SolveReport)> {
    let started = Instant::now();
    config.validate()?;
    params.validate()?;
    mask.require_data()?;
    if let Some(w) = init {
        if !w.same_shape(data) {
            return Err(Error::DimensionMismatch(
                "initial field and data differ in shape".into(),
            ));
        }
    }

    let mollifier = params.mollifier()?;
    let problem = Problem::new(
        objective,
        to_coords(data, objective)?,
        mask.clone(),
        params.clone(),
        &mollifier,
    )?;
    let start = match init {
        Some(w) => w.clone(),
        None => default_init(data, mask, params)?,
    };
    let mut x = to_coords(&start, objective)?;
    problem.project(&mut x)?;

    let grad = |c: &SymField| match config.grad_mode {
        GradMode::Analytic => problem.gradient(c),
        GradMode::FiniteDifference => problem.gradient_fd(c, config.fd_step),
    };
    let dim = x.dim();
    let k = x.k();
    // Steepest descent in the Frobenius inner product scales each coefficient by 1/W.
    let inv_w: Vec<f64> = (0..x.as_slice().len())
        .map(|idx| 1.0 / coeff_weight(dim, idx % k))
        .collect();

    let mut f = problem.value(&x)?;
    let mut trajectory = vec![f];
    let mut g = grad(&x)?;
    let mut step = config.init_step;
    let mut history: VecDeque<Pair> = VecDeque::with_capacity(config.memory);
    let mut converged = false;
    let mut iterations = 0;
    let mut stalled = 0;

    while iterations < config.max_iters {
        if f == 0.0 || g.as_slice().iter().all(|v| *v == 0.0) {
            converged = true;
            break;
        }
        let steepest: Vec<f64> = g.as_slice().iter().zip(&inv_w).map(|(gv, iw)| -gv * iw).collect();
        let (mut dir, mut t) = if history.is_empty() {
            (steepest.clone(), step)
        } else {
            (lbfgs_direction(g.as_slice(), &history, &inv_w), 1.0)
        };
        if dot(g.as_slice(), &dir) >= 0.0 {
            history.clear();
            dir = steepest;
            t = step;
        }

        let mut accepted = None;
        let mut first_slope = None;
        for _ in 0..=MAX_BACKTRACKS {
            let mut cand = x.clone();
            for (v, dv) in cand.as_mut_slice().iter_mut().zip(&dir) {
                *v += t * dv;
            }
            problem.project(&mut cand)?;
            let slope: f64 = cand
                .as_slice()
                .iter()
                .zip(x.as_slice())
                .zip(g.as_slice())
                .map(|((c, a), gv)| gv * (c - a))
                .sum();
            first_slope.get_or_insert(slope);
            let f_new = problem.value(&cand)?;
            if f_new <= f + config.armijo_c * slope && f_new <= f {
                accepted = Some((cand, f_new));
                break;
            }
            t *= config.backtrack_factor;
        }

        let Some((x_new, f_new)) = accepted else {
            // The remaining decrease is below the resolution of the objective.
            if first_slope.unwrap_or(0.0).abs() <= 1e-10 * f.abs() {
                converged = true;
                break;
            }
            return Err(Error::LineSearch {
                iteration: iterations,
                backtracks: MAX_BACKTRACKS,
                objective: f,
            });
        };

        iterations += 1;
        trajectory.push(f_new);
        let decrease = (f - f_new) / f.abs().max(f64::MIN_POSITIVE);
        let g_new = grad(&x_new)?;

        let s: Vec<f64> = x_new.as_slice().iter().zip(x.as_slice()).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.as_slice().iter().zip(g.as_slice()).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        let ss: f64 = s.iter().zip(&inv_w).map(|(v, iw)| v * v / iw).sum();
        // Barzilai-Borwein length for the next steepest-descent trial.
        step = if sy > 0.0 && ss > 0.0 { ss / sy } else { 2.0 * t };
        if config.memory > 0 && sy > 1e-12 * ss.sqrt() * dot(&y, &y).sqrt() {
            if history.len() == config.memory {
                history.pop_front();
            }
            history.push_back(Pair { rho: 1.0 / sy, s, y });
        }

        x = x_new;
        g = g_new;
        f = f_new;
        stalled = if decrease < config.rel_tol { stalled + 1 } else { 0 };
        if stalled == STALL_LIMIT {
            converged = true;
            break;
        }
    }

    let report = SolveReport {
        iterations,
        objective_trajectory: trajectory,
        final_objective: f,
        converged,
        seconds: Some(started.elapsed().as_secs_f64()),
    };
    Ok((from_coords(&x, objective, params)?, report))
}
