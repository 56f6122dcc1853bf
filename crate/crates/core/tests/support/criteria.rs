//! Solver-level experiments shared by the solver tests and the acceptance run.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spdreg::analysis::{convergence_study, default_alpha_rule, snr, StudySetup};
use spdreg::field::{FunctionalParams, Mask, SymField, TensorField};
use spdreg::optim::{solve, Objective, Problem, SolverConfig};
use spdreg::spd::{dist_log_euclidean, mat_exp, project_full, SymMat, DEFAULT_EPSILON, DEFAULT_Z};
use spdreg::synth::{corrupt_field, default_directions, make_staircase_phantom, NoiseSpec, DEFAULT_A0, DEFAULT_B};

pub type Check = Result<String, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

pub fn random_logs(seed: u64, w: usize, h: usize, scale: f64) -> SymField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..w * h * 6).map(|_| rng.random_range(-scale..scale)).collect();
    SymField::from_vec(w, h, 3, data).unwrap()
}

pub fn field_from_logs(l: &SymField) -> TensorField {
    TensorField::from_fn(l.width(), l.height(), DEFAULT_Z, |c, r| {
        mat_exp(&l.mat(r * l.width() + c))
    })
    .unwrap()
}

fn max_abs(f: &SymField) -> f64 {
    f.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn max_rel_err(a: &SymField, b: &SymField) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        / max_abs(b)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn tight_solver(max_iters: usize) -> SolverConfig {
    SolverConfig {
        max_iters,
        rel_tol: 1e-300,
        ..SolverConfig::default()
    }
}

/// Analytic against central-difference gradients on random 6×6 fields, plus
/// the step-size order of the difference error.
pub fn gradient_agreement(fields: usize) -> Check {
    let mut worst = [0.0f64; 2];
    let mut orders = Vec::new();
    for (slot, (p, tol)) in [(2.0, 1e-5), (1.1, 1e-4)].into_iter().enumerate() {
        for k in 0..fields as u64 {
            let data = random_logs(1000 + k, 6, 6, 1.0);
            let c = random_logs(2000 + k, 6, 6, 1.0);
            let params = FunctionalParams {
                p,
                alpha: 0.7,
                s: 0.5,
                n_rho: 2,
                ..FunctionalParams::default()
            };
            let moll = params.mollifier().map_err(err)?;
            let problem = Problem::new(Objective::LogEuclidean, data, Mask::full(6, 6), params, &moll).map_err(err)?;
            let g = problem.gradient(&c).map_err(err)?;
            let fd = problem.gradient_fd(&c, 1e-6).map_err(err)?;
            let e = max_rel_err(&fd, &g);
            worst[slot] = worst[slot].max(e);
            if e >= tol {
                return Err(format!("p={p}, field {k}: relative error {e:.2e} ≥ {tol:e}"));
            }
            // at p = 2 the objective is quadratic in log coordinates and the
            // difference quotient is exact, so the order is measured at p = 1.1
            if p != 2.0 && k < 5 {
                let e1 = max_rel_err(&problem.gradient_fd(&c, 1e-2).map_err(err)?, &g);
                let e2 = max_rel_err(&problem.gradient_fd(&c, 5e-3).map_err(err)?, &g);
                orders.push((e1 / e2).log2());
            }
        }
    }
    let (lo, hi) = orders
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
    if lo < 1.7 || hi > 2.3 {
        return Err(format!(
            "difference error order in [{lo:.3}, {hi:.3}], expected about 2"
        ));
    }
    Ok(format!(
        "worst relative error {:.1e} (p=2), {:.1e} (p=1.1); error order {lo:.2}..{hi:.2}",
        worst[0], worst[1]
    ))
}

/// Two random starts reach the same minimizer on random 8×8 denoising problems.
pub fn uniqueness(instances: usize, tol: f64) -> Check {
    let params = FunctionalParams {
        p: 1.1,
        s: 0.5,
        alpha: 0.3,
        ..FunctionalParams::default()
    };
    let mask = Mask::full(8, 8);
    let config = SolverConfig {
        max_iters: 3000,
        rel_tol: 1e-300,
        ..SolverConfig::default()
    };
    let mut worst = 0.0f64;
    for k in 0..instances as u64 {
        let data = field_from_logs(&random_logs(10 + k, 8, 8, 1.0));
        let a = field_from_logs(&random_logs(100 + k, 8, 8, 2.0));
        let b = field_from_logs(&random_logs(200 + k, 8, 8, 2.0));
        let (ra, _) = solve(&data, &mask, &params, Objective::LogEuclidean, &config, Some(&a)).map_err(err)?;
        let (rb, _) = solve(&data, &mask, &params, Objective::LogEuclidean, &config, Some(&b)).map_err(err)?;
        let d = spdreg::analysis::summed_log_distance(&ra, &rb).map_err(err)?;
        worst = worst.max(d);
        if d > tol {
            return Err(format!("instance {k}: minimizers differ by {d:e}"));
        }
    }
    Ok(format!(
        "{instances} instances, largest summed log-distance {worst:.1e}"
    ))
}

/// Denoising minimizers at p = 2 are no farther apart than their data.
pub fn prox_nonexpansive(pairs: usize, slack: f64) -> Check {
    let params = FunctionalParams {
        p: 2.0,
        s: 0.5,
        alpha: 0.5,
        n_rho: 2,
        ..FunctionalParams::default()
    };
    let mask = Mask::full(6, 6);
    let config = tight_solver(2000);
    let mut worst = f64::NEG_INFINITY;
    for k in 0..pairs as u64 {
        let l1 = random_logs(300 + k, 6, 6, 1.5);
        let l2 = random_logs(400 + k, 6, 6, 1.5);
        let (r1, _) = solve(
            &field_from_logs(&l1),
            &mask,
            &params,
            Objective::LogEuclidean,
            &config,
            None,
        )
        .map_err(err)?;
        let (r2, _) = solve(
            &field_from_logs(&l2),
            &mask,
            &params,
            Objective::LogEuclidean,
            &config,
            None,
        )
        .map_err(err)?;
        let out = r1
            .to_log_coords()
            .map_err(err)?
            .sub(&r2.to_log_coords().map_err(err)?)
            .norm();
        let inp = l1.sub(&l2).norm();
        worst = worst.max(out - inp);
        if out > inp + slack {
            return Err(format!(
                "pair {k}: ‖ΔL*‖ = {out:.9} > ‖ΔL^δ‖ + {slack:e} = {:.9}",
                inp + slack
            ));
        }
    }
    Ok(format!("{pairs} pairs, largest ‖ΔL*‖ − ‖ΔL^δ‖ = {worst:.3}"))
}

/// Closed-form minimizer of the two-pixel problem with p = 2 and all pairs.
///
/// Stationarity: `2(L₀ − D₀) + 4α(L₀ − L₁) = 0` and its mirror, so
/// `L₀ = ((1 + 2α) D₀ + 2α D₁) / (1 + 4α)`.
pub fn two_pixel_oracle(cases: usize, tol: f64) -> Check {
    let alpha = 0.5;
    let params = FunctionalParams {
        p: 2.0,
        s: 0.5,
        alpha,
        l: 0,
        ..FunctionalParams::default()
    };
    let config = tight_solver(500);
    let mut worst = 0.0f64;
    for k in 0..cases as u64 {
        let d = random_logs(500 + k, 2, 1, 1.0);
        let (d0, d1) = (d.mat(0), d.mat(1));
        let denom = 1.0 + 4.0 * alpha;
        let expect0 = d0
            .scale((1.0 + 2.0 * alpha) / denom)
            .add(&d1.scale(2.0 * alpha / denom));
        let expect1 = d1
            .scale((1.0 + 2.0 * alpha) / denom)
            .add(&d0.scale(2.0 * alpha / denom));
        let (rec, _) = solve(
            &field_from_logs(&d),
            &Mask::full(2, 1),
            &params,
            Objective::LogEuclidean,
            &config,
            None,
        )
        .map_err(err)?;
        let l = rec.to_log_coords().map_err(err)?;
        let e = l
            .mat(0)
            .sub(&expect0)
            .frobenius()
            .max(l.mat(1).sub(&expect1).frobenius());
        worst = worst.max(e);
        if e > tol {
            return Err(format!("case {k}: solver differs from the closed form by {e:e}"));
        }
    }
    Ok(format!("{cases} cases, largest deviation {worst:.1e}"))
}

pub struct DenoisingRow {
    pub seed: u64,
    pub noisy: f64,
    pub log_euclidean: f64,
    pub sobolev: [f64; 2],
}

/// Staircase denoising at σ² = 40: SNR of the data, of the log-Euclidean
/// reconstruction and of the Sobolev comparison at β = 2 and 3.
pub fn denoising_runs(seeds: std::ops::Range<u64>) -> Result<Vec<DenoisingRow>, String> {
    let phantom = make_staircase_phantom(10).map_err(err)?;
    let dirs = default_directions();
    let mask = Mask::full(10, 10);
    let config = SolverConfig::default();
    let le = FunctionalParams {
        alpha: 1.0,
        p: 1.1,
        s: 0.5,
        n_rho: 3,
        ..FunctionalParams::default()
    };
    seeds
        .map(|seed| {
            let noisy = corrupt_field(
                &phantom,
                &NoiseSpec::new(40.0, seed).map_err(err)?,
                DEFAULT_B,
                DEFAULT_A0,
                &dirs,
            )
            .map_err(err)?;
            let (rec, _) = solve(&noisy, &mask, &le, Objective::LogEuclidean, &config, None).map_err(err)?;
            let mut sobolev = [0.0; 2];
            for (slot, beta) in [2.0, 3.0].into_iter().enumerate() {
                let fc = FunctionalParams { beta, ..le.clone() };
                let (r, _) = solve(&noisy, &mask, &fc, Objective::Sobolev, &config, None).map_err(err)?;
                sobolev[slot] = snr(&phantom, &r).map_err(err)?;
            }
            Ok(DenoisingRow {
                seed,
                noisy: snr(&phantom, &noisy).map_err(err)?,
                log_euclidean: snr(&phantom, &rec).map_err(err)?,
                sobolev,
            })
        })
        .collect()
}

/// Median log-Euclidean SNR at least `gain` times the median noisy SNR, and
/// above the Sobolev comparison at both β.
pub fn denoising_gain(seeds: u64, gain: f64) -> Check {
    let rows = denoising_runs(0..seeds)?;
    let noisy = median(rows.iter().map(|r| r.noisy).collect());
    let le = median(rows.iter().map(|r| r.log_euclidean).collect());
    let fc2 = median(rows.iter().map(|r| r.sobolev[0]).collect());
    let fc3 = median(rows.iter().map(|r| r.sobolev[1]).collect());
    let summary = format!(
        "median SNR noisy {noisy:.3}, log-Euclidean {le:.3} ({:.4}×), Sobolev β=2 {fc2:.3}, β=3 {fc3:.3}",
        le / noisy
    );
    let mut failures = Vec::new();
    if le < gain * noisy {
        failures.push(format!("gain {:.4} < {gain}", le / noisy));
    }
    if !(le > fc2 && le > fc3) {
        failures.push("Sobolev comparison not exceeded".to_string());
    }
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{}; {summary}", failures.join(", ")))
    }
}

/// Hole of the inpainting experiment: a 4×4 square in the middle of a 10×10 grid.
pub const HOLE: (usize, usize, usize, usize) = (3, 3, 4, 4);

/// Median per-pixel log-distance to the phantom inside the hole, for the
/// reconstruction and for the `project_full(0)` fill.
pub fn inpainting_run(seed: u64) -> Result<(f64, f64), String> {
    let phantom = make_staircase_phantom(10).map_err(err)?;
    let noisy = corrupt_field(
        &phantom,
        &NoiseSpec::new(40.0, seed).map_err(err)?,
        DEFAULT_B,
        DEFAULT_A0,
        &default_directions(),
    )
    .map_err(err)?;
    let (c0, r0, w, h) = HOLE;
    let mask = Mask::with_hole(10, 10, c0, r0, w, h);
    let params = FunctionalParams {
        alpha: 0.5,
        p: 1.1,
        s: 0.5,
        n_rho: 2,
        ..FunctionalParams::default()
    };
    let (rec, _) = solve(
        &noisy,
        &mask,
        &params,
        Objective::LogEuclidean,
        &SolverConfig::default(),
        None,
    )
    .map_err(err)?;
    let fill = project_full(&SymMat::zeros(3), DEFAULT_EPSILON, DEFAULT_Z).map_err(err)?;
    let (mut d_rec, mut d_fill) = (Vec::new(), Vec::new());
    for i in (0..100).filter(|&i| !mask.is_set(i)) {
        let truth = &phantom.tensors()[i];
        d_rec.push(dist_log_euclidean(&rec.tensors()[i], truth).map_err(err)?);
        d_fill.push(dist_log_euclidean(&fill, truth).map_err(err)?);
    }
    Ok((median(d_rec), median(d_fill)))
}

pub fn inpainting(seeds: u64) -> Check {
    let mut parts = Vec::new();
    for seed in 0..seeds {
        let (rec, fill) = inpainting_run(seed)?;
        if rec.is_nan() || rec >= fill {
            return Err(format!(
                "seed {seed}: hole median {rec:.3} not below the fill value {fill:.3}"
            ));
        }
        parts.push(format!("{rec:.2}"));
    }
    let (_, fill) = inpainting_run(0)?;
    Ok(format!("hole medians [{}] vs fill {fill:.2}", parts.join(", ")))
}

/// Noise levels (raw-signal σ) of the convergence study, high to low.
pub fn study_levels() -> [f64; 3] {
    [90f64.sqrt(), 40f64.sqrt(), 10f64.sqrt()]
}

/// Median over seeds of the reconstruction error is non-increasing as δ falls.
pub fn convergence_monotone(seeds: u64) -> Check {
    let phantom = make_staircase_phantom(10).map_err(err)?;
    let params = FunctionalParams {
        p: 1.1,
        s: 0.5,
        n_rho: 3,
        ..FunctionalParams::default()
    };
    let levels = study_levels();
    let mut per_level = vec![Vec::new(); levels.len()];
    for seed in 0..seeds {
        let setup = StudySetup {
            params: params.clone(),
            solver: SolverConfig::default(),
            seed,
        };
        let rows = convergence_study(&phantom, &levels, default_alpha_rule(params.p), &setup).map_err(err)?;
        for (slot, row) in rows.iter().enumerate() {
            per_level[slot].push(row.distance);
        }
    }
    let medians: Vec<f64> = per_level.into_iter().map(median).collect();
    let text = medians
        .iter()
        .map(|m| format!("{m:.3}"))
        .collect::<Vec<_>>()
        .join(" ≥ ");
    if medians.windows(2).all(|w| w[1] <= w[0]) {
        Ok(format!("median distances {text}"))
    } else {
        Err(format!("not monotone: {text}"))
    }
}
