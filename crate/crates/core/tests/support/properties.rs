//! Randomized geometry checks shared by the property tests and the acceptance run.
//!
//! Every check draws its own cases from a seeded generator and returns a short
//! summary on success or the first counterexample on failure. Transformed
//! tensors are always rebuilt from dense matrices so each one goes through a
//! fresh eigendecomposition.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use spdreg::field::{phi_regularizer, theta_coords, FunctionalParams, Metric, Mollifier, SymField, TensorField};
use spdreg::spd::{
    dist_log_euclidean, mat_exp, mat_log, project_full, project_log_ball, project_log_coords, project_spec, sym_eig,
    SpdTensor, SymMat,
};

pub type Check = Result<String, String>;

pub const CASES: usize = 10_000;
/// Random competitors per case in the spectral-projection oracle.
pub const ORACLE_SAMPLES_PER_CASE: usize = 10;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn matmul(a: &[f64], b: &[f64]) -> [f64; 9] {
    let mut c = [0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            c[i * 3 + j] = (0..3).map(|k| a[i * 3 + k] * b[k * 3 + j]).sum();
        }
    }
    c
}

fn transpose(a: &[f64]) -> [f64; 9] {
    let mut t = [0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            t[j * 3 + i] = a[i * 3 + j];
        }
    }
    t
}

/// Haar-like orthogonal matrix from Gram–Schmidt on a Gaussian matrix.
pub fn random_orthogonal<R: Rng>(rng: &mut R) -> [f64; 9] {
    loop {
        let mut q = [0.0; 9];
        let mut ok = true;
        for r in 0..3 {
            let mut v: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
            for p in 0..r {
                let d: f64 = (0..3).map(|k| v[k] * q[p * 3 + k]).sum();
                (0..3).for_each(|k| v[k] -= d * q[p * 3 + k]);
            }
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n < 1e-6 {
                ok = false;
                break;
            }
            (0..3).for_each(|k| q[r * 3 + k] = v[k] / n);
        }
        if ok {
            return q;
        }
    }
}

/// `U diag(values) Uᵀ` as a symmetric matrix.
pub fn assemble(u: &[f64; 9], values: &[f64; 3]) -> SymMat {
    let mut d = [0.0; 9];
    for i in 0..3 {
        d[i * 3 + i] = values[i];
    }
    let m = matmul(&matmul(u, &d), &transpose(u));
    SymMat::from_dense(3, &m).unwrap()
}

/// Symmetric matrix with Gaussian coefficients, scaled to Frobenius norm `r`.
pub fn random_sym_with_norm<R: Rng>(rng: &mut R, r: f64) -> SymMat {
    let c: Vec<f64> = (0..6).map(|_| rng.sample(StandardNormal)).collect();
    let s = SymMat::from_coeffs(3, &c).unwrap();
    let n = s.frobenius();
    s.scale(r / n)
}

/// Uniform sample of the Frobenius ball of radius `z` in the 6-dimensional symmetric space.
pub fn random_in_ball<R: Rng>(rng: &mut R, z: f64) -> SymMat {
    let r = z * rng.random::<f64>().powf(1.0 / 6.0);
    random_sym_with_norm(rng, r)
}

pub fn random_sym<R: Rng>(rng: &mut R, scale: f64) -> SymMat {
    let c: Vec<f64> = (0..6).map(|_| rng.random_range(-scale..scale)).collect();
    SymMat::from_coeffs(3, &c).unwrap()
}

/// `Exp(S)` for `S` uniform in the log-ball of radius `z`, rebuilt from its dense form.
pub fn random_spd<R: Rng>(rng: &mut R, z: f64) -> SpdTensor {
    let s = random_in_ball(rng, z);
    SpdTensor::new(mat_exp(&s).unwrap().matrix().clone()).unwrap()
}

fn dense_spd(m: &SymMat) -> SpdTensor {
    SpdTensor::new(m.clone()).unwrap()
}

/// Inverse of a 3×3 symmetric matrix through the adjugate.
pub fn adjugate_inverse(m: &SymMat) -> SymMat {
    let a = m.to_dense();
    let cof =
        |r0: usize, r1: usize, c0: usize, c1: usize| a[r0 * 3 + c0] * a[r1 * 3 + c1] - a[r0 * 3 + c1] * a[r1 * 3 + c0];
    let adj = [
        cof(1, 2, 1, 2),
        -cof(0, 2, 1, 2),
        cof(0, 1, 1, 2),
        -cof(1, 2, 0, 2),
        cof(0, 2, 0, 2),
        -cof(0, 1, 0, 2),
        cof(1, 2, 0, 1),
        -cof(0, 2, 0, 1),
        cof(0, 1, 0, 1),
    ];
    let det = a[0] * adj[0] + a[1] * adj[3] + a[2] * adj[6];
    let inv: Vec<f64> = adj.iter().map(|v| v / det).collect();
    SymMat::from_dense(3, &inv).unwrap()
}

fn rotate(m: &SymMat, u: &[f64; 9]) -> SymMat {
    let r = matmul(&matmul(u, &m.to_dense()), &transpose(u));
    SymMat::from_dense(3, &r).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn d(a: &SpdTensor, b: &SpdTensor) -> f64 {
    dist_log_euclidean(a, b).unwrap()
}

/// Symmetry, identity of indiscernibles and the triangle inequality.
pub fn metric_axioms(cases: usize, seed: u64) -> Check {
    let mut g = rng(seed);
    let mut worst_triangle = f64::NEG_INFINITY;
    for i in 0..cases {
        let (a, b, c) = (
            random_spd(&mut g, 4.0),
            random_spd(&mut g, 4.0),
            random_spd(&mut g, 4.0),
        );
        let (ab, ba) = (d(&a, &b), d(&b, &a));
        if ab != ba {
            return Err(format!("case {i}: d(A,B) = {ab:e} but d(B,A) = {ba:e}"));
        }
        if d(&a, &a) != 0.0 {
            return Err(format!("case {i}: d(A,A) = {:e}", d(&a, &a)));
        }
        // the same matrix decomposed twice
        let again = dense_spd(a.matrix());
        if d(&a, &again) > 1e-10 {
            return Err(format!(
                "case {i}: d(A, A') = {:e} for identical matrices",
                d(&a, &again)
            ));
        }
        let eq = a.matrix().sub(b.matrix()).frobenius() <= 1e-10;
        if (ab <= 1e-10) != eq {
            return Err(format!("case {i}: d = {ab:e} disagrees with matrix equality {eq}"));
        }
        let excess = d(&a, &c) - (ab + d(&b, &c));
        worst_triangle = worst_triangle.max(excess);
        if excess > 1e-9 {
            return Err(format!("case {i}: triangle inequality violated by {excess:e}"));
        }
    }
    Ok(format!("{cases} triples, worst triangle excess {worst_triangle:.2e}"))
}

/// `lo · ‖A−B‖² ≤ ‖Log A − Log B‖² ≤ hi · ‖A−B‖²` for `A, B` uniform in the log-ball of radius `z`.
pub fn norm_equivalence(cases: usize, seed: u64, z: f64, lo: f64, hi: f64) -> Check {
    let mut g = rng(seed);
    let (mut min_ratio, mut max_ratio) = (f64::INFINITY, 0.0f64);
    let mut violations = 0;
    let mut first = None;
    for i in 0..cases {
        let (a, b) = (random_spd(&mut g, z), random_spd(&mut g, z));
        let e = a.matrix().sub(b.matrix()).frobenius().powi(2);
        let l = mat_log(&a).unwrap().sub(&mat_log(&b).unwrap()).frobenius().powi(2);
        min_ratio = min_ratio.min(l / e);
        max_ratio = max_ratio.max(l / e);
        if l < lo * e - 1e-9 || l > hi * e + 1e-9 {
            violations += 1;
            first.get_or_insert(format!("case {i}: ‖ΔLog‖²/‖Δ‖² = {:.4}", l / e));
        }
    }
    let summary = format!("ratio range [{min_ratio:.4}, {max_ratio:.4}] vs bounds [{lo:.4}, {hi:.4}]");
    match first {
        None => Ok(format!("{cases} pairs, {summary}")),
        Some(f) => Err(format!(
            "{violations}/{cases} pairs outside the bounds, first {f}; {summary}"
        )),
    }
}

/// Distance invariance under scaling, inversion and orthogonal conjugation.
pub fn distance_invariances(cases: usize, seed: u64) -> Check {
    let mut g = rng(seed);
    let mut worst = 0.0f64;
    for i in 0..cases {
        let (a, b) = (random_spd(&mut g, 4.0), random_spd(&mut g, 4.0));
        let base = d(&a, &b);
        let c: f64 = g.random_range(0.05..20.0);
        let u = random_orthogonal(&mut g);
        let scaled = d(&dense_spd(&a.matrix().scale(c)), &dense_spd(&b.matrix().scale(c)));
        let inverted = d(
            &dense_spd(&adjugate_inverse(a.matrix())),
            &dense_spd(&adjugate_inverse(b.matrix())),
        );
        let rotated = d(&dense_spd(&rotate(a.matrix(), &u)), &dense_spd(&rotate(b.matrix(), &u)));
        for (name, v) in [("scaling", scaled), ("inversion", inverted), ("conjugation", rotated)] {
            let err = (v - base).abs();
            worst = worst.max(err);
            if err > 1e-9 {
                return Err(format!("case {i}: {name} changes the distance by {err:e}"));
            }
        }
    }
    Ok(format!("{cases} pairs, worst deviation {worst:.2e}"))
}

fn random_field<R: Rng>(rng: &mut R, w: usize, h: usize, z: f64) -> TensorField {
    let tensors = (0..w * h).map(|_| random_spd(rng, z)).collect();
    TensorField::new(w, h, 36.0, tensors).unwrap()
}

fn map_dense(w: &TensorField, f: impl Fn(&SymMat) -> SymMat) -> TensorField {
    w.map(|t| Ok(dense_spd(&f(t.matrix())))).unwrap()
}

/// `Φ` under the log-Euclidean metric is invariant to scaling, inversion and
/// conjugation; under the Euclidean metric only conjugation survives.
pub fn phi_invariances(cases: usize, seed: u64) -> Check {
    let mut g = rng(seed);
    let mut worst = 0.0f64;
    for i in 0..cases {
        let params = FunctionalParams {
            p: g.random_range(1.1..2.5),
            s: g.random_range(0.1..0.9),
            n_rho: 1,
            ..FunctionalParams::default()
        };
        let moll = Mollifier::bump(params.n_rho).unwrap();
        let w = random_field(&mut g, 3, 3, 3.0);
        let phi = |f: &TensorField, m: Metric| phi_regularizer(f, &params, m, &moll).unwrap();
        let base = phi(&w, Metric::LogEuclidean);
        let c: f64 = g.random_range(0.05..20.0);
        let u = random_orthogonal(&mut g);
        let checks = [
            (
                "scaling",
                phi(&map_dense(&w, |m| m.scale(c)), Metric::LogEuclidean),
                base,
            ),
            (
                "inversion",
                phi(&map_dense(&w, adjugate_inverse), Metric::LogEuclidean),
                base,
            ),
            (
                "conjugation",
                phi(&map_dense(&w, |m| rotate(m, &u)), Metric::LogEuclidean),
                base,
            ),
            (
                "Euclidean conjugation",
                phi(&map_dense(&w, |m| rotate(m, &u)), Metric::Euclidean),
                phi(&w, Metric::Euclidean),
            ),
        ];
        for (name, v, expect) in checks {
            let err = rel(v, expect);
            worst = worst.max(err);
            if err > 1e-9 {
                return Err(format!("case {i}: {name} changes Φ: {v:e} vs {expect:e}"));
            }
        }
    }
    // witness: Euclidean Φ is not scale invariant
    let w = random_field(&mut g, 3, 3, 1.0);
    let params = FunctionalParams {
        n_rho: 1,
        ..FunctionalParams::default()
    };
    let moll = Mollifier::bump(1).unwrap();
    let a = phi_regularizer(&w, &params, Metric::Euclidean, &moll).unwrap();
    let b = phi_regularizer(&map_dense(&w, |m| m.scale(2.0)), &params, Metric::Euclidean, &moll).unwrap();
    if rel(a, b) < 1e-3 {
        return Err(format!("Euclidean Φ unexpectedly scale invariant: {a:e} vs {b:e}"));
    }
    Ok(format!(
        "{cases} fields, worst relative deviation {worst:.2e}; Euclidean scaling witness {a:.4} → {b:.4}"
    ))
}

/// `Θ` on raw coefficients is invariant to adding a constant matrix and to negation.
pub fn theta_invariances(cases: usize, seed: u64) -> Check {
    let mut g = rng(seed);
    let mut worst = 0.0f64;
    for i in 0..cases {
        let (w, h) = (g.random_range(1..6), g.random_range(1..6));
        let p = g.random_range(1.0..3.0);
        let data: Vec<f64> = (0..w * h * 6).map(|_| g.random_range(-2.0..2.0)).collect();
        let f = SymField::from_vec(w, h, 3, data.clone()).unwrap();
        let shift: Vec<f64> = (0..6).map(|_| g.random_range(-5.0..5.0)).collect();
        let shifted: Vec<f64> = data.iter().enumerate().map(|(k, v)| v + shift[k % 6]).collect();
        let negated: Vec<f64> = data.iter().map(|v| -v).collect();
        let base = theta_coords(&f, p);
        for (name, v) in [
            (
                "translation",
                theta_coords(&SymField::from_vec(w, h, 3, shifted).unwrap(), p),
            ),
            (
                "reflection",
                theta_coords(&SymField::from_vec(w, h, 3, negated).unwrap(), p),
            ),
        ] {
            let err = rel(v, base);
            worst = worst.max(err);
            if err > 1e-9 {
                return Err(format!("case {i}: {name} changes Θ: {v:e} vs {base:e}"));
            }
        }
    }
    Ok(format!("{cases} fields, worst relative deviation {worst:.2e}"))
}

/// `Log ∘ Exp = id` on the ball of radius 36 and `Exp ∘ Log = id` on SPD matrices inside it.
pub fn exp_log_roundtrips(cases: usize, seed: u64) -> Check {
    let mut g = rng(seed);
    let mut worst = 0.0f64;
    for i in 0..cases {
        let s = random_in_ball(&mut g, 36.0);
        let back = mat_log(&mat_exp(&s).unwrap()).unwrap();
        let err = back.sub(&s).frobenius() / s.frobenius().max(1e-300);
        worst = worst.max(err);
        if err > 1e-9 {
            return Err(format!("case {i}: Log(Exp S) relative error {err:e}"));
        }

        // eigenvalues spread over [e^-36, e^36] with ‖log λ‖ ≤ 36
        let x = random_in_ball(&mut g, 36.0);
        let logs = sym_eig(&x).unwrap().values().to_vec();
        let u = random_orthogonal(&mut g);
        let a = assemble(&u, &[logs[0].exp(), logs[1].exp(), logs[2].exp()]);
        let Ok(a) = SpdTensor::new(a) else {
            // the smallest eigenvalue fell below the rounding floor of the largest one
            continue;
        };
        let back = mat_exp(&mat_log(&a).unwrap()).unwrap();
        let err = back.matrix().sub(a.matrix()).frobenius() / a.matrix().frobenius();
        worst = worst.max(err);
        if err > 1e-9 {
            return Err(format!("case {i}: Exp(Log A) relative error {err:e}"));
        }
    }
    Ok(format!("{cases} cases each way, worst relative error {worst:.2e}"))
}

/// `P₁`, `P₂` and `P` are idempotent.
pub fn projection_idempotence(cases: usize, seed: u64) -> Check {
    let mut g = rng(seed);
    let eps = f64::EPSILON;
    let close = |a: &SymMat, b: &SymMat| a.sub(b).frobenius() <= 1e-12 * a.frobenius().max(1.0);
    for i in 0..cases {
        let m = random_sym(&mut g, 10.0);
        let (lo, hi) = (g.random_range(0.01..1.0), g.random_range(1.0..5.0));
        let p1 = project_spec(&m, lo, hi).unwrap();
        if !close(project_spec(p1.matrix(), lo, hi).unwrap().matrix(), p1.matrix()) {
            return Err(format!("case {i}: P₁ not idempotent"));
        }
        let z = g.random_range(0.5..10.0);
        let a = random_spd(&mut g, 2.0 * z);
        let p2 = project_log_ball(&a, z).unwrap();
        if !close(project_log_ball(&p2, z).unwrap().matrix(), p2.matrix()) {
            return Err(format!("case {i}: P₂ not idempotent"));
        }
        if (mat_log(&p2).unwrap().frobenius() - z).abs() > 1e-9 && a.log_norm() > z {
            return Err(format!("case {i}: P₂ lands off the sphere"));
        }
        // a dense matrix cannot carry eigenvalues spread wider than ~1e12, so the
        // full projection is checked where its image is representable and, at the
        // default ε and z, through the log-coordinate route
        let (e, zz) = (g.random_range(1e-4..0.5), g.random_range(0.5..5.0));
        let p = project_full(&m, e, zz).unwrap();
        if !close(project_full(p.matrix(), e, zz).unwrap().matrix(), p.matrix()) {
            return Err(format!("case {i}: P not idempotent"));
        }
        let l = random_sym(&mut g, 60.0);
        let pl = project_log_coords(&l, eps, 36.0).unwrap();
        if !close(&project_log_coords(&pl, eps, 36.0).unwrap(), &pl) {
            return Err(format!("case {i}: P in log coordinates not idempotent"));
        }
    }
    Ok(format!("{cases} cases per projection"))
}

/// `P₁(M)` is at least as close to `M` as any sampled member of `SPD^spec_[lo,hi]`.
pub fn spectral_projection_optimality(cases: usize, seed: u64) -> Check {
    let mut g = rng(seed);
    let mut samples = 0usize;
    let mut min_margin = f64::INFINITY;
    for i in 0..cases {
        let m = random_sym(&mut g, 3.0);
        let lo = g.random_range(0.05..1.0);
        let hi = if i % 2 == 0 {
            f64::INFINITY
        } else {
            lo + g.random_range(0.5..4.0)
        };
        let p = project_spec(&m, lo, hi).unwrap();
        let best = m.sub(p.matrix()).frobenius();
        let top = if hi.is_finite() { hi } else { lo + 6.0 };
        for k in 0..ORACLE_SAMPLES_PER_CASE {
            let x = if k % 2 == 0 {
                let u = random_orthogonal(&mut g);
                assemble(&u, &std::array::from_fn(|_| g.random_range(lo..=top)))
            } else {
                // feasible point near the projection
                let cand = p.matrix().add(&random_sym(&mut g, 1e-2));
                let ev = sym_eig(&cand).unwrap();
                if ev.values().iter().any(|v| *v < lo || *v > hi) {
                    continue;
                }
                cand
            };
            samples += 1;
            let margin = m.sub(&x).frobenius() - best;
            min_margin = min_margin.min(margin);
            if margin < -1e-12 {
                return Err(format!("case {i}: a feasible matrix beats P₁ by {:e}", -margin));
            }
        }
    }
    Ok(format!(
        "{cases} matrices against {samples} feasible samples, smallest margin {min_margin:.2e}"
    ))
}

/// Tensors accepted under a log bound `z` keep their eigenvalues in `[e^{-z}, e^{z}]`.
pub fn eigenvalue_bounds(cases: usize, seed: u64) -> Check {
    let mut g = rng(seed);
    let mut accepted = 0;
    for i in 0..cases {
        let z = g.random_range(0.5..6.0);
        let a = random_spd(&mut g, 1.2 * z);
        let Ok(t) = SpdTensor::with_bound(a.matrix().clone(), z) else {
            continue;
        };
        accepted += 1;
        let (lo, hi) = ((-z).exp(), z.exp());
        if let Some(v) = t
            .eigenvalues()
            .iter()
            .find(|v| **v < lo * (1.0 - 1e-12) || **v > hi * (1.0 + 1e-12))
        {
            return Err(format!("case {i}: eigenvalue {v:e} outside [{lo:e}, {hi:e}]"));
        }
    }
    Ok(format!("{accepted} bounded tensors"))
}
