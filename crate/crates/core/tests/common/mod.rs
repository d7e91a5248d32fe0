//! Shared fixtures for the integration suites.
#![allow(dead_code)]

use ndarray::{Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use splitreg::{diversity_penalty, standardize, CoefficientBundle, PenaltySpec, StandardizedDesign};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(n: usize, p: usize, rng: &mut impl Rng) -> Array2<f64> {
    Array2::from_shape_fn((n, p), |_| StandardNormal.sample(rng))
}

/// `k` columns of norm `√n`, mutually orthogonal and orthogonal to the
/// constant vector, by Gram-Schmidt on `[1, Z]`.
pub fn centered_orthogonal_columns(n: usize, k: usize, rng: &mut impl Rng) -> Array2<f64> {
    assert!(k < n);
    let mut basis: Vec<Array1<f64>> = vec![Array1::from_elem(n, 1.0 / (n as f64).sqrt())];
    while basis.len() < k + 1 {
        let mut v: Array1<f64> = Array1::from_shape_fn(n, |_| StandardNormal.sample(rng));
        // Two passes of modified Gram-Schmidt for orthogonality to machine precision.
        for _ in 0..2 {
            for b in &basis {
                let c = v.dot(b);
                v = v - b * c;
            }
        }
        let norm = v.dot(&v).sqrt();
        if norm > 1e-8 {
            basis.push(v / norm);
        }
    }
    let mut out = Array2::zeros((n, k));
    for (j, b) in basis.iter().skip(1).enumerate() {
        out.column_mut(j).assign(&(b * (n as f64).sqrt()));
    }
    out
}

/// Design with `X/√n` orthonormal and a random unit-variance response.
pub fn orthogonal_design(n: usize, p: usize, rng: &mut impl Rng) -> StandardizedDesign {
    let x = centered_orthogonal_columns(n, p, rng);
    let y: Array1<f64> = Array1::from_shape_fn(n, |_| StandardNormal.sample(rng));
    standardize(x.view(), y.view()).unwrap()
}

/// Gaussian design with a few strong coefficients.
pub fn random_design(n: usize, p: usize, seed: u64) -> StandardizedDesign {
    let mut rng = rng(seed);
    let x = gaussian_matrix(n, p, &mut rng);
    let mut beta = Array1::zeros(p);
    for j in 0..p.min(5) {
        beta[j] = if j % 2 == 0 { 2.0 } else { -1.5 };
    }
    let noise: Array1<f64> = Array1::from_shape_fn(n, |_| StandardNormal.sample(&mut rng));
    let y = x.dot(&beta) + noise;
    standardize(x.view(), y.view()).unwrap()
}

/// Two predictors with `x₂ᵀx₁/n = ρ` and a standardized response with the
/// requested marginal correlations; `None` when no such response exists.
pub fn two_predictor_design(r1: f64, r2: f64, rho: f64, n: usize, rng: &mut impl Rng) -> Option<StandardizedDesign> {
    let u = centered_orthogonal_columns(n, 3, rng);
    let s = (1.0 - rho * rho).sqrt();
    let b = (r2 - rho * r1) / s;
    let rest = 1.0 - r1 * r1 - b * b;
    if rest <= 1e-3 {
        return None;
    }
    let mut x = Array2::zeros((n, 2));
    x.column_mut(0).assign(&u.column(0));
    x.column_mut(1).assign(&(&u.column(0) * rho + &u.column(1) * s));
    let y = &u.column(0) * r1 + &u.column(1) * b + &u.column(2) * rest.sqrt();
    Some(standardize(x.view(), y.view()).unwrap())
}

/// Matrix form of the joint objective:
/// `(1/2n)‖Y - XB‖²_F + λs((1-α)/2‖B‖²_F + α‖B‖₁) + (λd/2)(‖|B|ᵀ|B|‖₁ - ‖B‖²_F)`.
pub fn objective_frobenius(design: &StandardizedDesign, bundle: &CoefficientBundle, spec: &PenaltySpec) -> f64 {
    let n = design.n() as f64;
    let g = bundle.num_models();
    let b = bundle.beta();
    let mut big_y = Array2::zeros((design.n(), g));
    for mut c in big_y.axis_iter_mut(Axis(1)) {
        c.assign(design.y());
    }
    let resid = &big_y - &design.x().dot(b);
    let fro_resid: f64 = resid.iter().map(|v| v * v).sum();
    let fro_b: f64 = b.iter().map(|v| v * v).sum();
    let l1_b: f64 = b.iter().map(|v| v.abs()).sum();
    let abs_b = b.mapv(f64::abs);
    let gram_l1: f64 = abs_b.t().dot(&abs_b).iter().map(|v| v.abs()).sum();
    fro_resid / (2.0 * n)
        + spec.lambda_s * ((1.0 - spec.alpha) / 2.0 * fro_b + spec.alpha * l1_b)
        + spec.lambda_d / 2.0 * (gram_l1 - fro_b)
}

/// Literal triple sum `Σ_g Σ_{h≠g} Σ_j |β_j^g||β_j^h|` halved.
pub fn diversity_by_loops(bundle: &CoefficientBundle) -> f64 {
    let (p, g) = (bundle.num_features(), bundle.num_models());
    let mut total = 0.0;
    for a in 0..g {
        for b in 0..g {
            if a != b {
                for j in 0..p {
                    total += bundle.get(j, a).abs() * bundle.get(j, b).abs();
                }
            }
        }
    }
    let fast = diversity_penalty(bundle);
    debug_assert!((fast - total / 2.0).abs() <= 1e-9 * (1.0 + total));
    total / 2.0
}

/// Largest decrease of the objective found by moving single coordinates by ±`step`.
pub fn best_single_coordinate_improvement(design: &StandardizedDesign, bundle: &CoefficientBundle, spec: &PenaltySpec, step: f64) -> f64 {
    let base = objective_frobenius(design, bundle, spec);
    let mut best = 0.0f64;
    let mut beta = bundle.beta().clone();
    for j in 0..bundle.num_features() {
        for g in 0..bundle.num_models() {
            let orig = beta[[j, g]];
            for delta in [step, -step] {
                beta[[j, g]] = orig + delta;
                let moved = CoefficientBundle::from_matrix(beta.clone()).unwrap();
                best = best.max(base - objective_frobenius(design, &moved, spec));
            }
            beta[[j, g]] = orig;
        }
    }
    best
}

pub fn random_bundle(p: usize, g: usize, sparsity: f64, rng: &mut impl Rng) -> CoefficientBundle {
    let m = Array2::from_shape_fn((p, g), |_| {
        if rng.random::<f64>() < sparsity {
            0.0
        } else {
            StandardNormal.sample(rng)
        }
    });
    CoefficientBundle::from_matrix(m).unwrap()
}

pub fn sup_norm(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
