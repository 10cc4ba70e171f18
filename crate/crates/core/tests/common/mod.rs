//! Independent oracles for the integration and acceptance tests.
//!
//! Nothing here calls into the crate's numerical routines: objectives are
//! evaluated as direct products of powers, which is fine for the small
//! sizes the oracles are used at.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// `Σ_n Π_{k≤n} a_k^{λ_k/Λ_n}` by direct multiplication.
pub fn direct_objective(lam: &[f64], a: &[f64]) -> f64 {
    let mut total = 0.0;
    let mut big = 0.0;
    for n in 0..a.len() {
        big += lam[n];
        let mut g = 1.0;
        for k in 0..=n {
            g *= a[k].powf(lam[k] / big);
        }
        total += g;
    }
    total
}

fn direct_gradient(lam: &[f64], a: &[f64]) -> Vec<f64> {
    let n_len = a.len();
    let mut means = Vec::with_capacity(n_len);
    let mut bigs = Vec::with_capacity(n_len);
    let mut big = 0.0;
    for n in 0..n_len {
        big += lam[n];
        bigs.push(big);
        means.push((0..=n).map(|k| a[k].powf(lam[k] / big)).product::<f64>());
    }
    (0..n_len)
        .map(|k| {
            // infinite at the boundary; any large finite slope pushes back inside
            let g: f64 = (k..n_len)
                .map(|n| means[n] * lam[k] / (bigs[n] * a[k]))
                .sum();
            if g.is_finite() {
                g.min(1e8)
            } else {
                1e8
            }
        })
        .collect()
}

/// Euclidean projection onto the probability simplex (sort-based).
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cumulative += ui;
        let t = (cumulative - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Projected gradient ascent with backtracking from one start point. Stops
/// when no step size down to 1e-18 improves the objective.
pub fn projected_gradient_ascent(lam: &[f64], start: &[f64], max_iters: usize) -> (f64, Vec<f64>) {
    let mut a = project_simplex(start);
    let mut value = direct_objective(lam, &a);
    let mut step = 0.1;
    for _ in 0..max_iters {
        let grad = direct_gradient(lam, &a);
        step *= 2.0;
        let mut improved = None;
        while step > 1e-18 {
            let cand = project_simplex(
                &a.iter()
                    .zip(&grad)
                    .map(|(x, g)| x + step * g)
                    .collect::<Vec<_>>(),
            );
            let cand_value = direct_objective(lam, &cand);
            if cand_value.is_finite() && cand_value > value {
                improved = Some((cand, cand_value));
                break;
            }
            step *= 0.5;
        }
        match improved {
            Some((cand, cand_value)) => {
                a = cand;
                value = cand_value;
            }
            None => break,
        }
    }
    (value, a)
}

/// Best of `restarts` projected-gradient runs from random simplex points.
pub fn brute_force_mu(lam: &[f64], restarts: usize, rng: &mut ChaCha8Rng) -> f64 {
    (0..restarts)
        .map(|_| {
            let start: Vec<f64> = (0..lam.len()).map(|_| rng.gen_range(0.05..1.0)).collect();
            let s: f64 = start.iter().sum();
            let start: Vec<f64> = start.iter().map(|x| x / s).collect();
            projected_gradient_ascent(lam, &start, 20_000).0
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Maximizes `φ(a_1) = direct_objective(λ, (a_1, 1 - a_1))` over a dense
/// grid, then refines the best cell by golden-section search.
pub fn two_term_oracle(lam: [f64; 2]) -> (f64, f64) {
    let phi = |x: f64| direct_objective(&lam, &[x, 1.0 - x]);
    let grid = 10_000;
    let best = (1..grid)
        .map(|i| i as f64 / grid as f64)
        .max_by(|x, y| phi(*x).partial_cmp(&phi(*y)).unwrap())
        .unwrap();
    let (mut lo, mut hi) = (best - 1.0 / grid as f64, best + 1.0 / grid as f64);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    while hi - lo > 1e-15 {
        if phi(c) > phi(d) {
            hi = d;
        } else {
            lo = c;
        }
        c = hi - inv_phi * (hi - lo);
        d = lo + inv_phi * (hi - lo);
    }
    let x = 0.5 * (lo + hi);
    (phi(x), x)
}

/// Log-uniform weights in `[0.1, 10]`.
pub fn random_weights(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len)
        .map(|_| 10f64.powf(rng.gen_range(-1.0..1.0)))
        .collect()
}

/// Largest singular value of the dense weighted mean matrix, built entry by
/// entry, via plain power iteration on `AᵀA`.
pub fn dense_spectral_norm(lam: &[f64]) -> f64 {
    let n = lam.len();
    let mut a = vec![vec![0.0; n]; n];
    let mut big = 0.0;
    for j in 0..n {
        big += lam[j];
        for k in 0..=j {
            a[j][k] = lam[k] / big;
        }
    }
    let mut x = vec![1.0; n];
    let mut sigma = 0.0;
    for _ in 0..100_000 {
        let y: Vec<f64> = (0..n)
            .map(|j| (0..n).map(|k| a[j][k] * x[k]).sum())
            .collect();
        let z: Vec<f64> = (0..n)
            .map(|k| (0..n).map(|j| a[j][k] * y[j]).sum())
            .collect();
        let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        let next: Vec<f64> = z.iter().map(|v| v / norm).collect();
        let new_sigma = norm.sqrt();
        x = next;
        if (new_sigma - sigma).abs() < 1e-15 {
            return new_sigma;
        }
        sigma = new_sigma;
    }
    sigma
}
