//! Weighted mean matrices `A = (λ_k/Λ_j)_{k≤j}` as implicit operators.
//!
//! `A` and `Aᵀ` are applied with prefix and suffix scans, so an `N × N`
//! section costs `O(N)` per product and is never stored. Only non-negative
//! vectors are considered: `A` has non-negative entries, so its `l^p` norm
//! is attained on non-negative vectors.
//!
//! The norm estimate is a lower bound. It is an achieved ratio
//! `‖Ax‖_p / ‖x‖_p` for the truncated section, which in turn never exceeds
//! the norm of the infinite matrix.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::constants::cartlidge_l;
use crate::means::TermSequence;
use crate::sum::CompensatedSum;
use crate::weights::WeightProfile;
use crate::{Error, Result};

/// Seed for the optional random restart.
pub const RESTART_SEED: u64 = 0x5EED;
/// Per-step slack when checking that the ratio sequence does not decrease.
pub const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormEstimate {
    pub p: f64,
    #[serde(rename = "N")]
    pub n: usize,
    /// Best ratio found; a floor for `‖A‖_{p,p}`.
    pub lower_bound: f64,
    /// `p/(p - L)` when `L < p`.
    pub cartlidge_upper: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Steps where the ratio dropped by more than [`MONOTONE_SLACK`].
    pub monotonicity_warnings: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormOptions {
    pub max_iters: usize,
    pub tol: f64,
    /// Also start from `e_1` and from a seeded random vector.
    pub restarts: bool,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self {
            max_iters: 10_000,
            tol: 1e-13,
            restarts: false,
        }
    }
}

fn check_len(profile: &WeightProfile, n: usize) -> Result<()> {
    if profile.len() != n {
        return Err(Error::LengthMismatch {
            expected: profile.len(),
            actual: n,
        });
    }
    Ok(())
}

fn apply(lam: &[f64], big: &[f64], x: &[f64]) -> Vec<f64> {
    let mut acc = CompensatedSum::new();
    x.iter()
        .zip(lam)
        .zip(big)
        .map(|((&xk, &lk), &sk)| {
            acc += lk * xk;
            acc.value() / sk
        })
        .collect()
}

fn apply_transpose(lam: &[f64], big: &[f64], z: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; z.len()];
    let mut acc = CompensatedSum::new();
    for k in (0..z.len()).rev() {
        acc += z[k] / big[k];
        out[k] = lam[k] * acc.value();
    }
    out
}

/// `y_n = (Σ_{k≤n} λ_k x_k) / Λ_n`.
pub fn apply_mean_matrix(profile: &WeightProfile, x: &TermSequence) -> Result<TermSequence> {
    check_len(profile, x.len())?;
    TermSequence::new(apply(profile.lambdas(), profile.partial_sums(), x.values()))
}

/// `z ↦ Aᵀz`, i.e. `(Aᵀz)_k = λ_k Σ_{n≥k} z_n / Λ_n`.
pub fn apply_mean_matrix_transpose(
    profile: &WeightProfile,
    z: &TermSequence,
) -> Result<TermSequence> {
    check_len(profile, z.len())?;
    TermSequence::new(apply_transpose(
        profile.lambdas(),
        profile.partial_sums(),
        z.values(),
    ))
}

/// `‖v‖_p`, scaled by the largest entry to stay clear of under/overflow.
pub fn lp_norm(v: &[f64], p: f64) -> f64 {
    let m = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if m == 0.0 {
        return 0.0;
    }
    let s: CompensatedSum = v.iter().map(|x| (x.abs() / m).powf(p)).collect();
    m * s.value().powf(1.0 / p)
}

/// `‖A‖_{p,p} ≤ p/(p - L)` with `L` taken over `n ≤ horizon`; `None` if
/// `L ≥ p`.
pub fn cartlidge_bound(profile: &WeightProfile, p: f64, horizon: usize) -> Result<Option<f64>> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidP(p));
    }
    let l = cartlidge_l(profile, horizon)?.sup_value;
    Ok((l < p).then(|| p / (p - l)))
}

struct Run {
    best: f64,
    iterations: usize,
    converged: bool,
    warnings: usize,
}

fn power_run(lam: &[f64], big: &[f64], p: f64, mut x: Vec<f64>, opts: &NormOptions) -> Run {
    let q_exp = 1.0 / (p - 1.0);
    let norm = lp_norm(&x, p);
    x.iter_mut().for_each(|v| *v /= norm);
    let mut best = 0.0f64;
    let mut prev: Option<f64> = None;
    let mut warnings = 0;
    for it in 1..=opts.max_iters {
        let y = apply(lam, big, &x);
        let ratio = lp_norm(&y, p);
        best = best.max(ratio);
        if let Some(prev) = prev {
            if ratio < prev - MONOTONE_SLACK {
                warnings += 1;
            }
            if (ratio - prev).abs() < opts.tol {
                return Run {
                    best,
                    iterations: it,
                    converged: true,
                    warnings,
                };
            }
        }
        prev = Some(ratio);
        // x ← Φ_q(Aᵀ Φ_p(Ax)), Φ_s(v) = v^{s-1}
        let ymax = y.iter().fold(0.0f64, |m, v| m.max(*v));
        let z: Vec<f64> = y.iter().map(|v| (v / ymax).powf(p - 1.0)).collect();
        let w = apply_transpose(lam, big, &z);
        let wmax = w.iter().fold(0.0f64, |m, v| m.max(*v));
        x = w.iter().map(|v| (v / wmax).powf(q_exp)).collect();
        let norm = lp_norm(&x, p);
        x.iter_mut().for_each(|v| *v /= norm);
    }
    Run {
        best,
        iterations: opts.max_iters,
        converged: false,
        warnings,
    }
}

/// Lower bound on the `l^p` norm of the leading `n × n` section via the
/// nonlinear power method, started from the uniform vector.
pub fn estimate_norm_lp(
    profile: &WeightProfile,
    n: usize,
    p: f64,
    max_iters: usize,
    tol: f64,
) -> Result<NormEstimate> {
    estimate_norm_lp_with(
        profile,
        n,
        p,
        &NormOptions {
            max_iters,
            tol,
            restarts: false,
        },
    )
}

pub fn estimate_norm_lp_with(
    profile: &WeightProfile,
    n: usize,
    p: f64,
    opts: &NormOptions,
) -> Result<NormEstimate> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidP(p));
    }
    if n == 0 {
        return Err(Error::ZeroSize);
    }
    if opts.max_iters == 0 {
        return Err(Error::ZeroIterations);
    }
    if !(opts.tol > 0.0 && opts.tol.is_finite()) {
        return Err(Error::InvalidTolerance(opts.tol));
    }
    profile.require_positive(n)?;
    let lam = &profile.lambdas()[..n];
    let big = &profile.partial_sums()[..n];

    let mut starts = vec![vec![1.0; n]];
    if opts.restarts {
        let mut e1 = vec![0.0; n];
        e1[0] = 1.0;
        starts.push(e1);
        let mut rng = ChaCha8Rng::seed_from_u64(RESTART_SEED);
        starts.push((0..n).map(|_| rng.gen_range(f64::EPSILON..1.0)).collect());
    }

    let mut lower_bound = 0.0f64;
    let mut iterations = 0;
    let mut converged = true;
    let mut warnings = 0;
    for x0 in starts {
        let run = power_run(lam, big, p, x0, opts);
        lower_bound = lower_bound.max(run.best);
        iterations += run.iterations;
        converged &= run.converged;
        warnings += run.warnings;
    }

    // the section sees only λ_1..λ_N, so L over n ≤ N-1 already bounds it
    let cartlidge_upper = if n >= 2 {
        cartlidge_bound(profile, p, n - 1)?
    } else {
        None
    };

    Ok(NormEstimate {
        p,
        n,
        lower_bound,
        cartlidge_upper,
        iterations,
        converged,
        monotonicity_warnings: warnings,
    })
}
