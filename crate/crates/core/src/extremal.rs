//! Exact finite-section best constants.
//!
//! `μ_N` is the maximum of `Σ_{n≤N} G_n` over `a ≥ 0`, `Σ a_n = 1`. At an
//! interior maximizer the Lagrange conditions read
//!
//! ```text
//!     μ a_k = λ_k Σ_{n=k}^{N} G_n / Λ_n,        k = 1, …, N
//! ```
//!
//! and summing them shows the multiplier equals `μ_N`. Writing
//! `ω_k = r_k - Λ_k a_{k+1} / (λ_{k+1} a_k)`, the system collapses to a
//! one-parameter recursion
//!
//! ```text
//!     Ω_1(μ) = 1/μ
//!     Ω_{k+1}^{Λ_{k+1}} = μ^{-λ_{k+1}} (Ω_k / ((λ_{k+1}/Λ_k)(r_k - Ω_k)))^{Λ_k}
//! ```
//!
//! with `Ω_k(μ_N) = ω_k` and terminal condition `Ω_N(μ_N) = r_N`. Each
//! `Ω_k` is strictly decreasing in `μ` on the domain `Ω_{k-1} < r_{k-1}`,
//! so `μ_N` is found by bisection on `ln Ω_N(μ) - ln r_N`, treating a trace
//! that leaves the domain as `Ω_N = +∞`. The maximizer is recovered from
//! the `ω_k` by inverting their definition.
//!
//! Everything runs in log space: the exponents `Λ_k` grow with `k` and the
//! direct form overflows almost immediately.

use serde::Serialize;

use crate::constants::gao_m;
use crate::means::{log_means, TermSequence};
use crate::sum::{compensated_sum, CompensatedSum};
use crate::weights::WeightProfile;
use crate::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const MAX_BISECTION_ITERATIONS: usize = 200;
/// Upper limit for the doubling search when `M` is unavailable.
pub const BRACKET_CAP: f64 = 1_152_921_504_606_846_976.0; // 2^60
/// Relative slack added to `e^M` for the initial upper bracket.
const BRACKET_SLACK: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceStatus {
    Completed,
    /// 1-based index `k` of the first `Ω_k ≥ r_k` (with `k < N`).
    DivergedAt(usize),
}

/// `ln Ω_k(μ)` for `k = 1, …, K`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OmegaTrace {
    pub mu: f64,
    pub log_omegas: Vec<f64>,
    pub status: TraceStatus,
}

impl OmegaTrace {
    pub fn is_completed(&self) -> bool {
        self.status == TraceStatus::Completed
    }

    pub fn omegas(&self) -> Vec<f64> {
        self.log_omegas.iter().map(|l| l.exp()).collect()
    }

    pub fn len(&self) -> usize {
        self.log_omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_omegas.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtremalSolution {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "mu_N")]
    pub mu_n: f64,
    pub a: TermSequence,
    /// `ω_k = Ω_k(μ_N)` for `k = 1, …, N-1`.
    pub omegas: Vec<f64>,
    pub kkt_residual: f64,
    pub bisection_iterations: usize,
}

fn check_mu(mu: f64) -> Result<()> {
    if mu > 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidMu(mu))
    }
}

/// Runs the recursion up to `Ω_n(μ)`, stopping early once `Ω_k ≥ r_k` for
/// some `k < n`. Uses the first `n` weights of `profile`.
pub fn omega_sequence(mu: f64, profile: &WeightProfile, n: usize) -> Result<OmegaTrace> {
    check_mu(mu)?;
    if n == 0 {
        return Err(Error::ZeroSize);
    }
    profile.require_positive(n)?;
    Ok(omega_trace_unchecked(mu, profile, n))
}

fn omega_trace_unchecked(mu: f64, profile: &WeightProfile, n: usize) -> OmegaTrace {
    let lam = profile.lambdas();
    let big = profile.partial_sums();
    let log_mu = mu.ln();
    let mut log_omegas = Vec::with_capacity(n);
    let mut current = -log_mu;
    log_omegas.push(current);
    for k in 0..n - 1 {
        let r = profile.ratio(k).expect("positive weight");
        let log_r = r.ln();
        if current >= log_r {
            return OmegaTrace {
                mu,
                log_omegas,
                status: TraceStatus::DivergedAt(k + 1),
            };
        }
        // r_k - Ω_k without cancellation when Ω_k is close to r_k
        let gap = -r * (current - log_r).exp_m1();
        let step = (lam[k + 1] / big[k]).ln();
        current = (big[k] * (current - step - gap.ln()) - lam[k + 1] * log_mu) / big[k + 1];
        log_omegas.push(current);
    }
    OmegaTrace {
        mu,
        log_omegas,
        status: TraceStatus::Completed,
    }
}

/// Rebuilds the stationary sequence from a completed trace:
/// `a_{k+1}/a_k = (λ_{k+1}/Λ_k)(r_k - Ω_k)`, normalized to sum one.
pub fn extremal_sequence(trace: &OmegaTrace, profile: &WeightProfile) -> Result<TermSequence> {
    if let TraceStatus::DivergedAt(k) = trace.status {
        return Err(Error::DivergedTrace { k });
    }
    let n = trace.len();
    profile.require_positive(n)?;
    let lam = profile.lambdas();
    let big = profile.partial_sums();
    let mut log_a = Vec::with_capacity(n);
    log_a.push(0.0);
    for k in 0..n - 1 {
        let r = profile.ratio(k).expect("positive weight");
        let gap = -r * (trace.log_omegas[k] - r.ln()).exp_m1();
        let next = log_a[k] + (lam[k + 1] / big[k]).ln() + gap.ln();
        log_a.push(next);
    }
    let shift = log_a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let total = compensated_sum(log_a.iter().map(|l| (l - shift).exp()));
    let a = log_a.iter().map(|l| (l - shift).exp() / total).collect();
    TermSequence::new(a)
}

/// Largest relative violation of `μ a_k = λ_k Σ_{n≥k} G_n/Λ_n`.
pub fn kkt_residual(a: &TermSequence, mu: f64, profile: &WeightProfile) -> Result<f64> {
    check_mu(mu)?;
    if profile.len() != a.len() {
        return Err(Error::LengthMismatch {
            expected: profile.len(),
            actual: a.len(),
        });
    }
    if let Some(i) = a.values().iter().position(|&x| x <= 0.0) {
        return Err(Error::ZeroTerm { index: i + 1 });
    }
    let lam = profile.lambdas();
    let big = profile.partial_sums();
    let log_g = log_means(lam, big, a.values());
    let mut tail = CompensatedSum::new();
    let mut worst = 0.0f64;
    for k in (0..a.len()).rev() {
        tail += log_g[k].exp() / big[k];
        let lhs = mu * a.values()[k];
        let rhs = lam[k] * tail.value();
        worst = worst.max((lhs - rhs).abs() / lhs);
    }
    Ok(worst)
}

/// `true` when `μ` lies below `μ_N`: the trace diverged or overshoots `r_N`.
fn below_root(mu: f64, profile: &WeightProfile, n: usize, log_target: f64) -> bool {
    let trace = omega_trace_unchecked(mu, profile, n);
    !trace.is_completed() || *trace.log_omegas.last().unwrap() > log_target
}

fn initial_upper(profile: &WeightProfile, n: usize) -> f64 {
    // the bound only needs M over n ≤ N-1, one more index is used when available
    let horizon = if profile.len() > n && profile.lambdas()[n] > 0.0 {
        n
    } else {
        n - 1
    };
    if horizon == 0 {
        return 2.0;
    }
    match gao_m(profile, horizon) {
        Ok(m) if m.sup_value.is_finite() => {
            (m.sup_value.exp() * (1.0 + BRACKET_SLACK)).min(BRACKET_CAP)
        }
        _ => 2.0,
    }
}

// geometric while the bracket spans more than a factor of two
fn midpoint(lo: f64, hi: f64) -> f64 {
    if hi > 2.0 * lo {
        (lo * hi).sqrt()
    } else {
        0.5 * (lo + hi)
    }
}

/// Finds `μ_N` by bisection on the terminal condition `Ω_N(μ) = r_N`,
/// starting from the bracket `[1, e^M (1 + 10^{-6})]`, and packages the
/// maximizing sequence with its stationarity residual.
///
/// Stops once the bracket width is at most `tol · μ`.
pub fn solve_mu_n(profile: &WeightProfile, n: usize, tol: f64) -> Result<ExtremalSolution> {
    if n == 0 {
        return Err(Error::ZeroSize);
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance(tol));
    }
    profile.require_positive(n)?;
    let log_target = profile.ratio(n - 1).expect("positive weight").ln();

    let mut lo = 1.0;
    let mut iterations = 0;
    let mu = if !below_root(lo, profile, n, log_target) {
        // Ω_N(1) ≤ r_N, and μ_N ≥ 1 from the feasible point (1, 0, …, 0)
        lo
    } else {
        let mut hi = initial_upper(profile, n);
        while below_root(hi, profile, n, log_target) {
            lo = hi;
            hi *= 2.0;
            if hi > BRACKET_CAP {
                return Err(Error::BracketFailure { upper: BRACKET_CAP });
            }
        }
        loop {
            let mid = midpoint(lo, hi);
            if hi - lo <= tol * mid {
                break;
            }
            if iterations == MAX_BISECTION_ITERATIONS {
                return Err(Error::NoConvergence { iterations });
            }
            iterations += 1;
            if below_root(mid, profile, n, log_target) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mid = midpoint(lo, hi);
        if omega_trace_unchecked(mid, profile, n).is_completed() {
            mid
        } else {
            hi
        }
    };

    let trace = omega_trace_unchecked(mu, profile, n);
    let a = extremal_sequence(&trace, profile)?;
    let section = profile.truncated(n)?;
    let kkt = kkt_residual(&a, mu, &section)?;
    let omegas = trace.log_omegas[..n - 1].iter().map(|l| l.exp()).collect();
    Ok(ExtremalSolution {
        n,
        mu_n: mu,
        a,
        omegas,
        kkt_residual: kkt,
        bisection_iterations: iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{make_power_weights, WeightSequence};
    use std::f64::consts::SQRT_2;

    fn unit(n: usize) -> WeightProfile {
        WeightProfile::new(WeightSequence::constant(n).unwrap())
    }

    #[test]
    fn one_step_by_hand() {
        let t = omega_sequence(2.0, &unit(2), 2).unwrap();
        assert!(t.is_completed());
        let om = t.omegas();
        assert!((om[0] - 0.5).abs() < 1e-16);
        assert!((om[1] - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn mu_one_sits_on_the_boundary() {
        let t = omega_sequence(1.0, &unit(10), 10).unwrap();
        assert_eq!(t.status, TraceStatus::DivergedAt(1));
        assert_eq!(t.log_omegas, vec![0.0]);
        let p = WeightProfile::new(make_power_weights(0.4, 10).unwrap());
        assert_eq!(
            omega_sequence(1.0, &p, 10).unwrap().status,
            TraceStatus::DivergedAt(1)
        );
    }

    #[test]
    fn first_log_omega_is_exact() {
        let p = WeightProfile::new(make_power_weights(0.7, 8).unwrap());
        for mu in [1.3, 2.0, 17.0] {
            assert_eq!(
                omega_sequence(mu, &p, 8).unwrap().log_omegas[0],
                -f64::ln(mu)
            );
        }
    }

    #[test]
    fn omega_errors() {
        let p = unit(3);
        assert_eq!(omega_sequence(0.0, &p, 3), Err(Error::InvalidMu(0.0)));
        assert_eq!(omega_sequence(2.0, &p, 0), Err(Error::ZeroSize));
        let z = WeightProfile::new(WeightSequence::explicit(vec![1.0, 0.0, 1.0]).unwrap());
        assert_eq!(
            omega_sequence(2.0, &z, 3),
            Err(Error::ZeroWeight { index: 2 })
        );
    }

    #[test]
    fn single_term() {
        let s = solve_mu_n(&unit(1), 1, DEFAULT_TOL).unwrap();
        assert_eq!(s.mu_n, 1.0);
        assert_eq!(s.a.values(), &[1.0]);
        assert!(s.omegas.is_empty());
        assert_eq!(s.kkt_residual, 0.0);
    }

    #[test]
    fn two_unit_terms() {
        let s = solve_mu_n(&unit(2), 2, DEFAULT_TOL).unwrap();
        assert!((s.mu_n - (1.0 + SQRT_2) / 2.0).abs() < 1e-11);
        assert!((s.a.values()[0] - (2.0 + SQRT_2) / 4.0).abs() < 1e-9);
        assert!((s.a.values()[1] - (2.0 - SQRT_2) / 4.0).abs() < 1e-9);
        // ω_1 = 1/μ_2 = 2(√2 - 1)
        assert!((s.omegas[0] - 2.0 * (SQRT_2 - 1.0)).abs() < 1e-11);
        assert!(s.kkt_residual <= 1e-9);
    }

    #[test]
    fn reconstruction_from_closed_form_omega() {
        let mu = (1.0 + SQRT_2) / 2.0;
        let t = omega_sequence(mu, &unit(2), 2).unwrap();
        let a = extremal_sequence(&t, &unit(2)).unwrap();
        let ratio = a.values()[1] / a.values()[0];
        assert!((ratio - (3.0 - 2.0 * SQRT_2)).abs() < 1e-14);
    }

    #[test]
    fn reconstruction_is_scale_free() {
        let w = make_power_weights(0.6, 12).unwrap();
        let scaled =
            WeightSequence::explicit(w.values().iter().map(|x| x * 37.5).collect()).unwrap();
        let p = WeightProfile::new(w);
        let q = WeightProfile::new(scaled);
        let t1 = omega_sequence(1.8, &p, 12).unwrap();
        let t2 = omega_sequence(1.8, &q, 12).unwrap();
        assert!(t1.is_completed() && t2.is_completed());
        let a1 = extremal_sequence(&t1, &p).unwrap();
        let a2 = extremal_sequence(&t2, &q).unwrap();
        for (x, y) in a1.values().iter().zip(a2.values()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn diverged_trace_cannot_be_reconstructed() {
        let t = omega_sequence(1.0, &unit(3), 3).unwrap();
        assert_eq!(
            extremal_sequence(&t, &unit(3)),
            Err(Error::DivergedTrace { k: 1 })
        );
    }

    #[test]
    fn kkt_small_cases() {
        let one = unit(1);
        let a = TermSequence::new(vec![1.0]).unwrap();
        assert_eq!(kkt_residual(&a, 1.0, &one).unwrap(), 0.0);

        let uniform = TermSequence::new(vec![1.0 / 3.0; 3]).unwrap();
        assert!(kkt_residual(&uniform, 1.0, &unit(3)).unwrap() > 0.0);

        let zero = TermSequence::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(
            kkt_residual(&zero, 1.0, &unit(2)),
            Err(Error::ZeroTerm { index: 2 })
        );
    }

    #[test]
    fn kkt_at_closed_form_optimum() {
        let a = TermSequence::new(vec![(2.0 + SQRT_2) / 4.0, (2.0 - SQRT_2) / 4.0]).unwrap();
        let r = kkt_residual(&a, (1.0 + SQRT_2) / 2.0, &unit(2)).unwrap();
        assert!(r <= 1e-9, "{r}");
    }

    #[test]
    fn solution_sums_to_mu() {
        let p = WeightProfile::new(make_power_weights(0.5, 41).unwrap());
        let s = solve_mu_n(&p, 40, DEFAULT_TOL).unwrap();
        let total = compensated_sum(s.a.values().iter().copied());
        assert!((total - 1.0).abs() < 1e-14);
        let section = p.truncated(40).unwrap();
        let g = crate::means::geometric_means(&s.a, &section).unwrap();
        let sum_g = compensated_sum(g.values());
        assert!((sum_g - s.mu_n).abs() < 10.0 * DEFAULT_TOL * s.mu_n);
    }

    #[test]
    fn unit_fifty_below_e() {
        let p = unit(51);
        let s50 = solve_mu_n(&p, 50, DEFAULT_TOL).unwrap();
        let s49 = solve_mu_n(&p, 49, DEFAULT_TOL).unwrap();
        assert!(s50.mu_n < std::f64::consts::E);
        assert!(s50.mu_n > s49.mu_n);
    }

    #[test]
    fn solve_errors() {
        let p = unit(3);
        assert_eq!(solve_mu_n(&p, 0, 1e-12), Err(Error::ZeroSize));
        assert_eq!(solve_mu_n(&p, 2, 0.0), Err(Error::InvalidTolerance(0.0)));
        assert!(matches!(
            solve_mu_n(&p, 4, 1e-12),
            Err(Error::SizeTooLarge { .. })
        ));
        // tolerance below the float spacing cannot be met
        assert_eq!(
            solve_mu_n(&p, 3, 1e-20),
            Err(Error::NoConvergence {
                iterations: MAX_BISECTION_ITERATIONS
            })
        );
    }

    #[test]
    fn profile_without_spare_weight() {
        // no λ_{N+1}: the bracket falls back to M over n ≤ N-1
        let p = unit(3);
        let s = solve_mu_n(&p, 3, DEFAULT_TOL).unwrap();
        assert!((s.mu_n - 4.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn steep_weight_drop_still_converges() {
        // M ≈ 139 here, so the initial bracket is enormous
        let lam = vec![
            29.58625854317607,
            30.82988308328269,
            1.8712896104837111,
            1.0,
            0.11140984934191427,
        ];
        let p = WeightProfile::new(WeightSequence::explicit(lam).unwrap());
        let s = solve_mu_n(&p, 4, DEFAULT_TOL).unwrap();
        assert!((s.mu_n - 1.9131270339823).abs() < 1e-9);
        assert!(s.kkt_residual < 1e-10);
        assert!(solve_mu_n(&p, 5, DEFAULT_TOL).is_ok());
    }
}
