//! Verification pipeline for power weights `λ_k = k^α`, `0 < α < 1`.
//!
//! The target is `M ≤ 1/(α+1)`, i.e. for every `n ≥ 1`
//!
//! ```text
//!     (S_n/n^α) ln((1 + (n+1)^α/S_n)(n/(n+1))^α) ≤ 1/(α+1),    S_n = Σ_{k≤n} k^α
//! ```
//!
//! which yields the weighted inequality with `C = e^{1/(α+1)}`. Through the
//! power-sum sandwich ([`lemma0_bounds`]) this reduces to `f(1/n) ≥ 0` for
//!
//! ```text
//!     f(x) = 1 - (1+x)^{-α} - α(ln(1 + (α+1)x) - α ln(1+x))
//!     g(x) = 1 + (α+1)x - (α + (1-α²)x)(1+x)^α
//!     h(x) = 1 - α + αx - α(1-α²)x²
//! ```
//!
//! with `g ≥ h > 0` on `[0, 1]`. The quoted closed form
//! `f' = α g / ((1+x)^{1+α}(1+(1+α)x))` is kept as [`f_prime`]; it is not the
//! derivative of `f` (see [`f_derivative`]), and `f` itself dips slightly
//! below zero near `x = 1` once `α` is below roughly 0.28, so the reduction
//! step fails at `n = 1` there even though the condition holds. Everything
//! here is checked numerically on grids.

use serde::Serialize;

use crate::constants::log_ratio_term;
use crate::sum::{compensated_sum, CompensatedSum};
use crate::{Error, Result};

/// Slack for the `≤ 1/(α+1)` comparison.
pub const CONDITION_TOL: f64 = 1e-12;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange(alpha))
    }
}

fn check_x(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::XOutOfRange(x))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LemmaBounds {
    pub lower: f64,
    pub upper: f64,
    pub exact: f64,
}

impl LemmaBounds {
    pub fn holds(&self) -> bool {
        self.lower <= self.exact && self.exact <= self.upper
    }
}

/// `n(n+1)^r/(r+1) ≤ Σ_{i≤n} i^r ≤ (r/(r+1)) n^r (n+1)^r / ((n+1)^r - n^r)`.
///
/// `r = 0` is rejected: the upper bound degenerates to `0/0` there.
pub fn lemma0_bounds(n: usize, r: f64) -> Result<LemmaBounds> {
    if n == 0 {
        return Err(Error::ZeroSize);
    }
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::LemmaExponentOutOfRange(r));
    }
    let nf = n as f64;
    let lower = nf * (nf + 1.0).powf(r) / (r + 1.0);
    let n_r = nf.powf(r);
    let n1_r = (nf + 1.0).powf(r);
    // (n+1)^r - n^r = n^r (exp(r ln(1 + 1/n)) - 1), exact at r = 1
    let gap = if r == 1.0 {
        1.0
    } else {
        n_r * (r * (1.0 / nf).ln_1p()).exp_m1()
    };
    let upper = r / (r + 1.0) * (n_r * n1_r) / gap;
    let exact = compensated_sum((1..=n).map(|i| (i as f64).powf(r)));
    Ok(LemmaBounds {
        lower,
        upper,
        exact,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub lhs: f64,
    pub bound: f64,
    pub holds: bool,
}

impl ConditionCheck {
    pub fn margin(&self) -> f64 {
        self.bound - self.lhs
    }
}

/// Left side of the power-weight condition from the running power sum
/// `S_n` and `(n+1)^α`.
fn condition_lhs(alpha: f64, n: usize, power_sum: f64, next_power: f64) -> f64 {
    let nf = n as f64;
    let ratio = power_sum / nf.powf(alpha);
    let growth = (next_power / power_sum).ln_1p();
    let step = alpha * (1.0 / nf).ln_1p();
    log_ratio_term(ratio, growth, step)
}

fn condition(alpha: f64, lhs: f64) -> ConditionCheck {
    let bound = 1.0 / (alpha + 1.0);
    ConditionCheck {
        lhs,
        bound,
        holds: lhs <= bound + CONDITION_TOL,
    }
}

/// Evaluates the condition at a single `n`, summing `Σ k^α` directly.
pub fn check_condition_31(alpha: f64, n: usize) -> Result<ConditionCheck> {
    check_alpha(alpha)?;
    if n == 0 {
        return Err(Error::ZeroSize);
    }
    let power_sum = compensated_sum((1..=n).map(|k| (k as f64).powf(alpha)));
    let lhs = condition_lhs(alpha, n, power_sum, ((n + 1) as f64).powf(alpha));
    Ok(condition(alpha, lhs))
}

/// Condition values for every `n = 1, …, n_max` with one running sum.
pub fn condition_31_series(alpha: f64, n_max: usize) -> Result<Vec<ConditionCheck>> {
    check_alpha(alpha)?;
    let mut sum = CompensatedSum::new();
    let mut next = 1.0;
    (1..=n_max)
        .map(|n| {
            sum += next;
            next = ((n + 1) as f64).powf(alpha);
            Ok(condition(alpha, condition_lhs(alpha, n, sum.value(), next)))
        })
        .collect()
}

/// Both sides of the reduced inequality
/// `α(ln(1 + (α+1)/n) - α ln(1 + 1/n)) ≤ 1 - (1 + 1/n)^{-α}`.
pub fn check_condition_32(alpha: f64, n: usize) -> Result<ConditionCheck> {
    check_alpha(alpha)?;
    if n == 0 {
        return Err(Error::ZeroSize);
    }
    let x = 1.0 / n as f64;
    let lhs = alpha * (((alpha + 1.0) * x).ln_1p() - alpha * x.ln_1p());
    let rhs = -(-alpha * x.ln_1p()).exp_m1();
    Ok(ConditionCheck {
        lhs,
        bound: rhs,
        holds: lhs <= rhs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Fgh {
    pub f: f64,
    pub g: f64,
    pub h: f64,
}

pub fn fgh(alpha: f64, x: f64) -> Result<Fgh> {
    check_alpha(alpha)?;
    check_x(x)?;
    let log1px = x.ln_1p();
    let f = -(-alpha * log1px).exp_m1() - alpha * (((alpha + 1.0) * x).ln_1p() - alpha * log1px);
    let g = 1.0 + (alpha + 1.0) * x - (alpha + (1.0 - alpha * alpha) * x) * (alpha * log1px).exp();
    let h = 1.0 - alpha + alpha * x - alpha * (1.0 - alpha * alpha) * x * x;
    Ok(Fgh { f, g, h })
}

/// `α g(x) / ((1+x)^{1+α} (1 + (1+α)x))` with `g` as in [`fgh`].
///
/// This is the closed form usually quoted for `f'`, but it is off by
/// `α(1-α)/((1+x)(1+(1+α)x))`: the true numerator has `1 + (1-α²)x` where
/// `g` has `α + (1-α²)x`. See [`f_derivative`] for the actual slope.
pub fn f_prime(alpha: f64, x: f64) -> Result<f64> {
    let Fgh { g, .. } = fgh(alpha, x)?;
    Ok(alpha * g / ((1.0 + x).powf(1.0 + alpha) * (1.0 + (1.0 + alpha) * x)))
}

/// Exact derivative of `f`, term by term:
/// `α(1+x)^{-α-1} - α(α+1)/(1+(α+1)x) + α²/(1+x)`.
pub fn f_derivative(alpha: f64, x: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_x(x)?;
    Ok(
        alpha * (1.0 + x).powf(-alpha - 1.0) - alpha * (alpha + 1.0) / (1.0 + (alpha + 1.0) * x)
            + alpha * alpha / (1.0 + x),
    )
}

/// One line of the grid scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BennettRow {
    pub alpha: f64,
    pub n_max: usize,
    /// Largest condition left side over `n ≤ n_max`.
    pub max_term: f64,
    /// `1/(α+1)`.
    pub bound: f64,
    pub margin: f64,
    /// Smallest `f(j/x_samples)`, `j = 1, …, x_samples`.
    pub f_min: f64,
}

impl BennettRow {
    /// `e^{1/(α+1)}`, the inequality constant implied by `M = 1/(α+1)`.
    pub fn implied_constant(&self) -> f64 {
        self.bound.exp()
    }
}

/// Scans one `α`: the condition for `n ≤ n_max`, and `f`, `g`, `h` on the
/// uniform grid of `(0, 1]`. Fails if `g ≥ h > 0` breaks at a grid point.
pub fn bennett_row(alpha: f64, n_max: usize, x_samples: usize) -> Result<BennettRow> {
    check_alpha(alpha)?;
    if n_max == 0 || x_samples == 0 {
        return Err(Error::ZeroSize);
    }
    let max_term = condition_31_series(alpha, n_max)?
        .iter()
        .map(|c| c.lhs)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut f_min = f64::INFINITY;
    for j in 1..=x_samples {
        let x = j as f64 / x_samples as f64;
        let v = fgh(alpha, x)?;
        if !(v.g >= v.h && v.h > 0.0) {
            return Err(Error::ChainViolation { alpha, x });
        }
        f_min = f_min.min(v.f);
    }
    let bound = 1.0 / (alpha + 1.0);
    Ok(BennettRow {
        alpha,
        n_max,
        max_term,
        bound,
        margin: bound - max_term,
        f_min,
    })
}

/// Runs [`bennett_row`] for every grid value, ordered by `α`.
pub fn bennett_scan(alpha_grid: &[f64], n_max: usize, x_samples: usize) -> Result<Vec<BennettRow>> {
    let mut rows = alpha_grid
        .iter()
        .map(|&a| bennett_row(a, n_max, x_samples))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
    Ok(rows)
}

/// `min, min + step, …` up to `max` inclusive, computed by index so the
/// values do not drift.
pub fn alpha_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    check_alpha(min)?;
    check_alpha(max)?;
    if !(step > 0.0 && step.is_finite()) || max < min {
        return Err(Error::InvalidTolerance(step));
    }
    let count = ((max - min) / step + 1e-9).floor() as usize + 1;
    let scale = 1e12;
    Ok((0..count)
        .map(|i| ((min + i as f64 * step) * scale).round() / scale)
        .collect())
}
