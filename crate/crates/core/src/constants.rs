//! Finite-horizon estimates of the two sufficient-condition constants
//!
//! ```text
//!     L = sup_n (r_{n+1} - r_n)              (ratio differences)
//!     M = sup_n r_n ln(r_{n+1} / r_n)        (log ratios)
//! ```
//!
//! with `r_n = Λ_n/λ_n`. `L < p` bounds the `l^p` norm of the weighted mean
//! matrix by `p/(p - L)`; finite `M` gives the inequality with `C = e^M`.
//! Since `ln(1 + x) ≤ x`, every `M` term is dominated by the matching `L`
//! term and `M ≤ L`.
//!
//! The supremum is taken over `n ≤ horizon` only. The report carries a flag
//! telling whether the last few terms were still strictly increasing, in
//! which case the reported value is most likely an underestimate. The flag
//! is a heuristic, not a certificate.

use serde::Serialize;

use crate::weights::{Generator, WeightProfile};
use crate::{Error, Result};

/// Default number of trailing terms inspected for the tail flag.
pub const DEFAULT_TAIL_WINDOW: usize = 64;

/// Absolute tolerance used when comparing `M` against `L`.
pub const COMPARISON_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantReport {
    pub horizon: usize,
    /// Sup argument for `n = 1, …, horizon`.
    pub terms: Vec<f64>,
    pub sup_value: f64,
    /// 1-based index of the first maximal term.
    pub arg_max: usize,
    pub tail_monotone_increasing: bool,
    pub closed_form_limit: Option<f64>,
}

impl ConstantReport {
    fn from_terms(terms: Vec<f64>, window: usize, closed_form_limit: Option<f64>) -> Self {
        let (arg_max, sup_value) =
            terms
                .iter()
                .copied()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, v)| {
                    if v > bv {
                        (i, v)
                    } else {
                        (bi, bv)
                    }
                });
        let start = terms.len().saturating_sub(window.max(2));
        let tail = &terms[start..];
        let tail_monotone_increasing = tail.len() >= 2 && tail.windows(2).all(|w| w[1] > w[0]);
        Self {
            horizon: terms.len(),
            terms,
            sup_value,
            arg_max: arg_max + 1,
            tail_monotone_increasing,
            closed_form_limit,
        }
    }

    /// `e^{sup_value}`.
    pub fn exp_sup(&self) -> f64 {
        self.sup_value.exp()
    }
}

/// Both constants side by side.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MlComparison {
    #[serde(rename = "M")]
    pub m: ConstantReport,
    #[serde(rename = "L")]
    pub l: ConstantReport,
    pub m_le_l: bool,
}

fn check_horizon(profile: &WeightProfile, horizon: usize) -> Result<()> {
    if horizon == 0 {
        return Err(Error::ZeroHorizon);
    }
    if profile.len() < horizon + 1 {
        return Err(Error::HorizonTooLong {
            horizon,
            needed: horizon + 1,
            available: profile.len(),
        });
    }
    profile.require_positive(horizon + 1)
}

/// `1/(α+1)` for power weights with `α > -1`, the common limit of both
/// term sequences since `r_n ~ n/(α+1)`.
fn power_limit(profile: &WeightProfile) -> Option<f64> {
    match profile.generator() {
        Generator::Power { alpha } if alpha > -1.0 => Some(1.0 / (alpha + 1.0)),
        Generator::Constant => Some(1.0),
        _ => None,
    }
}

/// `r_{i+2} - r_{i+1}` for slot `i`.
pub(crate) fn cartlidge_term(profile: &WeightProfile, i: usize) -> f64 {
    let r = |j| profile.ratio(j).expect("positive weight");
    r(i + 1) - r(i)
}

/// `r_n ln(r_{n+1}/r_n)` for the 0-based slot `i = n - 1`, evaluated as
/// `r_n (ln(1 + λ_{n+1}/Λ_n) - ln(λ_{n+1}/λ_n))`.
pub(crate) fn gao_term(profile: &WeightProfile, i: usize) -> f64 {
    let ratio = profile.ratio(i).expect("positive weight");
    let growth = (profile.lambdas()[i + 1] / profile.partial_sums()[i]).ln_1p();
    log_ratio_term(ratio, growth, profile.log_weight_step(i))
}

/// `ratio · (growth - weight_step)`; shared with the power-weight checks
/// so both routes round identically.
pub(crate) fn log_ratio_term(ratio: f64, growth: f64, weight_step: f64) -> f64 {
    ratio * (growth - weight_step)
}

pub fn cartlidge_l(profile: &WeightProfile, horizon: usize) -> Result<ConstantReport> {
    cartlidge_l_with_window(profile, horizon, DEFAULT_TAIL_WINDOW)
}

pub fn cartlidge_l_with_window(
    profile: &WeightProfile,
    horizon: usize,
    window: usize,
) -> Result<ConstantReport> {
    check_horizon(profile, horizon)?;
    let terms = (0..horizon).map(|i| cartlidge_term(profile, i)).collect();
    Ok(ConstantReport::from_terms(
        terms,
        window,
        power_limit(profile),
    ))
}

pub fn gao_m(profile: &WeightProfile, horizon: usize) -> Result<ConstantReport> {
    gao_m_with_window(profile, horizon, DEFAULT_TAIL_WINDOW)
}

pub fn gao_m_with_window(
    profile: &WeightProfile,
    horizon: usize,
    window: usize,
) -> Result<ConstantReport> {
    check_horizon(profile, horizon)?;
    let terms = (0..horizon).map(|i| gao_term(profile, i)).collect();
    Ok(ConstantReport::from_terms(
        terms,
        window,
        power_limit(profile),
    ))
}

pub fn compare_m_l(profile: &WeightProfile, horizon: usize) -> Result<MlComparison> {
    let m = gao_m(profile, horizon)?;
    let l = cartlidge_l(profile, horizon)?;
    let m_le_l = m.sup_value <= l.sup_value + COMPARISON_TOL;
    Ok(MlComparison { m, l, m_le_l })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{make_power_weights, WeightSequence};

    fn unit(n: usize) -> WeightProfile {
        WeightProfile::new(WeightSequence::constant(n).unwrap())
    }

    #[test]
    fn unit_weights_have_l_one() {
        let r = cartlidge_l(&unit(20), 19).unwrap();
        assert!(r.terms.iter().all(|&t| t == 1.0));
        assert_eq!(r.sup_value, 1.0);
        assert_eq!(r.arg_max, 1);
        assert!(!r.tail_monotone_increasing);
    }

    #[test]
    fn linear_weights_have_l_half() {
        let p = WeightProfile::new(make_power_weights(1.0, 101).unwrap());
        let r = cartlidge_l(&p, 100).unwrap();
        assert!(r.terms.iter().all(|&t| t == 0.5));
        assert_eq!(r.closed_form_limit, Some(0.5));
    }

    #[test]
    fn sqrt_weights_first_l_term() {
        let p = WeightProfile::new(make_power_weights(0.5, 2).unwrap());
        let r = cartlidge_l(&p, 1).unwrap();
        // r_2 - r_1 = (1 + √2)/√2 - 1 = 1/√2
        assert!((r.terms[0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn m_first_terms() {
        let r = gao_m(&unit(2), 1).unwrap();
        assert!((r.terms[0] - std::f64::consts::LN_2).abs() < 1e-16);
        let p = WeightProfile::new(make_power_weights(1.0, 2).unwrap());
        let r = gao_m(&p, 1).unwrap();
        assert!((r.terms[0] - 1.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn unit_m_increases_towards_one() {
        let r = gao_m(&unit(1001), 1000).unwrap();
        assert!(r.tail_monotone_increasing);
        assert_eq!(r.arg_max, 1000);
        let expected = 1000.0 * (1.0f64 / 1000.0).ln_1p();
        assert!((r.sup_value - expected).abs() < 1e-15);
        assert!(r.sup_value < 1.0);
    }

    #[test]
    fn linear_m_below_l() {
        let p = WeightProfile::new(make_power_weights(1.0, 51).unwrap());
        let c = compare_m_l(&p, 50).unwrap();
        assert!(c.m_le_l);
        for (n, &t) in (1..).zip(&c.m.terms) {
            let n = n as f64;
            let closed = (n + 1.0) / 2.0 * ((n + 2.0) / (n + 1.0)).ln();
            assert!((t - closed).abs() < 1e-14);
            assert!(t < 0.5);
        }
    }

    #[test]
    fn horizon_errors() {
        let p = unit(5);
        assert_eq!(cartlidge_l(&p, 0), Err(Error::ZeroHorizon));
        assert_eq!(
            gao_m(&p, 5),
            Err(Error::HorizonTooLong {
                horizon: 5,
                needed: 6,
                available: 5
            })
        );
        let z = WeightProfile::new(WeightSequence::explicit(vec![1.0, 1.0, 0.0, 1.0]).unwrap());
        assert_eq!(gao_m(&z, 3), Err(Error::ZeroWeight { index: 3 }));
        assert_eq!(cartlidge_l(&z, 2), Err(Error::ZeroWeight { index: 3 }));
        assert!(cartlidge_l(&z, 1).is_ok());
    }

    #[test]
    fn ties_pick_first_index() {
        let r = ConstantReport::from_terms(vec![1.0, 3.0, 3.0, 2.0], 64, None);
        assert_eq!(r.arg_max, 2);
        assert_eq!(r.sup_value, 3.0);
        assert!(!r.tail_monotone_increasing);
    }

    #[test]
    fn tail_window_only_checks_the_end() {
        let r = ConstantReport::from_terms(vec![5.0, 1.0, 2.0, 3.0], 3, None);
        assert!(r.tail_monotone_increasing);
        let r = ConstantReport::from_terms(vec![5.0, 1.0, 2.0, 3.0], 4, None);
        assert!(!r.tail_monotone_increasing);
    }
}
