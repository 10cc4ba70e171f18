//! Weighted geometric means `G_n` and the inequality `Σ G_n ≤ C Σ a_n`.

use serde::Serialize;

use crate::sum::{compensated_sum, CompensatedSum};
use crate::weights::{parse_values, validate_non_negative, WeightProfile};
use crate::{Error, Result};

/// Non-negative terms `(a_1, …, a_N)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct TermSequence {
    values: Vec<f64>,
}

impl TermSequence {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        validate_non_negative(&values)?;
        Ok(Self { values })
    }

    /// Same line format as weights files, without the leading-positive rule.
    pub fn parse(text: &str) -> Result<Self> {
        Self::new(parse_values(text)?)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.values
    }
}

/// `ln G_n` for every `n`; `-∞` encodes `G_n = 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeometricMeans {
    log_values: Vec<f64>,
}

impl GeometricMeans {
    pub fn log_values(&self) -> &[f64] {
        &self.log_values
    }

    pub fn value(&self, i: usize) -> f64 {
        self.log_values[i].exp()
    }

    pub fn values(&self) -> Vec<f64> {
        self.log_values.iter().map(|l| l.exp()).collect()
    }

    pub fn len(&self) -> usize {
        self.log_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_values.is_empty()
    }
}

/// Log-space prefix means over the first `a.len()` weights.
///
/// Entries with `λ_k = 0` contribute nothing, even when `a_k = 0`.
pub(crate) fn log_means(lambdas: &[f64], partial_sums: &[f64], a: &[f64]) -> Vec<f64> {
    let mut acc = CompensatedSum::new();
    let mut annihilated = false;
    a.iter()
        .zip(lambdas)
        .zip(partial_sums)
        .map(|((&ak, &lk), &sk)| {
            if lk > 0.0 {
                if ak == 0.0 {
                    annihilated = true;
                } else {
                    acc += lk * ak.ln();
                }
            }
            if annihilated {
                f64::NEG_INFINITY
            } else {
                acc.value() / sk
            }
        })
        .collect()
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

pub fn geometric_means(a: &TermSequence, profile: &WeightProfile) -> Result<GeometricMeans> {
    check_len(profile, a.len())?;
    Ok(GeometricMeans {
        log_values: log_means(profile.lambdas(), profile.partial_sums(), a.values()),
    })
}

/// Outcome of checking `Σ G_n ≤ C Σ a_n` for one sequence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub lhs: f64,
    pub rhs_factor: f64,
    pub constant: f64,
    /// `lhs / (C · rhs_factor)`; absent for the all-zero sequence.
    pub ratio: Option<f64>,
    pub holds: bool,
}

pub fn verify_inequality(
    a: &TermSequence,
    profile: &WeightProfile,
    constant: f64,
) -> Result<VerifyReport> {
    if !(constant > 0.0 && constant.is_finite()) {
        return Err(Error::NonPositiveConstant(constant));
    }
    let means = geometric_means(a, profile)?;
    let lhs = compensated_sum(means.log_values.iter().map(|l| l.exp()));
    let rhs_factor = compensated_sum(a.values().iter().copied());
    let ratio = (rhs_factor > 0.0).then(|| lhs / (constant * rhs_factor));
    Ok(VerifyReport {
        lhs,
        rhs_factor,
        constant,
        ratio,
        holds: lhs <= constant * rhs_factor,
    })
}
