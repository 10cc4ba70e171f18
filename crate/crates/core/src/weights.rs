//! Weight sequences `λ_k`, partial sums `Λ_n` and ratios `r_n = Λ_n/λ_n`.

use serde::Serialize;

use crate::sum::CompensatedSum;
use crate::{Error, Result};

/// Where a weight sequence came from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    /// `λ_k = k^α`.
    Power { alpha: f64 },
    /// `λ_k = 1`.
    Constant,
    /// Read from a file or supplied by the caller.
    Explicit,
}

/// A finite weight sequence `(λ_1, …, λ_N)` with `λ_1 > 0` and all
/// entries finite and non-negative.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightSequence {
    values: Vec<f64>,
    generator: Generator,
}

impl WeightSequence {
    /// `(1^α, 2^α, …, n^α)`.
    pub fn power(alpha: f64, n: usize) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::NonFiniteExponent(alpha));
        }
        if n == 0 {
            return Err(Error::ZeroSize);
        }
        let values = (1..=n).map(|k| (k as f64).powf(alpha)).collect();
        Ok(Self {
            values,
            generator: Generator::Power { alpha },
        })
    }

    /// Unit weights of length `n`.
    pub fn constant(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroSize);
        }
        Ok(Self {
            values: vec![1.0; n],
            generator: Generator::Constant,
        })
    }

    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        validate_non_negative(&values)?;
        if values[0] <= 0.0 {
            return Err(Error::NonPositiveLeadingWeight(values[0]));
        }
        Ok(Self {
            values,
            generator: Generator::Explicit,
        })
    }

    /// Parses the weights-file format: one non-negative decimal per line,
    /// blank lines and `#` comments ignored, first value positive.
    pub fn parse(text: &str) -> Result<Self> {
        Self::explicit(parse_values(text)?)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn generator(&self) -> Generator {
        self.generator
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The first `n` weights, keeping the generator tag.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroSize);
        }
        if n > self.len() {
            return Err(Error::SizeTooLarge {
                requested: n,
                available: self.len(),
            });
        }
        Ok(Self {
            values: self.values[..n].to_vec(),
            generator: self.generator,
        })
    }
}

/// Same as [`WeightSequence::power`].
pub fn make_power_weights(alpha: f64, n: usize) -> Result<WeightSequence> {
    WeightSequence::power(alpha, n)
}

/// Weights together with their partial sums and ratios.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightProfile {
    weights: WeightSequence,
    partial_sums: Vec<f64>,
    ratios: Vec<Option<f64>>,
}

impl WeightProfile {
    pub fn new(weights: WeightSequence) -> Self {
        let mut acc = CompensatedSum::new();
        let partial_sums: Vec<f64> = weights
            .values
            .iter()
            .map(|&w| {
                acc += w;
                acc.value()
            })
            .collect();
        let ratios = weights
            .values
            .iter()
            .zip(&partial_sums)
            .map(|(&w, &s)| (w > 0.0).then(|| s / w))
            .collect();
        Self {
            weights,
            partial_sums,
            ratios,
        }
    }

    pub fn weights(&self) -> &WeightSequence {
        &self.weights
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.weights.values
    }

    pub fn partial_sums(&self) -> &[f64] {
        &self.partial_sums
    }

    /// `r_n` for every index, `None` where `λ_n = 0`.
    pub fn ratios(&self) -> &[Option<f64>] {
        &self.ratios
    }

    /// `r_{i+1}` for the 0-based slot `i`.
    pub fn ratio(&self, i: usize) -> Option<f64> {
        self.ratios.get(i).copied().flatten()
    }

    pub fn len(&self) -> usize {
        self.partial_sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partial_sums.is_empty()
    }

    pub fn generator(&self) -> Generator {
        self.weights.generator
    }

    /// Profile of the first `n` weights.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        let weights = self.weights.truncated(n)?;
        Ok(Self {
            weights,
            partial_sums: self.partial_sums[..n].to_vec(),
            ratios: self.ratios[..n].to_vec(),
        })
    }

    /// Checks that `λ_1, …, λ_n` are all positive (1-based `n`).
    pub(crate) fn require_positive(&self, n: usize) -> Result<()> {
        if n > self.len() {
            return Err(Error::SizeTooLarge {
                requested: n,
                available: self.len(),
            });
        }
        match self.lambdas()[..n].iter().position(|&w| w <= 0.0) {
            Some(i) => Err(Error::ZeroWeight { index: i + 1 }),
            None => Ok(()),
        }
    }

    /// `ln(λ_{i+2}/λ_{i+1})` for the 0-based slot `i`. Power weights use
    /// `α ln(1 + 1/(i+1))`, which avoids rounding in the quotient.
    pub(crate) fn log_weight_step(&self, i: usize) -> f64 {
        let lam = self.lambdas();
        match self.weights.generator {
            Generator::Constant => 0.0,
            Generator::Power { alpha } => alpha * (1.0 / (i + 1) as f64).ln_1p(),
            Generator::Explicit => (lam[i + 1] / lam[i]).ln(),
        }
    }
}

/// Same as [`WeightProfile::new`].
pub fn profile(weights: WeightSequence) -> WeightProfile {
    WeightProfile::new(weights)
}

/// Parses the shared line format into raw values. Each value must be a
/// finite non-negative decimal.
pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let v: f64 = content.parse().map_err(|_| Error::Parse {
            line: lineno + 1,
            message: format!("not a number: {content:?}"),
        })?;
        if !v.is_finite() || v < 0.0 {
            return Err(Error::Parse {
                line: lineno + 1,
                message: format!("value must be finite and non-negative, got {v}"),
            });
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::Empty);
    }
    Ok(values)
}

pub(crate) fn validate_non_negative(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Empty);
    }
    match values.iter().position(|v| !v.is_finite() || *v < 0.0) {
        Some(i) => Err(Error::InvalidValue {
            index: i + 1,
            value: values[i],
        }),
        None => Ok(()),
    }
}
