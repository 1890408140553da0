//! Finite discrete distributions on `{1, ..., M}`.
//!
//! Tail sums `S_i = P(X >= i)` and the cdf `C_i = P(X <= i)` are computed once
//! at construction from a single suffix pass, with `C_{i-1} = 1 - S_i`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, RkrError};

/// Maximum allowed deviation of the input masses from 1.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Probability mass function on the values `1..=M`.
///
/// Values are 1-based throughout the crate: `prob(1)` is the mass of the
/// smallest support point.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    probs: Vec<f64>,
    // tail[i] = P(X >= i) for i in 0..=M+1, tail[0] = tail[1] = 1.
    tail: Vec<f64>,
    // cdf[i] = P(X <= i) for i in 0..=M.
    cdf: Vec<f64>,
}

impl Pmf {
    /// Validates `probs` (index 0 holds the mass of value 1).
    pub fn from_probs(probs: &[f64]) -> Result<Self> {
        if probs.is_empty() {
            return Err(RkrError::EmptySupport);
        }
        for (idx, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(RkrError::NegativeMass {
                    value: idx + 1,
                    mass: p,
                });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(RkrError::NotNormalized { sum });
        }
        let probs: Vec<f64> = if sum == 1.0 {
            probs.to_vec()
        } else {
            probs.iter().map(|p| p / sum).collect()
        };
        let m = probs.len();
        let mut tail = vec![0.0; m + 2];
        for i in (1..=m).rev() {
            tail[i] = tail[i + 1] + probs[i - 1];
        }
        tail[1] = 1.0;
        tail[0] = 1.0;
        let cdf = (0..=m).map(|i| 1.0 - tail[i + 1]).collect();
        Ok(Pmf { probs, tail, cdf })
    }

    /// Uniform distribution on `1..=m`.
    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(RkrError::BadParam(
                "support size M must be at least 1".into(),
            ));
        }
        Self::from_probs(&vec![1.0 / m as f64; m])
    }

    /// Geometric masses `ratio^(i-1)` on `1..=m`, renormalized.
    pub fn truncated_geometric(m: usize, ratio: f64) -> Result<Self> {
        if m == 0 {
            return Err(RkrError::BadParam(
                "support size M must be at least 1".into(),
            ));
        }
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(RkrError::BadParam(format!(
                "geometric ratio must lie in (0, 1), got {ratio}"
            )));
        }
        let weights: Vec<f64> = (0..m).map(|i| ratio.powi(i as i32)).collect();
        let total: f64 = weights.iter().sum();
        Self::from_probs(&weights.iter().map(|w| w / total).collect::<Vec<_>>())
    }

    pub fn family(family: Family, m: usize, param: Option<f64>) -> Result<Self> {
        match family {
            Family::Uniform => Self::uniform(m),
            Family::TruncatedGeometric => {
                let ratio = param.ok_or_else(|| {
                    RkrError::BadParam("truncated_geometric requires a ratio".into())
                })?;
                Self::truncated_geometric(m, ratio)
            }
        }
    }

    /// Support size `M`.
    pub fn support_size(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Mass at `value`; zero outside `1..=M`.
    pub fn prob(&self, value: usize) -> f64 {
        if value == 0 {
            0.0
        } else {
            self.probs.get(value - 1).copied().unwrap_or(0.0)
        }
    }

    /// `P(X >= i)`. Defined for every `i >= 1`; zero above `M`.
    pub fn tail(&self, i: usize) -> Result<f64> {
        if i == 0 {
            return Err(RkrError::OutOfSupport(i));
        }
        Ok(self.tail_unchecked(i))
    }

    /// `P(X <= i)`; `cdf(0) = 0` and `cdf(i) = 1` for `i >= M`.
    pub fn cdf(&self, i: usize) -> f64 {
        self.cdf.get(i).copied().unwrap_or(1.0)
    }

    #[inline]
    pub(crate) fn tail_unchecked(&self, i: usize) -> f64 {
        self.tail.get(i).copied().unwrap_or(0.0)
    }

    /// Cumulative table `[C_1, ..., C_M]` for inverse-cdf sampling.
    pub(crate) fn cumulative(&self) -> &[f64] {
        &self.cdf[1..]
    }

    /// Support points carrying positive mass.
    pub(crate) fn positive_support(&self) -> Vec<(usize, f64)> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, &p)| (i + 1, p))
            .collect()
    }

    /// Empirical pmf of a sequence of positive integers, on `1..=max`.
    pub fn empirical(sequence: &[usize]) -> Result<Self> {
        let max = sequence
            .iter()
            .copied()
            .max()
            .ok_or(RkrError::EmptySupport)?;
        if sequence.contains(&0) {
            return Err(RkrError::OutOfSupport(0));
        }
        let mut counts = vec![0usize; max];
        for &x in sequence {
            counts[x - 1] += 1;
        }
        let n = sequence.len() as f64;
        Self::from_probs(&counts.iter().map(|&c| c as f64 / n).collect::<Vec<_>>())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Uniform,
    TruncatedGeometric,
}

impl std::str::FromStr for Family {
    type Err = RkrError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Family::Uniform),
            "truncated_geometric" => Ok(Family::TruncatedGeometric),
            other => Err(RkrError::BadParam(format!("unknown family '{other}'"))),
        }
    }
}

/// JSON description of a pmf: either explicit masses or a named family.
///
/// `{"probs": [0.5, 0.3, 0.2]}`, `{"family": "uniform", "M": 3}` or
/// `{"family": "truncated_geometric", "M": 5, "ratio": 0.5}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PmfSource {
    Probs {
        probs: Vec<f64>,
    },
    Family {
        family: Family,
        #[serde(rename = "M")]
        m: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ratio: Option<f64>,
    },
}

impl PmfSource {
    pub fn build(&self) -> Result<Pmf> {
        match self {
            PmfSource::Probs { probs } => Pmf::from_probs(probs),
            PmfSource::Family { family, m, ratio } => Pmf::family(*family, *m, *ratio),
        }
    }
}
