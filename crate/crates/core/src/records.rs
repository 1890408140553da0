//! Recent-k-record detection and the closed-form probabilities built on it.
//!
//! `X_n` is a `j`-RkR (recent-`k`-record at level `j`) when exactly `j` of the
//! `k` preceding values `X_{n-k}, ..., X_{n-1}` are at least as large as `X_n`.
//! Ties count. Indices and values are 1-based.

use serde::{Deserialize, Serialize};

use crate::distribution::Pmf;
use crate::error::{Result, RkrError};
use crate::numeric::{binom, powu, CompensatedSum};

/// Parameters shared by every record probability: window `k`, level `j`,
/// optional target value `i0` and optional horizon `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordQuery {
    pub k: usize,
    pub j: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i0: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

impl RecordQuery {
    pub fn new(k: usize, j: usize) -> Result<Self> {
        check_levels(k, j)?;
        Ok(RecordQuery {
            k,
            j,
            i0: None,
            n: None,
        })
    }

    pub fn with_target(mut self, i0: usize) -> Self {
        self.i0 = Some(i0);
        self
    }

    pub fn with_horizon(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    /// Checks the query against a pmf's support.
    pub fn validate(&self, pmf: &Pmf) -> Result<()> {
        check_levels(self.k, self.j)?;
        if let Some(i0) = self.i0 {
            check_target(pmf, i0)?;
        }
        if let Some(n) = self.n {
            if n < self.k + 1 {
                return Err(RkrError::InvalidQuery(format!(
                    "horizon n = {n} must be at least k + 1 = {}",
                    self.k + 1
                )));
            }
        }
        Ok(())
    }

    fn target(&self) -> Result<usize> {
        self.i0
            .ok_or_else(|| RkrError::InvalidQuery("target value i0 is required".into()))
    }
}

pub(crate) fn check_levels(k: usize, j: usize) -> Result<()> {
    if k == 0 {
        return Err(RkrError::InvalidQuery("window k must be at least 1".into()));
    }
    if j > k {
        return Err(RkrError::InvalidQuery(format!(
            "level j = {j} exceeds window k = {k}"
        )));
    }
    Ok(())
}

pub(crate) fn check_target(pmf: &Pmf, i0: usize) -> Result<()> {
    if i0 == 0 || i0 > pmf.support_size() {
        return Err(RkrError::OutOfSupport(i0));
    }
    Ok(())
}

/// Number of the `k` values before position `n` (1-based) that are `>= X_n`.
pub fn rkr_level(sequence: &[usize], n: usize, k: usize) -> Result<usize> {
    if k == 0 || n < k + 1 || n > sequence.len() {
        return Err(RkrError::IndexOutOfRange {
            index: n,
            len: sequence.len(),
            k,
        });
    }
    Ok(level_at(sequence, n - 1, k))
}

// 0-based position, caller guarantees pos >= k.
#[inline]
pub(crate) fn level_at<T: PartialOrd + Copy>(sequence: &[T], pos: usize, k: usize) -> usize {
    let x = sequence[pos];
    sequence[pos - k..pos].iter().filter(|&&y| y >= x).count()
}

/// RkR levels for every index `n = k+1, ..., len`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventSeries {
    pub k: usize,
    /// `(n, j_n)` pairs, `n` 1-based.
    pub levels: Vec<(usize, usize)>,
}

impl EventSeries {
    /// Count of indices at each level `0..=k`.
    pub fn histogram(&self) -> Vec<usize> {
        let mut counts = vec![0; self.k + 1];
        for &(_, j) in &self.levels {
            counts[j] += 1;
        }
        counts
    }

    pub fn max_level(&self) -> Option<(usize, usize)> {
        // first index attaining the maximum
        self.levels
            .iter()
            .copied()
            .fold(None, |best: Option<(usize, usize)>, (n, j)| match best {
                Some((_, bj)) if bj >= j => best,
                _ => Some((n, j)),
            })
    }

    /// Indices whose level equals `j`.
    pub fn indices_at(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.levels
            .iter()
            .filter(move |&&(_, l)| l == j)
            .map(|&(n, _)| n)
    }
}

pub fn detect_events(sequence: &[usize], k: usize) -> Result<EventSeries> {
    if k == 0 {
        return Err(RkrError::InvalidQuery("window k must be at least 1".into()));
    }
    if sequence.len() < k + 1 {
        return Err(RkrError::SequenceTooShort {
            len: sequence.len(),
            needed: k + 1,
        });
    }
    let levels = (k..sequence.len())
        .map(|pos| (pos + 1, level_at(sequence, pos, k)))
        .collect();
    Ok(EventSeries { k, levels })
}

/// `binom(k, j) S_i^j C_{i-1}^{k-j} p_i`, no validation.
pub(crate) fn window_term(pmf: &Pmf, i: usize, k: usize, j: usize) -> f64 {
    let s = pmf.tail_unchecked(i);
    let c = pmf.cdf(i - 1);
    binom(k, j) * powu(s, j) * powu(c, k - j) * pmf.prob(i)
}

/// Probability that `i0` is a `j`-RkR in a single window of `k+1` draws.
pub fn window_event_prob(pmf: &Pmf, q: &RecordQuery) -> Result<f64> {
    q.validate(pmf)?;
    Ok(window_term(pmf, q.target()?, q.k, q.j))
}

/// `(1 - binom(k,j) S^j C^{k-j}) p_i + (1 - p_i)`, the complement of
/// [`window_event_prob`] written out term by term.
pub fn window_nonevent_prob(pmf: &Pmf, q: &RecordQuery) -> Result<f64> {
    q.validate(pmf)?;
    let i = q.target()?;
    let p = pmf.prob(i);
    let conditional =
        binom(q.k, q.j) * powu(pmf.tail_unchecked(i), q.j) * powu(pmf.cdf(i - 1), q.k - q.j);
    Ok((1.0 - conditional) * p + (1.0 - p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnionBound {
    pub raw: f64,
    pub capped: f64,
}

/// Union bound `(n - k) * window_event_prob` on `i0` being a `j`-RkR
/// somewhere among the first `n` values.
pub fn first_n_union_bound(pmf: &Pmf, q: &RecordQuery) -> Result<UnionBound> {
    let n =
        q.n.ok_or_else(|| RkrError::InvalidQuery("horizon n is required".into()))?;
    let raw = (n - q.k) as f64 * window_event_prob(pmf, q)?;
    Ok(UnionBound {
        raw,
        capped: raw.min(1.0),
    })
}

/// Level change of a target value between two consecutive windows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transition {
    /// Stays at level `j`.
    StayJ,
    /// Moves to level `j + 1`.
    UpToJPlus1,
}

/// Which closed form to evaluate for the one-step transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuccessiveForm {
    /// `S_i p_i` (stay) and `C_{i-1} p_i` (up), as originally stated.
    #[serde(rename = "paper")]
    Published,
    /// `(j/k) p_i` (stay) and `((k-j)/k) p_i` (up): given `j` exceedances
    /// among `k` exchangeable positions, the departing one is an exceedance
    /// with probability `j/k`.
    Exchangeable,
}

/// `P(i0 is a j'-RkR in (X_2..X_{k+2}) | i0 is a j-RkR in (X_1..X_{k+1}))`
/// with `j' = j` or `j + 1`.
pub fn successive_prob(
    pmf: &Pmf,
    q: &RecordQuery,
    transition: Transition,
    form: SuccessiveForm,
) -> Result<f64> {
    q.validate(pmf)?;
    let i = q.target()?;
    let (k, j) = (q.k, q.j);
    if transition == Transition::UpToJPlus1 && j + 1 > k {
        return Err(RkrError::LevelOverflow(j + 1));
    }
    let p = pmf.prob(i);
    let factor = match (transition, form) {
        (Transition::StayJ, SuccessiveForm::Published) => pmf.tail_unchecked(i),
        (Transition::UpToJPlus1, SuccessiveForm::Published) => pmf.cdf(i - 1),
        (Transition::StayJ, SuccessiveForm::Exchangeable) => j as f64 / k as f64,
        (Transition::UpToJPlus1, SuccessiveForm::Exchangeable) => (k - j) as f64 / k as f64,
    };
    Ok(factor * p)
}

/// `P(X_n is a j-RkR)` for any `n >= k+1`.
pub fn marginal_prob(pmf: &Pmf, k: usize, j: usize) -> Result<f64> {
    check_levels(k, j)?;
    Ok(marginal_unchecked(pmf, k, j))
}

fn marginal_unchecked(pmf: &Pmf, k: usize, j: usize) -> f64 {
    (1..=pmf.support_size())
        .map(|i| window_term(pmf, i, k, j))
        .collect::<CompensatedSum>()
        .value()
}

/// `q_i = P(X_n = i | X_n is a j-RkR)` for `i = 1..=M` (index 0 is value 1).
pub fn posterior(pmf: &Pmf, k: usize, j: usize) -> Result<Vec<f64>> {
    check_levels(k, j)?;
    let terms: Vec<f64> = (1..=pmf.support_size())
        .map(|i| window_term(pmf, i, k, j))
        .collect();
    let total = terms.iter().copied().collect::<CompensatedSum>().value();
    if total <= 0.0 {
        return Err(RkrError::ZeroMarginal);
    }
    Ok(terms.into_iter().map(|t| t / total).collect())
}

/// Which diagonal term to use in the one-step prediction rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionForm {
    /// Diagonal term `S_i p_i` as originally stated.
    #[serde(rename = "paper")]
    Published,
    /// Diagonal term `(j/k) p_i`; agrees with exact enumeration.
    Corrected,
}

/// `P(X_{n+1} is a j-RkR | X_n is a j-RkR)`.
///
/// Evaluates
/// `sum_i q_i (D_i + sum_{m>i} (S_m/S_i)^j ((k-j)/k) p_m
///                + sum_{m<i} (C_{m-1}/C_{i-1})^{k-j} (j/k) p_m)`
/// with `D_i` chosen by `form`. Terms whose ratio has a zero denominator
/// carry `q_i = 0` and are dropped.
pub fn prediction_prob(pmf: &Pmf, k: usize, j: usize, form: PredictionForm) -> Result<f64> {
    let q = posterior(pmf, k, j)?;
    let m_max = pmf.support_size();
    let up = (k - j) as f64 / k as f64;
    let down = j as f64 / k as f64;
    let mut total = CompensatedSum::new();
    for i in 1..=m_max {
        let qi = q[i - 1];
        if qi == 0.0 {
            continue;
        }
        let s_i = pmf.tail_unchecked(i);
        let c_i = pmf.cdf(i - 1);
        let diagonal = match form {
            PredictionForm::Published => s_i * pmf.prob(i),
            PredictionForm::Corrected => down * pmf.prob(i),
        };
        let mut inner = CompensatedSum::new();
        inner.add(diagonal);
        if s_i > 0.0 {
            for m in i + 1..=m_max {
                inner.add(powu(pmf.tail_unchecked(m) / s_i, j) * up * pmf.prob(m));
            }
        }
        if c_i > 0.0 {
            for m in 1..i {
                inner.add(powu(pmf.cdf(m - 1) / c_i, k - j) * down * pmf.prob(m));
            }
        }
        total.add(qi * inner.value());
    }
    Ok(total.value())
}
