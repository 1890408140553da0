//! Exact ground truth by weighted exhaustive enumeration.
//!
//! Every sequence of a given length over the pmf's support is visited in
//! mixed-radix order with its product weight maintained incrementally. The
//! index space is cut into fixed blocks on the leading digits; blocks run in
//! parallel and their partial sums are merged in block order, so results do
//! not depend on the number of worker threads.

use rayon::prelude::*;

use crate::distribution::Pmf;
use crate::error::{Result, RkrError};
use crate::numeric::CompensatedSum;
use crate::poisson::{CountDistribution, CountSource};
use crate::records::{check_levels, check_target, level_at, window_term};
use crate::scan::{scan_statistic, ScanTarget};

/// Default cap on `M^len` enumerated sequences.
pub const DEFAULT_MAX_STATES: u64 = 100_000_000;

/// Environment variable overriding [`DEFAULT_MAX_STATES`].
pub const MAX_STATES_ENV: &str = "RKR_MAX_STATES";

// Leading-digit blocks are grown until there are at least this many.
const MIN_BLOCKS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumBudget {
    pub max_states: u64,
}

impl Default for EnumBudget {
    fn default() -> Self {
        EnumBudget {
            max_states: DEFAULT_MAX_STATES,
        }
    }
}

impl EnumBudget {
    pub fn new(max_states: u64) -> Result<Self> {
        if max_states == 0 {
            return Err(RkrError::InvalidConfig(
                "max_states must be at least 1".into(),
            ));
        }
        Ok(EnumBudget { max_states })
    }

    /// Reads `RKR_MAX_STATES`, falling back to the default when unset.
    pub fn from_env() -> Result<Self> {
        match std::env::var(MAX_STATES_ENV) {
            Ok(raw) => {
                let v = raw.trim().parse::<u64>().map_err(|_| {
                    RkrError::InvalidConfig(format!(
                        "{MAX_STATES_ENV}={raw} is not a positive integer"
                    ))
                })?;
                Self::new(v)
            }
            Err(_) => Ok(Self::default()),
        }
    }

    /// Fails unless `support^len` fits in the budget.
    pub fn check(&self, support: usize, len: usize) -> Result<()> {
        let mut needed: u128 = 1;
        for _ in 0..len {
            needed = needed.saturating_mul(support as u128);
        }
        if needed > self.max_states as u128 {
            return Err(RkrError::BudgetExceeded {
                needed,
                budget: self.max_states,
            });
        }
        Ok(())
    }
}

/// Folds `visit` over every length-`len` sequence with its probability.
///
/// Returns the merged accumulator and the total enumerated weight (which is
/// 1 up to rounding). Zero-mass values are skipped.
pub fn fold_sequences<A, I, V, G>(
    pmf: &Pmf,
    len: usize,
    budget: &EnumBudget,
    init: I,
    visit: V,
    merge: G,
) -> Result<(A, f64)>
where
    A: Send,
    I: Fn() -> A + Sync,
    V: Fn(&mut A, &[usize], f64) + Sync,
    G: Fn(&mut A, A),
{
    budget.check(pmf.support_size(), len)?;
    let support = pmf.positive_support();
    let radix = support.len();

    let mut prefix_len = 0;
    let mut blocks = 1usize;
    while prefix_len < len && blocks < MIN_BLOCKS {
        prefix_len += 1;
        blocks *= radix;
    }

    let run_block = |block: usize| -> (A, CompensatedSum) {
        let mut acc = init();
        let mut total = CompensatedSum::new();
        let mut digits = vec![0usize; len];
        let mut rest = block;
        for pos in (0..prefix_len).rev() {
            digits[pos] = rest % radix;
            rest /= radix;
        }
        let mut seq = vec![0usize; len];
        let mut weight = vec![1.0f64; len + 1];
        for pos in 0..len {
            let (value, p) = support[digits[pos]];
            seq[pos] = value;
            weight[pos + 1] = weight[pos] * p;
        }
        loop {
            visit(&mut acc, &seq, weight[len]);
            total.add(weight[len]);
            // odometer step over the suffix
            let mut pos = len;
            loop {
                if pos == prefix_len {
                    return (acc, total);
                }
                pos -= 1;
                digits[pos] += 1;
                if digits[pos] < radix {
                    break;
                }
                digits[pos] = 0;
            }
            for p in pos..len {
                let (value, mass) = support[digits[p]];
                seq[p] = value;
                weight[p + 1] = weight[p] * mass;
            }
        }
    };

    let partials: Vec<(A, CompensatedSum)> = (0..blocks).into_par_iter().map(run_block).collect();
    let mut iter = partials.into_iter();
    let (mut acc, mut total) = iter.next().expect("at least one block");
    for (a, t) in iter {
        merge(&mut acc, a);
        total.merge(&t);
    }
    let total = total.value();
    debug_assert!((total - 1.0).abs() < 1e-12, "enumerated weight {total}");
    Ok((acc, total))
}

fn sum_where<F>(pmf: &Pmf, len: usize, budget: &EnumBudget, pred: F) -> Result<f64>
where
    F: Fn(&[usize]) -> bool + Sync,
{
    let (acc, _) = fold_sequences(
        pmf,
        len,
        budget,
        CompensatedSum::new,
        |acc, seq, w| {
            if pred(seq) {
                acc.add(w);
            }
        },
        |a, b| a.merge(&b),
    )?;
    Ok(acc.value())
}

/// `P(X_{k+1} is a j-RkR [and equals i0])` by enumerating `(k+1)`-tuples.
pub fn exact_event_prob(
    pmf: &Pmf,
    k: usize,
    j: usize,
    i0: Option<usize>,
    budget: &EnumBudget,
) -> Result<f64> {
    check_levels(k, j)?;
    if let Some(i0) = i0 {
        check_target(pmf, i0)?;
    }
    sum_where(pmf, k + 1, budget, |seq| {
        i0.is_none_or(|t| seq[k] == t) && level_at(seq, k, k) == j
    })
}

/// `P(X_{n+1} is a j1-RkR | X_n is a j2-RkR)` over `(k+2)`-tuples.
pub fn exact_conditional_next(
    pmf: &Pmf,
    k: usize,
    j1: usize,
    j2: usize,
    budget: &EnumBudget,
) -> Result<f64> {
    check_levels(k, j1)?;
    check_levels(k, j2)?;
    let (acc, _) = fold_sequences(
        pmf,
        k + 2,
        budget,
        || [CompensatedSum::new(); 2],
        |acc, seq, w| {
            if level_at(seq, k, k) == j2 {
                acc[1].add(w);
                if level_at(seq, k + 1, k) == j1 {
                    acc[0].add(w);
                }
            }
        },
        |a, b| {
            a[0].merge(&b[0]);
            a[1].merge(&b[1]);
        },
    )?;
    ratio(acc)
}

/// `P(i0 is a j_to-RkR in (X_2..X_{k+2}) | i0 is a j_from-RkR in (X_1..X_{k+1}))`.
pub fn exact_successive(
    pmf: &Pmf,
    i0: usize,
    k: usize,
    j_from: usize,
    j_to: usize,
    budget: &EnumBudget,
) -> Result<f64> {
    check_levels(k, j_from)?;
    check_levels(k, j_to)?;
    check_target(pmf, i0)?;
    let (acc, _) = fold_sequences(
        pmf,
        k + 2,
        budget,
        || [CompensatedSum::new(); 2],
        |acc, seq, w| {
            if seq[k] == i0 && level_at(seq, k, k) == j_from {
                acc[1].add(w);
                if seq[k + 1] == i0 && level_at(seq, k + 1, k) == j_to {
                    acc[0].add(w);
                }
            }
        },
        |a, b| {
            a[0].merge(&b[0]);
            a[1].merge(&b[1]);
        },
    )?;
    ratio(acc)
}

fn ratio(acc: [CompensatedSum; 2]) -> Result<f64> {
    let den = acc[1].value();
    if den <= 0.0 {
        return Err(RkrError::ZeroConditioningEvent);
    }
    Ok(acc[0].value() / den)
}

/// `E(xi_1 xi_{1+m})` where `xi_i` indicates that `i0` is a `j`-RkR in
/// the window `(X_i, ..., X_{i+k})`.
pub fn exact_pair_moment(
    pmf: &Pmf,
    i0: usize,
    k: usize,
    j: usize,
    m: usize,
    budget: &EnumBudget,
) -> Result<f64> {
    check_levels(k, j)?;
    check_target(pmf, i0)?;
    if m == 0 {
        return Err(RkrError::InvalidQuery("gap m must be at least 1".into()));
    }
    sum_where(pmf, k + m + 1, budget, |seq| {
        seq[k] == i0 && seq[k + m] == i0 && level_at(seq, k, k) == j && level_at(seq, k + m, k) == j
    })
}

/// Exact law of `W = sum_{i=1..n} xi_i` over sequences of length `n + k`.
pub fn exact_count_pmf(
    pmf: &Pmf,
    i0: usize,
    k: usize,
    j: usize,
    n: usize,
    budget: &EnumBudget,
) -> Result<CountDistribution> {
    check_levels(k, j)?;
    check_target(pmf, i0)?;
    if n == 0 {
        return Err(RkrError::InvalidQuery(
            "number of windows n must be at least 1".into(),
        ));
    }
    let (acc, _) = fold_sequences(
        pmf,
        n + k,
        budget,
        || vec![CompensatedSum::new(); n + 1],
        |acc, seq, w| {
            let count = (k..n + k)
                .filter(|&pos| seq[pos] == i0 && level_at(seq, pos, k) == j)
                .count();
            acc[count].add(w);
        },
        |a, b| {
            for (x, y) in a.iter_mut().zip(&b) {
                x.merge(y);
            }
        },
    )?;
    let masses: Vec<f64> = acc.iter().map(CompensatedSum::value).collect();
    let lambda = n as f64 * window_term(pmf, i0, k, j);
    Ok(CountDistribution::from_masses(
        masses,
        lambda,
        n,
        CountSource::Exact,
    ))
}

/// `P(W = 0)`: no window of the `n` has `i0` as a `j`-RkR.
pub fn exact_no_event_prob(
    pmf: &Pmf,
    i0: usize,
    k: usize,
    j: usize,
    n: usize,
    budget: &EnumBudget,
) -> Result<f64> {
    check_levels(k, j)?;
    check_target(pmf, i0)?;
    if n == 0 {
        return Err(RkrError::InvalidQuery(
            "number of windows n must be at least 1".into(),
        ));
    }
    sum_avoiding(pmf, n + k, budget, |seq, pos| {
        pos >= k && seq[pos] == i0 && level_at(seq, pos, k) == j
    })
}

/// Mass of sequences where `bad(prefix, pos)` never fires. A prefix that
/// fires is not extended; its whole subtree weight is booked at once.
fn sum_avoiding<B>(pmf: &Pmf, len: usize, budget: &EnumBudget, bad: B) -> Result<f64>
where
    B: Fn(&[usize], usize) -> bool + Sync,
{
    budget.check(pmf.support_size(), len)?;
    let support = pmf.positive_support();

    fn walk<B: Fn(&[usize], usize) -> bool>(
        support: &[(usize, f64)],
        seq: &mut [usize],
        pos: usize,
        weight: f64,
        bad: &B,
        good: &mut CompensatedSum,
        total: &mut CompensatedSum,
    ) {
        if pos == seq.len() {
            good.add(weight);
            total.add(weight);
            return;
        }
        for &(value, p) in support {
            seq[pos] = value;
            if bad(seq, pos) {
                total.add(weight * p);
            } else {
                walk(support, seq, pos + 1, weight * p, bad, good, total);
            }
        }
    }

    let partials: Vec<(CompensatedSum, CompensatedSum)> = support
        .par_iter()
        .map(|&(value, p)| {
            let mut seq = vec![0usize; len];
            let (mut good, mut total) = (CompensatedSum::new(), CompensatedSum::new());
            seq[0] = value;
            if bad(&seq, 0) {
                total.add(p);
            } else {
                walk(&support, &mut seq, 1, p, &bad, &mut good, &mut total);
            }
            (good, total)
        })
        .collect();
    let (mut good, mut total) = (CompensatedSum::new(), CompensatedSum::new());
    for (g, t) in &partials {
        good.merge(g);
        total.merge(t);
    }
    let total = total.value();
    debug_assert!((total - 1.0).abs() < 1e-12, "enumerated weight {total}");
    Ok(good.value())
}

/// `P(S_k >= s)` over i.i.d. sequences of length `n`.
pub fn exact_scan_tail(
    pmf: &Pmf,
    target: ScanTarget,
    k: usize,
    n: usize,
    s: usize,
    budget: &EnumBudget,
) -> Result<f64> {
    crate::scan::check_scan_shape(target, k, n)?;
    sum_where(pmf, n, budget, |seq| scan_statistic(seq, target, k) >= s)
}
