//! Sliding-window scan statistics over discrete trials.
//!
//! Fixed target: `S_k = max_s #{i in [s, s+k-1] : X_i >= m}`.
//! Random target: `S_k = max_i #{j in [i-k, i-1] : X_j >= X_i}`, i.e. the
//! largest RkR level in the sequence.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distribution::Pmf;
use crate::error::{Result, RkrError};
use crate::montecarlo::{self, Estimate, SimConfig};
use crate::oracle::{self, EnumBudget};
use crate::records::{detect_events, level_at};

/// What each window's values are compared against. Text form is
/// `fixed:<m>` or `random`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ScanTarget {
    Fixed(usize),
    Random,
}

impl fmt::Display for ScanTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScanTarget::Fixed(m) => write!(f, "fixed:{m}"),
            ScanTarget::Random => f.write_str("random"),
        }
    }
}

impl FromStr for ScanTarget {
    type Err = RkrError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "random" {
            return Ok(ScanTarget::Random);
        }
        let m = s
            .strip_prefix("fixed:")
            .and_then(|m| m.parse::<usize>().ok())
            .filter(|&m| m >= 1)
            .ok_or_else(|| {
                RkrError::InvalidQuery(format!(
                    "target must be 'fixed:<m>' (m >= 1) or 'random', got '{s}'"
                ))
            })?;
        Ok(ScanTarget::Fixed(m))
    }
}

impl From<ScanTarget> for String {
    fn from(t: ScanTarget) -> String {
        t.to_string()
    }
}

impl TryFrom<String> for ScanTarget {
    type Error = RkrError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanResult {
    pub statistic: usize,
    /// 1-based window start (fixed target) or scored index (random target)
    /// of the first maximizing window.
    pub argmax_index: usize,
    pub window: usize,
    pub target: ScanTarget,
}

pub(crate) fn check_scan_shape(target: ScanTarget, k: usize, n: usize) -> Result<()> {
    if k == 0 {
        return Err(RkrError::InvalidQuery("window k must be at least 1".into()));
    }
    let needed = match target {
        ScanTarget::Fixed(0) => {
            return Err(RkrError::InvalidQuery(
                "fixed target m must be at least 1".into(),
            ))
        }
        ScanTarget::Fixed(_) => k,
        ScanTarget::Random => k + 1,
    };
    if n < needed {
        return Err(RkrError::SequenceTooShort { len: n, needed });
    }
    Ok(())
}

/// Sliding-count maximum of `#{X_i >= m}` over windows of length `k`.
pub fn fixed_target_scan(sequence: &[usize], m: usize, k: usize) -> Result<ScanResult> {
    check_scan_shape(ScanTarget::Fixed(m), k, sequence.len())?;
    let (statistic, start) = fixed_scan(sequence, m, k);
    Ok(ScanResult {
        statistic,
        argmax_index: start + 1,
        window: k,
        target: ScanTarget::Fixed(m),
    })
}

// (max count, 0-based start of first maximizing window)
fn fixed_scan(sequence: &[usize], m: usize, k: usize) -> (usize, usize) {
    let hit = |x: usize| usize::from(x >= m);
    let mut count: usize = sequence[..k].iter().map(|&x| hit(x)).sum();
    let (mut best, mut best_start) = (count, 0);
    for s in 1..=sequence.len() - k {
        count = count + hit(sequence[s + k - 1]) - hit(sequence[s - 1]);
        if count > best {
            best = count;
            best_start = s;
        }
    }
    (best, best_start)
}

/// Largest RkR level in the sequence and the first index attaining it.
pub fn random_target_scan(sequence: &[usize], k: usize) -> Result<ScanResult> {
    check_scan_shape(ScanTarget::Random, k, sequence.len())?;
    let events = detect_events(sequence, k)?;
    let (argmax_index, statistic) = events.max_level().expect("nonempty event series");
    Ok(ScanResult {
        statistic,
        argmax_index,
        window: k,
        target: ScanTarget::Random,
    })
}

/// Statistic only, shape already checked.
pub(crate) fn scan_statistic(sequence: &[usize], target: ScanTarget, k: usize) -> usize {
    match target {
        ScanTarget::Fixed(m) => fixed_scan(sequence, m, k).0,
        ScanTarget::Random => (k..sequence.len())
            .map(|pos| level_at(sequence, pos, k))
            .max()
            .unwrap_or(0),
    }
}

#[derive(Debug, Clone, Copy)]
pub enum TailMethod {
    Oracle(EnumBudget),
    MonteCarlo(SimConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailValue {
    Exact(f64),
    Estimated(Estimate),
}

impl TailValue {
    pub fn value(&self) -> f64 {
        match self {
            TailValue::Exact(v) => *v,
            TailValue::Estimated(e) => e.value,
        }
    }
}

/// `P(S_k >= s)` for i.i.d. sequences of length `n`.
pub fn scan_tail(
    pmf: &Pmf,
    target: ScanTarget,
    k: usize,
    n: usize,
    s: usize,
    method: TailMethod,
) -> Result<TailValue> {
    match method {
        TailMethod::Oracle(budget) => {
            oracle::exact_scan_tail(pmf, target, k, n, s, &budget).map(TailValue::Exact)
        }
        TailMethod::MonteCarlo(cfg) => {
            montecarlo::estimate_scan_tail(pmf, target, k, n, s, &cfg).map(TailValue::Estimated)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_by_hand() {
        let r = fixed_target_scan(&[1, 3, 2, 3, 1, 2], 2, 3).unwrap();
        assert_eq!((r.statistic, r.argmax_index), (3, 2));
        let r = fixed_target_scan(&[4, 1, 2, 1], 1, 2).unwrap();
        assert_eq!((r.statistic, r.argmax_index), (2, 1));
        let r = fixed_target_scan(&[1, 1, 1], 2, 2).unwrap();
        assert_eq!(r.statistic, 0);
        assert!(matches!(
            fixed_target_scan(&[1], 2, 2),
            Err(RkrError::SequenceTooShort { .. })
        ));
    }

    #[test]
    fn random_by_hand() {
        let r = random_target_scan(&[2, 1, 2, 3, 1], 2).unwrap();
        assert_eq!((r.statistic, r.argmax_index), (2, 5));
        let inc: Vec<usize> = (1..=8).collect();
        assert_eq!(random_target_scan(&inc, 3).unwrap().statistic, 0);
        assert_eq!(random_target_scan(&[5; 6], 3).unwrap().statistic, 3);
        assert!(random_target_scan(&[1, 2], 2).is_err());
    }

    #[test]
    fn target_text_form() {
        assert_eq!(
            "fixed:2".parse::<ScanTarget>().unwrap(),
            ScanTarget::Fixed(2)
        );
        assert_eq!("random".parse::<ScanTarget>().unwrap(), ScanTarget::Random);
        assert!("fixed:0".parse::<ScanTarget>().is_err());
        assert!("fixed".parse::<ScanTarget>().is_err());
        assert_eq!(ScanTarget::Fixed(7).to_string(), "fixed:7");
    }

    #[test]
    fn tail_edges() {
        let pmf = Pmf::from_probs(&[0.5, 0.3, 0.2]).unwrap();
        let oracle = TailMethod::Oracle(EnumBudget::default());
        let v = scan_tail(&pmf, ScanTarget::Fixed(2), 2, 5, 0, oracle).unwrap();
        assert!((v.value() - 1.0).abs() < 1e-12);
        let v = scan_tail(&pmf, ScanTarget::Random, 2, 5, 3, oracle).unwrap();
        assert_eq!(v.value(), 0.0);
        let coin = Pmf::uniform(2).unwrap();
        let v = scan_tail(&coin, ScanTarget::Fixed(2), 2, 3, 2, oracle).unwrap();
        assert!((v.value() - 0.375).abs() < 1e-12);
        let mc = TailMethod::MonteCarlo(SimConfig::new(1, 10_000).unwrap());
        assert!(matches!(
            scan_tail(&coin, ScanTarget::Fixed(2), 2, 3, 2, mc).unwrap(),
            TailValue::Estimated(_)
        ));
    }
}
