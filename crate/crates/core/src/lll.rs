//! Local-lemma feasibility check for "no window has `i0` as a `j`-RkR".
//!
//! `E_i` is the event that `i0` is a `j`-RkR in `(X_i, ..., X_{i+k})`. If every
//! `P(E_i) <= p`, each `E_i` depends on at most `d` others and `4 d p <= 1`,
//! then avoiding all `E_i` has positive probability. `E_i` and `E_{i'}` share
//! observations iff `|i - i'| <= k`, so the true degree is `2k`; the original
//! argument uses `d = k`. Both are reported.
//!
//! The per-window probability is bounded through `binom(k,j) <= (ke/j)^j` and
//! `S^j (1-S)^{k-j} <= max{((k-j)/k)^k, (j/k)^k}`, giving
//! `4 d P(E_i) <= C(k, j) p_{i0}`.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::distribution::Pmf;
use crate::error::Result;
use crate::records::{check_levels, check_target, window_term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeForm {
    /// `d = k`.
    #[serde(rename = "paper")]
    Published,
    /// `d = 2k`.
    Conservative,
}

impl DegreeForm {
    pub fn degree(self, k: usize) -> usize {
        match self {
            DegreeForm::Published => k,
            DegreeForm::Conservative => 2 * k,
        }
    }
}

/// `C(k, j) = 4 d (ke/j)^j max{((k-j)/k)^k, (j/k)^k}`; `4d` when `j = 0`.
pub fn lll_constant(k: usize, j: usize, form: DegreeForm) -> Result<f64> {
    check_levels(k, j)?;
    let d = form.degree(k) as f64;
    if j == 0 {
        return Ok(4.0 * d);
    }
    let kf = k as f64;
    let jf = j as f64;
    let shape = ((kf - jf) / kf)
        .powi(k as i32)
        .max((jf / kf).powi(k as i32));
    Ok(4.0 * d * (kf * E / jf).powi(j as i32) * shape)
}

/// `1 / C(k, j)`: any `p_{i0}` strictly below it meets the local-lemma condition.
pub fn lll_threshold(k: usize, j: usize, form: DegreeForm) -> Result<f64> {
    Ok(1.0 / lll_constant(k, j, form)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LllVerdict {
    pub event_prob: f64,
    pub degree_paper: usize,
    pub degree_conservative: usize,
    pub constant_paper: f64,
    pub constant_conservative: f64,
    pub condition_paper: bool,
    pub condition_conservative: bool,
    pub threshold_paper: f64,
    pub threshold_conservative: f64,
}

pub fn lll_check(pmf: &Pmf, i0: usize, k: usize, j: usize) -> Result<LllVerdict> {
    check_levels(k, j)?;
    check_target(pmf, i0)?;
    let p = window_term(pmf, i0, k, j);
    let dp = DegreeForm::Published.degree(k);
    let dc = DegreeForm::Conservative.degree(k);
    Ok(LllVerdict {
        event_prob: p,
        degree_paper: dp,
        degree_conservative: dc,
        constant_paper: lll_constant(k, j, DegreeForm::Published)?,
        constant_conservative: lll_constant(k, j, DegreeForm::Conservative)?,
        condition_paper: 4.0 * dp as f64 * p <= 1.0,
        condition_conservative: 4.0 * dc as f64 * p <= 1.0,
        threshold_paper: lll_threshold(k, j, DegreeForm::Published)?,
        threshold_conservative: lll_threshold(k, j, DegreeForm::Conservative)?,
    })
}
