//! Poisson approximation for the number of windows in which a target value
//! is a `j`-RkR.
//!
//! With `xi_i` the indicator that `i0` is a `j`-RkR in `(X_i, ..., X_{i+k})`
//! and `W = xi_1 + ... + xi_n`, windows `i` and `i'` share an observation iff
//! `|i - i'| <= k`, so the dependency graph has interior degree `2k`. The
//! Stein-Chen bound combines `p = E xi_i`, the overlap moments
//! `phi_m = E(xi_i xi_{i+m})` for `1 <= m <= k`, and `lambda = n p`.

use serde::{Deserialize, Serialize};

use crate::distribution::Pmf;
use crate::error::{Result, RkrError};
use crate::numeric::{binom_signed, powu, CompensatedSum};
use crate::records::{check_levels, check_target, window_term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountSource {
    Exact,
    Empirical,
    Poisson,
}

/// Distribution of an event count `W`.
///
/// `masses[w] = P(W = w)` for `w <= masses.len() - 1`; `overflow` holds any
/// mass beyond the last listed count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountDistribution {
    pub masses: Vec<f64>,
    pub overflow: f64,
    pub lambda: f64,
    pub n: usize,
    pub source: CountSource,
    pub mean: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_stderr: Option<f64>,
}

impl CountDistribution {
    pub fn from_masses(masses: Vec<f64>, lambda: f64, n: usize, source: CountSource) -> Self {
        let mean = masses
            .iter()
            .enumerate()
            .map(|(w, &p)| w as f64 * p)
            .collect::<CompensatedSum>()
            .value();
        CountDistribution {
            masses,
            overflow: 0.0,
            lambda,
            n,
            source,
            mean,
            mean_stderr: None,
        }
    }

    pub fn total_mass(&self) -> f64 {
        let mut acc: CompensatedSum = self.masses.iter().copied().collect();
        acc.add(self.overflow);
        acc.value()
    }

    fn mass(&self, w: usize) -> f64 {
        self.masses.get(w).copied().unwrap_or(0.0)
    }
}

/// `E xi_i = binom(k,j) S^j (1-S)^{k-j} p` with `S = P(X >= i0)`, `p = P(X = i0)`.
pub fn xi_mean(pmf: &Pmf, i0: usize, k: usize, j: usize) -> Result<f64> {
    check_levels(k, j)?;
    check_target(pmf, i0)?;
    Ok(window_term(pmf, i0, k, j))
}

/// `E(xi_i xi_{i+m})`.
///
/// For `1 <= m <= k` the overlapping windows share `k - m` middle positions
/// holding `t` exceedances; the first window's own `m` positions then hold
/// `j - t`, and the second window's `m - 1` new positions hold `j - t - 1`
/// (the first target value itself counts once):
///
/// `sum_t binom(m, j-t) binom(m-1, j-t-1) binom(k-m, t) S^{2j-t-1} (1-S)^{m-2j+t+k} p^2`
///
/// over `max(0, j-m-1) <= t <= min(k-m, j-1)`. For `m > k` the windows are
/// disjoint and the moment factors.
pub fn pair_moment_formula(pmf: &Pmf, i0: usize, k: usize, j: usize, m: usize) -> Result<f64> {
    check_levels(k, j)?;
    check_target(pmf, i0)?;
    if m == 0 {
        return Err(RkrError::InvalidQuery("gap m must be at least 1".into()));
    }
    if m > k {
        let p = window_term(pmf, i0, k, j);
        return Ok(p * p);
    }
    let s = pmf.tail_unchecked(i0);
    let c = pmf.cdf(i0 - 1);
    let p = pmf.prob(i0);
    let (k, j, m) = (k as i64, j as i64, m as i64);
    let lo = 0.max(j - m - 1);
    let hi = (k - m).min(j - 1);
    let mut acc = CompensatedSum::new();
    for t in lo..=hi {
        let coef = binom_signed(m, j - t) * binom_signed(m - 1, j - t - 1) * binom_signed(k - m, t);
        if coef == 0.0 {
            continue;
        }
        // both exponents are nonnegative whenever the coefficient is nonzero
        let s_exp = (2 * j - t - 1) as usize;
        let c_exp = (m - 2 * j + t + k) as usize;
        acc.add(coef * powu(s, s_exp) * powu(c, c_exp) * p * p);
    }
    Ok(acc.value())
}

/// The adjacent-window moment in its separate closed form,
/// `binom(k-1, j-1) S^j (1-S)^{k-j} p^2`.
pub fn adjacent_moment(pmf: &Pmf, i0: usize, k: usize, j: usize) -> Result<f64> {
    check_levels(k, j)?;
    check_target(pmf, i0)?;
    let s = pmf.tail_unchecked(i0);
    let c = pmf.cdf(i0 - 1);
    let p = pmf.prob(i0);
    Ok(binom_signed(k as i64 - 1, j as i64 - 1) * powu(s, j) * powu(c, k - j) * p * p)
}

/// `lambda = n E xi`.
pub fn lambda_param(pmf: &Pmf, i0: usize, k: usize, j: usize, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(RkrError::InvalidQuery(
            "number of windows n must be at least 1".into(),
        ));
    }
    Ok(n as f64 * xi_mean(pmf, i0, k, j)?)
}

/// Neighborhood counting used in the Stein-Chen bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundForm {
    /// `n min(3, 1/lambda) (sum_s phi_s + (k+1) p^2)`, as originally stated.
    #[serde(rename = "paper")]
    Published,
    /// `n min(3, 1/lambda) (2 sum_s phi_s + (2k+1) p^2)`: every ordered pair in
    /// an interior-size neighborhood of `2k + 1` windows.
    Conservative,
}

/// `min(3, 1/lambda)`, taken as 3 at `lambda = 0`.
pub fn stein_chen_factor(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        3.0
    } else {
        3.0f64.min(1.0 / lambda)
    }
}

fn bound_from_parts(n: usize, k: usize, p: f64, phi_sum: f64, form: BoundForm) -> f64 {
    let lambda = n as f64 * p;
    let inner = match form {
        BoundForm::Published => phi_sum + (k + 1) as f64 * p * p,
        BoundForm::Conservative => 2.0 * phi_sum + (2 * k + 1) as f64 * p * p,
    };
    n as f64 * stein_chen_factor(lambda) * inner
}

fn phis(pmf: &Pmf, i0: usize, k: usize, j: usize) -> Result<Vec<f64>> {
    (1..=k)
        .map(|m| pair_moment_formula(pmf, i0, k, j, m))
        .collect()
}

/// Upper bound on `d_TV(W, Poisson(lambda))`.
pub fn stein_chen_bound(
    pmf: &Pmf,
    i0: usize,
    k: usize,
    j: usize,
    n: usize,
    form: BoundForm,
) -> Result<f64> {
    let p = xi_mean(pmf, i0, k, j)?;
    if n == 0 {
        return Err(RkrError::InvalidQuery(
            "number of windows n must be at least 1".into(),
        ));
    }
    let phi_sum: f64 = phis(pmf, i0, k, j)?.iter().sum();
    Ok(bound_from_parts(n, k, p, phi_sum, form))
}

/// `Poisson(lambda)` masses for `w = 0..=w_max`, the rest in `overflow`.
pub fn poisson_pmf(lambda: f64, w_max: usize) -> CountDistribution {
    assert!(
        lambda >= 0.0 && lambda.is_finite(),
        "lambda must be finite and nonnegative"
    );
    let mut masses = Vec::with_capacity(w_max + 1);
    let mut term = (-lambda).exp();
    masses.push(term);
    for w in 1..=w_max {
        term *= lambda / w as f64;
        masses.push(term);
    }
    let listed: CompensatedSum = masses.iter().copied().collect();
    let overflow = (1.0 - listed.value()).max(0.0);
    CountDistribution {
        masses,
        overflow,
        lambda,
        n: 0,
        source: CountSource::Poisson,
        mean: lambda,
        mean_stderr: None,
    }
}

/// Total variation distance `(1/2) sum_w |a(w) - b(w)|`.
///
/// Overflow buckets are compared as one extra point, which is exact when at
/// most one side carries overflow mass and the other lists every count it
/// supports.
pub fn tv_distance(a: &CountDistribution, b: &CountDistribution) -> f64 {
    let len = a.masses.len().max(b.masses.len());
    let mut acc: CompensatedSum = (0..len).map(|w| (a.mass(w) - b.mass(w)).abs()).collect();
    acc.add((a.overflow - b.overflow).abs());
    0.5 * acc.value()
}

/// Bound values for one configuration with optional reference distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub lambda: f64,
    pub p: f64,
    pub phi: Vec<f64>,
    pub bound_paper: f64,
    pub bound_conservative: f64,
    pub tv_exact: Option<f64>,
    pub tv_empirical: Option<f64>,
}

impl BoundReport {
    pub fn new(pmf: &Pmf, i0: usize, k: usize, j: usize, n: usize) -> Result<Self> {
        let p = xi_mean(pmf, i0, k, j)?;
        if n == 0 {
            return Err(RkrError::InvalidQuery(
                "number of windows n must be at least 1".into(),
            ));
        }
        let phi = phis(pmf, i0, k, j)?;
        let phi_sum: f64 = phi.iter().sum();
        Ok(BoundReport {
            lambda: n as f64 * p,
            p,
            bound_paper: bound_from_parts(n, k, p, phi_sum, BoundForm::Published),
            bound_conservative: bound_from_parts(n, k, p, phi_sum, BoundForm::Conservative),
            phi,
            tv_exact: None,
            tv_empirical: None,
        })
    }

    /// Fills `tv_exact` from an exact count law.
    pub fn with_exact(mut self, exact: &CountDistribution) -> Self {
        let po = poisson_pmf(self.lambda, exact.masses.len().saturating_sub(1));
        self.tv_exact = Some(tv_distance(exact, &po));
        self
    }

    pub fn with_empirical(mut self, empirical: &CountDistribution) -> Self {
        let po = poisson_pmf(self.lambda, empirical.masses.len().saturating_sub(1));
        self.tv_empirical = Some(tv_distance(empirical, &po));
        self
    }
}
