//! Seeded Monte Carlo estimation.
//!
//! Replication `r` draws from its own ChaCha8 stream `r` under the run seed,
//! so a replication's values do not depend on how replications are split
//! across workers. Replications are grouped into fixed-size blocks and the
//! integer tallies of the blocks are merged in block order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::Pmf;
use crate::error::{Result, RkrError};
use crate::poisson::{CountDistribution, CountSource};
use crate::records::{check_levels, check_target, level_at, window_term};
use crate::scan::{check_scan_shape, scan_statistic, ScanTarget};

const BLOCK: u64 = 2048;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    pub replications: u64,
    /// Worker threads; never changes results.
    pub workers: usize,
}

impl SimConfig {
    pub fn new(seed: u64, replications: u64) -> Result<Self> {
        let cfg = SimConfig {
            seed,
            replications,
            workers: 1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(RkrError::InvalidConfig(
                "replications must be at least 1".into(),
            ));
        }
        if self.workers == 0 {
            return Err(RkrError::InvalidConfig("workers must be at least 1".into()));
        }
        Ok(())
    }
}

/// A simulated probability (or mean) with its standard error and 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    /// Sample size behind `value`; for conditional estimates this is the
    /// number of replications that hit the conditioning event.
    pub replications: u64,
    /// Total replications simulated.
    pub trials: u64,
}

impl Estimate {
    /// Proportion `hits / n` with a Wilson score interval.
    pub fn proportion(hits: u64, n: u64, trials: u64) -> Self {
        let nf = n as f64;
        let p = hits as f64 / nf;
        let stderr = (p * (1.0 - p) / nf).sqrt();
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / nf;
        let center = (p + z2 / (2.0 * nf)) / denom;
        let half = Z95 / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
        let lo = (center - half).clamp(0.0, 1.0).min(p);
        let hi = (center + half).clamp(0.0, 1.0).max(p);
        Estimate {
            value: p,
            stderr,
            ci95: (lo, hi),
            replications: n,
            trials,
        }
    }

    /// Sample mean with a normal-approximation interval.
    pub fn mean(sum: f64, sum_sq: f64, n: u64) -> Self {
        let nf = n as f64;
        let mean = sum / nf;
        let var = if n > 1 {
            ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0)
        } else {
            0.0
        };
        let stderr = (var / nf).sqrt();
        Estimate {
            value: mean,
            stderr,
            ci95: ((mean - Z95 * stderr).max(0.0), mean + Z95 * stderr),
            replications: n,
            trials: n,
        }
    }
}

/// Inverse-cdf sampler over `1..=M`.
#[derive(Debug, Clone)]
pub struct Sampler {
    cumulative: Vec<f64>,
}

impl Sampler {
    pub fn new(pmf: &Pmf) -> Self {
        Sampler {
            cumulative: pmf.cumulative().to_vec(),
        }
    }

    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let idx = self.cumulative.partition_point(|&c| c <= u);
        idx.min(self.cumulative.len() - 1) + 1
    }

    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [usize]) {
        for x in out.iter_mut() {
            *x = self.draw(rng);
        }
    }
}

fn stream_rng(base: &ChaCha8Rng, stream: u64) -> ChaCha8Rng {
    let mut rng = base.clone();
    rng.set_stream(stream);
    rng
}

/// I.i.d. draws from `pmf`, determined by `(seed, stream_id)`.
pub fn simulate_sequence(pmf: &Pmf, length: usize, seed: u64, stream_id: u64) -> Vec<usize> {
    let sampler = Sampler::new(pmf);
    let mut rng = stream_rng(&ChaCha8Rng::seed_from_u64(seed), stream_id);
    let mut out = vec![0; length];
    sampler.fill(&mut rng, &mut out);
    out
}

/// Runs `cfg.replications` replications of `rep`, each with its own stream.
///
/// `T` is per-block state (tallies plus any scratch space); `merge` folds a
/// later block into an earlier one.
pub fn run_replications<T, I, F, G>(cfg: &SimConfig, init: I, rep: F, merge: G) -> Result<T>
where
    T: Send,
    I: Fn() -> T + Sync,
    F: Fn(&mut ChaCha8Rng, &mut T) + Sync,
    G: Fn(&mut T, T),
{
    cfg.validate()?;
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);
    let blocks = cfg.replications.div_ceil(BLOCK);
    let run_block = |b: u64| {
        let mut state = init();
        let end = ((b + 1) * BLOCK).min(cfg.replications);
        for r in b * BLOCK..end {
            let mut rng = stream_rng(&base, r);
            rep(&mut rng, &mut state);
        }
        state
    };
    let partials: Vec<T> = if cfg.workers == 1 {
        (0..blocks).map(run_block).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| RkrError::InvalidConfig(e.to_string()))?;
        pool.install(|| (0..blocks).into_par_iter().map(run_block).collect())
    };
    let mut iter = partials.into_iter();
    let mut acc = iter.next().expect("replications >= 1");
    for part in iter {
        merge(&mut acc, part);
    }
    Ok(acc)
}

struct Tally {
    hits: u64,
    cond: u64,
    buf: Vec<usize>,
}

fn tally(len: usize) -> impl Fn() -> Tally + Sync {
    move || Tally {
        hits: 0,
        cond: 0,
        buf: vec![0; len],
    }
}

fn merge_tally(a: &mut Tally, b: Tally) {
    a.hits += b.hits;
    a.cond += b.cond;
}

/// Fraction of fresh `(k+1)`-windows whose last value is a `j`-RkR
/// (and equals `i0` when given).
pub fn estimate_event_prob(
    pmf: &Pmf,
    k: usize,
    j: usize,
    i0: Option<usize>,
    cfg: &SimConfig,
) -> Result<Estimate> {
    check_levels(k, j)?;
    if let Some(i0) = i0 {
        check_target(pmf, i0)?;
    }
    let sampler = Sampler::new(pmf);
    let t = run_replications(
        cfg,
        tally(k + 1),
        |rng, t| {
            sampler.fill(rng, &mut t.buf);
            if i0.is_none_or(|v| t.buf[k] == v) && level_at(&t.buf, k, k) == j {
                t.hits += 1;
            }
        },
        merge_tally,
    )?;
    Ok(Estimate::proportion(
        t.hits,
        cfg.replications,
        cfg.replications,
    ))
}

/// Rejection estimate of `P(X_{n+1} is a j1-RkR | X_n is a j2-RkR)` from
/// fresh `(k+2)`-windows.
pub fn estimate_conditional_next(
    pmf: &Pmf,
    k: usize,
    j1: usize,
    j2: usize,
    cfg: &SimConfig,
) -> Result<Estimate> {
    check_levels(k, j1)?;
    check_levels(k, j2)?;
    let sampler = Sampler::new(pmf);
    let t = run_replications(
        cfg,
        tally(k + 2),
        |rng, t| {
            sampler.fill(rng, &mut t.buf);
            if level_at(&t.buf, k, k) == j2 {
                t.cond += 1;
                if level_at(&t.buf, k + 1, k) == j1 {
                    t.hits += 1;
                }
            }
        },
        merge_tally,
    )?;
    if t.cond == 0 {
        return Err(RkrError::NoConditioningHits);
    }
    Ok(Estimate::proportion(t.hits, t.cond, cfg.replications))
}

/// Empirical law of `W` over simulated sequences of length `n + k`.
pub fn estimate_count_pmf(
    pmf: &Pmf,
    i0: usize,
    k: usize,
    j: usize,
    n: usize,
    cfg: &SimConfig,
) -> Result<CountDistribution> {
    check_levels(k, j)?;
    check_target(pmf, i0)?;
    if n == 0 {
        return Err(RkrError::InvalidQuery(
            "number of windows n must be at least 1".into(),
        ));
    }
    let sampler = Sampler::new(pmf);
    let (hist, _) = run_replications(
        cfg,
        || (vec![0u64; n + 1], vec![0usize; n + k]),
        |rng, (hist, buf)| {
            sampler.fill(rng, buf);
            let w = (k..n + k)
                .filter(|&pos| buf[pos] == i0 && level_at(buf, pos, k) == j)
                .count();
            hist[w] += 1;
        },
        |a, b| {
            for (x, y) in a.0.iter_mut().zip(&b.0) {
                *x += y;
            }
        },
    )?;
    let reps = cfg.replications as f64;
    let masses = hist.iter().map(|&c| c as f64 / reps).collect();
    let (sum, sum_sq) = hist.iter().enumerate().fold((0.0, 0.0), |(s, q), (w, &c)| {
        let w = w as f64;
        (s + w * c as f64, q + w * w * c as f64)
    });
    let lambda = n as f64 * window_term(pmf, i0, k, j);
    let mut dist = CountDistribution::from_masses(masses, lambda, n, CountSource::Empirical);
    let mean = Estimate::mean(sum, sum_sq, cfg.replications);
    dist.mean = mean.value;
    dist.mean_stderr = Some(mean.stderr);
    Ok(dist)
}

/// Fraction of simulated length-`n` sequences with `S_k >= s`.
pub fn estimate_scan_tail(
    pmf: &Pmf,
    target: ScanTarget,
    k: usize,
    n: usize,
    s: usize,
    cfg: &SimConfig,
) -> Result<Estimate> {
    check_scan_shape(target, k, n)?;
    let sampler = Sampler::new(pmf);
    let t = run_replications(
        cfg,
        tally(n),
        |rng, t| {
            sampler.fill(rng, &mut t.buf);
            if scan_statistic(&t.buf, target, k) >= s {
                t.hits += 1;
            }
        },
        merge_tally,
    )?;
    Ok(Estimate::proportion(
        t.hits,
        cfg.replications,
        cfg.replications,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(seed: u64, reps: u64) -> SimConfig {
        SimConfig::new(seed, reps).unwrap()
    }

    #[test]
    fn degenerate_pmf_sequence() {
        let one = Pmf::from_probs(&[1.0]).unwrap();
        assert_eq!(simulate_sequence(&one, 5, 42, 0), vec![1; 5]);
    }

    #[test]
    fn sequences_are_deterministic() {
        let pmf = Pmf::from_probs(&[0.5, 0.3, 0.2]).unwrap();
        let a = simulate_sequence(&pmf, 100, 9, 3);
        assert_eq!(a, simulate_sequence(&pmf, 100, 9, 3));
        assert_ne!(a, simulate_sequence(&pmf, 100, 9, 4));
        assert_ne!(a, simulate_sequence(&pmf, 100, 10, 3));
    }

    #[test]
    fn sampler_frequency() {
        let pmf = Pmf::uniform(2).unwrap();
        let n = 1_000_000;
        let seq = simulate_sequence(&pmf, n, 2024, 0);
        let twos = seq.iter().filter(|&&x| x == 2).count() as f64 / n as f64;
        let stderr = (0.25 / n as f64).sqrt();
        assert!((twos - 0.5).abs() <= 4.0 * stderr, "{twos}");
    }

    #[test]
    fn sampler_never_draws_zero_mass() {
        let pmf = Pmf::from_probs(&[0.0, 0.5, 0.0, 0.5, 0.0]).unwrap();
        let seq = simulate_sequence(&pmf, 10_000, 1, 0);
        assert!(seq.iter().all(|&x| x == 2 || x == 4));
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::new(1, 0).is_err());
        assert!(cfg(1, 10).with_workers(0).validate().is_err());
    }

    #[test]
    fn wilson_interval_contains_estimate() {
        for (hits, n) in [(0, 10), (10, 10), (3, 7), (1, 100_000)] {
            let e = Estimate::proportion(hits, n, n);
            assert!(e.ci95.0 <= e.value && e.value <= e.ci95.1);
            assert!(e.ci95.0 >= 0.0 && e.ci95.1 <= 1.0);
        }
    }

    #[test]
    fn event_prob_estimates() {
        let coin = Pmf::uniform(2).unwrap();
        let e = estimate_event_prob(&coin, 1, 1, None, &cfg(7, 100_000)).unwrap();
        assert!((e.value - 0.75).abs() <= 4.0 * e.stderr);
        let p532 = Pmf::from_probs(&[0.5, 0.3, 0.2]).unwrap();
        let e = estimate_event_prob(&p532, 2, 1, Some(2), &cfg(8, 100_000)).unwrap();
        assert!((e.value - 0.15).abs() <= 4.0 * e.stderr);
        let one = Pmf::from_probs(&[1.0]).unwrap();
        let e = estimate_event_prob(&one, 2, 2, None, &cfg(1, 1000)).unwrap();
        assert_eq!(e.value, 1.0);
    }

    #[test]
    fn conditional_estimates() {
        let coin = Pmf::uniform(2).unwrap();
        let e = estimate_conditional_next(&coin, 1, 1, 1, &cfg(11, 100_000)).unwrap();
        assert!((e.value - 2.0 / 3.0).abs() <= 4.0 * e.stderr);
        let e = estimate_conditional_next(&coin, 2, 1, 1, &cfg(12, 100_000)).unwrap();
        assert!((e.value - 0.25).abs() <= 4.0 * e.stderr);
        let e = estimate_conditional_next(&coin, 1, 0, 0, &cfg(13, 100_000)).unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(e.stderr, 0.0);
        let one = Pmf::from_probs(&[1.0]).unwrap();
        assert_eq!(
            estimate_conditional_next(&one, 2, 0, 0, &cfg(1, 100)),
            Err(RkrError::NoConditioningHits)
        );
    }

    #[test]
    fn count_estimates() {
        let coin = Pmf::uniform(2).unwrap();
        let d = estimate_count_pmf(&coin, 2, 1, 1, 2, &cfg(5, 100_000)).unwrap();
        let exact: [f64; 3] = [5.0 / 8.0, 2.0 / 8.0, 1.0 / 8.0];
        for (w, &p) in exact.iter().enumerate() {
            let se = (p * (1.0 - p) / 100_000.0_f64).sqrt();
            assert!((d.masses[w] - p).abs() <= 4.0 * se);
        }
        assert!((d.mean - 0.5).abs() <= 4.0 * d.mean_stderr.unwrap());
        let one = Pmf::from_probs(&[1.0]).unwrap();
        let d = estimate_count_pmf(&one, 1, 1, 1, 4, &cfg(5, 500)).unwrap();
        assert_eq!(d.masses, vec![0.0, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn scan_estimates() {
        let coin = Pmf::uniform(2).unwrap();
        let e = estimate_scan_tail(&coin, ScanTarget::Fixed(2), 2, 3, 2, &cfg(3, 100_000)).unwrap();
        assert!((e.value - 0.375).abs() <= 4.0 * e.stderr);
        let e = estimate_scan_tail(&coin, ScanTarget::Fixed(1), 2, 3, 2, &cfg(3, 1000)).unwrap();
        assert_eq!(e.value, 1.0);
        let e = estimate_scan_tail(&coin, ScanTarget::Random, 1, 2, 1, &cfg(4, 100_000)).unwrap();
        assert!((e.value - 0.75).abs() <= 4.0 * e.stderr);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let pmf = Pmf::from_probs(&[0.5, 0.3, 0.2]).unwrap();
        let a = estimate_count_pmf(&pmf, 2, 2, 1, 6, &cfg(99, 50_000)).unwrap();
        let b = estimate_count_pmf(&pmf, 2, 2, 1, 6, &cfg(99, 50_000).with_workers(4)).unwrap();
        assert_eq!(a, b);
    }
}
