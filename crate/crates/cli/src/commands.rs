//! One handler per subcommand; each returns a [`Report`].

use serde_json::{json, Value};

use rkr_core::montecarlo::{self, SimConfig};
use rkr_core::oracle::{self, EnumBudget};
use rkr_core::poisson::{self, BoundReport};
use rkr_core::records::{self, PredictionForm, RecordQuery, SuccessiveForm, Transition};
use rkr_core::scan::{self, TailMethod};
use rkr_core::{lll, Pmf, PmfSource, RkrError, ScanTarget};

use crate::args::*;
use crate::error::{CliError, CliResult};
use crate::input::read_sequence;
use crate::report::Report;

fn pmf_echo(source: &PmfSource, pmf: &Pmf) -> Value {
    json!({ "source": source, "probs": pmf.probs() })
}

fn require<T>(value: Option<T>, flag: &str, why: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::Usage(format!("{flag} is required {why}")))
}

fn sim_config(seed: u64, reps: u64, workers: u64) -> CliResult<SimConfig> {
    Ok(SimConfig::new(seed, reps)?.with_workers(workers as usize))
}

fn prediction_form(v: PredictionVariant) -> PredictionForm {
    match v {
        PredictionVariant::Published => PredictionForm::Published,
        PredictionVariant::Corrected => PredictionForm::Corrected,
    }
}

fn variant_tag(v: PredictionVariant) -> &'static str {
    match v {
        PredictionVariant::Published => "paper",
        PredictionVariant::Corrected => "corrected",
    }
}

pub fn cmd_exact(a: &ExactArgs, budget: &EnumBudget) -> CliResult<Report> {
    let (source, pmf) = a.pmf.resolve()?;
    let (k, j) = (a.level.k, a.level.j);
    let query = RecordQuery::new(k, j)?;
    query.validate(&pmf)?;

    let results = match a.target {
        ExactTarget::Window => {
            let i0 = require(a.i0, "--i0", "for window")?;
            let q = query.with_target(i0);
            let value = records::window_event_prob(&pmf, &q)?;
            let mut r = json!({
                "value": value,
                "complement": records::window_nonevent_prob(&pmf, &q)?,
            });
            if let Some(n) = a.n {
                r["union_bound"] = json!(records::first_n_union_bound(&pmf, &q.with_horizon(n))?);
            }
            if a.verify {
                let exact = oracle::exact_event_prob(&pmf, k, j, Some(i0), budget)?;
                r["oracle"] = json!(exact);
                r["abs_diff"] = json!((value - exact).abs());
            }
            r
        }
        ExactTarget::Marginal => {
            let value = records::marginal_prob(&pmf, k, j)?;
            let mut r = json!({ "value": value });
            if a.verify {
                let exact = oracle::exact_event_prob(&pmf, k, j, None, budget)?;
                r["oracle"] = json!(exact);
                r["abs_diff"] = json!((value - exact).abs());
            }
            r
        }
        ExactTarget::Posterior => {
            let value = records::posterior(&pmf, k, j)?;
            let mut r = json!({ "value": value });
            if a.verify {
                let marginal = oracle::exact_event_prob(&pmf, k, j, None, budget)?;
                let exact = (1..=pmf.support_size())
                    .map(|i| Ok(oracle::exact_event_prob(&pmf, k, j, Some(i), budget)? / marginal))
                    .collect::<Result<Vec<f64>, RkrError>>()?;
                let diff = value
                    .iter()
                    .zip(&exact)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                r["oracle"] = json!(exact);
                r["abs_diff"] = json!(diff);
            }
            r
        }
        ExactTarget::Prediction => {
            let value = records::prediction_prob(&pmf, k, j, prediction_form(a.variant))?;
            let mut r = json!({ "variant": variant_tag(a.variant), "value": value });
            if a.verify {
                let exact = oracle::exact_conditional_next(&pmf, k, j, j, budget)?;
                r["oracle"] = json!(exact);
                r["abs_diff"] = json!((value - exact).abs());
            }
            r
        }
        ExactTarget::Conditional => {
            let j1 = a.j1.unwrap_or(j);
            RecordQuery::new(k, j1)?;
            // no closed form across levels
            let value = if j1 == j {
                Some(records::prediction_prob(
                    &pmf,
                    k,
                    j,
                    PredictionForm::Corrected,
                )?)
            } else {
                None
            };
            let exact = oracle::exact_conditional_next(&pmf, k, j1, j, budget)?;
            let mut r = json!({ "j1": j1, "j2": j, "value": value, "oracle": exact });
            if let Some(v) = value {
                r["abs_diff"] = json!((v - exact).abs());
            }
            r
        }
        ExactTarget::CountPmf => {
            let i0 = require(a.i0, "--i0", "for count-pmf")?;
            let n = require(a.n, "--n", "for count-pmf")?;
            let report = BoundReport::new(&pmf, i0, k, j, n)?;
            let po = poisson::poisson_pmf(report.lambda, n);
            let mut r = json!({
                "lambda": report.lambda,
                "poisson": po.masses,
                "poisson_overflow": po.overflow,
                "bound_paper": report.bound_paper,
                "bound_conservative": report.bound_conservative,
            });
            if a.verify {
                let exact = oracle::exact_count_pmf(&pmf, i0, k, j, n, budget)?;
                r["oracle"] = json!(exact.masses);
                r["oracle_mean"] = json!(exact.mean);
                r["tv_exact"] = json!(poisson::tv_distance(&exact, &po));
            }
            r
        }
    };

    let inputs = json!({
        "pmf": pmf_echo(&source, &pmf),
        "k": k,
        "j": j,
        "i0": a.i0,
        "n": a.n,
        "j1": a.j1,
        "target": format!("{:?}", a.target).to_lowercase(),
        "variant": variant_tag(a.variant),
        "verify": a.verify,
    });
    Ok(Report::new("exact", inputs, results))
}

pub fn cmd_simulate(a: &SimulateArgs) -> CliResult<Report> {
    let (source, pmf) = a.pmf.resolve()?;
    let (k, j) = (a.level.k, a.level.j);
    RecordQuery::new(k, j)?.validate(&pmf)?;
    let cfg = sim_config(a.sim.seed, a.sim.reps, a.sim.workers)?;
    let results = match a.target {
        SimTarget::Event => json!(montecarlo::estimate_event_prob(&pmf, k, j, a.i0, &cfg)?),
        SimTarget::Conditional => {
            let j1 = a.j1.unwrap_or(j);
            json!(montecarlo::estimate_conditional_next(&pmf, k, j1, j, &cfg)?)
        }
        SimTarget::CountPmf => {
            let i0 = require(a.i0, "--i0", "for count-pmf")?;
            let n = require(a.n, "--n", "for count-pmf")?;
            json!(montecarlo::estimate_count_pmf(&pmf, i0, k, j, n, &cfg)?)
        }
    };
    let inputs = json!({
        "pmf": pmf_echo(&source, &pmf),
        "k": k,
        "j": j,
        "i0": a.i0,
        "n": a.n,
        "j1": a.j1,
        "target": match a.target {
            SimTarget::Event => "event",
            SimTarget::Conditional => "conditional",
            SimTarget::CountPmf => "count-pmf",
        },
        "seed": a.sim.seed,
        "reps": a.sim.reps,
    });
    Ok(Report::new("simulate", inputs, results))
}

/// Rounding allowance when testing exact TV against a bound.
const SLACK: f64 = 1e-12;

pub fn cmd_poisson_bound(a: &PoissonBoundArgs, budget: &EnumBudget) -> CliResult<Report> {
    let (source, pmf) = a.pmf.resolve()?;
    let (k, j) = (a.level.k, a.level.j);
    let mut report = BoundReport::new(&pmf, a.i0, k, j, a.n)?;
    if a.exact_tv {
        report = report.with_exact(&oracle::exact_count_pmf(&pmf, a.i0, k, j, a.n, budget)?);
    }
    if a.mc_tv {
        let seed = require(a.seed, "--seed", "with --mc-tv")?;
        let cfg = sim_config(seed, a.reps, a.workers)?;
        report = report.with_empirical(&montecarlo::estimate_count_pmf(
            &pmf, a.i0, k, j, a.n, &cfg,
        )?);
    }
    let mut bounds = Vec::new();
    if a.variant != BoundVariant::Conservative {
        bounds.push(json!({ "variant": "paper", "value": report.bound_paper }));
    }
    if a.variant != BoundVariant::Published {
        bounds.push(json!({ "variant": "conservative", "value": report.bound_conservative }));
    }
    let mut results = json!({
        "lambda": report.lambda,
        "p": report.p,
        "phi": report.phi,
        "bounds": bounds,
        "tv_exact": report.tv_exact,
        "tv_empirical": report.tv_empirical,
    });
    if let Some(tv) = report.tv_exact {
        results["tv_exact_within_conservative"] = json!(tv <= report.bound_conservative + SLACK);
        results["tv_exact_within_paper"] = json!(tv <= report.bound_paper + SLACK);
    }
    let inputs = json!({
        "pmf": pmf_echo(&source, &pmf),
        "i0": a.i0,
        "k": k,
        "j": j,
        "n": a.n,
        "variant": match a.variant {
            BoundVariant::Both => "both",
            BoundVariant::Published => "paper",
            BoundVariant::Conservative => "conservative",
        },
        "exact_tv": a.exact_tv,
        "mc_tv": a.mc_tv,
        "seed": a.seed,
        "reps": if a.mc_tv { Some(a.reps) } else { None },
    });
    Ok(Report::new("poisson-bound", inputs, results))
}

pub fn cmd_lll_check(a: &LllArgs, budget: &EnumBudget) -> CliResult<Report> {
    let (source, pmf) = a.pmf.resolve()?;
    let (k, j) = (a.level.k, a.level.j);
    let verdict = lll::lll_check(&pmf, a.i0, k, j)?;
    let mut results = json!(verdict);
    if let Some(n) = a.n {
        results["no_event_prob"] = json!(oracle::exact_no_event_prob(&pmf, a.i0, k, j, n, budget)?);
    }
    let inputs = json!({
        "pmf": pmf_echo(&source, &pmf),
        "i0": a.i0,
        "k": k,
        "j": j,
        "n": a.n,
    });
    Ok(Report::new("lll-check", inputs, results))
}

pub fn cmd_scan(a: &ScanArgs, budget: &EnumBudget) -> CliResult<Report> {
    match (&a.input, a.pmf.is_given()) {
        (Some(_), true) => Err(CliError::Usage(
            "pass either --input (statistic) or a distribution (tail probability), not both".into(),
        )),
        (Some(path), false) => {
            let seq = read_sequence(path)?;
            let result = match a.target {
                ScanTarget::Fixed(m) => scan::fixed_target_scan(&seq, m, a.k)?,
                ScanTarget::Random => scan::random_target_scan(&seq, a.k)?,
            };
            let inputs = json!({
                "input": path.file_name().map(|f| f.to_string_lossy().into_owned()),
                "length": seq.len(),
                "k": a.k,
                "target": a.target,
            });
            Ok(Report::new("scan", inputs, json!(result)))
        }
        (None, true) => {
            let (source, pmf) = a.pmf.resolve()?;
            let n = require(a.n, "--n", "for tail probabilities")?;
            let s = require(a.s, "--s", "for tail probabilities")?;
            let method = match a.method {
                TailMethodArg::Oracle => TailMethod::Oracle(*budget),
                TailMethodArg::Montecarlo => {
                    let seed = require(a.seed, "--seed", "for --method montecarlo")?;
                    TailMethod::MonteCarlo(sim_config(seed, a.reps, a.workers)?)
                }
            };
            let tail = scan::scan_tail(&pmf, a.target, a.k, n, s, method)?;
            let inputs = json!({
                "pmf": pmf_echo(&source, &pmf),
                "k": a.k,
                "target": a.target,
                "n": n,
                "s": s,
                "method": match a.method {
                    TailMethodArg::Oracle => "oracle",
                    TailMethodArg::Montecarlo => "montecarlo",
                },
                "seed": a.seed,
                "reps": if a.method == TailMethodArg::Montecarlo { Some(a.reps) } else { None },
            });
            Ok(Report::new("scan", inputs, json!({ "tail": tail })))
        }
        (None, false) => Err(CliError::Usage(
            "scan needs --input FILE or a distribution (--pmf / --family)".into(),
        )),
    }
}

pub fn cmd_analyze(a: &AnalyzeArgs) -> CliResult<Report> {
    let seq = read_sequence(&a.input)?;
    let k = a.k;
    if let Some(j) = a.j {
        RecordQuery::new(k, j)?;
    }
    let events = records::detect_events(&seq, k)?;
    let scan = scan::random_target_scan(&seq, k)?;
    let pmf = Pmf::empirical(&seq)?;
    let hist = events.histogram();
    let total = events.levels.len() as f64;
    let levels: Vec<usize> = match a.j {
        Some(j) => vec![j],
        None => (0..=k).collect(),
    };
    let per_level: Vec<Value> = levels
        .iter()
        .map(|&j| {
            Ok(json!({
                "j": j,
                "count": hist[j],
                "observed_fraction": hist[j] as f64 / total,
                "model_marginal": records::marginal_prob(&pmf, k, j)?,
            }))
        })
        .collect::<Result<_, RkrError>>()?;
    let mut results = json!({
        "levels": events.levels,
        "level_histogram": per_level,
        "scan_statistic": scan,
        "empirical_pmf": pmf.probs(),
    });
    if let Some(j) = a.j {
        results["indices"] = json!(events.indices_at(j).collect::<Vec<_>>());
    }
    let inputs = json!({
        "input": a.input.file_name().map(|f| f.to_string_lossy().into_owned()),
        "length": seq.len(),
        "k": k,
        "j": a.j,
    });
    Ok(Report::new("analyze", inputs, results))
}

/// Grid used by `compare` when no distribution is given.
pub fn default_grid() -> Vec<(String, PmfSource)> {
    use rkr_core::Family;
    let fam = |family, m, ratio| PmfSource::Family { family, m, ratio };
    vec![
        ("uniform(M=2)".into(), fam(Family::Uniform, 2, None)),
        ("uniform(M=3)".into(), fam(Family::Uniform, 3, None)),
        ("uniform(M=4)".into(), fam(Family::Uniform, 4, None)),
        (
            "probs[0.5,0.3,0.2]".into(),
            PmfSource::Probs {
                probs: vec![0.5, 0.3, 0.2],
            },
        ),
        (
            "truncated_geometric(M=4,ratio=0.5)".into(),
            fam(Family::TruncatedGeometric, 4, Some(0.5)),
        ),
    ]
}

fn label(source: &PmfSource) -> String {
    match source {
        PmfSource::Probs { probs } => format!(
            "probs[{}]",
            probs
                .iter()
                .map(f64::to_string)
                .collect::<Vec<_>>()
                .join(",")
        ),
        PmfSource::Family { family, m, ratio } => match ratio {
            Some(r) => format!("{}(M={m},ratio={r})", json!(family).as_str().unwrap_or("")),
            None => format!("{}(M={m})", json!(family).as_str().unwrap_or("")),
        },
    }
}

struct Row {
    pmf: String,
    quantity: &'static str,
    k: usize,
    j: usize,
    i0: Option<usize>,
    published: f64,
    corrected: f64,
    oracle: f64,
    mc: Option<(f64, f64)>,
}

impl Row {
    fn to_json(&self) -> Value {
        json!({
            "pmf": self.pmf,
            "quantity": self.quantity,
            "k": self.k,
            "j": self.j,
            "i0": self.i0,
            "published": self.published,
            "corrected": self.corrected,
            "oracle": self.oracle,
            "diff_published": (self.published - self.oracle).abs(),
            "diff_corrected": (self.corrected - self.oracle).abs(),
            "mc": self.mc.map(|m| m.0),
            "mc_stderr": self.mc.map(|m| m.1),
        })
    }
}

/// Discrepancy threshold for counting a published form as disagreeing.
const DISCREPANCY_TOL: f64 = 1e-12;

pub fn cmd_compare(a: &CompareArgs, budget: &EnumBudget) -> CliResult<Report> {
    if a.k_max == 0 {
        return Err(CliError::Usage("--k-max must be at least 1".into()));
    }
    let grid = if a.pmf.is_given() {
        let source = a.pmf.source()?;
        vec![(label(&source), source)]
    } else {
        default_grid()
    };
    let mut rows = Vec::new();
    for (name, source) in &grid {
        let pmf = source.build()?;
        for k in 1..=a.k_max {
            for j in 0..=k {
                compare_levels(&pmf, name, k, j, a, budget, &mut rows)?;
            }
        }
    }
    let max = |f: fn(&Row) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    let summary = json!({
        "rows": rows.len(),
        "max_diff_published": max(|r| (r.published - r.oracle).abs()),
        "max_diff_corrected": max(|r| (r.corrected - r.oracle).abs()),
        "published_discrepancies": rows
            .iter()
            .filter(|r| (r.published - r.oracle).abs() > DISCREPANCY_TOL)
            .count(),
        "corrected_discrepancies": rows
            .iter()
            .filter(|r| (r.corrected - r.oracle).abs() > DISCREPANCY_TOL)
            .count(),
    });
    let results = json!({
        "rows": rows.iter().map(Row::to_json).collect::<Vec<_>>(),
        "summary": summary,
    });
    let inputs = json!({
        "grid": grid.iter().map(|(name, s)| json!({"label": name, "source": s})).collect::<Vec<_>>(),
        "k_max": a.k_max,
        "reps": a.reps,
        "seed": a.seed,
    });
    Ok(Report::new("compare", inputs, results))
}

fn compare_levels(
    pmf: &Pmf,
    name: &str,
    k: usize,
    j: usize,
    a: &CompareArgs,
    budget: &EnumBudget,
    rows: &mut Vec<Row>,
) -> CliResult<()> {
    let base = a.seed.wrapping_add(rows.len() as u64);
    let mc_cfg = |offset: u64| -> CliResult<Option<SimConfig>> {
        if a.reps == 0 {
            return Ok(None);
        }
        Ok(Some(SimConfig::new(base.wrapping_add(offset), a.reps)?))
    };

    let marginal = records::marginal_prob(pmf, k, j)?;
    let mc = match mc_cfg(0)? {
        Some(cfg) => {
            let e = montecarlo::estimate_event_prob(pmf, k, j, None, &cfg)?;
            Some((e.value, e.stderr))
        }
        None => None,
    };
    rows.push(Row {
        pmf: name.to_string(),
        quantity: "marginal",
        k,
        j,
        i0: None,
        published: marginal,
        corrected: marginal,
        oracle: oracle::exact_event_prob(pmf, k, j, None, budget)?,
        mc,
    });
    if marginal == 0.0 {
        return Ok(());
    }

    let mc = match mc_cfg(1)? {
        Some(cfg) => match montecarlo::estimate_conditional_next(pmf, k, j, j, &cfg) {
            Ok(e) => Some((e.value, e.stderr)),
            Err(RkrError::NoConditioningHits) => None,
            Err(e) => return Err(e.into()),
        },
        None => None,
    };
    rows.push(Row {
        pmf: name.to_string(),
        quantity: "prediction",
        k,
        j,
        i0: None,
        published: records::prediction_prob(pmf, k, j, PredictionForm::Published)?,
        corrected: records::prediction_prob(pmf, k, j, PredictionForm::Corrected)?,
        oracle: oracle::exact_conditional_next(pmf, k, j, j, budget)?,
        mc,
    });

    for i0 in 1..=pmf.support_size() {
        let q = RecordQuery::new(k, j)?.with_target(i0);
        if records::window_event_prob(pmf, &q)? == 0.0 {
            continue;
        }
        let transitions = [
            (Transition::StayJ, "successive_stay", j),
            (Transition::UpToJPlus1, "successive_up", j + 1),
        ];
        for (transition, quantity, j_to) in transitions {
            if j_to > k {
                continue;
            }
            rows.push(Row {
                pmf: name.to_string(),
                quantity,
                k,
                j,
                i0: Some(i0),
                published: records::successive_prob(
                    pmf,
                    &q,
                    transition,
                    SuccessiveForm::Published,
                )?,
                corrected: records::successive_prob(
                    pmf,
                    &q,
                    transition,
                    SuccessiveForm::Exchangeable,
                )?,
                oracle: oracle::exact_successive(pmf, i0, k, j, j_to, budget)?,
                mc: None,
            });
        }
    }
    Ok(())
}
