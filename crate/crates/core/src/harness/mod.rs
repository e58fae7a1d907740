//! Monte Carlo engine: runs seeded replications of an experiment, aggregates
//! mean squared errors, mean objective values, and coverage with Monte Carlo
//! standard errors, and audits the smaller-objective-is-better rule with
//! paired search budgets.
//!
//! Replications map to independent streams derived from (master seed,
//! replication index, purpose tag), are executed in parallel, and are folded
//! in replication order — so every reported number is bit-identical
//! regardless of worker-thread count.

pub mod reference;
pub mod tables;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{LocationModel, RngStream};
use crate::error::{Error, Result};
use crate::location::{better_of, median, trimmed_mean, LocationEstimate, UnivariateSample};
use crate::regress::{better_screen, lar_screen, lts_fit_checkpoints, sis_screen, VariableSubset};
use crate::scenario::{gen_location, gen_regression, gen_screening, ContaminationScenario, RegressionScenario};
use crate::subsample::{
    random_subset_search_checkpoints, ObjectiveKind, SubsampleObjective, SubsampleSolution,
    SubsetIndex,
};

/// What a single Monte Carlo run simulates and which methods it applies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    /// I.i.d. location sample; methods: median, trimmed mean (quarter per
    /// tail), and the likelihood-better of the two.
    LocationEstimators { model: LocationModel, theta0: f64, n: usize },
    /// Contaminated location sample; methods: subsample search under each
    /// objective at each listed budget (budgets share a draw stream, so a
    /// larger budget never has the worse objective).
    SubsampleSearch { scenario: ContaminationScenario, m: usize, budgets: Vec<usize> },
    /// Contaminated regression; methods: trimmed least squares at each
    /// listed budget (prefix-shared draws, as above).
    TrimmedRegression { scenario: RegressionScenario, m: usize, budgets: Vec<usize> },
    /// Wide screening design; methods: LAR, SIS, and the smaller-RSS better
    /// of the two, each keeping `keep` variables.
    Screening { p: usize, keep: usize },
}

/// One Monte Carlo run: an experiment plus the replication protocol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    /// Short name echoed into reports and used to derive stream purposes.
    pub label: String,
    /// Full replication count before scaling.
    pub replications: usize,
    pub master_seed: u64,
    /// Desk-scale multiplier in (0, 1]; the effective count is
    /// round(replications × scale_factor), at least 1.
    pub scale_factor: f64,
    /// Radius of the metric-ball "good estimate" predicate for location
    /// methods.
    pub good_radius: f64,
    pub experiment: Experiment,
}

impl McConfig {
    pub fn effective_replications(&self) -> usize {
        ((self.replications as f64 * self.scale_factor).round() as usize).max(1)
    }

    fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidInput("replications must be ≥ 1".into()));
        }
        if !(self.scale_factor > 0.0 && self.scale_factor <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "scale factor {} outside (0, 1]",
                self.scale_factor
            )));
        }
        if !(self.good_radius > 0.0) {
            return Err(Error::InvalidInput(format!(
                "good radius {} must be positive",
                self.good_radius
            )));
        }
        match &self.experiment {
            Experiment::SubsampleSearch { budgets, .. }
            | Experiment::TrimmedRegression { budgets, .. }
                if budgets.is_empty() =>
            {
                Err(Error::InvalidInput("budget list must be nonempty".into()))
            }
            _ => Ok(()),
        }
    }

    /// Method names, fixed by the experiment kind; summaries align with
    /// this order.
    pub fn method_tags(&self) -> Vec<String> {
        match &self.experiment {
            Experiment::LocationEstimators { .. } => {
                vec!["median".into(), "trimmed".into(), "better".into()]
            }
            Experiment::SubsampleSearch { budgets, .. } => {
                let mut tags = Vec::new();
                for kind in ["likelihood", "kolmogorov"] {
                    for b in budgets {
                        tags.push(format!("{kind}/B={b}"));
                    }
                }
                tags
            }
            Experiment::TrimmedRegression { budgets, .. } => {
                budgets.iter().map(|b| format!("lts/B={b}")).collect()
            }
            Experiment::Screening { .. } => {
                vec!["lar".into(), "sis".into(), "better".into()]
            }
        }
    }
}

/// What one method produced on one replication.
#[derive(Clone, Copy, Debug)]
struct Outcome {
    squared_error: f64,
    objective: f64,
    good: bool,
}

/// Aggregated results for one method across all replications.
#[derive(Clone, Debug, Serialize)]
pub struct MethodSummary {
    pub method_tag: String,
    /// Mean squared error over successful replications (0 when the method
    /// reports no estimate, e.g. screening).
    pub mse: f64,
    /// Sample standard deviation of the squared errors divided by √R.
    pub mse_mc_se: f64,
    /// Mean objective value.
    pub mov: f64,
    /// Sample standard deviation of the objective values divided by √R.
    pub mov_mc_se: f64,
    /// Fraction of successful replications whose outcome was "good":
    /// estimate within the good radius (location estimators), subset within
    /// the clean indices (subsample search and trimmed regression), or
    /// selection covering the true support (screening).
    pub coverage: f64,
    /// Replications on which this method failed; they are counted, never
    /// silently dropped.
    pub failures: usize,
}

/// Results of one Monte Carlo run.
#[derive(Clone, Debug, Serialize)]
pub struct McReport {
    pub config: McConfig,
    pub replications_run: usize,
    pub methods: Vec<MethodSummary>,
    /// Wall-clock seconds; excluded from serialized artifacts so identical
    /// configurations produce byte-identical files.
    #[serde(skip)]
    pub wall_seconds: f64,
}

impl McReport {
    pub fn method(&self, tag: &str) -> Option<&MethodSummary> {
        self.methods.iter().find(|m| m.method_tag == tag)
    }
}

/// Runs the configured experiment. Replications execute in parallel but are
/// aggregated in replication order, so the report is independent of thread
/// count and execution interleaving.
pub fn run_mc(config: &McConfig) -> Result<McReport> {
    config.validate()?;
    let reps = config.effective_replications();
    let start = Instant::now();
    let per_rep: Vec<Vec<Option<Outcome>>> = (0..reps as u64)
        .into_par_iter()
        .map(|r| run_one(config, r))
        .collect::<Result<Vec<_>>>()?;
    let tags = config.method_tags();
    let mut methods = Vec::with_capacity(tags.len());
    for (k, tag) in tags.into_iter().enumerate() {
        let outcomes: Vec<Outcome> = per_rep.iter().filter_map(|rep| rep[k]).collect();
        methods.push(summarize_method(tag, &outcomes, reps));
    }
    Ok(McReport {
        config: config.clone(),
        replications_run: reps,
        methods,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

fn summarize_method(method_tag: String, outcomes: &[Outcome], reps: usize) -> MethodSummary {
    let n = outcomes.len();
    if n == 0 {
        return MethodSummary {
            method_tag,
            mse: 0.0,
            mse_mc_se: 0.0,
            mov: 0.0,
            mov_mc_se: 0.0,
            coverage: 0.0,
            failures: reps,
        };
    }
    let (mse, mse_mc_se) = mean_and_se(outcomes.iter().map(|o| o.squared_error));
    let (mov, mov_mc_se) = mean_and_se(outcomes.iter().map(|o| o.objective));
    MethodSummary {
        method_tag,
        mse,
        mse_mc_se,
        mov,
        mov_mc_se,
        coverage: outcomes.iter().filter(|o| o.good).count() as f64 / n as f64,
        failures: reps - n,
    }
}

/// Mean and its Monte Carlo standard error (sample SD / √n); SE is 0 for a
/// single value.
fn mean_and_se(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn run_one(config: &McConfig, rep: u64) -> Result<Vec<Option<Outcome>>> {
    let data_stream = RngStream::new(config.master_seed, rep, &format!("data/{}", config.label));
    match &config.experiment {
        Experiment::LocationEstimators { model, theta0, n } => {
            let sample = UnivariateSample::new(model.sample(*theta0, &data_stream, *n))?;
            let med = LocationEstimate::evaluated(median(&sample), "median", model, &sample);
            let trm = LocationEstimate::evaluated(
                trimmed_mean(&sample, 0.5)?,
                "trimmed",
                model,
                &sample,
            );
            let bet = better_of(&[med.clone(), trm.clone()], model, &sample)?;
            let outcome = |e: &LocationEstimate| {
                Some(Outcome {
                    squared_error: (e.value - theta0) * (e.value - theta0),
                    objective: e.neg_log_lik,
                    good: (e.value - theta0).abs() <= config.good_radius,
                })
            };
            Ok(vec![outcome(&med), outcome(&trm), outcome(&bet)])
        }
        Experiment::SubsampleSearch { scenario, m, budgets } => {
            let (sample, good) = gen_location(scenario, &data_stream)?;
            let mut outcomes = Vec::with_capacity(2 * budgets.len());
            for kind in [ObjectiveKind::ProfileNll, ObjectiveKind::KolmogorovDistance] {
                let objective =
                    SubsampleObjective { kind, model: &scenario.good_model, sample: &sample };
                let purpose = format!("search/{:?}/{}", kind, config.label);
                let stream = RngStream::new(config.master_seed, rep, &purpose);
                let solutions = random_subset_search_checkpoints(
                    &objective,
                    sample.len(),
                    *m,
                    budgets,
                    &stream,
                )?;
                for sol in &solutions {
                    outcomes.push(Some(subsample_outcome(sol, &sample, &good, scenario.theta0)));
                }
            }
            Ok(outcomes)
        }
        Experiment::TrimmedRegression { scenario, m, budgets } => {
            let (data, good) = gen_regression(scenario, &data_stream)?;
            let stream = RngStream::new(
                config.master_seed,
                rep,
                &format!("search/lts/{}", config.label),
            );
            let fits = lts_fit_checkpoints(&data, *m, budgets, &stream)?;
            Ok(fits
                .iter()
                .map(|fit| {
                    let err: f64 = fit
                        .coefficients
                        .iter()
                        .zip(&scenario.beta)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    Some(Outcome {
                        squared_error: err,
                        objective: fit.rss_on_subset,
                        good: fit.subset.is_subset_of(&good),
                    })
                })
                .collect())
        }
        Experiment::Screening { p, keep } => {
            let data = gen_screening(*p, &data_stream)?.standardize()?;
            let support = VariableSubset::new(vec![0, 1, 2])?;
            let lar = lar_screen(&data, *keep);
            let sis = sis_screen(&data, *keep)?;
            let screening_outcome = |r: &crate::regress::ScreeningResult| Outcome {
                squared_error: 0.0,
                objective: r.rss,
                good: r.selected.contains_all(&support),
            };
            let sis_out = Some(screening_outcome(&sis));
            match lar {
                Ok(lar) => {
                    let better = better_screen(&data, *keep, &[lar.clone(), sis.clone()])?;
                    Ok(vec![
                        Some(screening_outcome(&lar)),
                        sis_out,
                        Some(screening_outcome(&better)),
                    ])
                }
                // LAR breakdown (exactly collinear active set) is recorded
                // as a failure for LAR and for the combiner that needs it.
                Err(_) => Ok(vec![None, sis_out, None]),
            }
        }
    }
}

/// The reported estimate for a subsample solution is the mean of the
/// selected values (the profile-likelihood location under normality); the
/// recorded objective is the Kolmogorov distance for that objective and the
/// subsample variance for the likelihood objective, matching how the search
/// quality is tabulated.
fn subsample_outcome(
    sol: &SubsampleSolution,
    sample: &UnivariateSample,
    good: &SubsetIndex,
    theta0: f64,
) -> Outcome {
    let values = sol.subset.gather(sample.values());
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let objective = match sol.objective_kind {
        ObjectiveKind::KolmogorovDistance => sol.objective,
        ObjectiveKind::ProfileNll => {
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0)
        }
    };
    Outcome {
        squared_error: (mean - theta0) * (mean - theta0),
        objective,
        good: sol.subset.is_subset_of(good),
    }
}

// ---------------------------------------------------------------------------
// Paired-budget audit
// ---------------------------------------------------------------------------

/// Tallies from the paired-budget audit: per replication, ξ is the
/// large-budget solution and η the small-budget one on the same data and
/// draw stream, so ξ's objective is never worse.
#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub objective: ObjectiveKind,
    pub budget_small: usize,
    pub budget_large: usize,
    pub replications: usize,
    /// ξ good, η not.
    pub better_only: usize,
    /// η good, ξ not.
    pub worse_only: usize,
    pub both: usize,
    pub neither: usize,
    /// Estimated P(ξ good) − P(η good) = (better_only − worse_only)/R.
    pub gap: f64,
    /// One-sided 95% lower confidence bound for the gap, from the binomial
    /// law of better_only among the discordant pairs.
    pub gap_lower_95: f64,
}

/// Runs the paired-budget audit of the smaller-objective-is-better rule on
/// a subsample-search experiment. The predicate receives the solution, the
/// clean-index set, and the sample, and decides whether the outcome is a
/// "good" decision. Equal budgets share every draw, so ξ = η and the gap is
/// exactly zero.
pub fn bsp_audit<P>(
    config: &McConfig,
    objective: ObjectiveKind,
    good: P,
    budgets: (usize, usize),
) -> Result<AuditReport>
where
    P: Fn(&SubsampleSolution, &SubsetIndex, &UnivariateSample) -> bool + Sync,
{
    config.validate()?;
    let Experiment::SubsampleSearch { scenario, m, .. } = &config.experiment else {
        return Err(Error::InvalidInput(
            "the paired-budget audit applies to subsample-search experiments".into(),
        ));
    };
    let (b_small, b_large) = budgets;
    if b_small == 0 || b_small > b_large {
        return Err(Error::InvalidInput(format!(
            "budgets must satisfy 1 ≤ small ≤ large, got ({b_small}, {b_large})"
        )));
    }
    let reps = config.effective_replications();
    let pairs: Vec<(bool, bool)> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| -> Result<(bool, bool)> {
            let data_stream =
                RngStream::new(config.master_seed, rep, &format!("data/{}", config.label));
            let (sample, good_idx) = gen_location(scenario, &data_stream)?;
            let obj =
                SubsampleObjective { kind: objective, model: &scenario.good_model, sample: &sample };
            let stream = RngStream::new(
                config.master_seed,
                rep,
                &format!("audit/{:?}/{}", objective, config.label),
            );
            let budget_list: Vec<usize> =
                if b_small == b_large { vec![b_small] } else { vec![b_small, b_large] };
            let sols =
                random_subset_search_checkpoints(&obj, sample.len(), *m, &budget_list, &stream)?;
            let eta = &sols[0];
            let xi = sols.last().expect("at least one budget");
            debug_assert!(xi.objective <= eta.objective);
            Ok((good(xi, &good_idx, &sample), good(eta, &good_idx, &sample)))
        })
        .collect::<Result<Vec<_>>>()?;

    let (mut n11, mut n10, mut n01, mut n00) = (0usize, 0usize, 0usize, 0usize);
    for (xi_good, eta_good) in pairs {
        match (xi_good, eta_good) {
            (true, true) => n11 += 1,
            (true, false) => n10 += 1,
            (false, true) => n01 += 1,
            (false, false) => n00 += 1,
        }
    }
    let r = reps as f64;
    let discordant = n10 + n01;
    let gap = (n10 as f64 - n01 as f64) / r;
    // Among discordant pairs, better_only ~ Binomial(discordant, q); the gap
    // is (2q − 1)·discordant/R, so a one-sided lower bound for q transfers
    // directly.
    let gap_lower_95 = if discordant == 0 {
        0.0
    } else {
        let q_lower = binomial_lower_bound(n10, discordant, 0.05);
        (2.0 * q_lower - 1.0) * discordant as f64 / r
    };
    Ok(AuditReport {
        objective,
        budget_small: b_small,
        budget_large: b_large,
        replications: reps,
        better_only: n10,
        worse_only: n01,
        both: n11,
        neither: n00,
        gap,
        gap_lower_95,
    })
}

/// One-sided lower confidence bound for a binomial proportion: the largest q
/// with P(X ≥ successes | q) ≤ alpha, i.e. the alpha-quantile of
/// Beta(successes, trials − successes + 1); 0 when successes = 0.
fn binomial_lower_bound(successes: usize, trials: usize, alpha: f64) -> f64 {
    if successes == 0 {
        return 0.0;
    }
    if successes >= trials {
        // Beta(n, 1) quantile has the closed form alpha^(1/n).
        return alpha.powf(1.0 / trials as f64);
    }
    let (a, b) = (successes as f64, (trials - successes) as f64 + 1.0);
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if crate::dist::special::betai_reg(a, b, mid) < alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

// ---------------------------------------------------------------------------
// Table artifacts
// ---------------------------------------------------------------------------

/// How a batch of reports is arranged into a table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableLayout {
    /// Rows = methods, columns = report labels, cells = MSE.
    MseGrid,
    /// Rows = methods, column pairs = (MOV, MSE) per report label.
    MovMseGrid,
    /// Rows = methods, columns = report labels, cells = coverage rate.
    CoverageGrid,
}

/// A rendered table: comma-separated values plus aligned plain text.
#[derive(Clone, Debug)]
pub struct TableArtifact {
    pub csv: String,
    pub text: String,
}

/// Arranges homogeneous reports (same method set) into one table.
pub fn summarize(reports: &[McReport], layout: TableLayout) -> Result<TableArtifact> {
    let first = reports
        .first()
        .ok_or_else(|| Error::InvalidInput("no reports to summarize".into()))?;
    let tags: Vec<&str> = first.methods.iter().map(|m| m.method_tag.as_str()).collect();
    for r in reports {
        let theirs: Vec<&str> = r.methods.iter().map(|m| m.method_tag.as_str()).collect();
        if theirs != tags {
            return Err(Error::InvalidInput(format!(
                "report '{}' has a different method set than '{}'",
                r.config.label, first.config.label
            )));
        }
    }

    let mut header = vec!["method".to_string()];
    for r in reports {
        match layout {
            TableLayout::MseGrid => header.push(format!("{}/mse", r.config.label)),
            TableLayout::CoverageGrid => header.push(format!("{}/cr", r.config.label)),
            TableLayout::MovMseGrid => {
                header.push(format!("{}/mov", r.config.label));
                header.push(format!("{}/mse", r.config.label));
            }
        }
    }
    let mut rows = vec![header];
    for (k, tag) in tags.iter().enumerate() {
        let mut row = vec![tag.to_string()];
        for r in reports {
            let m = &r.methods[k];
            match layout {
                TableLayout::MseGrid => row.push(format!("{:.4}", m.mse)),
                TableLayout::CoverageGrid => row.push(format!("{:.3}", m.coverage)),
                TableLayout::MovMseGrid => {
                    row.push(format!("{:.4}", m.mov));
                    row.push(format!("{:.4}", m.mse));
                }
            }
        }
        rows.push(row);
    }

    let csv = rows.iter().map(|r| r.join(",")).collect::<Vec<_>>().join("\n") + "\n";
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|j| rows.iter().map(|r| r[j].len()).max().unwrap_or(0))
        .collect();
    let mut text = String::new();
    for row in &rows {
        for (j, cell) in row.iter().enumerate() {
            if j > 0 {
                text.push_str("  ");
            }
            text.push_str(&format!("{:>width$}", cell, width = widths[j]));
        }
        text.push('\n');
    }
    Ok(TableArtifact { csv, text })
}

/// Flat per-method serialization: one CSV row per report × method.
pub fn reports_to_csv(reports: &[McReport]) -> String {
    let mut out = String::from(
        "label,method,replications,failures,mse,mse_mc_se,mov,mov_mc_se,coverage\n",
    );
    for r in reports {
        for m in &r.methods {
            out.push_str(&format!(
                "{},{},{},{},{:.10},{:.10},{:.10},{:.10},{:.10}\n",
                r.config.label,
                m.method_tag,
                r.replications_run,
                m.failures,
                m.mse,
                m.mse_mc_se,
                m.mov,
                m.mov_mc_se,
                m.coverage
            ));
        }
    }
    out
}

/// Full-metadata JSON serialization of a report batch.
pub fn reports_to_json(reports: &[McReport]) -> Result<String> {
    serde_json::to_string_pretty(reports)
        .map_err(|e| Error::Numerical(format!("serialization failed: {e}")))
}
