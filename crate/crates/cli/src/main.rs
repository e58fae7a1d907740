//! Command-line driver: reproduces the benchmark tables, runs the
//! paired-budget audit of the smaller-objective-is-better rule, and exposes
//! one-shot estimation commands on seeded synthetic draws.
//!
//! Every run is deterministic in the full flag set: the same invocation
//! writes byte-identical artifacts, regardless of worker-thread count.
//! Exit codes: 0 on success, 1 on a flag error, 2 on a runtime failure.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use bsp_core::dist::{LocationModel, RngStream};
use bsp_core::harness::reference::{self, CellCheck};
use bsp_core::harness::tables::{self, SCREENING_KEEP, TABLE4_DEFAULT_DIMS, TABLE4_FULL_DIMS};
use bsp_core::harness::{
    reports_to_csv, reports_to_json, summarize, AuditReport, McConfig, McReport, TableLayout,
};
use bsp_core::location::{better_of, median, trimmed_mean, LocationEstimate};
use bsp_core::regress::lts_fit_exhaustive;
use bsp_core::scenario::{
    gen_location, gen_regression, gen_screening, ContaminationScenario, Layout, OutlierKind,
    OutlierRule, RegressionScenario,
};
use bsp_core::subsample::{random_subset_search, ObjectiveKind, SubsampleObjective};

const MAX_SCREENING_DIM: usize = 10_000;

#[derive(Parser)]
#[command(
    name = "bsp",
    version,
    about = "Better-solution-principle benchmarks: comparison tables, audits, one-shot estimators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Master seed for every random stream.
    #[arg(long, global = true, default_value_t = 20_240_501)]
    seed: u64,

    /// Base replication count (default: the command's full count).
    #[arg(long, global = true)]
    reps: Option<usize>,

    /// Desk-scale multiplier in (0, 1] applied to the replication count.
    #[arg(long, global = true, default_value_t = 1.0)]
    scale: f64,

    /// Directory for CSV/JSON artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Standard-output format (artifact files are always CSV + JSON).
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Worker threads (default: machine parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Location-estimator MSEs: median vs. trimmed mean vs. greater-likelihood better.
    Table1,
    /// Subsample-search MOVs/MSEs: likelihood vs. Kolmogorov objectives at budgets 10 and 100.
    Table2,
    /// Trimmed-regression MOVs/MSEs at budgets 100/200/300.
    Table3,
    /// Screening coverage rates: LAR vs. SIS vs. smaller-RSS better.
    Table4 {
        /// Run a single dimension instead of the default 100 and 1000.
        #[arg(long)]
        p: Option<usize>,
        /// Run the full sweep p = 100, 500, 1000, 3000, 5000, 10000.
        #[arg(long)]
        full: bool,
    },
    /// Paired-budget audit: does a smaller objective mean a better decision?
    Audit,
    /// One-shot exact trimmed least squares on a synthetic contaminated draw.
    Lts,
    /// One-shot LAR/SIS/better screening on a synthetic draw.
    Screen {
        /// Number of candidate variables.
        #[arg(long, default_value_t = 100)]
        p: usize,
    },
    /// One-shot location estimates on a synthetic contaminated draw.
    Locate,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

enum Failure {
    Flag(String),
    Runtime(String),
}

impl From<bsp_core::Error> for Failure {
    fn from(e: bsp_core::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Flag(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if !(cli.scale > 0.0 && cli.scale <= 1.0) || !cli.scale.is_finite() {
        return Err(Failure::Flag(format!("--scale must lie in (0, 1], got {}", cli.scale)));
    }
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Failure::Flag("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Runtime(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Table1 => {
            let configs = prepare(tables::table1_configs(cli.seed, cli.scale), &cli)?;
            let reports = tables::run_batch(&configs)?;
            let checks = reference::check_table1(&reports);
            emit_table("table1", &reports, TableLayout::MseGrid, 6, &checks, &cli)
        }
        Command::Table2 => {
            let configs = prepare(tables::table2_configs(cli.seed, cli.scale), &cli)?;
            let reports = tables::run_batch(&configs)?;
            let checks = reference::check_table2(&reports);
            emit_table("table2", &reports, TableLayout::MovMseGrid, 2, &checks, &cli)
        }
        Command::Table3 => {
            let configs = prepare(tables::table3_configs(cli.seed, cli.scale), &cli)?;
            let reports = tables::run_batch(&configs)?;
            let checks = reference::check_table3(&reports);
            emit_table("table3", &reports, TableLayout::MovMseGrid, 2, &checks, &cli)
        }
        Command::Table4 { p, full } => {
            let dims: Vec<usize> = match (p, full) {
                (Some(_), true) => {
                    return Err(Failure::Flag("choose either --p or --full, not both".into()))
                }
                (Some(p), false) => {
                    check_screening_dim(*p)?;
                    vec![*p]
                }
                (None, true) => TABLE4_FULL_DIMS.to_vec(),
                (None, false) => TABLE4_DEFAULT_DIMS.to_vec(),
            };
            let configs = prepare(tables::table4_configs(cli.seed, cli.scale, &dims), &cli)?;
            let reports = tables::run_batch(&configs)?;
            let checks = reference::check_table4(&reports);
            emit_table("table4", &reports, TableLayout::CoverageGrid, 6, &checks, &cli)
        }
        Command::Audit => run_audit(&cli),
        Command::Lts => run_lts_oneshot(&cli),
        Command::Screen { p } => {
            check_screening_dim(*p)?;
            run_screen_oneshot(*p, &cli)
        }
        Command::Locate => run_locate_oneshot(&cli),
    }
}

fn check_screening_dim(p: usize) -> Result<(), Failure> {
    if p <= SCREENING_KEEP {
        return Err(Failure::Flag(format!(
            "--p must exceed the {SCREENING_KEEP} variables every screening method keeps"
        )));
    }
    if p > MAX_SCREENING_DIM {
        return Err(Failure::Flag(format!("--p is capped at {MAX_SCREENING_DIM}")));
    }
    Ok(())
}

/// Applies the --reps override and enforces scale·reps ≥ 1.
fn prepare(mut configs: Vec<McConfig>, cli: &Cli) -> Result<Vec<McConfig>, Failure> {
    for c in &mut configs {
        if let Some(r) = cli.reps {
            c.replications = r;
        }
        if c.replications == 0 || (c.replications as f64) * cli.scale < 1.0 {
            return Err(Failure::Flag(format!(
                "scale {} times {} replications is below one replication",
                cli.scale, c.replications
            )));
        }
    }
    Ok(configs)
}

fn write_artifacts(name: &str, csv: &str, json: &str, cli: &Cli) -> Result<(), Failure> {
    fs::create_dir_all(&cli.out)?;
    fs::write(cli.out.join(format!("{name}.csv")), csv)?;
    fs::write(cli.out.join(format!("{name}.json")), json)?;
    Ok(())
}

fn emit_table(
    name: &str,
    reports: &[McReport],
    layout: TableLayout,
    columns_per_grid: usize,
    checks: &[CellCheck],
    cli: &Cli,
) -> Result<(), Failure> {
    let flat = reports_to_csv(reports);
    let json = reports_to_json(reports)?;
    write_artifacts(name, &flat, &json, cli)?;
    match cli.format {
        Format::Csv => print!("{flat}"),
        Format::Json => println!("{json}"),
        Format::Text => {
            println!(
                "{name}: {} replications per cell (scale {})",
                reports[0].replications_run, cli.scale
            );
            for chunk in reports.chunks(columns_per_grid) {
                println!();
                print!("{}", summarize(chunk, layout)?.text);
            }
            println!();
            print!("{}", reference::format_checks(checks));
            let passed = checks.iter().filter(|c| c.pass).count();
            println!("{passed}/{} cells within tolerance", checks.len());
            if cli.scale < 1.0 {
                println!(
                    "note: desk-scale run; 3×SE tolerance bands are wider than at full scale"
                );
            }
        }
    }
    Ok(())
}

fn audit_csv(reports: &[&AuditReport]) -> String {
    let mut out = String::from(
        "objective,budget_small,budget_large,replications,better_only,worse_only,both,neither,gap,gap_lower_95\n",
    );
    for r in reports {
        let _ = writeln!(
            out,
            "{:?},{},{},{},{},{},{},{},{:.10},{:.10}",
            r.objective,
            r.budget_small,
            r.budget_large,
            r.replications,
            r.better_only,
            r.worse_only,
            r.both,
            r.neither,
            r.gap,
            r.gap_lower_95
        );
    }
    out
}

fn run_audit(cli: &Cli) -> Result<(), Failure> {
    let config = prepare(vec![tables::audit_config(cli.seed, cli.scale)], cli)?.remove(0);
    let (ks, lik) = tables::run_audit_pair(&config)?;
    let csv = audit_csv(&[&ks, &lik]);
    let json = serde_json::to_string_pretty(&serde_json::json!({
        "kolmogorov": ks,
        "likelihood": lik,
    }))
    .map_err(|e| Failure::Runtime(e.to_string()))?;
    write_artifacts("audit", &csv, &json, cli)?;
    match cli.format {
        Format::Csv => print!("{csv}"),
        Format::Json => println!("{json}"),
        Format::Text => {
            println!(
                "audit: point-mass contamination (5 of 20), subsamples of 10, budgets 10 vs 100, {} replications",
                ks.replications
            );
            for (name, r) in [("kolmogorov", &ks), ("likelihood", &lik)] {
                println!(
                    "{name}: gap {:+.4} (95% lower bound {:+.4}); better-only {}, worse-only {}, both {}, neither {}",
                    r.gap, r.gap_lower_95, r.better_only, r.worse_only, r.both, r.neither
                );
            }
            println!(
                "{} kolmogorov gap nonnegative at 95% confidence",
                if ks.gap_lower_95 >= 0.0 { "PASS" } else { "FAIL" }
            );
            println!(
                "{} likelihood gap negative (clustered outliers defeat the likelihood objective)",
                if lik.gap < 0.0 { "PASS" } else { "FAIL" }
            );
        }
    }
    Ok(())
}

/// The one-shot synthetic draw behind `lts`: the intercept-shift
/// trimmed-regression scenario (15 clean rows of 20, two covariates).
fn lts_scenario() -> RegressionScenario {
    RegressionScenario {
        n: 20,
        n_good: 15,
        p: 2,
        correlation: 0.5,
        beta: vec![0.0, 0.0],
        outlier_rule: OutlierRule::InterceptShift { delta: 5.0, noise_variance: 1.0 },
    }
}

fn run_lts_oneshot(cli: &Cli) -> Result<(), Failure> {
    let stream = RngStream::new(cli.seed, 0, "oneshot/lts");
    let (data, good) = gen_regression(&lts_scenario(), &stream)?;
    let fit = lts_fit_exhaustive(&data, 11)?;
    let clean = fit.subset.is_subset_of(&good);
    let json = serde_json::to_string_pretty(&serde_json::json!({
        "seed": cli.seed,
        "kept_rows": fit.subset.indices(),
        "coefficients": fit.coefficients,
        "rss_on_subset": fit.rss_on_subset,
        "all_kept_rows_clean": clean,
    }))
    .map_err(|e| Failure::Runtime(e.to_string()))?;
    fs::create_dir_all(&cli.out)?;
    fs::write(cli.out.join("lts.json"), &json)?;
    match cli.format {
        Format::Json | Format::Csv => println!("{json}"),
        Format::Text => {
            println!("exact trimmed least squares, 11 of 20 rows kept (seed {})", cli.seed);
            println!("kept rows: {:?}", fit.subset.indices());
            println!("coefficients: {:?}", fit.coefficients);
            println!("RSS on kept rows: {:.6}", fit.rss_on_subset);
            println!("all kept rows clean: {clean}");
        }
    }
    Ok(())
}

fn run_screen_oneshot(p: usize, cli: &Cli) -> Result<(), Failure> {
    let stream = RngStream::new(cli.seed, 0, "oneshot/screen");
    let data = gen_screening(p, &stream)?.standardize()?;
    let lar = bsp_core::regress::lar_screen(&data, SCREENING_KEEP)?;
    let sis = bsp_core::regress::sis_screen(&data, SCREENING_KEEP)?;
    let better =
        bsp_core::regress::better_screen(&data, SCREENING_KEEP, &[lar.clone(), sis.clone()])?;
    let support = bsp_core::regress::VariableSubset::new(vec![0, 1, 2])?;
    let entry = |r: &bsp_core::regress::ScreeningResult| {
        serde_json::json!({
            "selected": r.selected.variables(),
            "rss": r.rss,
            "covers_support": r.selected.contains_all(&support),
        })
    };
    let json = serde_json::to_string_pretty(&serde_json::json!({
        "seed": cli.seed,
        "p": p,
        "kept": SCREENING_KEEP,
        "lar": entry(&lar),
        "sis": entry(&sis),
        "better": serde_json::json!({
            "source": better.method_tag,
            "selected": better.selected.variables(),
            "rss": better.rss,
            "covers_support": better.selected.contains_all(&support),
        }),
    }))
    .map_err(|e| Failure::Runtime(e.to_string()))?;
    fs::create_dir_all(&cli.out)?;
    fs::write(cli.out.join("screen.json"), &json)?;
    match cli.format {
        Format::Json | Format::Csv => println!("{json}"),
        Format::Text => {
            println!(
                "screening {} of {p} variables on one 50-row draw (seed {})",
                SCREENING_KEEP, cli.seed
            );
            for (name, r) in [("lar", &lar), ("sis", &sis)] {
                println!(
                    "{name}: rss {:.4}, covers true support: {}",
                    r.rss,
                    r.selected.contains_all(&support)
                );
            }
            println!(
                "better (= {}): rss {:.4}, covers true support: {}",
                better.method_tag,
                better.rss,
                better.selected.contains_all(&support)
            );
        }
    }
    Ok(())
}

fn run_locate_oneshot(cli: &Cli) -> Result<(), Failure> {
    let scenario = ContaminationScenario {
        n_good: 15,
        n_outlier: 5,
        good_model: LocationModel::standard_normal(),
        theta0: 0.0,
        outlier_kind: OutlierKind::PointMass(1.0),
        layout: Layout::GoodFirst,
    };
    let stream = RngStream::new(cli.seed, 0, "oneshot/locate");
    let (sample, good) = gen_location(&scenario, &stream)?;
    let model = LocationModel::standard_normal();
    let med = LocationEstimate::evaluated(median(&sample), "median", &model, &sample);
    let trm = LocationEstimate::evaluated(trimmed_mean(&sample, 0.5)?, "trimmed", &model, &sample);
    let bet = better_of(&[med.clone(), trm.clone()], &model, &sample)?;
    let mut searches = serde_json::Map::new();
    let mut search_text = String::new();
    for (name, kind) in
        [("likelihood", ObjectiveKind::ProfileNll), ("kolmogorov", ObjectiveKind::KolmogorovDistance)]
    {
        let objective = SubsampleObjective { kind, model: &model, sample: &sample };
        let search_stream = RngStream::new(cli.seed, 0, &format!("oneshot/locate/{name}"));
        let sol = random_subset_search(&objective, sample.len(), 10, 100, &search_stream)?;
        let clean = sol.subset.is_subset_of(&good);
        searches.insert(
            name.to_string(),
            serde_json::json!({
                "theta_hat": sol.theta_hat,
                "objective": sol.objective,
                "subset": sol.subset.indices(),
                "subset_clean": clean,
            }),
        );
        let _ = writeln!(
            search_text,
            "{name} subsample search (B=100): θ̂ {:+.4}, objective {:.4}, subset clean: {clean}",
            sol.theta_hat, sol.objective
        );
    }
    let json = serde_json::to_string_pretty(&serde_json::json!({
        "seed": cli.seed,
        "estimates": {
            "median": med.value,
            "trimmed": trm.value,
            "better": { "value": bet.value, "source": bet.method_tag },
        },
        "subsample_searches": searches,
    }))
    .map_err(|e| Failure::Runtime(e.to_string()))?;
    fs::create_dir_all(&cli.out)?;
    fs::write(cli.out.join("locate.json"), &json)?;
    match cli.format {
        Format::Json | Format::Csv => println!("{json}"),
        Format::Text => {
            println!(
                "location estimates on one contaminated draw (15 clean + 5 outliers, seed {})",
                cli.seed
            );
            println!("median: {:+.4}", med.value);
            println!("trimmed mean: {:+.4}", trm.value);
            println!("better (= {}): {:+.4}", bet.method_tag, bet.value);
            print!("{search_text}");
        }
    }
    Ok(())
}
