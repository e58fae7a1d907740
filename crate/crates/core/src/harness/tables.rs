//! Canonical study configurations: the four benchmark tables, the
//! paired-budget audit pair, and the penalized-subset separation check.
//! Each builder takes the master seed, the full replication count, and a
//! desk-scale factor so the command-line driver and the acceptance tests
//! share one definition of every run.

use rayon::prelude::*;
use serde::Serialize;

use crate::dist::{LocationModel, RngStream};
use crate::error::{Error, Result};
use crate::regress::{best_subset_bic, SearchStrategy, VariableSubset};
use crate::scenario::{
    gen_regression, ContaminationScenario, Layout, OutlierKind, OutlierRule, RegressionScenario,
};
use crate::subsample::ObjectiveKind;

use super::{bsp_audit, run_mc, AuditReport, Experiment, McConfig, McReport};

/// Sample sizes of the location-estimator comparison.
pub const TABLE1_SAMPLE_SIZES: [usize; 6] = [10, 15, 20, 25, 30, 35];

/// Default dimensions of the screening comparison; the full sweep extends
/// to 10000.
pub const TABLE4_DEFAULT_DIMS: [usize; 2] = [100, 1000];

/// Full dimension sweep of the screening comparison.
pub const TABLE4_FULL_DIMS: [usize; 6] = [100, 500, 1000, 3000, 5000, 10000];

/// Number of variables every screening method keeps.
pub const SCREENING_KEEP: usize = 25;

fn base_config(label: String, replications: usize, seed: u64, scale: f64) -> McConfig {
    McConfig {
        label,
        replications,
        master_seed: seed,
        scale_factor: scale,
        good_radius: 0.25,
        experiment: Experiment::Screening { p: 3, keep: 1 }, // placeholder, always replaced
    }
}

/// Location-estimator comparison: median vs. trimmed mean vs. the
/// greater-likelihood better of the two, under normal, t₅, and Cauchy
/// samples of growing size. 10000 replications per cell at full scale.
pub fn table1_configs(seed: u64, scale: f64) -> Vec<McConfig> {
    let families: [(&str, LocationModel); 3] = [
        ("normal", LocationModel::standard_normal()),
        ("t5", LocationModel::student_t(5).expect("valid df")),
        ("cauchy", LocationModel::standard_cauchy()),
    ];
    let mut configs = Vec::new();
    for (name, model) in &families {
        for &n in &TABLE1_SAMPLE_SIZES {
            let mut c = base_config(format!("{name}/n={n}"), 10_000, seed, scale);
            c.experiment =
                Experiment::LocationEstimators { model: model.clone(), theta0: 0.0, n };
            configs.push(c);
        }
    }
    configs
}

/// The three contamination regimes of the subsample-search comparison:
/// clean observations are N(0, 1) and the outliers are, respectively, a
/// point mass at 1, a tight cluster N(1, sd 0.5), and a diffuse cluster
/// N(1, sd 3).
pub fn contamination_regimes() -> Vec<(&'static str, OutlierKind)> {
    vec![
        ("point_mass", OutlierKind::PointMass(1.0)),
        ("tight_cluster", OutlierKind::Normal { mean: 1.0, variance: 0.25 }),
        ("diffuse", OutlierKind::Normal { mean: 1.0, variance: 9.0 }),
    ]
}

fn contaminated_scenario(kind: OutlierKind, n_outlier: usize) -> ContaminationScenario {
    ContaminationScenario {
        n_good: 20 - n_outlier,
        n_outlier,
        good_model: LocationModel::standard_normal(),
        theta0: 0.0,
        outlier_kind: kind,
        layout: Layout::GoodFirst,
    }
}

/// Subsample-search comparison: likelihood and Kolmogorov objectives at
/// budgets 10 and 100, on n = 20 samples with 5 or 10 outliers per regime,
/// keeping subsamples of size 10. 10000 replications per cell at full scale.
pub fn table2_configs(seed: u64, scale: f64) -> Vec<McConfig> {
    let mut configs = Vec::new();
    for (name, kind) in contamination_regimes() {
        for n_outlier in [5usize, 10] {
            let mut c =
                base_config(format!("{name}/no={n_outlier}"), 10_000, seed, scale);
            c.experiment = Experiment::SubsampleSearch {
                scenario: contaminated_scenario(kind.clone(), n_outlier),
                m: 10,
                budgets: vec![10, 100],
            };
            configs.push(c);
        }
    }
    configs
}

/// Trimmed-regression comparison: two covariates with correlation 0.5,
/// β = 0, 15 clean rows of 20, trimming to the best 11 rows at budgets
/// 100/200/300. Outliers either shift the response by 5 or replace it with
/// a quadratic in the first covariate (noise variance 3). 10000
/// replications per cell at full scale.
pub fn table3_configs(seed: u64, scale: f64) -> Vec<McConfig> {
    let rules: [(&str, OutlierRule); 2] = [
        ("intercept_shift", OutlierRule::InterceptShift { delta: 5.0, noise_variance: 1.0 }),
        ("quadratic", OutlierRule::QuadraticInFirst { noise_variance: 9.0 }),
    ];
    rules
        .into_iter()
        .map(|(name, rule)| {
            let mut c = base_config(name.to_string(), 10_000, seed, scale);
            c.experiment = Experiment::TrimmedRegression {
                scenario: RegressionScenario {
                    n: 20,
                    n_good: 15,
                    p: 2,
                    correlation: 0.5,
                    beta: vec![0.0, 0.0],
                    outlier_rule: rule,
                },
                m: 11,
                budgets: vec![100, 200, 300],
            };
            c
        })
        .collect()
}

/// Screening comparison: LAR vs. SIS vs. the smaller-RSS better, each
/// keeping 25 of p variables on 50-row designs. 1000 replications per
/// dimension at full scale.
pub fn table4_configs(seed: u64, scale: f64, dims: &[usize]) -> Vec<McConfig> {
    dims.iter()
        .map(|&p| {
            let mut c = base_config(format!("p={p}"), 1000, seed, scale);
            c.experiment = Experiment::Screening { p, keep: SCREENING_KEEP };
            c
        })
        .collect()
}

/// Runs a batch of configurations in order.
pub fn run_batch(configs: &[McConfig]) -> Result<Vec<McReport>> {
    configs.iter().map(run_mc).collect()
}

/// The audit scenario: point-mass contamination with 5 outliers in 20,
/// subsamples of size 10, budgets 10 vs. 100, good decision = subsample
/// mean within 0.25 of the true location. 10000 replications at full scale.
pub fn audit_config(seed: u64, scale: f64) -> McConfig {
    let mut c = base_config("audit/point_mass/no=5".into(), 10_000, seed, scale);
    c.experiment = Experiment::SubsampleSearch {
        scenario: contaminated_scenario(OutlierKind::PointMass(1.0), 5),
        m: 10,
        budgets: vec![10, 100],
    };
    c
}

/// Runs the paired-budget audit under both objectives on a subsample-search
/// configuration (normally [`audit_config`]). The Kolmogorov objective is
/// expected to show a nonnegative good-decision gap (better objective,
/// better decision); the likelihood objective is expected to show a
/// negative gap, because clustered outliers look more likeable than
/// genuine tails.
pub fn run_audit_pair(config: &McConfig) -> Result<(AuditReport, AuditReport)> {
    let good_radius = config.good_radius;
    let predicate = |sol: &crate::subsample::SubsampleSolution,
                     _good: &crate::subsample::SubsetIndex,
                     sample: &crate::location::UnivariateSample| {
        let values = sol.subset.gather(sample.values());
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        mean.abs() <= good_radius
    };
    let ks = bsp_audit(config, ObjectiveKind::KolmogorovDistance, predicate, (10, 100))?;
    let lik = bsp_audit(config, ObjectiveKind::ProfileNll, predicate, (10, 100))?;
    Ok((ks, lik))
}

/// Result of the penalized-subset separation check.
#[derive(Clone, Debug, Serialize)]
pub struct SeparationReport {
    pub replications: usize,
    pub exact_recoveries: usize,
    pub rate: f64,
}

/// Checks how often the penalized subset objective (1 + |A|·ln(n)/n)·RSS,
/// minimized over the full power set of 8 candidate variables, lands
/// exactly on the true support {0, 1, 2}: n = 2000 independent standard
/// normal covariates, β = (3, 3, 3, 0, …, 0), unit noise. 200 replications
/// at full scale.
pub fn separation_check(seed: u64, scale: f64) -> Result<SeparationReport> {
    let scenario = RegressionScenario {
        n: 2000,
        n_good: 2000,
        p: 8,
        correlation: 0.0,
        beta: vec![3.0, 3.0, 3.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        outlier_rule: OutlierRule::InterceptShift { delta: 0.0, noise_variance: 1.0 },
    };
    let replications = ((200.0 * scale).round() as usize).max(1);
    if !(scale > 0.0 && scale <= 1.0) {
        return Err(Error::InvalidInput(format!("scale factor {scale} outside (0, 1]")));
    }
    let lambda = (scenario.n as f64).ln();
    let truth = VariableSubset::new(vec![0, 1, 2])?;
    let hits: Vec<bool> = (0..replications as u64)
        .into_par_iter()
        .map(|rep| -> Result<bool> {
            let stream = RngStream::new(seed, rep, "data/separation");
            let (data, _) = gen_regression(&scenario, &stream)?;
            let data = data.standardize()?;
            let best = best_subset_bic(&data, scenario.p, lambda, SearchStrategy::Exhaustive)?;
            Ok(best == truth)
        })
        .collect::<Result<Vec<_>>>()?;
    let exact_recoveries = hits.iter().filter(|h| **h).count();
    Ok(SeparationReport {
        replications,
        exact_recoveries,
        rate: exact_recoveries as f64 / replications as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builders_cover_the_advertised_grids() {
        let t1 = table1_configs(7, 1.0);
        assert_eq!(t1.len(), 18);
        assert!(t1.iter().any(|c| c.label == "cauchy/n=35"));
        assert!(t1.iter().all(|c| c.replications == 10_000));

        let t2 = table2_configs(7, 1.0);
        assert_eq!(t2.len(), 6);
        assert_eq!(
            t2[0].method_tags(),
            vec!["likelihood/B=10", "likelihood/B=100", "kolmogorov/B=10", "kolmogorov/B=100"]
        );

        let t3 = table3_configs(7, 1.0);
        assert_eq!(t3.len(), 2);
        assert_eq!(t3[0].method_tags(), vec!["lts/B=100", "lts/B=200", "lts/B=300"]);

        let t4 = table4_configs(7, 1.0, &TABLE4_DEFAULT_DIMS);
        assert_eq!(t4.len(), 2);
        assert_eq!(t4[1].label, "p=1000");
    }

    #[test]
    fn desk_scale_shrinks_replications() {
        let c = &table1_configs(7, 0.01)[0];
        assert_eq!(c.effective_replications(), 100);
    }

    #[test]
    fn audit_pair_runs_at_desk_scale() {
        let (ks, lik) = run_audit_pair(&audit_config(424242, 0.02)).unwrap();
        assert_eq!(ks.replications, 200);
        assert_eq!(lik.replications, 200);
        assert_eq!(ks.objective, ObjectiveKind::KolmogorovDistance);
        // Tallies partition the replications.
        assert_eq!(ks.better_only + ks.worse_only + ks.both + ks.neither, 200);
    }

    #[test]
    fn separation_check_recovers_the_support_most_of_the_time() {
        let report = separation_check(5, 0.05).unwrap();
        assert_eq!(report.replications, 10);
        // The true support is overwhelmingly likely per replication; a
        // small run should recover it at least 8 of 10 times.
        assert!(report.exact_recoveries >= 8, "recoveries {}", report.exact_recoveries);
    }
}
