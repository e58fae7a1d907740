//! Reference values for the four benchmark tables, with tolerance-aware
//! comparison of freshly computed reports against them.
//!
//! Tolerances follow the study protocol: Monte Carlo means are compared
//! within max(3 × MC standard error, a relative slack) — 5% for the
//! location-estimator table, 10% for the subsample and trimmed-regression
//! tables — and screening coverage rates within ±0.03 absolute.

use super::{McReport, MethodSummary};

/// Location-estimator MSEs (rows: method per family; columns: n = 10, 15,
/// 20, 25, 30, 35).
pub const TABLE1_MSE: [(&str, &str, [f64; 6]); 9] = [
    ("normal", "median", [0.1361, 0.1019, 0.0728, 0.0623, 0.0502, 0.0447]),
    ("normal", "trimmed", [0.1113, 0.0798, 0.0588, 0.0472, 0.0393, 0.0343]),
    ("normal", "better", [0.1093, 0.0776, 0.0574, 0.0459, 0.0382, 0.0333]),
    ("t5", "median", [0.1588, 0.1159, 0.0824, 0.0701, 0.0568, 0.0508]),
    ("t5", "trimmed", [0.1393, 0.0961, 0.0698, 0.0559, 0.0465, 0.0409]),
    ("t5", "better", [0.1383, 0.0951, 0.0694, 0.0555, 0.0463, 0.0405]),
    ("cauchy", "median", [0.3360, 0.2056, 0.1427, 0.1109, 0.0905, 0.0804]),
    ("cauchy", "trimmed", [0.4929, 0.2236, 0.1628, 0.1221, 0.1027, 0.0827]),
    ("cauchy", "better", [0.3260, 0.1857, 0.1333, 0.1001, 0.0845, 0.0720]),
];

/// Subsample-search mean objective values and MSEs
/// (regime, n_outlier, method, MOV, MSE).
pub const TABLE2_MOV_MSE: [(&str, usize, &str, f64, f64); 24] = [
    ("point_mass", 5, "likelihood/B=10", 0.5078, 0.2543),
    ("point_mass", 5, "likelihood/B=100", 0.3122, 0.3904),
    ("point_mass", 5, "kolmogorov/B=10", 0.1437, 0.1037),
    ("point_mass", 5, "kolmogorov/B=100", 0.1202, 0.1012),
    ("point_mass", 10, "likelihood/B=10", 0.3244, 0.5712),
    ("point_mass", 10, "likelihood/B=100", 0.1347, 0.7862),
    ("point_mass", 10, "kolmogorov/B=10", 0.2036, 0.1694),
    ("point_mass", 10, "kolmogorov/B=100", 0.1677, 0.1278),
    ("tight_cluster", 5, "likelihood/B=10", 0.5484, 0.2313),
    ("tight_cluster", 5, "likelihood/B=100", 0.3424, 0.3052),
    ("tight_cluster", 5, "kolmogorov/B=10", 0.1267, 0.1442),
    ("tight_cluster", 5, "kolmogorov/B=100", 0.1068, 0.1438),
    ("tight_cluster", 10, "likelihood/B=10", 0.4461, 0.5021),
    ("tight_cluster", 10, "likelihood/B=100", 0.2542, 0.6503),
    ("tight_cluster", 10, "kolmogorov/B=10", 0.1349, 0.2660),
    ("tight_cluster", 10, "kolmogorov/B=100", 0.1134, 0.2510),
    ("diffuse", 5, "likelihood/B=10", 1.1135, 0.1864),
    ("diffuse", 5, "likelihood/B=100", 0.5666, 0.1738),
    ("diffuse", 5, "kolmogorov/B=10", 0.1319, 0.2504),
    ("diffuse", 5, "kolmogorov/B=100", 0.1091, 0.2429),
    ("diffuse", 10, "likelihood/B=10", 2.1988, 0.4447),
    ("diffuse", 10, "likelihood/B=100", 1.1227, 0.3152),
    ("diffuse", 10, "kolmogorov/B=10", 0.1565, 0.4366),
    ("diffuse", 10, "kolmogorov/B=100", 0.1232, 0.3780),
];

/// Trimmed-regression mean objective values and MSEs
/// (regime, method, MOV, MSE).
pub const TABLE3_MOV_MSE: [(&str, &str, f64, f64); 6] = [
    ("intercept_shift", "lts/B=100", 12.464, 1.2738),
    ("intercept_shift", "lts/B=200", 9.3486, 0.9743),
    ("intercept_shift", "lts/B=300", 7.9660, 0.8057),
    ("quadratic", "lts/B=100", 6.9142, 0.6723),
    ("quadratic", "lts/B=200", 5.7195, 0.6589),
    ("quadratic", "lts/B=300", 5.2018, 0.6479),
];

/// Screening coverage rates (method; columns: p = 100, 500, 1000, 3000,
/// 5000, 10000).
pub const TABLE4_CR: [(&str, [f64; 6]); 3] = [
    ("lar", [0.999, 0.931, 0.845, 0.656, 0.552, 0.434]),
    ("sis", [0.999, 0.977, 0.955, 0.892, 0.820, 0.728]),
    ("better", [1.0, 0.989, 0.961, 0.906, 0.832, 0.737]),
];

/// One reference-value comparison.
#[derive(Clone, Debug)]
pub struct CellCheck {
    pub label: String,
    pub method: String,
    pub metric: &'static str,
    pub expected: f64,
    pub actual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CellCheck {
    fn new(
        label: &str,
        method: &str,
        metric: &'static str,
        expected: f64,
        actual: f64,
        tolerance: f64,
    ) -> Self {
        Self {
            label: label.to_string(),
            method: method.to_string(),
            metric,
            expected,
            actual,
            tolerance,
            pass: (actual - expected).abs() <= tolerance,
        }
    }

    /// "PASS table cell" verdict line.
    pub fn verdict_line(&self) -> String {
        format!(
            "{} {:>16} {:>18} {:>4}: got {:.4}, reference {:.4} (±{:.4})",
            if self.pass { "PASS" } else { "FAIL" },
            self.label,
            self.method,
            self.metric,
            self.actual,
            self.expected,
            self.tolerance
        )
    }
}

/// True when every check passed.
pub fn all_pass(checks: &[CellCheck]) -> bool {
    checks.iter().all(|c| c.pass)
}

/// Renders one verdict line per check.
pub fn format_checks(checks: &[CellCheck]) -> String {
    let mut out = String::new();
    for c in checks {
        out.push_str(&c.verdict_line());
        out.push('\n');
    }
    out
}

fn find<'a>(reports: &'a [McReport], label: &str, method: &str) -> Option<&'a MethodSummary> {
    reports
        .iter()
        .find(|r| r.config.label == label)
        .and_then(|r| r.methods.iter().find(|m| m.method_tag == method))
}

/// Compares location-estimator reports against the reference MSEs within
/// max(3 × MC SE, 5% relative). Cells absent from `reports` are skipped.
pub fn check_table1(reports: &[McReport]) -> Vec<CellCheck> {
    let mut checks = Vec::new();
    for (family, method, row) in &TABLE1_MSE {
        for (j, &n) in super::tables::TABLE1_SAMPLE_SIZES.iter().enumerate() {
            let label = format!("{family}/n={n}");
            if let Some(m) = find(reports, &label, method) {
                let tol = (3.0 * m.mse_mc_se).max(0.05 * row[j]);
                checks.push(CellCheck::new(&label, method, "mse", row[j], m.mse, tol));
            }
        }
    }
    checks
}

/// Compares subsample-search reports against the reference MOVs and MSEs
/// within max(3 × MC SE, 10% relative).
pub fn check_table2(reports: &[McReport]) -> Vec<CellCheck> {
    let mut checks = Vec::new();
    for (regime, n_outlier, method, mov, mse) in &TABLE2_MOV_MSE {
        let label = format!("{regime}/no={n_outlier}");
        if let Some(m) = find(reports, &label, method) {
            let mov_tol = (3.0 * m.mov_mc_se).max(0.10 * mov);
            checks.push(CellCheck::new(&label, method, "mov", *mov, m.mov, mov_tol));
            let mse_tol = (3.0 * m.mse_mc_se).max(0.10 * mse);
            checks.push(CellCheck::new(&label, method, "mse", *mse, m.mse, mse_tol));
        }
    }
    checks
}

/// Compares trimmed-regression reports against the reference MOVs and MSEs
/// within max(3 × MC SE, 10% relative).
pub fn check_table3(reports: &[McReport]) -> Vec<CellCheck> {
    let mut checks = Vec::new();
    for (regime, method, mov, mse) in &TABLE3_MOV_MSE {
        if let Some(m) = find(reports, regime, method) {
            let mov_tol = (3.0 * m.mov_mc_se).max(0.10 * mov);
            checks.push(CellCheck::new(regime, method, "mov", *mov, m.mov, mov_tol));
            let mse_tol = (3.0 * m.mse_mc_se).max(0.10 * mse);
            checks.push(CellCheck::new(regime, method, "mse", *mse, m.mse, mse_tol));
        }
    }
    checks
}

/// Compares screening coverage rates against the reference within ±0.03.
pub fn check_table4(reports: &[McReport]) -> Vec<CellCheck> {
    const DIMS: [usize; 6] = [100, 500, 1000, 3000, 5000, 10000];
    let mut checks = Vec::new();
    for (method, row) in &TABLE4_CR {
        for (j, p) in DIMS.iter().enumerate() {
            let label = format!("p={p}");
            if let Some(m) = find(reports, &label, method) {
                checks.push(CellCheck::new(&label, method, "cr", row[j], m.coverage, 0.03));
            }
        }
    }
    checks
}
