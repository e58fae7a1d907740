//! Deterministic generators for the simulated data regimes: contaminated
//! location samples, contaminated regressions, and the wide screening
//! design. Every generator records exactly which indices came from the
//! clean mechanism, and is bit-reproducible given a stream descriptor.

use serde::{Deserialize, Serialize};

use crate::dist::{LocationModel, RngStream};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::location::UnivariateSample;
use crate::regress::RegressionData;
use crate::subsample::SubsetIndex;
use rand_distr::{Distribution, StandardNormal};

/// How the contaminating observations are produced.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutlierKind {
    /// Every outlier equals this constant.
    PointMass(f64),
    /// Outliers are i.i.d. normal with this mean and variance.
    Normal { mean: f64, variance: f64 },
}

/// Placement of the clean block within the sample. Selection methods never
/// read the layout; it exists so tests can address the blocks directly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// Clean observations occupy indices 0..n_good, outliers the rest.
    GoodFirst,
}

/// A contaminated univariate sampling regime: `n_good` i.i.d. draws from
/// the clean model at `theta0`, plus `n_outlier` contaminating values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContaminationScenario {
    pub n_good: usize,
    pub n_outlier: usize,
    pub good_model: LocationModel,
    pub theta0: f64,
    pub outlier_kind: OutlierKind,
    pub layout: Layout,
}

impl ContaminationScenario {
    pub fn n(&self) -> usize {
        self.n_good + self.n_outlier
    }

    fn validate(&self) -> Result<()> {
        if self.n() == 0 {
            return Err(Error::InvalidInput("scenario generates an empty sample".into()));
        }
        if !self.theta0.is_finite() {
            return Err(Error::InvalidInput(format!("theta0 = {} not finite", self.theta0)));
        }
        match self.outlier_kind {
            OutlierKind::PointMass(c) if !c.is_finite() => {
                Err(Error::InvalidInput(format!("point-mass location {c} not finite")))
            }
            OutlierKind::Normal { mean, variance }
                if !mean.is_finite() || !(variance >= 0.0) || !variance.is_finite() =>
            {
                Err(Error::InvalidInput(format!(
                    "outlier normal ({mean}, variance {variance}) invalid"
                )))
            }
            _ => Ok(()),
        }
    }
}

/// Draws one contaminated sample. The clean block is produced first with
/// the stream's generator, so it coincides bit-for-bit with an
/// uncontaminated draw of the same size; the good-index set labels exactly
/// those positions.
pub fn gen_location(
    scenario: &ContaminationScenario,
    stream: &RngStream,
) -> Result<(UnivariateSample, SubsetIndex)> {
    scenario.validate()?;
    let mut rng = stream.rng();
    let mut values = Vec::with_capacity(scenario.n());
    for _ in 0..scenario.n_good {
        values.push(scenario.good_model.draw(scenario.theta0, &mut rng));
    }
    match scenario.outlier_kind {
        OutlierKind::PointMass(c) => values.extend(std::iter::repeat(c).take(scenario.n_outlier)),
        OutlierKind::Normal { mean, variance } => {
            let sd = variance.sqrt();
            for _ in 0..scenario.n_outlier {
                let z: f64 = StandardNormal.sample(&mut rng);
                values.push(mean + sd * z);
            }
        }
    }
    let Layout::GoodFirst = scenario.layout;
    let good = SubsetIndex::new((0..scenario.n_good).collect(), scenario.n())?;
    Ok((UnivariateSample::new(values)?, good))
}

/// How contaminated regression rows are produced. Clean rows always follow
/// y = x'β + N(0, 1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutlierRule {
    /// y = delta + x'β + noise.
    InterceptShift { delta: f64, noise_variance: f64 },
    /// y = 2x₁ − 2x₂ + 3x₁² + noise (needs p ≥ 2).
    QuadraticInFirst { noise_variance: f64 },
}

/// A contaminated linear-model regime on an equicorrelated Gaussian design:
/// unit-variance covariates with common off-diagonal `correlation`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionScenario {
    pub n: usize,
    pub n_good: usize,
    pub p: usize,
    pub correlation: f64,
    pub beta: Vec<f64>,
    pub outlier_rule: OutlierRule,
}

impl RegressionScenario {
    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 {
            return Err(Error::InvalidInput("empty regression scenario".into()));
        }
        if self.n_good > self.n {
            return Err(Error::InvalidInput(format!(
                "n_good {} exceeds n {}",
                self.n_good, self.n
            )));
        }
        if self.beta.len() != self.p {
            return Err(Error::DimensionMismatch(format!(
                "beta has {} entries for p = {}",
                self.beta.len(),
                self.p
            )));
        }
        if self.beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidInput("beta must be finite".into()));
        }
        // The shared-factor construction is exact for ρ ∈ [0, 1).
        if !(0.0..1.0).contains(&self.correlation) {
            return Err(Error::InvalidInput(format!(
                "equicorrelation {} outside [0, 1)",
                self.correlation
            )));
        }
        let v = match self.outlier_rule {
            OutlierRule::InterceptShift { delta, noise_variance } => {
                if !delta.is_finite() {
                    return Err(Error::InvalidInput(format!("shift {delta} not finite")));
                }
                noise_variance
            }
            OutlierRule::QuadraticInFirst { noise_variance } => {
                if self.p < 2 {
                    return Err(Error::InvalidInput(
                        "quadratic outlier rule needs at least two covariates".into(),
                    ));
                }
                noise_variance
            }
        };
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::InvalidInput(format!("noise variance {v} invalid")));
        }
        Ok(())
    }
}

/// Draws one contaminated regression dataset (unstandardized). Rows of X
/// are i.i.d. N(0, Σ) with Σᵢᵢ = 1, Σᵢⱼ = ρ, built from a shared factor:
/// xⱼ = √ρ·z₀ + √(1−ρ)·zⱼ, which has exactly the target covariance and
/// costs O(p) per row at any dimension. Each row consumes p + 2 normals
/// (factor, covariates, response noise) regardless of its good/outlier
/// label, so contamination never shifts the draw budget.
pub fn gen_regression(
    scenario: &RegressionScenario,
    stream: &RngStream,
) -> Result<(RegressionData, SubsetIndex)> {
    scenario.validate()?;
    let (n, p) = (scenario.n, scenario.p);
    let mut rng = stream.rng();
    let sqrt_rho = scenario.correlation.sqrt();
    let sqrt_comp = (1.0 - scenario.correlation).sqrt();
    let mut x = Matrix::zeros(n, p);
    let mut y = vec![0.0; n];
    let mut row = vec![0.0; p];
    for i in 0..n {
        let z0: f64 = StandardNormal.sample(&mut rng);
        for v in row.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v = sqrt_rho * z0 + sqrt_comp * z;
        }
        let e: f64 = StandardNormal.sample(&mut rng);
        let linear: f64 = row.iter().zip(&scenario.beta).map(|(a, b)| a * b).sum();
        y[i] = if i < scenario.n_good {
            linear + e
        } else {
            match scenario.outlier_rule {
                OutlierRule::InterceptShift { delta, noise_variance } => {
                    delta + linear + noise_variance.sqrt() * e
                }
                OutlierRule::QuadraticInFirst { noise_variance } => {
                    2.0 * row[0] - 2.0 * row[1] + 3.0 * row[0] * row[0]
                        + noise_variance.sqrt() * e
                }
            }
        };
        for (j, v) in row.iter().enumerate() {
            x.set(i, j, *v);
        }
    }
    let good = SubsetIndex::new((0..scenario.n_good).collect(), n)?;
    Ok((RegressionData::new(x, y)?, good))
}

/// Number of rows in every screening dataset.
pub const SCREENING_ROWS: usize = 50;

/// Common covariate correlation in the screening design.
pub const SCREENING_CORRELATION: f64 = 0.05;

/// Draws one wide screening dataset (unstandardized): 50 rows, p ≥ 3
/// equicorrelated (ρ = 0.05) unit-variance covariates, and
/// y = 3x₁ + 3x₂ + 3x₃ + N(0, 1) — no contamination.
pub fn gen_screening(p: usize, stream: &RngStream) -> Result<RegressionData> {
    if p < 3 {
        return Err(Error::InvalidInput(format!(
            "screening design needs p ≥ 3, got {p}"
        )));
    }
    let mut beta = vec![0.0; p];
    beta[..3].fill(3.0);
    let scenario = RegressionScenario {
        n: SCREENING_ROWS,
        n_good: SCREENING_ROWS,
        p,
        correlation: SCREENING_CORRELATION,
        beta,
        outlier_rule: OutlierRule::InterceptShift { delta: 0.0, noise_variance: 1.0 },
    };
    gen_regression(&scenario, stream).map(|(data, _)| data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Family;
    use approx::assert_abs_diff_eq;

    fn normal_scenario(n_good: usize, n_outlier: usize, kind: OutlierKind) -> ContaminationScenario {
        ContaminationScenario {
            n_good,
            n_outlier,
            good_model: LocationModel::standard_normal(),
            theta0: 0.0,
            outlier_kind: kind,
            layout: Layout::GoodFirst,
        }
    }

    #[test]
    fn location_clean_block_matches_uncontaminated_draw() {
        let scenario = normal_scenario(12, 8, OutlierKind::PointMass(1.0));
        let stream = RngStream::new(7, 3, "scn");
        let (sample, good) = gen_location(&scenario, &stream).unwrap();
        assert_eq!(sample.len(), 20);
        assert_eq!(good.indices(), (0..12).collect::<Vec<_>>());
        // The clean prefix is bit-identical to a plain sample from the same
        // stream, and the outlier block is the constant.
        let plain = scenario.good_model.sample(0.0, &stream, 12);
        assert_eq!(&sample.values()[..12], &plain[..]);
        assert!(sample.values()[12..].iter().all(|&v| v == 1.0));
    }

    #[test]
    fn location_no_outliers_and_no_good() {
        let scenario = normal_scenario(15, 0, OutlierKind::PointMass(9.0));
        let (sample, good) = gen_location(&scenario, &RngStream::new(7, 0, "scn")).unwrap();
        assert_eq!(sample.len(), 15);
        assert_eq!(good.len(), 15);

        let all_bad = normal_scenario(0, 6, OutlierKind::PointMass(1.0));
        let (sample, good) = gen_location(&all_bad, &RngStream::new(7, 1, "scn")).unwrap();
        assert!(sample.values().iter().all(|&v| v == 1.0));
        assert!(good.is_empty());

        let empty = normal_scenario(0, 0, OutlierKind::PointMass(1.0));
        assert!(gen_location(&empty, &RngStream::new(7, 2, "scn")).is_err());
    }

    #[test]
    fn location_normal_outlier_block_centers_near_its_mean() {
        let scenario =
            normal_scenario(10, 10, OutlierKind::Normal { mean: 1.0, variance: 0.25 });
        let (sample, _) = gen_location(&scenario, &RngStream::new(19, 4, "scn")).unwrap();
        let block = &sample.values()[10..];
        let mean: f64 = block.iter().sum::<f64>() / 10.0;
        assert!((mean - 1.0).abs() < 0.5, "outlier block mean {mean}");
        // Variance-3 contamination spreads wider than variance-0.25 on a
        // gross scale: check determinism rather than spread here.
        let again = gen_location(&scenario, &RngStream::new(19, 4, "scn")).unwrap().0;
        assert_eq!(sample.values(), again.values());
    }

    #[test]
    fn location_replications_decorrelate() {
        let scenario = normal_scenario(20, 0, OutlierKind::PointMass(1.0));
        let a = gen_location(&scenario, &RngStream::new(19, 0, "scn")).unwrap().0;
        let b = gen_location(&scenario, &RngStream::new(19, 1, "scn")).unwrap().0;
        assert_ne!(a.values(), b.values());
    }

    fn shift_scenario(n: usize, n_good: usize, p: usize, beta: Vec<f64>) -> RegressionScenario {
        RegressionScenario {
            n,
            n_good,
            p,
            correlation: 0.5,
            beta,
            outlier_rule: OutlierRule::InterceptShift { delta: 5.0, noise_variance: 1.0 },
        }
    }

    #[test]
    fn regression_validates_inputs() {
        let mut s = shift_scenario(10, 8, 2, vec![1.0, -1.0]);
        s.beta = vec![1.0];
        assert!(gen_regression(&s, &RngStream::new(5, 0, "reg")).is_err());
        let mut s = shift_scenario(10, 11, 2, vec![1.0, -1.0]);
        s.beta = vec![1.0, -1.0];
        assert!(gen_regression(&s, &RngStream::new(5, 0, "reg")).is_err());
        let mut s = shift_scenario(10, 8, 2, vec![1.0, -1.0]);
        s.correlation = 1.0;
        assert!(gen_regression(&s, &RngStream::new(5, 0, "reg")).is_err());
        let quad_p1 = RegressionScenario {
            n: 10,
            n_good: 8,
            p: 1,
            correlation: 0.0,
            beta: vec![1.0],
            outlier_rule: OutlierRule::QuadraticInFirst { noise_variance: 1.0 },
        };
        assert!(gen_regression(&quad_p1, &RngStream::new(5, 0, "reg")).is_err());
    }

    #[test]
    fn regression_good_rows_follow_the_linear_model() {
        // With β = 0 and no outliers, y is pure N(0,1) noise.
        let s = RegressionScenario {
            n: 4000,
            n_good: 4000,
            p: 2,
            correlation: 0.5,
            beta: vec![0.0, 0.0],
            outlier_rule: OutlierRule::InterceptShift { delta: 5.0, noise_variance: 1.0 },
        };
        let (data, good) = gen_regression(&s, &RngStream::new(11, 0, "reg")).unwrap();
        assert_eq!(good.len(), 4000);
        let mean: f64 = data.y().iter().sum::<f64>() / 4000.0;
        let var: f64 = data.y().iter().map(|v| v * v).sum::<f64>() / 4000.0;
        assert!(mean.abs() < 0.05, "y mean {mean}");
        assert!((var - 1.0).abs() < 0.08, "y variance {var}");
    }

    #[test]
    fn regression_outlier_rules_reduce_exactly_at_zero_noise() {
        // Intercept shift with β = 0 and zero noise: outlier y is exactly δ.
        let s = RegressionScenario {
            n: 12,
            n_good: 7,
            p: 2,
            correlation: 0.5,
            beta: vec![0.0, 0.0],
            outlier_rule: OutlierRule::InterceptShift { delta: 5.0, noise_variance: 0.0 },
        };
        let (data, good) = gen_regression(&s, &RngStream::new(11, 1, "reg")).unwrap();
        assert_eq!(good.indices(), (0..7).collect::<Vec<_>>());
        assert!(data.y()[7..].iter().all(|&v| v == 5.0));

        // Quadratic rule with zero noise reproduces its formula row by row.
        let s = RegressionScenario {
            n: 10,
            n_good: 4,
            p: 3,
            correlation: 0.5,
            beta: vec![1.0, 2.0, -1.0],
            outlier_rule: OutlierRule::QuadraticInFirst { noise_variance: 0.0 },
        };
        let (data, _) = gen_regression(&s, &RngStream::new(11, 2, "reg")).unwrap();
        for i in 4..10 {
            let r = data.x().row(i);
            let expect = 2.0 * r[0] - 2.0 * r[1] + 3.0 * r[0] * r[0];
            assert_abs_diff_eq!(data.y()[i], expect, epsilon = 1e-12);
        }
    }

    fn sample_correlation(a: &[f64], b: &[f64]) -> f64 {
        let m = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / m, b.iter().sum::<f64>() / m);
        let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
        for (x, y) in a.iter().zip(b) {
            let (da, db) = (x - ma, y - mb);
            sab += da * db;
            saa += da * da;
            sbb += db * db;
        }
        sab / (saa * sbb).sqrt()
    }

    #[test]
    fn equicorrelated_design_has_the_stated_moments() {
        let s = RegressionScenario {
            n: 10_000,
            n_good: 10_000,
            p: 100,
            correlation: 0.05,
            beta: vec![0.0; 100],
            outlier_rule: OutlierRule::InterceptShift { delta: 0.0, noise_variance: 1.0 },
        };
        let (data, _) = gen_regression(&s, &RngStream::new(13, 0, "cor")).unwrap();
        let m = s.n as f64;
        for (a, b) in [(0, 1), (3, 77), (50, 99)] {
            let r = sample_correlation(&data.x().column(a), &data.x().column(b));
            assert!((r - 0.05).abs() < 0.03, "corr({a},{b}) = {r}");
        }
        for j in [0, 42, 99] {
            let col = data.x().column(j);
            let mean: f64 = col.iter().sum::<f64>() / m;
            let var: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m;
            assert!(mean.abs() < 0.04, "column {j} mean {mean}");
            assert!((var - 1.0).abs() < 0.05, "column {j} variance {var}");
        }
    }

    #[test]
    fn screening_design_shape_and_signal() {
        assert!(gen_screening(2, &RngStream::new(17, 0, "scr")).is_err());
        let data = gen_screening(10, &RngStream::new(17, 0, "scr")).unwrap();
        assert_eq!(data.n(), SCREENING_ROWS);
        assert_eq!(data.p(), 10);
        assert!(!data.is_standardized());

        // A signal column should out-correlate a null column on nearly
        // every draw.
        let mut signal_wins = 0;
        for rep in 0..100 {
            let data = gen_screening(10, &RngStream::new(17, rep, "scr")).unwrap();
            let cy = sample_correlation(&data.x().column(0), data.y());
            let c9 = sample_correlation(&data.x().column(9), data.y());
            if cy.abs() > c9.abs() {
                signal_wins += 1;
            }
        }
        assert!(signal_wins >= 95, "signal beat null on only {signal_wins}/100 reps");
    }

    #[test]
    fn screening_residual_variance_is_near_one() {
        // Pool y − 3x₁ − 3x₂ − 3x₃ over many draws: the residual is the
        // N(0,1) noise by construction.
        let mut pooled = Vec::new();
        for rep in 0..200 {
            let data = gen_screening(3, &RngStream::new(23, rep, "scr")).unwrap();
            for i in 0..data.n() {
                let r = data.x().row(i);
                pooled.push(data.y()[i] - 3.0 * (r[0] + r[1] + r[2]));
            }
        }
        let m = pooled.len() as f64;
        let mean: f64 = pooled.iter().sum::<f64>() / m;
        let var: f64 = pooled.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m;
        assert!(mean.abs() < 0.03, "residual mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "residual variance {var}");
    }

    #[test]
    fn scenario_descriptors_round_trip_through_serde() {
        let loc = normal_scenario(12, 8, OutlierKind::Normal { mean: 1.0, variance: 3.0 });
        let json = serde_json::to_string(&loc).unwrap();
        let back: ContaminationScenario = serde_json::from_str(&json).unwrap();
        assert_eq!(back, loc);

        let reg = RegressionScenario {
            n: 20,
            n_good: 15,
            p: 2,
            correlation: 0.5,
            beta: vec![1.0, -1.0],
            outlier_rule: OutlierRule::QuadraticInFirst { noise_variance: 3.0 },
        };
        let json = serde_json::to_string(&reg).unwrap();
        let back: RegressionScenario = serde_json::from_str(&json).unwrap();
        assert_eq!(back, reg);

        // A tampered descriptor with an impossible scale is rejected at
        // deserialization, not at first use.
        let bad = r#"{"n_good":1,"n_outlier":0,"good_model":{"family":"normal","scale":-1.0},
                      "theta0":0.0,"outlier_kind":{"point_mass":1.0},"layout":"good_first"}"#;
        assert!(serde_json::from_str::<ContaminationScenario>(bad).is_err());
    }

    #[test]
    fn student_t_good_model_round_trips() {
        let scn = ContaminationScenario {
            n_good: 5,
            n_outlier: 2,
            good_model: LocationModel::new(Family::StudentT { df: 5 }, 2.0).unwrap(),
            theta0: 1.5,
            outlier_kind: OutlierKind::PointMass(1.0),
            layout: Layout::GoodFirst,
        };
        let json = serde_json::to_string(&scn).unwrap();
        assert_eq!(serde_json::from_str::<ContaminationScenario>(&json).unwrap(), scn);
    }
}
