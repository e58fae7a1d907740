//! Univariate location estimators and the greater-likelihood selector: given
//! several candidate estimates of a location parameter, keep the one with the
//! larger likelihood under the working model.

use crate::dist::LocationModel;
use crate::error::{Error, Result};

/// A univariate sample with a cached sorted copy.
#[derive(Clone, Debug)]
pub struct UnivariateSample {
    values: Vec<f64>,
    sorted: Vec<f64>,
}

impl UnivariateSample {
    /// Wraps a nonempty sample of finite values.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("sample must be nonempty".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("sample values must be finite".into()));
        }
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { values, sorted })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires nonempty
    }

    /// Values in original order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Values in nondecreasing order.
    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }
}

/// A location estimate together with the method that produced it and its
/// negative log-likelihood under the model it was evaluated against.
#[derive(Clone, Debug)]
pub struct LocationEstimate {
    pub value: f64,
    pub method_tag: String,
    pub neg_log_lik: f64,
}

impl LocationEstimate {
    /// Builds an estimate, computing its negative log-likelihood on `sample`
    /// under `model`.
    pub fn evaluated(
        value: f64,
        method_tag: &str,
        model: &LocationModel,
        sample: &UnivariateSample,
    ) -> Self {
        Self {
            value,
            method_tag: method_tag.to_owned(),
            neg_log_lik: neg_log_lik(model, sample.values(), value),
        }
    }
}

/// −Σᵢ log f(xᵢ, θ).
pub fn neg_log_lik(model: &LocationModel, values: &[f64], theta: f64) -> f64 {
    -values.iter().map(|&x| model.log_pdf(theta, x)).sum::<f64>()
}

/// Sample median: the middle order statistic for odd n, the midpoint of the
/// two middle order statistics for even n.
pub fn median(sample: &UnivariateSample) -> f64 {
    let s = sample.sorted();
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Symmetrically trimmed mean: removes k = ⌊(n + 1)(1 − keep_fraction)/2⌋
/// values from each tail of the sorted sample and averages the rest — the
/// (n + 1) quantile-position convention, so a keep fraction of 0.5 trims at
/// the quartiles (the midmean). A keep fraction of 1 reproduces the
/// arithmetic mean.
pub fn trimmed_mean(sample: &UnivariateSample, keep_fraction: f64) -> Result<f64> {
    if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "keep_fraction must lie in (0, 1], got {keep_fraction}"
        )));
    }
    let n = sample.len();
    let k = ((n + 1) as f64 * (1.0 - keep_fraction) / 2.0).floor() as usize;
    if 2 * k >= n {
        return Err(Error::InvalidInput(format!(
            "keep_fraction {keep_fraction} trims the entire sample of {n}"
        )));
    }
    let kept = &sample.sorted()[k..n - k];
    Ok(kept.iter().sum::<f64>() / kept.len() as f64)
}

/// Picks the candidate with the greater likelihood: the estimate whose value
/// minimizes −Σ log f(xᵢ, θ̂) on `sample` under `model`. Ties keep the
/// earliest candidate. The returned estimate carries the freshly computed
/// negative log-likelihood.
pub fn better_of(
    candidates: &[LocationEstimate],
    model: &LocationModel,
    sample: &UnivariateSample,
) -> Result<LocationEstimate> {
    let first = candidates
        .first()
        .ok_or_else(|| Error::InvalidInput("better_of needs at least one candidate".into()))?;
    let mut best = LocationEstimate {
        value: first.value,
        method_tag: first.method_tag.clone(),
        neg_log_lik: neg_log_lik(model, sample.values(), first.value),
    };
    for cand in &candidates[1..] {
        let nll = neg_log_lik(model, sample.values(), cand.value);
        if nll < best.neg_log_lik {
            best = LocationEstimate {
                value: cand.value,
                method_tag: cand.method_tag.clone(),
                neg_log_lik: nll,
            };
        }
    }
    Ok(best)
}
