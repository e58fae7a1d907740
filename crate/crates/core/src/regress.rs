//! Regression-side selection: least trimmed squares over row subsets,
//! BIC/GIC best-subset objectives, the RSS screening objective, LAR and SIS
//! screeners, and the better-fitting combiner that keeps whichever screen
//! achieves the smaller residual sum of squares.

use rand::Rng;

use crate::dist::RngStream;
use crate::error::{Error, Result};
use crate::linalg::{least_squares, residuals, Matrix};
use crate::subsample::{binomial, exhaustive_search, random_search_checkpoints, SubsetIndex};

/// A regression design and response. `standardized` records whether the
/// columns have been centered to mean zero and scaled to unit Euclidean
/// norm, with y centered — the convention the screening operations assume.
#[derive(Clone, Debug)]
pub struct RegressionData {
    x: Matrix,
    y: Vec<f64>,
    standardized: bool,
}

impl RegressionData {
    /// Wraps a raw (unstandardized) design and response.
    pub fn new(x: Matrix, y: Vec<f64>) -> Result<Self> {
        if x.rows() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "design has {} rows but response has {}",
                x.rows(),
                y.len()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("response values must be finite".into()));
        }
        Ok(Self { x, y, standardized: false })
    }

    /// Wraps data that is already standardized, verifying the convention:
    /// every column mean 0 and Euclidean norm 1 (within 1e-8), y mean 0.
    pub fn new_standardized(x: Matrix, y: Vec<f64>) -> Result<Self> {
        let mut data = Self::new(x, y)?;
        for j in 0..data.x.cols() {
            let col = data.x.column(j);
            let mean: f64 = col.iter().sum::<f64>() / col.len() as f64;
            let norm2: f64 = col.iter().map(|v| v * v).sum();
            if mean.abs() > 1e-8 || (norm2 - 1.0).abs() > 1e-8 {
                return Err(Error::InvalidInput(format!(
                    "column {j} is not standardized (mean {mean:.2e}, squared norm {norm2})"
                )));
            }
        }
        let ymean: f64 = data.y.iter().sum::<f64>() / data.y.len() as f64;
        if ymean.abs() > 1e-8 {
            return Err(Error::InvalidInput(format!("response mean {ymean:.2e} is not 0")));
        }
        data.standardized = true;
        Ok(data)
    }

    /// Centered, unit-norm copy: each column gets mean 0 and Euclidean norm
    /// 1, and y is centered. Fails on constant columns.
    pub fn standardize(&self) -> Result<Self> {
        let (n, p) = (self.x.rows(), self.x.cols());
        if n < 2 {
            return Err(Error::InvalidInput("standardization needs at least two rows".into()));
        }
        let mut means = vec![0.0; p];
        for i in 0..n {
            for (m, v) in means.iter_mut().zip(self.x.row(i)) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n as f64;
        }
        let mut norms = vec![0.0; p];
        for i in 0..n {
            for j in 0..p {
                let c = self.x.get(i, j) - means[j];
                norms[j] += c * c;
            }
        }
        for (j, nrm) in norms.iter_mut().enumerate() {
            if *nrm <= 0.0 {
                return Err(Error::Numerical(format!(
                    "column {j} is constant and cannot be standardized"
                )));
            }
            *nrm = nrm.sqrt();
        }
        let mut out = Matrix::zeros(n, p);
        for i in 0..n {
            for j in 0..p {
                out.set(i, j, (self.x.get(i, j) - means[j]) / norms[j]);
            }
        }
        let ymean: f64 = self.y.iter().sum::<f64>() / n as f64;
        let y: Vec<f64> = self.y.iter().map(|v| v - ymean).collect();
        Ok(Self { x: out, y, standardized: true })
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn p(&self) -> usize {
        self.x.cols()
    }

    pub fn is_standardized(&self) -> bool {
        self.standardized
    }
}

// ---------------------------------------------------------------------------
// Least trimmed squares over row subsets
// ---------------------------------------------------------------------------

/// A least-trimmed-squares fit: the best row subset found, the LS
/// coefficients on it, and the subset-restricted residual sum of squares.
#[derive(Clone, Debug)]
pub struct LtsFit {
    pub subset: SubsetIndex,
    pub coefficients: Vec<f64>,
    pub rss_on_subset: f64,
}

/// Least-squares fit restricted to a row subset: returns the RSS on those
/// rows and the fitted coefficients.
pub fn lts_row_objective(
    data: &RegressionData,
    subset: &SubsetIndex,
) -> Result<(f64, Vec<f64>)> {
    if subset.is_empty() {
        return Err(Error::InvalidInput("row subset must be nonempty".into()));
    }
    if subset.universe_size() != data.n() {
        return Err(Error::DimensionMismatch(format!(
            "row subset universe {} does not match {} rows",
            subset.universe_size(),
            data.n()
        )));
    }
    let xs = data.x.row_subset(subset.indices())?;
    let ys = subset.gather(&data.y);
    let fit = least_squares(&xs, &ys)?;
    Ok((fit.rss, fit.coefficients))
}

/// Sum of the m smallest squared residuals of β on the full data; ties in
/// squared residuals are ordered by row index so the selection is
/// deterministic.
pub fn trimmed_rss(data: &RegressionData, beta: &[f64], m: usize) -> Result<f64> {
    let n = data.n();
    if m == 0 || m > n {
        return Err(Error::InvalidInput(format!("trim size {m} invalid for {n} rows")));
    }
    let r = residuals(&data.x, &data.y, beta)?;
    let mut sq: Vec<(f64, usize)> = r.iter().map(|v| v * v).zip(0..).collect();
    sq.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(sq[..m].iter().map(|(v, _)| v).sum())
}

/// Least trimmed squares by random subset search: draws `budget` uniform
/// size-m row subsets and keeps the one whose subset-restricted LS fit has
/// the smallest RSS.
pub fn lts_fit(
    data: &RegressionData,
    m: usize,
    budget: usize,
    stream: &RngStream,
) -> Result<LtsFit> {
    let fits = lts_fit_checkpoints(data, m, &[budget], stream)?;
    Ok(fits.into_iter().next().expect("one budget requested"))
}

/// Least trimmed squares reported at several nested budgets sharing one
/// draw stream (the larger-budget fit is never worse, exactly).
pub fn lts_fit_checkpoints(
    data: &RegressionData,
    m: usize,
    budgets: &[usize],
    stream: &RngStream,
) -> Result<Vec<LtsFit>> {
    let raw = random_search_checkpoints(
        |s: &SubsetIndex| lts_row_objective(data, s),
        data.n(),
        m,
        budgets,
        stream,
    )?;
    Ok(raw
        .into_iter()
        .map(|(subset, rss, coefficients)| LtsFit { subset, coefficients, rss_on_subset: rss })
        .collect())
}

/// Exact least trimmed squares over all C(n, m) row subsets (oracle for
/// small instances).
pub fn lts_fit_exhaustive(data: &RegressionData, m: usize) -> Result<LtsFit> {
    let (subset, rss, coefficients) =
        exhaustive_search(|s: &SubsetIndex| lts_row_objective(data, s), data.n(), m)?;
    Ok(LtsFit { subset, coefficients, rss_on_subset: rss })
}

// ---------------------------------------------------------------------------
// Variable subsets: BIC / GIC and screening objectives
// ---------------------------------------------------------------------------

/// A subset of design columns, kept strictly increasing; may be empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableSubset {
    variables: Vec<usize>,
}

impl VariableSubset {
    pub fn new(mut variables: Vec<usize>) -> Result<Self> {
        variables.sort_unstable();
        if variables.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("duplicate variable indices".into()));
        }
        Ok(Self { variables })
    }

    pub fn empty() -> Self {
        Self { variables: Vec::new() }
    }

    pub fn variables(&self) -> &[usize] {
        &self.variables
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    /// True when every index of `other` is also in `self`.
    pub fn contains_all(&self, other: &VariableSubset) -> bool {
        other.variables.iter().all(|v| self.variables.binary_search(v).is_ok())
    }

    fn check_range(&self, p: usize) -> Result<()> {
        if self.variables.last().is_some_and(|&last| last >= p) {
            return Err(Error::InvalidInput(format!(
                "variable index out of range for {p} columns"
            )));
        }
        Ok(())
    }
}

/// BIC/GIC objective (1 + |A|·λₙ/n)·‖y − X_A β̂_A‖² on standardized data;
/// λₙ = log n gives BIC. The empty subset scores ‖y‖².
pub fn bic_objective(
    data: &RegressionData,
    subset: &VariableSubset,
    lambda_n: f64,
) -> Result<f64> {
    if !data.standardized {
        return Err(Error::InvalidInput(
            "bic_objective requires standardized data".into(),
        ));
    }
    if !(lambda_n >= 0.0) {
        return Err(Error::InvalidInput(format!("lambda must be ≥ 0, got {lambda_n}")));
    }
    subset.check_range(data.p())?;
    let rss = rss_on_columns(data, subset.variables())?;
    let n = data.n() as f64;
    Ok((1.0 + subset.len() as f64 * lambda_n / n) * rss)
}

/// RSS of y on a set of columns; rank-deficient submodels get the
/// minimum-norm fit. The empty set scores ‖y‖².
pub fn rss_screening_objective(data: &RegressionData, subset: &VariableSubset) -> Result<f64> {
    subset.check_range(data.p())?;
    rss_on_columns(data, subset.variables())
}

fn rss_on_columns(data: &RegressionData, columns: &[usize]) -> Result<f64> {
    if columns.is_empty() {
        return Ok(data.y.iter().map(|v| v * v).sum());
    }
    let xs = data.x.column_subset(columns)?;
    Ok(least_squares(&xs, &data.y)?.rss)
}

/// How best_subset_bic explores the subset lattice.
pub enum SearchStrategy<'a> {
    /// All subsets of size 0..=max_size; requires Σ C(p,k) ≤ 1e6.
    Exhaustive,
    /// The empty subset plus `budget` random draws: each draw picks a size
    /// uniformly in 1..=max_size, then a uniform subset of that size.
    Random { budget: usize, stream: &'a RngStream },
}

/// Minimizes the BIC/GIC objective over variable subsets of size at most
/// `max_size`. Exact ties prefer the smaller subset, then the
/// lexicographically smaller one.
pub fn best_subset_bic(
    data: &RegressionData,
    max_size: usize,
    lambda_n: f64,
    search: SearchStrategy<'_>,
) -> Result<VariableSubset> {
    let p = data.p();
    if max_size > p {
        return Err(Error::InvalidInput(format!(
            "max subset size {max_size} exceeds {p} columns"
        )));
    }
    let empty_obj = bic_objective(data, &VariableSubset::empty(), lambda_n)?;
    let mut best = (empty_obj, VariableSubset::empty());
    match search {
        SearchStrategy::Exhaustive => {
            let total: f64 = (1..=max_size).map(|k| binomial(p, k)).sum();
            if total > 1e6 {
                return Err(Error::BudgetExceeded(format!(
                    "exhaustive subset search over ≈{total:.3e} subsets exceeds the 1e6 budget"
                )));
            }
            for k in 1..=max_size {
                // Enumeration is lexicographic within each size and sizes
                // ascend, so keeping only strict improvements realizes the
                // (objective, size, lexicographic) tie rule.
                let (subset, obj, ()) = exhaustive_search(
                    |s: &SubsetIndex| {
                        bic_objective(
                            data,
                            &VariableSubset { variables: s.indices().to_vec() },
                            lambda_n,
                        )
                        .map(|o| (o, ()))
                    },
                    p,
                    k,
                )?;
                if obj < best.0 {
                    best = (obj, VariableSubset { variables: subset.indices().to_vec() });
                }
            }
        }
        SearchStrategy::Random { budget, stream } => {
            if budget == 0 {
                return Err(Error::InvalidInput("random search needs budget ≥ 1".into()));
            }
            if max_size == 0 {
                return Ok(best.1);
            }
            let mut rng = stream.rng();
            let mut scratch: Vec<usize> = Vec::with_capacity(p);
            for _ in 0..budget {
                let k = rng.gen_range(1..=max_size);
                scratch.clear();
                scratch.extend(0..p);
                for i in 0..k {
                    let j = rng.gen_range(i..p);
                    scratch.swap(i, j);
                }
                let mut vars = scratch[..k].to_vec();
                vars.sort_unstable();
                let cand = VariableSubset { variables: vars };
                let obj = bic_objective(data, &cand, lambda_n)?;
                let improves = obj < best.0
                    || (obj == best.0
                        && (cand.len() < best.1.len()
                            || (cand.len() == best.1.len()
                                && cand.variables < best.1.variables)));
                if improves {
                    best = (obj, cand);
                }
            }
        }
    }
    Ok(best.1)
}

// ---------------------------------------------------------------------------
// Screening: SIS, LAR, and the better-fitting combiner
// ---------------------------------------------------------------------------

/// Output of a screening method: the selected columns (sorted), the order
/// in which the method ranked or activated them, and the LS residual sum of
/// squares of y on the selection.
#[derive(Clone, Debug)]
pub struct ScreeningResult {
    pub selected: VariableSubset,
    pub method_tag: String,
    pub rss: f64,
    /// Selection order: ranking order for SIS, activation order for LAR.
    pub activation_order: Vec<usize>,
}

/// Sure independence screening: the M columns with the largest |⟨x_j, y⟩|
/// (marginal correlations, as the data is standardized); ties prefer the
/// smaller column index.
pub fn sis_screen(data: &RegressionData, m_target: usize) -> Result<ScreeningResult> {
    if !data.standardized {
        return Err(Error::InvalidInput("sis_screen requires standardized data".into()));
    }
    if m_target == 0 || m_target > data.p() {
        return Err(Error::InvalidInput(format!(
            "screening size {m_target} invalid for {} columns",
            data.p()
        )));
    }
    let corr = data.x.transpose_times(&data.y)?;
    let mut order: Vec<usize> = (0..data.p()).collect();
    order.sort_by(|&a, &b| corr[b].abs().total_cmp(&corr[a].abs()).then(a.cmp(&b)));
    let activation_order: Vec<usize> = order[..m_target].to_vec();
    let selected = VariableSubset::new(activation_order.clone())?;
    let rss = rss_on_columns(data, selected.variables())?;
    Ok(ScreeningResult { selected, method_tag: "sis".into(), rss, activation_order })
}

/// Correlation differences below this are treated as exact ties: the tied
/// columns activate together, smallest index first.
const LAR_TIE_TOL: f64 = 1e-10;

/// Least angle regression screening: runs the LAR path (equiangular
/// direction, step to the next correlation tie) and returns the first M
/// variables to activate, in activation order. Pure LAR — once active, a
/// variable never leaves.
///
/// Fails with a numerical diagnostic if the active Gram matrix loses
/// positive definiteness (exactly collinear active columns).
pub fn lar_screen(data: &RegressionData, m_target: usize) -> Result<ScreeningResult> {
    if !data.standardized {
        return Err(Error::InvalidInput("lar_screen requires standardized data".into()));
    }
    let (n, p) = (data.n(), data.p());
    if m_target == 0 || m_target > p {
        return Err(Error::InvalidInput(format!(
            "screening size {m_target} invalid for {p} columns"
        )));
    }
    if m_target >= n {
        return Err(Error::InvalidInput(format!(
            "LAR screening size {m_target} must be below the {n} observations"
        )));
    }

    let mut residual = data.y.clone();
    let mut active: Vec<usize> = Vec::with_capacity(m_target + 4);
    let mut signs: Vec<f64> = Vec::with_capacity(m_target + 4);
    let mut is_active = vec![false; p];

    while active.len() < m_target {
        let c = data.x.transpose_times(&residual)?;
        let cmax = (0..p)
            .filter(|&j| !is_active[j])
            .map(|j| c[j].abs())
            .fold(f64::NEG_INFINITY, f64::max);
        if !(cmax > LAR_TIE_TOL) {
            return Err(Error::Numerical(format!(
                "LAR stalled after {} activations: residual uncorrelated with all \
                 remaining columns",
                active.len()
            )));
        }
        // Everything within the tie tolerance of the top correlation joins,
        // in column-index order.
        for j in 0..p {
            if !is_active[j] && cmax - c[j].abs() < LAR_TIE_TOL {
                is_active[j] = true;
                active.push(j);
                signs.push(if c[j] >= 0.0 { 1.0 } else { -1.0 });
            }
        }
        if active.len() >= m_target {
            break;
        }

        // Equiangular direction over the signed active columns.
        let k = active.len();
        let mut gram = vec![0.0; k * k];
        for a in 0..k {
            for b in a..k {
                let mut s = 0.0;
                for i in 0..n {
                    s += data.x.get(i, active[a]) * data.x.get(i, active[b]);
                }
                let v = signs[a] * signs[b] * s;
                gram[a * k + b] = v;
                gram[b * k + a] = v;
            }
        }
        let w = crate::linalg::cholesky_solve(gram, k, &vec![1.0; k]).map_err(|_| {
            Error::Numerical(format!(
                "LAR active Gram not positive definite with {k} active columns \
                 ({:?}): exactly collinear active set",
                active
            ))
        })?;
        let a_norm = 1.0 / w.iter().sum::<f64>().sqrt();
        let mut u = vec![0.0; n];
        for (idx, &j) in active.iter().enumerate() {
            let coef = signs[idx] * w[idx] * a_norm;
            for (ui, row) in u.iter_mut().zip(0..n) {
                *ui += coef * data.x.get(row, j);
            }
        }
        let a = data.x.transpose_times(&u)?;

        // Step to the point where the next column's correlation catches up.
        let mut gamma = f64::INFINITY;
        for j in 0..p {
            if is_active[j] {
                continue;
            }
            for (num, den) in [(cmax - c[j], a_norm - a[j]), (cmax + c[j], a_norm + a[j])] {
                if den > 1e-12 {
                    let g = num / den;
                    if g > 1e-12 && g < gamma {
                        gamma = g;
                    }
                }
            }
        }
        if !gamma.is_finite() {
            gamma = cmax / a_norm; // no catch-up point: full LS step
        }
        for (ri, ui) in residual.iter_mut().zip(&u) {
            *ri -= gamma * ui;
        }
    }

    let activation_order: Vec<usize> = active[..m_target].to_vec();
    let selected = VariableSubset::new(activation_order.clone())?;
    let rss = rss_on_columns(data, selected.variables())?;
    Ok(ScreeningResult { selected, method_tag: "lar".into(), rss, activation_order })
}

/// Keeps the screening result with the smallest residual sum of squares;
/// exact ties keep the earliest input.
pub fn better_screen(
    data: &RegressionData,
    m_target: usize,
    results: &[ScreeningResult],
) -> Result<ScreeningResult> {
    let first = results
        .first()
        .ok_or_else(|| Error::InvalidInput("better_screen needs at least one result".into()))?;
    for r in results {
        if r.selected.len() != m_target {
            return Err(Error::InvalidInput(format!(
                "screening result '{}' has {} variables, expected {m_target}",
                r.method_tag,
                r.selected.len()
            )));
        }
        r.selected.check_range(data.p())?;
    }
    let mut best = first;
    for r in &results[1..] {
        if r.rss < best.rss {
            best = r;
        }
    }
    Ok(best.clone())
}
