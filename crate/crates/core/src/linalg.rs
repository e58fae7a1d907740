//! Dense least-squares machinery: a small row-major matrix type, pivoted
//! Householder QR, minimum-norm solutions for rank-deficient designs, and
//! residual computations.
//!
//! Solves in this crate are many and small (at most a few hundred rows, a
//! handful of columns), so the implementation favors determinism and
//! numerical robustness over blocked performance.

use crate::error::{Error, Result};

/// Relative pivot threshold deciding the numerical rank: column k is treated
/// as dependent when its pivot magnitude falls below `RANK_TOL` times the
/// first (largest) pivot.
const RANK_TOL: f64 = 1e-10;

/// Dense real matrix, row-major storage.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major data; every entry must be finite.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("matrix entries must be finite".into()));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from a list of equal-length rows.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::from_row_major(n, p, rows.into_iter().flatten().collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    /// Row `i` as a slice.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Copy of column `j`.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// New matrix consisting of the listed columns, in the listed order.
    pub fn column_subset(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&j| j >= self.cols) {
            return Err(Error::InvalidInput(format!(
                "column index {bad} out of range for {} columns",
                self.cols
            )));
        }
        let mut data = Vec::with_capacity(self.rows * indices.len());
        for i in 0..self.rows {
            let row = self.row(i);
            data.extend(indices.iter().map(|&j| row[j]));
        }
        Ok(Self { rows: self.rows, cols: indices.len(), data })
    }

    /// New matrix consisting of the listed rows, in the listed order.
    pub fn row_subset(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.rows) {
            return Err(Error::InvalidInput(format!(
                "row index {bad} out of range for {} rows",
                self.rows
            )));
        }
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Ok(Self { rows: indices.len(), cols: self.cols, data })
    }

    /// Xᵀv for a length-`rows` vector, accumulated row-wise so the row-major
    /// layout is walked sequentially.
    pub fn transpose_times(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "expected vector of length {}, got {}",
                self.rows,
                v.len()
            )));
        }
        let mut out = vec![0.0; self.cols];
        for (i, vi) in v.iter().enumerate() {
            for (o, xij) in out.iter_mut().zip(self.row(i)) {
                *o += xij * vi;
            }
        }
        Ok(out)
    }
}

/// Result of a least-squares solve.
#[derive(Clone, Debug)]
pub struct LsFit {
    /// Fitted coefficients, length = number of columns of the design. For a
    /// rank-deficient design these are the minimum-norm minimizer.
    pub coefficients: Vec<f64>,
    /// ‖y − Xβ̂‖², recomputed from the fitted coefficients.
    pub rss: f64,
    /// Numerical rank of the design, decided by pivoted QR.
    pub rank: usize,
}

/// Solves min_β ‖y − Xβ‖² by column-pivoted Householder QR.
///
/// Full-rank designs get the unique minimizer; rank-deficient designs get
/// the minimum-norm minimizer (the generalized-inverse solution). The
/// residual sum of squares is minimal in both cases.
pub fn least_squares(x: &Matrix, y: &[f64]) -> Result<LsFit> {
    let (n, p) = (x.rows(), x.cols());
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "design has {n} rows but response has {} entries",
            y.len()
        )));
    }
    if n == 0 {
        return Err(Error::InvalidInput("least squares needs at least one row".into()));
    }
    if p == 0 {
        return Ok(LsFit {
            coefficients: Vec::new(),
            rss: y.iter().map(|v| v * v).sum(),
            rank: 0,
        });
    }

    // Column-major scratch copy of X, plus a carried copy of y that the
    // reflectors transform into Qᵀy.
    let mut a = vec![0.0; n * p];
    for i in 0..n {
        for j in 0..p {
            a[j * n + i] = x.get(i, j);
        }
    }
    let mut qty = y.to_vec();
    let mut perm: Vec<usize> = (0..p).collect();

    let kmax = n.min(p);
    let mut rank = 0;
    let mut first_pivot = 0.0_f64;
    for k in 0..kmax {
        // Pivot: bring the trailing column with the largest remaining norm
        // to position k. Strict comparison keeps the earliest column on
        // ties, so the factorization is deterministic.
        let mut best = k;
        let mut best_norm2 = trailing_norm2(&a, n, k, k);
        for j in k + 1..p {
            let norm2 = trailing_norm2(&a, n, j, k);
            if norm2 > best_norm2 {
                best = j;
                best_norm2 = norm2;
            }
        }
        if best != k {
            for i in 0..n {
                a.swap(k * n + i, best * n + i);
            }
            perm.swap(k, best);
        }

        let pivot = best_norm2.sqrt();
        if k == 0 {
            first_pivot = pivot;
        }
        if pivot <= RANK_TOL * first_pivot {
            break;
        }
        rank = k + 1;

        // Householder reflector for column k, rows k..n: v has v[0] = 1
        // implicitly; the transformed diagonal entry becomes -sign(x0)·‖x‖.
        let x0 = a[k * n + k];
        let alpha = -x0.signum() * pivot;
        let v0 = x0 - alpha;
        a[k * n + k] = alpha;
        // tau = 2 / ‖v‖² with v = (v0, x1, …); ‖v‖² = v0² + (pivot² − x0²)
        //     = 2·v0·(v0 + x0 − x0) ... computed directly for clarity.
        let vnorm2 = v0 * v0 + (best_norm2 - x0 * x0);
        if vnorm2 > 0.0 {
            // Apply I − 2vvᵀ/‖v‖² to the trailing columns and to y.
            for j in k + 1..p {
                reflect(&mut a, n, k, j, v0, vnorm2);
            }
            reflect_vec(&a, &mut qty, n, k, v0, vnorm2);
        }
        // Zero the subdiagonal of column k in the scratch (v is not kept).
        for i in k + 1..n {
            a[k * n + i] = 0.0;
        }
    }

    // R̂ is the rank×p upper-trapezoidal block in permuted column order;
    // c is the leading rank entries of Qᵀy.
    let beta_perm = if rank == p {
        // Back-substitution on the square upper-triangular R.
        let mut beta = vec![0.0; p];
        for i in (0..p).rev() {
            let mut s = qty[i];
            for j in i + 1..p {
                s -= a[j * n + i] * beta[j];
            }
            beta[i] = s / a[i * n + i];
        }
        beta
    } else {
        // Minimum-norm solution of the underdetermined system R̂ β = c:
        // β = R̂ᵀ (R̂ R̂ᵀ)⁻¹ c, with the small Gram matrix solved by Cholesky.
        let r = rank;
        let mut gram = vec![0.0; r * r];
        for i in 0..r {
            for j in i..r {
                let mut s = 0.0;
                for l in j..p {
                    // Row i and row j of R̂; both are zero left of their
                    // diagonal, so the sum starts at l = j ≥ i.
                    s += a[l * n + i] * a[l * n + j];
                }
                gram[i * r + j] = s;
                gram[j * r + i] = s;
            }
        }
        let w = cholesky_solve(gram, r, &qty[..r])?;
        let mut beta = vec![0.0; p];
        for (l, b) in beta.iter_mut().enumerate() {
            let mut s = 0.0;
            for i in 0..r.min(l + 1) {
                s += a[l * n + i] * w[i];
            }
            *b = s;
        }
        beta
    };

    let mut coefficients = vec![0.0; p];
    for (k, &j) in perm.iter().enumerate() {
        coefficients[j] = beta_perm[k];
    }
    let rss = residuals(x, y, &coefficients)?.iter().map(|r| r * r).sum();
    Ok(LsFit { coefficients, rss, rank })
}

/// Residual vector y − Xβ.
pub fn residuals(x: &Matrix, y: &[f64], beta: &[f64]) -> Result<Vec<f64>> {
    if y.len() != x.rows() || beta.len() != x.cols() {
        return Err(Error::DimensionMismatch(format!(
            "residuals: X is {}x{}, y has {}, beta has {}",
            x.rows(),
            x.cols(),
            y.len(),
            beta.len()
        )));
    }
    Ok(y.iter()
        .enumerate()
        .map(|(i, yi)| yi - dot(x.row(i), beta))
        .collect())
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Squared norm of column `j`, rows `k..n`, in the column-major scratch.
#[inline]
fn trailing_norm2(a: &[f64], n: usize, j: usize, k: usize) -> f64 {
    a[j * n + k..(j + 1) * n].iter().map(|v| v * v).sum()
}

/// Applies the reflector of column `k` (implicit v0, stored tail) to column `j`.
#[inline]
fn reflect(a: &mut [f64], n: usize, k: usize, j: usize, v0: f64, vnorm2: f64) {
    let mut proj = v0 * a[j * n + k];
    for i in k + 1..n {
        proj += a[k * n + i] * a[j * n + i];
    }
    let scale = 2.0 * proj / vnorm2;
    a[j * n + k] -= scale * v0;
    for i in k + 1..n {
        a[j * n + i] -= scale * a[k * n + i];
    }
}

/// Same reflector applied to the carried response vector.
#[inline]
fn reflect_vec(a: &[f64], y: &mut [f64], n: usize, k: usize, v0: f64, vnorm2: f64) {
    let mut proj = v0 * y[k];
    for i in k + 1..n {
        proj += a[k * n + i] * y[i];
    }
    let scale = 2.0 * proj / vnorm2;
    y[k] -= scale * v0;
    for i in k + 1..n {
        y[i] -= scale * a[k * n + i];
    }
}

/// Solves the symmetric positive-definite system A x = b by Cholesky, where
/// `a` is dim×dim row-major (consumed as scratch). Fails with a numerical
/// error if A is not positive definite.
pub(crate) fn cholesky_solve(mut a: Vec<f64>, dim: usize, b: &[f64]) -> Result<Vec<f64>> {
    debug_assert_eq!(a.len(), dim * dim);
    debug_assert_eq!(b.len(), dim);
    // In-place lower Cholesky factor.
    for j in 0..dim {
        let mut d = a[j * dim + j];
        for k in 0..j {
            d -= a[j * dim + k] * a[j * dim + k];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::Numerical(
                "matrix not positive definite in Cholesky factorization".into(),
            ));
        }
        let d = d.sqrt();
        a[j * dim + j] = d;
        for i in j + 1..dim {
            let mut s = a[i * dim + j];
            for k in 0..j {
                s -= a[i * dim + k] * a[j * dim + k];
            }
            a[i * dim + j] = s / d;
        }
    }
    // Forward then backward substitution.
    let mut x = b.to_vec();
    for i in 0..dim {
        for k in 0..i {
            x[i] = x[i] - a[i * dim + k] * x[k];
        }
        x[i] /= a[i * dim + i];
    }
    for i in (0..dim).rev() {
        for k in i + 1..dim {
            x[i] = x[i] - a[k * dim + i] * x[k];
        }
        x[i] /= a[i * dim + i];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::RngStream;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;
    use rand::Rng;

    fn random_matrix(stream: &RngStream, n: usize, p: usize) -> (Matrix, Vec<f64>) {
        let mut rng = stream.rng();
        let data: Vec<f64> = (0..n * p).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        (Matrix::from_row_major(n, p, data).unwrap(), y)
    }

    #[test]
    fn construction_checks_shape_and_finiteness() {
        assert!(Matrix::from_row_major(2, 2, vec![1.0; 3]).is_err());
        assert!(Matrix::from_row_major(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(Matrix::from_rows(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn identity_solve_is_exact() {
        let x = Matrix::identity(2);
        let fit = least_squares(&x, &[1.0, 2.0]).unwrap();
        assert_eq!(fit.rank, 2);
        assert_abs_diff_eq!(fit.coefficients[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(fit.coefficients[1], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(fit.rss, 0.0, epsilon = 1e-24);
    }

    #[test]
    fn duplicate_columns_get_minimum_norm_split() {
        let x = Matrix::from_rows(vec![vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let fit = least_squares(&x, &[2.0, 2.0]).unwrap();
        assert_eq!(fit.rank, 1);
        assert_abs_diff_eq!(fit.coefficients[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.coefficients[1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.rss, 0.0, epsilon = 1e-20);
    }

    #[test]
    fn zero_design_has_rank_zero() {
        let x = Matrix::zeros(3, 2);
        let fit = least_squares(&x, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(fit.rank, 0);
        assert_eq!(fit.coefficients, vec![0.0, 0.0]);
        assert_abs_diff_eq!(fit.rss, 14.0, epsilon = 1e-12);
    }

    #[test]
    fn matches_normal_equations_on_well_conditioned_system() {
        let (x, y) = random_matrix(&RngStream::new(11, 0, "linalg"), 20, 3);
        let fit = least_squares(&x, &y).unwrap();
        assert_eq!(fit.rank, 3);

        // Normal-equations oracle: solve (XᵀX) β = Xᵀy directly.
        let xty = x.transpose_times(&y).unwrap();
        let mut gram = vec![0.0; 9];
        for i in 0..20 {
            let row = x.row(i);
            for a in 0..3 {
                for b in 0..3 {
                    gram[a * 3 + b] += row[a] * row[b];
                }
            }
        }
        let beta = cholesky_solve(gram, 3, &xty).unwrap();
        let rss_oracle: f64 =
            residuals(&x, &y, &beta).unwrap().iter().map(|r| r * r).sum();
        assert_relative_eq!(fit.rss, rss_oracle, epsilon = 1e-8);
        for (b1, b2) in fit.coefficients.iter().zip(&beta) {
            assert_abs_diff_eq!(b1, b2, epsilon = 1e-8);
        }
    }

    #[test]
    fn residual_vector_definition() {
        let x = Matrix::from_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let y = vec![1.0, -1.0];
        assert_eq!(residuals(&x, &y, &[0.0, 0.0]).unwrap(), y);
        let r = residuals(&x, &y, &[2.0, -0.5]).unwrap();
        assert_abs_diff_eq!(r[0], 1.0 - (2.0 - 1.0), epsilon = 1e-12);
        assert_abs_diff_eq!(r[1], -1.0 - (6.0 - 2.0), epsilon = 1e-12);
        assert!(residuals(&x, &y, &[1.0]).is_err());
    }

    #[test]
    fn residuals_are_orthogonal_to_column_space() {
        let (x, y) = random_matrix(&RngStream::new(12, 0, "linalg"), 30, 5);
        let fit = least_squares(&x, &y).unwrap();
        let r = residuals(&x, &y, &fit.coefficients).unwrap();
        let ynorm = dot(&y, &y).sqrt();
        let xtr = x.transpose_times(&r).unwrap();
        for (j, v) in xtr.iter().enumerate() {
            let colnorm = dot(&x.column(j), &x.column(j)).sqrt();
            assert!(v.abs() <= 1e-8 * ynorm * colnorm.max(1.0), "column {j}: {v}");
        }
    }

    #[test]
    fn appending_a_column_never_increases_rss() {
        for rep in 0..20 {
            let (x, y) = random_matrix(&RngStream::new(13, rep, "linalg"), 15, 4);
            let mut prev = f64::INFINITY;
            for k in 1..=4 {
                let sub = x.column_subset(&(0..k).collect::<Vec<_>>()).unwrap();
                let rss = least_squares(&sub, &y).unwrap().rss;
                assert!(rss <= prev + 1e-10, "k={k}: {rss} > {prev}");
                prev = rss;
            }
        }
    }

    #[test]
    fn rank_matches_svd_on_deficient_designs() {
        for rep in 0..25 {
            let mut rng = RngStream::new(14, rep, "linalg").rng();
            let (n, p, r) = (12, 6, 1 + (rep as usize) % 4);
            // Random rank-r matrix as a product of thin factors.
            let left: Vec<f64> = (0..n * r).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let right: Vec<f64> = (0..r * p).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut data = vec![0.0; n * p];
            for i in 0..n {
                for j in 0..p {
                    data[i * p + j] =
                        (0..r).map(|k| left[i * r + k] * right[k * p + j]).sum();
                }
            }
            let x = Matrix::from_row_major(n, p, data.clone()).unwrap();
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let fit = least_squares(&x, &y).unwrap();

            let svd = nalgebra::DMatrix::from_row_slice(n, p, &data).svd(false, false);
            let smax = svd.singular_values.max();
            let svd_rank =
                svd.singular_values.iter().filter(|&&s| s > 1e-10 * smax).count();
            assert_eq!(fit.rank, svd_rank, "rep {rep}");

            // Minimum-norm fit must still minimize the RSS.
            let mut probe_rng = RngStream::new(15, rep, "linalg").rng();
            for _ in 0..50 {
                let beta: Vec<f64> =
                    (0..p).map(|_| probe_rng.gen_range(-2.0..2.0)).collect();
                let probe_rss: f64 =
                    residuals(&x, &y, &beta).unwrap().iter().map(|v| v * v).sum();
                assert!(fit.rss <= probe_rss + 1e-9);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn fitted_rss_is_never_beaten_by_probes(
            entries in proptest::collection::vec(-5.0f64..5.0, 24),
            y in proptest::collection::vec(-5.0f64..5.0, 8),
            probe in proptest::collection::vec(-3.0f64..3.0, 3),
        ) {
            let x = Matrix::from_row_major(8, 3, entries).unwrap();
            let fit = least_squares(&x, &y).unwrap();
            let probe_rss: f64 =
                residuals(&x, &y, &probe).unwrap().iter().map(|v| v * v).sum();
            prop_assert!(fit.rss <= probe_rss + 1e-8);
        }
    }
}
