//! Alternate row/column scaling.
//!
//! The iteration is carried out on the accumulated scaling vectors rather than
//! on the matrix itself: after `k` passes the current iterate is
//! `diag(x) · A · diag(y)`, so the reported limit and the reported scalings
//! agree by construction.

use crate::error::{Error, Result};
use crate::matrix::{apply_scaling, col_sums, row_sums, DiagScaling, PositiveMatrix};

/// Which one-sided normalization each pass starts with.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ScalingOrder {
    #[default]
    RowFirst,
    ColFirst,
}

/// How a limit was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Iterated,
    ClosedForm,
    RootSolved,
    Exact,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Iterated => "iterated",
            Provenance::ClosedForm => "closed_form",
            Provenance::RootSolved => "root_solved",
            Provenance::Exact => "exact",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SinkhornOptions {
    /// Stop once every row and column sum is within `tol` of its target.
    pub tol: f64,
    pub max_iters: usize,
    pub record_trace: bool,
    pub order: ScalingOrder,
}

impl Default for SinkhornOptions {
    fn default() -> Self {
        Self { tol: 1e-13, max_iters: 100_000, record_trace: false, order: ScalingOrder::RowFirst }
    }
}

impl SinkhornOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SinkhornResult {
    pub limit: PositiveMatrix,
    /// Accumulated row-side scaling.
    pub x: DiagScaling,
    /// Accumulated column-side scaling.
    pub y: DiagScaling,
    /// Full passes performed (a pass is one row and one column normalization).
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    /// `(pass, residual)` pairs, pass 0 being the input.
    pub trace: Option<Vec<(usize, f64)>>,
    pub provenance: Provenance,
    /// Number of times `x` and `y` were rebalanced by a common factor to stay in range.
    pub gauge_renormalizations: usize,
}

/// `R(A)`: divides each row by its sum. Returns the scaled matrix and the
/// row-scaling vector `1/rowsum`.
pub fn row_normalize(a: &PositiveMatrix) -> Result<(PositiveMatrix, DiagScaling)> {
    let sums = row_sums(a);
    let x = DiagScaling::new(sums.iter().map(|s| 1.0 / s).collect())?;
    let data = a.as_slice().iter().enumerate().map(|(idx, v)| v / sums[idx / a.ncols()]).collect();
    Ok((PositiveMatrix::from_vec(a.nrows(), a.ncols(), data)?, x))
}

/// `C(A)`: divides each column by its sum.
pub fn col_normalize(a: &PositiveMatrix) -> Result<(PositiveMatrix, DiagScaling)> {
    let sums = col_sums(a);
    let y = DiagScaling::new(sums.iter().map(|s| 1.0 / s).collect())?;
    let data = a.as_slice().iter().enumerate().map(|(idx, v)| v / sums[idx % a.ncols()]).collect();
    Ok((PositiveMatrix::from_vec(a.nrows(), a.ncols(), data)?, y))
}

/// Sinkhorn–Knopp iteration towards the doubly stochastic limit `S(A)`.
///
/// Running out of passes is not an error: the result comes back with
/// `converged == false`.
pub fn sinkhorn(a: &PositiveMatrix, opts: &SinkhornOptions) -> Result<SinkhornResult> {
    let n = a.dim()?;
    let ones = vec![1.0; n];
    alternate_scale(a, &ones, &ones, opts)
}

/// Scaling towards prescribed row sums `r` and column sums `c`.
///
/// Accepts rectangular matrices. The targets must be positive and have equal
/// totals (relative tolerance `1e-12`).
pub fn target_sinkhorn(a: &PositiveMatrix, r: &[f64], c: &[f64], opts: &SinkhornOptions) -> Result<SinkhornResult> {
    if r.len() != a.nrows() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: r.len() });
    }
    if c.len() != a.ncols() {
        return Err(Error::DimensionMismatch { expected: a.ncols(), found: c.len() });
    }
    if let Some(t) = r.iter().chain(c).find(|&&t| !(t.is_finite() && t > 0.0)) {
        return Err(Error::InvalidParameter(format!("targets must be positive, got {t}")));
    }
    let row_total: f64 = r.iter().sum();
    let col_total: f64 = c.iter().sum();
    if (row_total - col_total).abs() > 1e-12 * row_total.max(col_total) {
        return Err(Error::TargetSumMismatch { row_total, col_total });
    }
    alternate_scale(a, r, c, opts)
}

/// The unique positive `X` with `X A X` doubly stochastic, for symmetric `A`.
///
/// Derived from a converged asymmetric run via `x_i = sqrt(x_i · y_i)`, which
/// removes the `(λ, 1/λ)` gauge freedom between the two sides.
pub fn symmetric_scaling(a: &PositiveMatrix, opts: &SinkhornOptions) -> Result<DiagScaling> {
    a.check_symmetric(1e-13)?;
    let result = sinkhorn(a, opts)?;
    if !result.converged {
        return Err(Error::NotConverged { partial: Box::new(result) });
    }
    symmetrize(&result)
}

pub(crate) fn symmetrize(result: &SinkhornResult) -> Result<DiagScaling> {
    DiagScaling::new(result.x.values().iter().zip(result.y.values()).map(|(x, y)| (x * y).sqrt()).collect())
}

const GAUGE_LOW: f64 = 1e-150;
const GAUGE_HIGH: f64 = 1e150;

fn alternate_scale(a: &PositiveMatrix, r: &[f64], c: &[f64], opts: &SinkhornOptions) -> Result<SinkhornResult> {
    opts.validate()?;
    let (m, n) = (a.nrows(), a.ncols());
    let mut x = vec![1.0; m];
    let mut y = vec![1.0; n];
    let mut trace = opts.record_trace.then(Vec::new);
    let mut gauge_renormalizations = 0;

    let mut residual = deviation(a, &x, &y, r, c);
    if let Some(t) = trace.as_mut() {
        t.push((0, residual));
    }
    let mut iterations = 0;
    while residual > opts.tol && iterations < opts.max_iters {
        match opts.order {
            ScalingOrder::RowFirst => {
                normalize_rows(a, &mut x, &y, r);
                normalize_cols(a, &x, &mut y, c);
            }
            ScalingOrder::ColFirst => {
                normalize_cols(a, &x, &mut y, c);
                normalize_rows(a, &mut x, &y, r);
            }
        }
        iterations += 1;

        if x.iter().chain(&y).any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::NumericFailure(format!("scaling vector left the positive reals at pass {iterations}")));
        }
        if x.iter().chain(&y).any(|&v| !(GAUGE_LOW..=GAUGE_HIGH).contains(&v)) {
            rebalance(&mut x, &mut y);
            gauge_renormalizations += 1;
        }

        residual = deviation(a, &x, &y, r, c);
        if !residual.is_finite() {
            return Err(Error::NumericFailure(format!("residual is {residual} at pass {iterations}")));
        }
        if let Some(t) = trace.as_mut() {
            t.push((iterations, residual));
        }
    }

    let x = DiagScaling::new(x)?;
    let y = DiagScaling::new(y)?;
    let limit = apply_scaling(&x, a, &y)?;
    Ok(SinkhornResult {
        limit,
        x,
        y,
        iterations,
        residual,
        converged: residual <= opts.tol,
        trace,
        provenance: Provenance::Iterated,
        gauge_renormalizations,
    })
}

fn normalize_rows(a: &PositiveMatrix, x: &mut [f64], y: &[f64], r: &[f64]) {
    for (i, xi) in x.iter_mut().enumerate() {
        let s: f64 = a.row(i).iter().zip(y).map(|(v, yj)| v * yj).sum();
        *xi = r[i] / s;
    }
}

fn normalize_cols(a: &PositiveMatrix, x: &[f64], y: &mut [f64], c: &[f64]) {
    let mut s = vec![0.0; y.len()];
    for (i, xi) in x.iter().enumerate() {
        for (sj, v) in s.iter_mut().zip(a.row(i)) {
            *sj += xi * v;
        }
    }
    for ((yj, sj), cj) in y.iter_mut().zip(s).zip(c) {
        *yj = cj / sj;
    }
}

/// Max deviation of the sums of `diag(x) A diag(y)` from the targets.
fn deviation(a: &PositiveMatrix, x: &[f64], y: &[f64], r: &[f64], c: &[f64]) -> f64 {
    let mut cols = vec![0.0; y.len()];
    let mut worst: f64 = 0.0;
    for (i, xi) in x.iter().enumerate() {
        let mut rs = 0.0;
        for ((cj, v), yj) in cols.iter_mut().zip(a.row(i)).zip(y) {
            let e = xi * v * yj;
            rs += e;
            *cj += e;
        }
        worst = worst.max((rs - r[i]).abs());
    }
    cols.iter().zip(c).map(|(s, t)| (s - t).abs()).fold(worst, f64::max)
}

/// Multiplies `x` by `g` and `y` by `1/g` so both have the same geometric mean.
fn rebalance(x: &mut [f64], y: &mut [f64]) {
    let log_mean = |v: &[f64]| v.iter().map(|t| t.ln()).sum::<f64>() / v.len() as f64;
    let g = (0.5 * (log_mean(y) - log_mean(x))).exp();
    x.iter_mut().for_each(|v| *v *= g);
    y.iter_mut().for_each(|v| *v /= g);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{is_doubly_stochastic, stochastic_deviation};

    fn m(rows: &[&[f64]]) -> PositiveMatrix {
        PositiveMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn a2_k3() -> PositiveMatrix {
        m(&[&[3.0, 1.0, 1.0], &[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0]])
    }

    fn limit_k3() -> PositiveMatrix {
        m(&[&[0.5, 0.25, 0.25], &[0.25, 0.375, 0.375], &[0.25, 0.375, 0.375]])
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (u, v) in a.iter().zip(b) {
            assert!((u - v).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn row_normalize_a2() {
        let (r, x) = row_normalize(&a2_k3()).unwrap();
        assert_close(r.row(0), &[0.6, 0.2, 0.2], 1e-16);
        assert_close(r.row(1), &[1.0 / 3.0; 3], 1e-16);
        assert_close(x.values(), &[0.2, 1.0 / 3.0, 1.0 / 3.0], 1e-16);
        for s in row_sums(&r) {
            assert!((s - 1.0).abs() <= 3.0 * f64::EPSILON);
        }
    }

    #[test]
    fn normalizing_a_stochastic_matrix_is_identity() {
        let s = limit_k3();
        let (r, x) = row_normalize(&s).unwrap();
        assert_eq!(r, s);
        assert_eq!(x.values(), &[1.0; 3]);
        let (c, y) = col_normalize(&s).unwrap();
        assert_eq!(c, s);
        assert_eq!(y.values(), &[1.0; 3]);
    }

    #[test]
    fn one_sided_normalization_of_a1() {
        let a1 = m(&[&[2.0, 1.0, 1.0], &[1.0, 2.0, 1.0], &[1.0, 1.0, 2.0]]);
        let (r, _) = row_normalize(&a1).unwrap();
        assert!(is_doubly_stochastic(&r, 1e-15));
        let a1k5 = m(&[&[5.0, 1.0, 1.0], &[1.0, 5.0, 1.0], &[1.0, 1.0, 5.0]]);
        let (c, _) = col_normalize(&a1k5).unwrap();
        assert!(is_doubly_stochastic(&c, 1e-15));
        assert!((c.get(1, 1) - 5.0 / 7.0).abs() < 1e-16);
        let (c2, y) = col_normalize(&a2_k3()).unwrap();
        assert_close(y.values(), &[0.2, 1.0 / 3.0, 1.0 / 3.0], 1e-16);
        assert!((c2.get(0, 0) - 0.6).abs() < 1e-16);
    }

    #[test]
    fn a1_converges_after_one_pass() {
        let a1 = m(&[&[2.0, 1.0, 1.0], &[1.0, 2.0, 1.0], &[1.0, 1.0, 2.0]]);
        let res = sinkhorn(&a1, &SinkhornOptions::with_tol(1e-12)).unwrap();
        assert!(res.converged);
        assert_eq!(res.iterations, 1);
        let expected = m(&[&[0.5, 0.25, 0.25], &[0.25, 0.5, 0.25], &[0.25, 0.25, 0.5]]);
        assert!(res.limit.max_abs_diff(&expected) <= 1e-15);
    }

    #[test]
    fn a2_reaches_rational_limit() {
        let res = sinkhorn(&a2_k3(), &SinkhornOptions::with_tol(1e-12)).unwrap();
        assert!(res.converged);
        assert!(res.limit.max_abs_diff(&limit_k3()) <= 1e-12);
        let again = apply_scaling(&res.x, &a2_k3(), &res.y).unwrap();
        assert!(again.max_abs_diff(&res.limit) <= 1e-11);
    }

    #[test]
    fn mbn_example_limit() {
        let a = m(&[&[2.0, 5.0, 5.0], &[5.0, 3.0, 3.0], &[5.0, 3.0, 3.0]]);
        let res = sinkhorn(&a, &SinkhornOptions::with_tol(1e-12)).unwrap();
        let s = &res.limit;
        assert!((s.get(0, 0) - 0.1505).abs() < 1e-4);
        assert!((s.get(0, 1) - 0.4247).abs() < 1e-4);
        assert!((s.get(1, 1) - 0.2876).abs() < 1e-4);
        assert!((s.get(1, 2) - s.get(2, 1)).abs() < 1e-13);
    }

    #[test]
    fn non_convergence_is_reported_not_raised() {
        let a = m(&[&[1.0, 100.0], &[1.0, 1.0]]);
        let opts = SinkhornOptions { max_iters: 2, ..SinkhornOptions::default() };
        let res = sinkhorn(&a, &opts).unwrap();
        assert!(!res.converged);
        assert_eq!(res.iterations, 2);
        assert!(res.residual > opts.tol);
    }

    #[test]
    fn trace_records_each_pass() {
        let opts = SinkhornOptions { record_trace: true, tol: 1e-10, ..SinkhornOptions::default() };
        let res = sinkhorn(&a2_k3(), &opts).unwrap();
        let trace = res.trace.unwrap();
        assert_eq!(trace.len(), res.iterations + 1);
        assert_eq!(trace[0].0, 0);
        assert!(trace.last().unwrap().1 <= 1e-10);
    }

    #[test]
    fn rejects_bad_options_and_shapes() {
        let a = a2_k3();
        assert!(sinkhorn(&a, &SinkhornOptions::with_tol(0.0)).is_err());
        let opts = SinkhornOptions { max_iters: 0, ..SinkhornOptions::default() };
        assert!(sinkhorn(&a, &opts).is_err());
        let rect = PositiveMatrix::filled(2, 3, 1.0).unwrap();
        assert!(matches!(sinkhorn(&rect, &SinkhornOptions::default()), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn symmetric_scaling_examples() {
        let x = symmetric_scaling(&a2_k3(), &SinkhornOptions::default()).unwrap();
        let s6 = 6f64.sqrt();
        assert_close(x.values(), &[s6 / 6.0, s6 / 4.0, s6 / 4.0], 1e-10);

        let ones = PositiveMatrix::filled(3, 3, 1.0).unwrap();
        let x = symmetric_scaling(&ones, &SinkhornOptions::default()).unwrap();
        assert_close(x.values(), &[1.0 / 3f64.sqrt(); 3], 1e-15);

        // A6 with K = 8: x = y/2, z = 2y, y = 1/sqrt(7)
        let a6 = m(&[&[8.0, 8.0, 1.0], &[8.0, 1.0, 1.0], &[1.0, 1.0, 1.0]]);
        let x = symmetric_scaling(&a6, &SinkhornOptions::default()).unwrap();
        let y = 1.0 / 7f64.sqrt();
        assert_close(x.values(), &[y / 2.0, y, 2.0 * y], 1e-10);
    }

    #[test]
    fn symmetric_scaling_errors() {
        let a = m(&[&[1.0, 2.0], &[3.0, 1.0]]);
        assert!(matches!(symmetric_scaling(&a, &SinkhornOptions::default()), Err(Error::NotSymmetric { .. })));
        let b = m(&[&[1.0, 50.0], &[50.0, 1.0]]);
        let opts = SinkhornOptions { max_iters: 1, tol: 1e-300, ..SinkhornOptions::default() };
        match symmetric_scaling(&m(&[&[1.0, 2.0], &[2.0, 9.0]]), &opts) {
            Err(Error::NotConverged { partial }) => assert_eq!(partial.iterations, 1),
            other => panic!("expected NotConverged, got {other:?}"),
        }
        assert!(symmetric_scaling(&b, &SinkhornOptions::default()).is_ok());
    }

    #[test]
    fn target_reduces_to_plain_scaling() {
        let a = m(&[&[2.0, 5.0, 5.0], &[5.0, 3.0, 3.0], &[5.0, 1.0, 3.0]]);
        let opts = SinkhornOptions::default();
        let plain = sinkhorn(&a, &opts).unwrap();
        let targeted = target_sinkhorn(&a, &[1.0; 3], &[1.0; 3], &opts).unwrap();
        assert_eq!(plain.limit, targeted.limit);
        assert_eq!(plain.iterations, targeted.iterations);
    }

    #[test]
    fn target_on_all_ones_is_rank_one() {
        let ones = PositiveMatrix::filled(3, 3, 1.0).unwrap();
        let res = target_sinkhorn(&ones, &[1.0; 3], &[1.0; 3], &SinkhornOptions::default()).unwrap();
        assert!(res.limit.max_abs_diff(&PositiveMatrix::filled(3, 3, 1.0 / 3.0).unwrap()) < 1e-15);

        let r = [2.0, 1.0, 1.0];
        let res = target_sinkhorn(&ones, &r, &r, &SinkhornOptions::default()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((res.limit.get(i, j) - r[i] * r[j] / 4.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn target_rectangular() {
        let a = m(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]);
        let r = [3.0, 1.0];
        let c = [1.0, 1.0, 2.0];
        let res = target_sinkhorn(&a, &r, &c, &SinkhornOptions::default()).unwrap();
        assert!(res.converged);
        assert_close(&row_sums(&res.limit), &r, 1e-12);
        assert_close(&col_sums(&res.limit), &c, 1e-12);
    }

    #[test]
    fn target_errors() {
        let a = PositiveMatrix::filled(3, 3, 1.0).unwrap();
        let opts = SinkhornOptions::default();
        assert!(matches!(
            target_sinkhorn(&a, &[1.0, 1.0, 1.0], &[1.0, 1.0, 2.0], &opts),
            Err(Error::TargetSumMismatch { .. })
        ));
        assert!(target_sinkhorn(&a, &[1.0, 1.0], &[1.0, 1.0], &opts).is_err());
        assert!(target_sinkhorn(&a, &[2.0, -1.0, 2.0], &[1.0, 1.0, 1.0], &opts).is_err());
    }

    #[test]
    fn gauge_guard_keeps_vectors_in_range() {
        let a = m(&[&[1e-200, 1e-200], &[1e-200, 2e-200]]);
        let res = sinkhorn(&a, &SinkhornOptions::default()).unwrap();
        assert!(res.converged);
        assert!(stochastic_deviation(&res.limit) < 1e-12);
        assert!(res.gauge_renormalizations > 0);
        assert!(res.x.values().iter().chain(res.y.values()).all(|v| (1e-150..=1e150).contains(v)));
    }
}
