//! Recognition of two-value symmetric 3×3 matrices.
//!
//! Such a matrix has a majority value `M` (at least five entries) and a
//! minority value `N`. Dividing by `M` and conjugating by a permutation
//! turns it into exactly one canonical representative `A1(K)`..`A7(K)`
//! with `K = N/M`, and the Sinkhorn limit follows from the canonical one.

use num_rational::BigRational;

use crate::a7::{a7_limit, A7Solution};
use crate::closed_forms::{canonical_limit, canonical_matrix, Label};
use crate::error::{Error, Result};
use crate::exact::{canonical_rational, RationalMatrix};
use crate::matrix::{permute_dilate, stochastic_deviation, DiagScaling, Permutation, PositiveMatrix};
use crate::scaling::{sinkhorn, Provenance, SinkhornOptions, SinkhornResult};

/// Relative tolerance under which two floats count as the same entry value.
pub const FLOAT_EQ_TOL: f64 = 1e-12;

/// `input = lambda · P · canonical_matrix(label, k) · Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassLabel<T> {
    pub label: Label,
    pub k: T,
    pub p: Permutation,
    pub q: Permutation,
    /// The majority entry value.
    pub lambda: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwoValueProfile<T> {
    pub majority: T,
    pub minority: T,
    pub majority_count: usize,
    /// `true` where the minority value sits.
    pub minority_mask: [[bool; 3]; 3],
}

fn float_eq(a: &f64, b: &f64) -> bool {
    (a - b).abs() <= FLOAT_EQ_TOL * a.abs().max(b.abs())
}

fn profile<T: Clone>(entries: &[T], eq: impl Fn(&T, &T) -> bool) -> Option<TwoValueProfile<T>> {
    if entries.len() != 9 {
        return None;
    }
    let at = |i: usize, j: usize| &entries[3 * i + j];
    for i in 0..3 {
        for j in i + 1..3 {
            if !eq(at(i, j), at(j, i)) {
                return None;
            }
        }
    }
    let first = &entries[0];
    let other = entries.iter().find(|v| !eq(v, first))?;
    if entries.iter().any(|v| !eq(v, first) && !eq(v, other)) {
        return None;
    }
    let first_count = entries.iter().filter(|v| eq(v, first)).count();
    let (majority, minority, majority_count) =
        if first_count >= 5 { (first, other, first_count) } else { (other, first, 9 - first_count) };
    let mut minority_mask = [[false; 3]; 3];
    for (idx, v) in entries.iter().enumerate() {
        minority_mask[idx / 3][idx % 3] = !eq(v, majority);
    }
    Some(TwoValueProfile { majority: majority.clone(), minority: minority.clone(), majority_count, minority_mask })
}

/// The two entry values of a symmetric 3×3 matrix, or `None` if it is not
/// symmetric or does not have exactly two values.
pub fn two_value_profile(a: &PositiveMatrix) -> Option<TwoValueProfile<f64>> {
    if a.nrows() != 3 || a.ncols() != 3 {
        return None;
    }
    profile(a.as_slice(), float_eq)
}

/// [`two_value_profile`] with exact equality.
pub fn two_value_profile_exact(a: &RationalMatrix) -> Option<TwoValueProfile<BigRational>> {
    if a.nrows() != 3 || a.ncols() != 3 {
        return None;
    }
    let entries: Vec<BigRational> = a.to_rows().into_iter().flatten().collect();
    profile(&entries, |x, y| x == y)
}

/// First `(label, P, Q)` with `pattern[p(i)][qᵀ(j)] == mask[i][j]`.
///
/// Labels are tried in order. Within a label, conjugations `Q = Pᵀ` come
/// first in lexicographic order of `P`, then general pairs in lexicographic
/// order of `(P, Q)`. Conjugation alone does not reach every symmetric
/// matrix: `[[1,1,K],[1,1,1],[K,1,1]]` needs a column swap to become `A5`.
fn match_pattern(mask: &[[bool; 3]; 3]) -> Result<(Label, Permutation, Permutation)> {
    let perms = Permutation::all(3);
    let conjugations = perms.iter().map(|p| (p.clone(), p.transpose()));
    let pairs = perms.iter().flat_map(|p| perms.iter().map(move |q| (p.clone(), q.clone())));
    let candidates: Vec<_> = conjugations.chain(pairs).collect();
    for label in Label::ALL {
        let pat = label.pattern();
        for (p, q) in &candidates {
            let qt = q.transpose();
            if (0..3).all(|i| (0..3).all(|j| pat[p.apply(i)][qt.apply(j)] == mask[i][j])) {
                return Ok((label, p.clone(), q.clone()));
            }
        }
    }
    Err(Error::ClassificationFailed)
}

fn check_3x3(rows: usize, cols: usize) -> Result<()> {
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if rows != 3 {
        return Err(Error::DimensionMismatch { expected: 3, found: rows });
    }
    Ok(())
}

pub fn classify(a: &PositiveMatrix) -> Result<ClassLabel<f64>> {
    check_3x3(a.nrows(), a.ncols())?;
    let prof = two_value_profile(a).ok_or(Error::NotTwoValue)?;
    let (label, p, q) = match_pattern(&prof.minority_mask)?;
    Ok(ClassLabel { label, k: prof.minority / prof.majority, p, q, lambda: prof.majority })
}

pub fn classify_exact(a: &RationalMatrix) -> Result<ClassLabel<BigRational>> {
    check_3x3(a.nrows(), a.ncols())?;
    let prof = two_value_profile_exact(a).ok_or(Error::NotTwoValue)?;
    let (label, p, q) = match_pattern(&prof.minority_mask)?;
    Ok(ClassLabel { label, k: &prof.minority / &prof.majority, p, q, lambda: prof.majority })
}

pub fn reconstruct(c: &ClassLabel<f64>) -> Result<PositiveMatrix> {
    permute_dilate(&canonical_matrix(c.label, c.k)?, &c.p, &c.q, c.lambda)
}

pub fn reconstruct_exact(c: &ClassLabel<BigRational>) -> Result<RationalMatrix> {
    let canon = canonical_rational(c.label, &c.k)?;
    let qt = c.q.transpose();
    RationalMatrix::from_rows(
        (0..3).map(|i| (0..3).map(|j| &c.lambda * canon.get(c.p.apply(i), qt.apply(j))).collect()).collect(),
    )
}

/// A limit together with whatever was learned about the input's class.
#[derive(Clone, Debug)]
pub struct ClassifiedLimit {
    pub result: SinkhornResult,
    pub class: Option<ClassLabel<f64>>,
    /// The canonical solve, when the input is in class A7.
    pub a7: Option<A7Solution>,
}

/// Sinkhorn limit of a positive square matrix, from the canonical closed
/// form or root solve when the matrix is two-value symmetric 3×3 and by
/// iteration otherwise.
pub fn limit_of(a: &PositiveMatrix, tol: f64) -> Result<SinkhornResult> {
    classified_limit(a, tol).map(|c| c.result)
}

pub fn classified_limit(a: &PositiveMatrix, tol: f64) -> Result<ClassifiedLimit> {
    let opts = SinkhornOptions::with_tol(tol);
    opts.validate()?;
    let class = match classify(a) {
        Ok(c) => c,
        Err(Error::NotTwoValue | Error::DimensionMismatch { .. }) => {
            return Ok(ClassifiedLimit { result: sinkhorn(a, &opts)?, class: None, a7: None });
        }
        Err(e) => return Err(e),
    };
    let (canon_s, canon_x, provenance, iterations, a7) = if class.label == Label::A7 {
        let sol = a7_limit(class.k, tol)?;
        let x = DiagScaling::new(vec![sol.x, sol.y, sol.z])?;
        (sol.s.clone(), x, sol.provenance, 0, Some(sol))
    } else {
        let lim = canonical_limit(class.label, class.k)?;
        (lim.s, lim.x, Provenance::ClosedForm, 0, None)
    };
    // input[i][j] = λ C[p(i)][qᵀ(j)], so S_in = P S_C Q,
    // x_in[i] = x_C[p(i)] / √λ and y_in[j] = x_C[qᵀ(j)] / √λ.
    let limit = permute_dilate(&canon_s, &class.p, &class.q, 1.0)?;
    let root = class.lambda.sqrt();
    let qt = class.q.transpose();
    let x = DiagScaling::new((0..3).map(|i| canon_x.values()[class.p.apply(i)] / root).collect())?;
    let y = DiagScaling::new((0..3).map(|j| canon_x.values()[qt.apply(j)] / root).collect())?;
    let residual = stochastic_deviation(&limit);
    let result = SinkhornResult {
        limit,
        x,
        y,
        iterations,
        residual,
        converged: residual <= tol,
        trace: None,
        provenance,
        gauge_renormalizations: 0,
    };
    Ok(ClassifiedLimit { result, class: Some(class), a7 })
}
