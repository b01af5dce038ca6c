//! Dense univariate polynomials over `f64` with positive-root isolation.

use crate::error::{Error, Result};

/// Coefficients in ascending degree order, trailing zeros trimmed.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    /// `Σ |c_i| |t|^i`, the natural size against which `|p(t)|` is judged.
    pub fn scale_at(&self, t: f64) -> f64 {
        let t = t.abs();
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c.abs())
    }

    pub fn derivative(&self) -> Self {
        Self::new(self.coeffs.iter().enumerate().skip(1).map(|(i, &c)| i as f64 * c).collect())
    }

    /// `q(t)` with `q(y²) = p(y)` for an even polynomial `p`.
    pub fn even_part_in_square(&self) -> Self {
        Self::new(self.coeffs.iter().step_by(2).copied().collect())
    }

    /// Cauchy bound: every root satisfies `|r| < 1 + max |c_i / c_n|`.
    pub fn cauchy_bound(&self) -> f64 {
        let Some(&lead) = self.coeffs.last() else { return 0.0 };
        1.0 + self.coeffs[..self.coeffs.len() - 1].iter().map(|c| (c / lead).abs()).fold(0.0, f64::max)
    }
}

/// Sign changes in the nonzero coefficient sequence: an upper bound on the
/// number of positive roots with the same parity.
pub fn descartes_positive_count(p: &Polynomial) -> Result<usize> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let signs: Vec<bool> = p.coeffs().iter().filter(|&&c| c != 0.0).map(|&c| c > 0.0).collect();
    Ok(signs.windows(2).filter(|w| w[0] != w[1]).count())
}

/// All positive real roots, ascending, each satisfying
/// `|p(r)| <= tol · Σ|c_i| r^i`.
///
/// Roots are isolated by recursing on the derivative: between consecutive
/// critical points `p` is monotone, so each such interval holds at most one
/// root and a sign change brackets it. A critical point where `p` is
/// negligible is reported as a (multiple) root.
pub fn positive_roots(p: &Polynomial, tol: f64) -> Result<Vec<f64>> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    // Roots at zero are not positive; divide them out.
    let lowest = p.coeffs().iter().position(|&c| c != 0.0).unwrap();
    let reduced = Polynomial::new(p.coeffs()[lowest..].to_vec());
    let hi = reduced.cauchy_bound();
    let mut roots = roots_in(&reduced, 0.0, hi, tol)?;
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1e-300));
    Ok(roots)
}

/// Roots of `p` in the open interval `(lo, hi)`, given `p(lo) != 0`.
fn roots_in(p: &Polynomial, lo: f64, hi: f64, tol: f64) -> Result<Vec<f64>> {
    match p.degree() {
        0 => return Ok(Vec::new()),
        1 => {
            let r = -p.coeffs()[0] / p.coeffs()[1];
            return Ok(if r > lo && r < hi { vec![r] } else { Vec::new() });
        }
        _ => {}
    }
    let critical = roots_in(&p.derivative(), lo, hi, tol)?;
    let mut roots = Vec::new();
    let mut points = Vec::with_capacity(critical.len() + 2);
    points.push(lo);
    points.extend(&critical);
    points.push(hi);

    for &c in &critical {
        if p.eval(c).abs() <= tol * p.scale_at(c) {
            roots.push(c);
        }
    }
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (p.eval(a), p.eval(b));
        if fa == 0.0 || fb == 0.0 || (fa > 0.0) == (fb > 0.0) {
            continue;
        }
        let r = bisect(p, a, b, fa);
        if p.eval(r).abs() > tol * p.scale_at(r) {
            return Err(Error::BracketingFailure(r));
        }
        roots.push(r);
    }
    Ok(roots)
}

/// Bisects a sign change on `[a, b]` down to adjacent floats.
fn bisect(p: &Polynomial, mut a: f64, mut b: f64, fa: f64) -> f64 {
    let neg_at_a = fa < 0.0;
    for _ in 0..2100 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = p.eval(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == neg_at_a {
            a = mid;
        } else {
            b = mid;
        }
    }
    if p.eval(a).abs() <= p.eval(b).abs() {
        a
    } else {
        b
    }
}
