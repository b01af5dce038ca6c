//! Sinkhorn limit of `A7 = [[K,K,1],[K,1,1],[1,1,K]]`.
//!
//! No closed form is known. The symmetric scaling `diag(x, y, z)` solves
//!
//! ```text
//! K x² + K xy + xz = 1
//! K xy + y² + yz   = 1
//! xz + yz + K z²   = 1
//! ```
//!
//! Eliminating `x` and `z` leaves an even octic in `y`. Every root of the
//! octic extends to exactly one solution `(x, y, z)` of the polynomial system
//! via two linear back-substitution polynomials, and exactly one of those
//! solutions is positive.

use crate::closed_forms::{canonical_matrix, Label};
use crate::error::{Error, Result};
use crate::matrix::{apply_scaling, DiagScaling, PositiveMatrix};
use crate::polynomial::{descartes_positive_count, positive_roots, Polynomial};
use crate::scaling::{sinkhorn, symmetrize, Provenance, SinkhornOptions};

/// Max quadratic-system residual accepted for a root-solved triple.
pub const RESIDUAL_LIMIT: f64 = 1e-11;

/// Below this distance from `K = 1` the octic's leading coefficient `(K−1)³`
/// makes root solving unreliable and the iteration is used instead.
pub const NEAR_ONE: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct A7Solution {
    pub k: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub s: PositiveMatrix,
    /// `|q1|, |q2|, |q3|` of the quadratic system at `(x, y, z)`.
    pub residuals: [f64; 3],
    /// Descartes bound for the octic; zero when the octic was bypassed.
    pub positive_root_count: usize,
    pub provenance: Provenance,
}

fn check_k(k: f64) -> Result<()> {
    if !(k.is_finite() && k > 0.0) || k == 1.0 {
        return Err(Error::InvalidParameter(format!("K must be positive and different from 1, got {k}")));
    }
    Ok(())
}

/// `(K−1)³y⁸ + 3(K−1)²y⁶ − (K−1)(2K−3)y⁴ − (4K−1)y² + K`.
pub fn a7_octic(k: f64) -> Result<Polynomial> {
    check_k(k)?;
    let d = k - 1.0;
    Ok(Polynomial::new(vec![k, 0.0, -(4.0 * k - 1.0), 0.0, -d * (2.0 * k - 3.0), 0.0, 3.0 * d * d, 0.0, d * d * d]))
}

/// Solves the two linear back-substitution relations for `x` and `z`:
///
/// ```text
/// K(K+1)x = 2Ky + (K−1)(2K−1)y³ − 2(K−1)²y⁵ − (K−1)³y⁷
/// K(K+1)z = (K²+2K−1)y − 3(K−1)y³ − (K−1)²(K+3)y⁵ − (K−1)³y⁷
/// ```
pub fn a7_back_substitute(k: f64, y: f64) -> Result<(f64, f64)> {
    check_k(k)?;
    if y.is_nan() || y <= 0.0 {
        return Err(Error::InvalidParameter(format!("y must be positive, got {y}")));
    }
    let d = k - 1.0;
    let denom = k * (k + 1.0);
    let x = Polynomial::new(vec![0.0, 2.0 * k, 0.0, d * (2.0 * k - 1.0), 0.0, -2.0 * d * d, 0.0, -d * d * d]).eval(y);
    let z = Polynomial::new(vec![0.0, k * k + 2.0 * k - 1.0, 0.0, -3.0 * d, 0.0, -d * d * (k + 3.0), 0.0, -d * d * d])
        .eval(y);
    Ok((x / denom, z / denom))
}

/// Signed values of the three quadratics at `(x, y, z)`.
pub fn quadratic_system(k: f64, x: f64, y: f64, z: f64) -> [f64; 3] {
    [k * x * x + k * x * y + x * z - 1.0, k * x * y + y * y + y * z - 1.0, x * z + y * z + k * z * z - 1.0]
}

/// Newton steps on the quadratic system, kept only while they reduce the residual.
fn polish(k: f64, mut v: [f64; 3]) -> [f64; 3] {
    let norm = |q: [f64; 3]| q.iter().map(|e| e.abs()).fold(0.0, f64::max);
    let mut best = norm(quadratic_system(k, v[0], v[1], v[2]));
    for _ in 0..8 {
        let [x, y, z] = v;
        let q = quadratic_system(k, x, y, z);
        let jac = [[2.0 * k * x + k * y + z, k * x, x], [k * y, k * x + 2.0 * y + z, y], [z, z, x + y + 2.0 * k * z]];
        let Some(step) = solve3(jac, [-q[0], -q[1], -q[2]]) else { break };
        let next = [x + step[0], y + step[1], z + step[2]];
        let r = norm(quadratic_system(k, next[0], next[1], next[2]));
        if r.is_nan() || r >= best {
            break;
        }
        best = r;
        v = next;
    }
    v
}

/// Cramer's rule; `None` for a (numerically) singular system.
fn solve3(m: [[f64; 3]; 3], rhs: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(m);
    if !d.is_finite() || d == 0.0 {
        return None;
    }
    let mut out = [0.0; 3];
    for (col, o) in out.iter_mut().enumerate() {
        let mut mc = m;
        for row in 0..3 {
            mc[row][col] = rhs[row];
        }
        *o = det(mc) / d;
    }
    Some(out)
}

/// The Sinkhorn limit of `A7(K)`.
///
/// Positive roots `y` of the octic (found as roots `t = y²` of the induced
/// quartic) are back-substituted, and the unique triple with `x, y, z > 0`
/// and quadratic residuals within [`RESIDUAL_LIMIT`] is kept. If none
/// qualifies, or `K` is within [`NEAR_ONE`] of 1, the limit is iterated.
pub fn a7_limit(k: f64, tol: f64) -> Result<A7Solution> {
    check_k(k)?;
    if (k - 1.0).abs() < NEAR_ONE {
        return iterate(k, tol, 0);
    }
    let octic = a7_octic(k)?;
    let positive_root_count = descartes_positive_count(&octic)?;
    let quartic = octic.even_part_in_square();

    let mut valid = Vec::new();
    for t in positive_roots(&quartic, tol)? {
        let y = t.sqrt();
        let (x, z) = a7_back_substitute(k, y)?;
        if !(x > 0.0 && z > 0.0) {
            continue;
        }
        let [x, y, z] = polish(k, [x, y, z]);
        let q = quadratic_system(k, x, y, z);
        let residuals = q.map(f64::abs);
        if x > 0.0 && y > 0.0 && z > 0.0 && residuals.iter().all(|&r| r <= RESIDUAL_LIMIT) {
            valid.push((x, y, z, residuals));
        }
    }
    match valid.len() {
        0 => iterate(k, tol, positive_root_count),
        1 => {
            let (x, y, z, residuals) = valid[0];
            let scaling = DiagScaling::new(vec![x, y, z])?;
            let s = apply_scaling(&scaling, &canonical_matrix(Label::A7, k)?, &scaling)?;
            Ok(A7Solution { k, x, y, z, s, residuals, positive_root_count, provenance: Provenance::RootSolved })
        }
        n => Err(Error::MultipleValidTriples(n)),
    }
}

fn iterate(k: f64, tol: f64, positive_root_count: usize) -> Result<A7Solution> {
    let a = canonical_matrix(Label::A7, k)?;
    let res = sinkhorn(&a, &SinkhornOptions::with_tol(tol))?;
    if !res.converged {
        return Err(Error::NotConverged { partial: Box::new(res) });
    }
    let scaling = symmetrize(&res)?;
    let [x, y, z] = [scaling.values()[0], scaling.values()[1], scaling.values()[2]];
    let s = apply_scaling(&scaling, &a, &scaling)?;
    let residuals = quadratic_system(k, x, y, z).map(f64::abs);
    Ok(A7Solution { k, x, y, z, s, residuals, positive_root_count, provenance: Provenance::Iterated })
}

/// `|f1|, |f2|, |f3|, |g1|, |g2|, |g3|, |h1|, |h2|, |h3|` for the three
/// lexicographic Gröbner bases of the `K = 2` system.
pub fn groebner_residuals_k2(x: f64, y: f64, z: f64) -> [f64; 9] {
    let p = |c: &[f64], t: f64| Polynomial::new(c.to_vec()).eval(t);
    [
        p(&[4.0, 0.0, -28.0, 0.0, 62.0, 0.0, -57.0, 0.0, 18.0], z),
        p(&[0.0, 0.0, 0.0, -17.0, 0.0, 39.0, 0.0, -18.0], z) + 2.0 * y,
        p(&[0.0, -20.0, 0.0, 96.0, 0.0, -135.0, 0.0, 54.0], z) + 4.0 * x,
        p(&[2.0, 0.0, -17.0, 0.0, 22.0, 0.0, 48.0, 0.0, 36.0], x),
        p(&[0.0, -103.0, 0.0, 378.0, 0.0, 624.0, 0.0, 396.0], x) + 14.0 * z,
        p(&[0.0, 3.0, 0.0, -56.0, 0.0, -72.0, 0.0, -36.0], x) + 7.0 * y,
        p(&[2.0, 0.0, -7.0, 0.0, -1.0, 0.0, 3.0, 0.0, 1.0], y),
        p(&[0.0, -4.0, 0.0, -3.0, 0.0, 2.0, 0.0, 1.0], y) + 6.0 * x,
        p(&[0.0, -7.0, 0.0, 3.0, 0.0, 5.0, 0.0, 1.0], y) + 6.0 * z,
    ]
    .map(f64::abs)
}

/// `|h1(y)|, |h2(x, y)|, |h3(y, z)|` for the general-`K` basis.
pub fn groebner_residuals(k: f64, x: f64, y: f64, z: f64) -> Result<[f64; 3]> {
    let h1 = a7_octic(k)?.eval(y);
    let (bx, bz) = a7_back_substitute(k, y)?;
    let scale = k * (k + 1.0);
    Ok([h1.abs(), (scale * (x - bx)).abs(), (scale * (z - bz)).abs()])
}
