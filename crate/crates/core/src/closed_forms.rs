//! Closed-form Sinkhorn limits.
//!
//! Two families are covered: the two-block "MBN" matrices of any size, and
//! the canonical two-value symmetric 3×3 representatives `A1`..`A6`.
//!
//! The published formulas have removable singularities at `K = 1` (or
//! `L = 1`). Everything here is evaluated in rationalized forms that have no
//! such denominators; the published displays are kept as test oracles.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::{apply_scaling, DiagScaling, PositiveMatrix};

/// Canonical representatives of the seven classes of symmetric 3×3 matrices
/// with entries `1` and `K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    A1,
    A2,
    A3,
    A4,
    A5,
    A6,
    A7,
}

impl Label {
    pub const ALL: [Label; 7] = [Label::A1, Label::A2, Label::A3, Label::A4, Label::A5, Label::A6, Label::A7];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::A1 => "A1",
            Label::A2 => "A2",
            Label::A3 => "A3",
            Label::A4 => "A4",
            Label::A5 => "A5",
            Label::A6 => "A6",
            Label::A7 => "A7",
        }
    }

    /// Positions holding `K` in the canonical matrix; the rest hold `1`.
    pub fn pattern(self) -> [[bool; 3]; 3] {
        const T: bool = true;
        const F: bool = false;
        match self {
            Label::A1 => [[T, F, F], [F, T, F], [F, F, T]],
            Label::A2 => [[T, F, F], [F, F, F], [F, F, F]],
            Label::A3 => [[F, F, F], [F, T, T], [F, T, T]],
            Label::A4 => [[F, T, T], [T, F, F], [T, F, F]],
            Label::A5 => [[T, F, F], [F, T, F], [F, F, F]],
            Label::A6 => [[T, T, F], [T, F, F], [F, F, F]],
            Label::A7 => [[T, T, F], [T, F, F], [F, F, T]],
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Label::ALL
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown label '{s}', expected A1..A7")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MbnParams {
    pub m: f64,
    pub b: f64,
    pub n: f64,
    pub k: usize,
    pub ell: usize,
}

impl MbnParams {
    pub fn new(m: f64, b: f64, n: f64, k: usize, ell: usize) -> Result<Self> {
        for (name, v) in [("M", m), ("B", b), ("N", n)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if k == 0 || ell == 0 {
            return Err(Error::InvalidParameter(format!("block sizes must be at least 1, got k={k}, ell={ell}")));
        }
        Ok(Self { m, b, n, k, ell })
    }

    /// The invariant `L = MN/B²`.
    pub fn ratio(&self) -> f64 {
        self.m * self.n / (self.b * self.b)
    }

    pub fn size(&self) -> usize {
        self.k + self.ell
    }

    /// The full `(k+ell)×(k+ell)` block matrix.
    pub fn matrix(&self) -> PositiveMatrix {
        let size = self.size();
        let mut data = Vec::with_capacity(size * size);
        for i in 0..size {
            for j in 0..size {
                data.push(match (i < self.k, j < self.k) {
                    (true, true) => self.m,
                    (false, false) => self.n,
                    _ => self.b,
                });
            }
        }
        PositiveMatrix::from_vec(size, size, data).expect("parameters are positive")
    }
}

/// Distinct values `a`, `b`, `c` of the MBN limit and the symmetric scaling
/// `diag(x,..,x, y,..,y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MbnLimit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub x: f64,
    pub y: f64,
}

impl MbnLimit {
    /// Materializes the block limit matrix.
    pub fn expand(&self, k: usize, ell: usize) -> Result<PositiveMatrix> {
        MbnParams::new(self.a, self.b, self.c, k, ell).map(|p| p.matrix())
    }
}

/// Limit of the MBN matrix; depends on `(M, B, N)` only through `L = MN/B²`.
pub fn mbn_limit(p: &MbnParams) -> MbnLimit {
    let (k, ell) = (p.k as f64, p.ell as f64);
    let size = k + ell;
    let l = p.ratio();
    let (a, b, c) = if ((l - 1.0) / l.max(1.0)).abs() <= 1e-14 {
        (1.0 / size, 1.0 / size, 1.0 / size)
    } else {
        mbn_values(k, ell, l)
    };
    // a = M x², c = N y²
    let x = (a / p.m).sqrt();
    let y = (c / p.n).sqrt();
    debug_assert!(a > 0.0 && a <= 1.0 / k, "a = {a} outside (0, 1/k)");
    MbnLimit { a, b, c, x, y }
}

/// Minus-branch root of `k²(L−1)a² − (2k(L−1)+n)a + L = 0`, with `b` and `c`
/// from the stochasticity relations, rewritten with `s = sqrt((k−ℓ)² + 4kℓL)`:
///
/// `a = (k−ℓ+s) / (k(n+s))`, `b = 2/(n+s)`, `c = (ℓ−k+s) / (ℓ(n+s))`.
///
/// When `ℓ > k` (resp. `k > ℓ`) the numerator of `a` (resp. `c`) is replaced
/// by `4kℓL/(s ± (ℓ−k))` so that no term cancels.
fn mbn_values(k: f64, ell: f64, l: f64) -> (f64, f64, f64) {
    let size = k + ell;
    let s = ((k - ell) * (k - ell) + 4.0 * k * ell * l).sqrt();
    let small = 4.0 * k * ell * l;
    let a_num = if ell > k { small / (s + ell - k) } else { k - ell + s };
    let c_num = if k > ell { small / (s + k - ell) } else { ell - k + s };
    (a_num / (k * (size + s)), 2.0 / (size + s), c_num / (ell * (size + s)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MbnDirection {
    LToInfinity,
    LToZero,
}

/// Limiting `(a, b, c)` as `L → ∞` or `L → 0`.
pub fn mbn_asymptote(k: usize, ell: usize, direction: MbnDirection) -> Result<(f64, f64, f64)> {
    if k == 0 || ell == 0 {
        return Err(Error::InvalidParameter(format!("block sizes must be at least 1, got k={k}, ell={ell}")));
    }
    let (kf, lf) = (k as f64, ell as f64);
    Ok(match direction {
        MbnDirection::LToInfinity => (1.0 / kf, 0.0, 1.0 / lf),
        MbnDirection::LToZero if k <= ell => (0.0, 1.0 / lf, (lf - kf) / (lf * lf)),
        MbnDirection::LToZero => ((kf - lf) / (kf * kf), 1.0 / kf, 0.0),
    })
}

fn check_k(k: f64) -> Result<()> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::InvalidParameter(format!("K must be positive, got {k}")));
    }
    if k == 1.0 {
        return Err(Error::InvalidParameter("K = 1 gives the all-ones matrix, which has a single entry value".into()));
    }
    Ok(())
}

/// The canonical representative with parameter `K`.
pub fn canonical_matrix(label: Label, k: f64) -> Result<PositiveMatrix> {
    check_k(k)?;
    let pat = label.pattern();
    let data = pat.iter().flatten().map(|&is_k| if is_k { k } else { 1.0 }).collect();
    PositiveMatrix::from_vec(3, 3, data)
}

/// Closed-form `S(A_label(K)) = X A X`.
#[derive(Clone, Debug)]
pub struct CanonicalLimit {
    pub label: Label,
    pub k: f64,
    pub s: PositiveMatrix,
    pub x: DiagScaling,
}

impl CanonicalLimit {
    pub fn shape_values(&self) -> Vec<f64> {
        shape_values(self.label, &self.s)
    }
}

/// The distinct entries of a limit with the shape of class `label`:
/// `[a, b]` for A1, `[a, b, c]` for A2–A4 and A6, `[a, b, c, d]` for A5 and
/// the six upper-triangular entries for A7.
pub fn shape_values(label: Label, s: &PositiveMatrix) -> Vec<f64> {
    match label {
        Label::A1 => vec![s.get(0, 0), s.get(0, 1)],
        Label::A5 => vec![s.get(0, 0), s.get(0, 1), s.get(0, 2), s.get(2, 2)],
        Label::A7 => vec![s.get(0, 0), s.get(0, 1), s.get(0, 2), s.get(1, 1), s.get(1, 2), s.get(2, 2)],
        _ => vec![s.get(0, 0), s.get(0, 1), s.get(1, 1)],
    }
}

/// Closed-form limit for `A1`..`A6`; `A7` has no closed form (see [`crate::a7`]).
pub fn canonical_limit(label: Label, k: f64) -> Result<CanonicalLimit> {
    check_k(k)?;
    let scaling = match label {
        Label::A1 => {
            let x = (1.0 / (k + 2.0)).sqrt();
            [x, x, x]
        }
        // MBN with k = 1, ell = 2 and L = K (A2, A3) or L = 1/K² (A4)
        Label::A2 => {
            let lim = mbn_limit(&MbnParams::new(k, 1.0, 1.0, 1, 2)?);
            [lim.x, lim.y, lim.y]
        }
        Label::A3 => {
            let lim = mbn_limit(&MbnParams::new(1.0, 1.0, k, 1, 2)?);
            [lim.x, lim.y, lim.y]
        }
        Label::A4 => {
            let lim = mbn_limit(&MbnParams::new(1.0, k, 1.0, 1, 2)?);
            [lim.x, lim.y, lim.y]
        }
        Label::A5 => {
            let root = (4.0 * k + 5.0).sqrt();
            // x² = 2/(2K+1+√(4K+5)),  z² = (K+1)/(K+2+√(4K+5))
            let x = (2.0 / (2.0 * k + 1.0 + root)).sqrt();
            let z = ((k + 1.0) / (k + 2.0 + root)).sqrt();
            [x, x, z]
        }
        Label::A6 => {
            let cbrt = k.cbrt();
            let y = 1.0 / (1.0 + cbrt + cbrt * cbrt).sqrt();
            [y / cbrt, y, cbrt * y]
        }
        Label::A7 => {
            return Err(Error::InvalidParameter("A7 has no closed form; use a7::a7_limit".into()));
        }
    };
    let x = DiagScaling::new(scaling.to_vec())?;
    let a = canonical_matrix(label, k)?;
    let s = apply_scaling(&x, &a, &x)?;
    Ok(CanonicalLimit { label, k, s, x })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KDirection {
    KToInfinity,
    KToZero,
}

/// Limit of `S(A_label(K))` as `K → ∞` or `K → 0`. Entries may be zero.
///
/// For `A7` these are the limits suggested by computation, not proved ones.
pub fn canonical_asymptote(label: Label, direction: KDirection) -> [[f64; 3]; 3] {
    use KDirection::*;
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let psi = (3.0 - 5f64.sqrt()) / 2.0;
    let identity = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let split = [[1.0, 0.0, 0.0], [0.0, 0.5, 0.5], [0.0, 0.5, 0.5]];
    let cross = [[0.0, 0.5, 0.5], [0.5, 0.25, 0.25], [0.5, 0.25, 0.25]];
    let swap12 = [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
    let anti = [[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]];
    match (label, direction) {
        (Label::A1, KToInfinity) | (Label::A5, KToInfinity) => identity,
        (Label::A1, KToZero) => [[0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]],
        (Label::A2 | Label::A3, KToInfinity) | (Label::A4, KToZero) => split,
        (Label::A2 | Label::A3, KToZero) | (Label::A4, KToInfinity) => cross,
        (Label::A5, KToZero) => [[0.0, phi, psi], [phi, 0.0, psi], [psi, psi, 5f64.sqrt() - 2.0]],
        (Label::A6 | Label::A7, KToInfinity) => swap12,
        (Label::A6 | Label::A7, KToZero) => anti,
    }
}
