//! Exact rational scaling experiments.
//!
//! A positive rational matrix stays rational under row and column
//! normalization, so the whole alternate-scaling trace can be computed
//! exactly. This lets us ask whether the iteration ever becomes exactly
//! doubly stochastic after finitely many steps, and extract rational
//! approximations of irrational limit entries.

use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::closed_forms::Label;
use crate::error::{Error, Result};
use crate::matrix::PositiveMatrix;

/// Default cap on denominator size during a trace.
pub const DEFAULT_MAX_DENOMINATOR_BITS: u64 = 1_000_000;

/// Default cap for [`cube_root_convergents`]. The `A6(2)` denominators
/// double in length every step and each step costs about four times the
/// previous one, so the general cap would take hours to reach.
pub const CONVERGENT_MAX_DENOMINATOR_BITS: u64 = 1 << 15;

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"p/q"`, an integer, or a decimal literal such as `"0.125"` or
/// `"3e-2"`, without going through floating point.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let s = text.trim();
    let bad = || Error::Parse(format!("'{text}' is not a rational number"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("'{text}' has a zero denominator")));
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(all_digits.parse::<BigInt>().map_err(|_| bad())?);
    let shift = exponent - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    let power = num_traits::pow(ten, shift.unsigned_abs() as usize);
    if shift >= 0 {
        value *= power;
    } else {
        value /= power;
    }
    Ok(if negative { -value } else { value })
}

/// Nearest `f64`, computed as `numerator / denominator` with both sides
/// shifted so neither overflows.
pub fn to_f64(r: &BigRational) -> f64 {
    if let Some(v) = r.to_f64().filter(|v| v.is_finite() && *v != 0.0) {
        return v;
    }
    if r.is_zero() {
        return 0.0;
    }
    let shift = |v: &BigInt| v.bits().saturating_sub(960);
    let (sn, sd) = (shift(r.numer()), shift(r.denom()));
    let n = (r.numer() >> sn).to_f64().unwrap_or(f64::NAN);
    let d = (r.denom() >> sd).to_f64().unwrap_or(f64::NAN);
    n / d * 2f64.powi(sn as i32 - sd as i32)
}

/// Dense matrix of positive rationals.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

impl RationalMatrix {
    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Result<Self> {
        let nrows = rows.len();
        if nrows == 0 || rows[0].is_empty() {
            return Err(Error::Empty);
        }
        let ncols = rows[0].len();
        let mut data = Vec::with_capacity(nrows * ncols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != ncols {
                return Err(Error::Ragged { row: i + 1, expected: ncols, found: row.len() });
            }
            data.extend(row);
        }
        if let Some(idx) = data.iter().position(|v| !v.is_positive()) {
            return Err(Error::NonPositiveEntry {
                row: idx / ncols + 1,
                col: idx % ncols + 1,
                value: format_rational(&data[idx]),
            });
        }
        Ok(Self { rows: nrows, cols: ncols, data })
    }

    pub fn from_integers(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&v| BigRational::from_integer(v.into())).collect()).collect())
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[BigRational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<BigRational>> {
        self.data.chunks(self.cols).map(<[BigRational]>::to_vec).collect()
    }

    pub fn row_sums(&self) -> Vec<BigRational> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<BigRational> {
        let mut sums = vec![BigRational::zero(); self.cols];
        for i in 0..self.rows {
            for (s, v) in sums.iter_mut().zip(self.row(i)) {
                *s += v;
            }
        }
        sums
    }

    /// Max `|sum − 1|` over all rows and columns.
    pub fn stochastic_deviation(&self) -> BigRational {
        let one = BigRational::one();
        self.row_sums()
            .into_iter()
            .chain(self.col_sums())
            .map(|s| (s - &one).abs())
            .max()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn is_doubly_stochastic(&self) -> bool {
        self.rows == self.cols && self.stochastic_deviation().is_zero()
    }

    /// Largest denominator in bits.
    pub fn max_denominator_bits(&self) -> u64 {
        self.data.iter().map(|v| v.denom().bits()).max().unwrap_or(0)
    }

    pub fn to_f64(&self) -> Result<PositiveMatrix> {
        PositiveMatrix::from_vec(self.rows, self.cols, self.data.iter().map(to_f64).collect())
    }

    pub fn row_normalize(&self) -> Self {
        let sums = self.row_sums();
        let data = self.data.iter().enumerate().map(|(idx, v)| v / &sums[idx / self.cols]).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn col_normalize(&self) -> Self {
        let sums = self.col_sums();
        let data = self.data.iter().enumerate().map(|(idx, v)| v / &sums[idx % self.cols]).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }
}

/// Canonical matrix with a rational parameter.
pub fn canonical_rational(label: Label, k: &BigRational) -> Result<RationalMatrix> {
    if !k.is_positive() || k.is_one() {
        return Err(Error::InvalidParameter(format!(
            "K must be positive and different from 1, got {}",
            format_rational(k)
        )));
    }
    let pat = label.pattern();
    RationalMatrix::from_rows(
        pat.iter()
            .map(|row| row.iter().map(|&is_k| if is_k { k.clone() } else { BigRational::one() }).collect())
            .collect(),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct TerminationReport {
    pub steps_run: usize,
    pub terminated: bool,
    /// First step after which the iterate is exactly doubly stochastic.
    pub terminating_step: Option<usize>,
    pub final_deviation: BigRational,
}

/// Exact alternate scaling. Step `s` is a row normalization for odd `s` and
/// a column normalization for even `s`; `iterates[s]` is the matrix after
/// step `s`, with `iterates[0]` the input.
///
/// Stops early once an iterate is exactly doubly stochastic.
pub fn exact_scaling_trace(a: &RationalMatrix, max_steps: usize) -> Result<(Vec<RationalMatrix>, TerminationReport)> {
    exact_scaling_trace_bounded(a, max_steps, DEFAULT_MAX_DENOMINATOR_BITS)
}

/// [`exact_scaling_trace`] with an explicit denominator bound; exceeding it
/// is a [`Error::ResourceLimit`].
pub fn exact_scaling_trace_bounded(
    a: &RationalMatrix,
    max_steps: usize,
    max_denominator_bits: u64,
) -> Result<(Vec<RationalMatrix>, TerminationReport)> {
    let mut iterates = Vec::new();
    let report = run_trace(a, max_steps, max_denominator_bits, |m| iterates.push(m.clone()))?;
    Ok((iterates, report))
}

fn run_trace(
    a: &RationalMatrix,
    max_steps: usize,
    max_bits: u64,
    mut visit: impl FnMut(&RationalMatrix),
) -> Result<TerminationReport> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    let mut current = a.clone();
    visit(&current);
    let mut deviation = current.stochastic_deviation();
    if deviation.is_zero() {
        return Ok(TerminationReport {
            steps_run: 0,
            terminated: true,
            terminating_step: Some(0),
            final_deviation: deviation,
        });
    }
    for step in 1..=max_steps {
        current = if step % 2 == 1 { current.row_normalize() } else { current.col_normalize() };
        let bits = current.max_denominator_bits();
        if bits > max_bits {
            return Err(Error::ResourceLimit { bits, limit: max_bits });
        }
        visit(&current);
        deviation = current.stochastic_deviation();
        if deviation.is_zero() {
            return Ok(TerminationReport {
                steps_run: step,
                terminated: true,
                terminating_step: Some(step),
                final_deviation: deviation,
            });
        }
    }
    Ok(TerminationReport {
        steps_run: max_steps,
        terminated: false,
        terminating_step: None,
        final_deviation: deviation,
    })
}

/// `r` with `K = r(r+1)/2`, i.e. `8K+1 = (2r+1)²`, if `K` is triangular.
///
/// Exactly for these integers the limit of `A2(K)` is rational.
pub fn triangular_parameter(k: u64) -> Option<u64> {
    let disc = 8 * u128::from(k) + 1;
    let root = disc.sqrt();
    (root * root == disc && root > 1).then(|| ((root - 1) / 2) as u64)
}

/// Exact limit of `A2(K)` for triangular `K = r(r+1)/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct A2RationalLimit {
    pub k: BigRational,
    pub a: BigRational,
    pub b: BigRational,
    pub c: BigRational,
    /// Squares of the symmetric scaling `diag(x, y, y)`.
    pub x_sq: BigRational,
    pub y_sq: BigRational,
}

/// `a = r/(r+2)`, `b = 1/(r+2)`, `c = (r+1)/(2(r+2))`, `x² = a/K`, `y² = c`.
pub fn a2_rational_limit(r: u64) -> Result<A2RationalLimit> {
    if r == 0 {
        return Err(Error::InvalidParameter("r must be at least 1".into()));
    }
    let r = BigInt::from(r);
    let one = BigInt::one();
    let two = BigInt::from(2);
    let k = BigRational::new(&r * (&r + &one), two.clone());
    let a = BigRational::new(r.clone(), &r + &two);
    let b = BigRational::new(one.clone(), &r + &two);
    let c = BigRational::new(&r + &one, &two * (&r + &two));
    let x_sq = &a / &k;
    let y_sq = c.clone();
    Ok(A2RationalLimit { k, a, b, c, x_sq, y_sq })
}

/// Rational approximations of `∛2 − 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Convergents {
    /// Entry `(3,1)` of each iterate after steps `1, 2, ...`.
    pub terms: Vec<BigRational>,
    /// Set when the trace stopped before the requested step count because
    /// the denominator bound was reached.
    pub stopped_at_bits: Option<u64>,
}

/// Convergents from the exact trace of `A6(2)`, whose limit has
/// `(K^{1/3}−1)/(K−1) = ∛2 − 1` in position `(3,1)`.
///
/// The denominators roughly double in length every step, so the trace ends
/// early at [`CONVERGENT_MAX_DENOMINATOR_BITS`] (after step 14); the terms
/// computed up to that point are returned.
pub fn cube_root_convergents(max_steps: usize) -> Result<Convergents> {
    cube_root_convergents_bounded(max_steps, CONVERGENT_MAX_DENOMINATOR_BITS)
}

pub fn cube_root_convergents_bounded(max_steps: usize, max_denominator_bits: u64) -> Result<Convergents> {
    if max_steps == 0 {
        return Err(Error::InvalidParameter("max_steps must be at least 1".into()));
    }
    let a6 = canonical_rational(Label::A6, &rational(2, 1))?;
    let mut terms = Vec::new();
    let mut first = true;
    match run_trace(&a6, max_steps, max_denominator_bits, |m| {
        if !std::mem::take(&mut first) {
            terms.push(m.get(2, 0).clone());
        }
    }) {
        Ok(_) => Ok(Convergents { terms, stopped_at_bits: None }),
        Err(Error::ResourceLimit { bits, .. }) => Ok(Convergents { terms, stopped_at_bits: Some(bits) }),
        Err(e) => Err(e),
    }
}

/// Exact trace of `A2(K)` for an integer `K`.
pub fn a2_trace(k: u64, max_steps: usize) -> Result<(Vec<RationalMatrix>, TerminationReport)> {
    let a2 = canonical_rational(Label::A2, &BigRational::from_integer(k.into()))?;
    exact_scaling_trace(&a2, max_steps)
}
