//! Filter banks, polyphase matrices and their unitarity and low-pass certificates.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vectors::LaurentPoly;

/// Default tolerance for floating-point identities.
pub const DEFAULT_TOL: f64 = 1e-10;

/// The subband filters `m_0, …, m_{N-1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BankRepr", into = "BankRepr")]
pub struct FilterBank {
    n: usize,
    filters: Vec<LaurentPoly>,
}

#[derive(Serialize, Deserialize)]
struct BankRepr {
    #[serde(rename = "N")]
    n: usize,
    filters: Vec<LaurentPoly>,
}

impl TryFrom<BankRepr> for FilterBank {
    type Error = Error;
    fn try_from(r: BankRepr) -> Result<Self> {
        FilterBank::new(r.n, r.filters)
    }
}

impl From<FilterBank> for BankRepr {
    fn from(b: FilterBank) -> Self {
        BankRepr { n: b.n, filters: b.filters }
    }
}

impl FilterBank {
    pub fn new(n: usize, filters: Vec<LaurentPoly>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidScale(n));
        }
        if filters.len() != n {
            return Err(Error::FilterCount { expected: n, found: filters.len() });
        }
        Ok(FilterBank { n, filters })
    }

    /// `m_j(z) = z^j`, the bank of the permutative base representation.
    pub fn identity(n: usize) -> Result<Self> {
        Self::new(n, (0..n as i64).map(LaurentPoly::e).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn filters(&self) -> &[LaurentPoly] {
        &self.filters
    }

    pub fn filter(&self, j: usize) -> &LaurentPoly {
        &self.filters[j]
    }

    /// Smallest and largest exponent over all filters.
    pub fn support(&self) -> (i64, i64) {
        let lo = self.filters.iter().filter_map(LaurentPoly::min_index).min().unwrap_or(0);
        let hi = self.filters.iter().filter_map(LaurentPoly::max_index).max().unwrap_or(0);
        (lo, hi)
    }
}

/// The `N × N` matrix `A(z)` with `m_i(z) = Σ_k A_{i,k}(z^N) z^k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyRepr", into = "PolyRepr")]
pub struct PolyphaseMatrix {
    n: usize,
    entries: Vec<Vec<LaurentPoly>>,
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    #[serde(rename = "N")]
    n: usize,
    entries: Vec<Vec<LaurentPoly>>,
}

impl TryFrom<PolyRepr> for PolyphaseMatrix {
    type Error = Error;
    fn try_from(r: PolyRepr) -> Result<Self> {
        PolyphaseMatrix::new(r.n, r.entries)
    }
}

impl From<PolyphaseMatrix> for PolyRepr {
    fn from(a: PolyphaseMatrix) -> Self {
        PolyRepr { n: a.n, entries: a.entries }
    }
}

impl PolyphaseMatrix {
    pub fn new(n: usize, entries: Vec<Vec<LaurentPoly>>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidScale(n));
        }
        if entries.len() != n || entries.iter().any(|row| row.len() != n) {
            return Err(Error::FilterCount { expected: n, found: entries.len() });
        }
        Ok(PolyphaseMatrix { n, entries })
    }

    /// A constant matrix, given row by row.
    pub fn constant(n: usize, rows: &[Vec<Complex64>]) -> Result<Self> {
        Self::new(n, rows.iter().map(|r| r.iter().map(|&c| LaurentPoly::constant(c)).collect()).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> &LaurentPoly {
        &self.entries[i][j]
    }

    pub fn entries(&self) -> &[Vec<LaurentPoly>] {
        &self.entries
    }

    /// Entry-wise evaluation at a point of the circle.
    pub fn eval(&self, z: Complex64) -> Vec<Vec<Complex64>> {
        self.entries.iter().map(|row| row.iter().map(|p| p.eval(z)).collect()).collect()
    }

    /// `A(z) A(z)^*` as a Laurent matrix.
    pub fn gram(&self) -> Vec<Vec<LaurentPoly>> {
        let n = self.n;
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|k| {
                        (0..n).fold(LaurentPoly::zero(), |acc, j| {
                            &acc + &(&self.entries[i][j] * &self.entries[k][j].tilde())
                        })
                    })
                    .collect()
            })
            .collect()
    }
}

/// `A_{i,j}` collects the coefficients of `m_i` at exponents `≡ j (mod N)`.
pub fn polyphase(bank: &FilterBank) -> PolyphaseMatrix {
    let n = bank.n;
    let entries = bank
        .filters
        .iter()
        .map(|m| (0..n).map(|j| m.downsample(j, n).expect("j < N")).collect())
        .collect();
    PolyphaseMatrix { n, entries }
}

/// Inverse of [`polyphase`]: `m_j(z) = Σ_k A_{j,k}(z^N) z^k`.
pub fn synthesize_filters(a: &PolyphaseMatrix) -> FilterBank {
    let n = a.n;
    let filters = a
        .entries
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .fold(LaurentPoly::zero(), |acc, (k, p)| &acc + &p.compose_power(n).shift(k as i64))
        })
        .collect();
    FilterBank { n, filters }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UnitaryReport {
    pub max_residual: f64,
    pub pass: bool,
}

/// Checks `A(z) A(z)^* = I` coefficient by coefficient.
pub fn check_unitary(a: &PolyphaseMatrix, tol: f64) -> UnitaryReport {
    let mut max_residual: f64 = 0.0;
    for (i, row) in a.gram().iter().enumerate() {
        for (k, b) in row.iter().enumerate() {
            let target = if i == k { LaurentPoly::e(0) } else { LaurentPoly::zero() };
            max_residual = max_residual.max(b.max_abs_diff(&target));
        }
    }
    UnitaryReport { max_residual, pass: max_residual <= tol }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LowpassReport {
    /// `max |A_{j,k}(1) - N^{-1/2} ρ^{jk}|`.
    pub matrix_deviation: f64,
    /// `max |m_j(ρ^{-k}) - δ_{jk} √N|`.
    pub filter_deviation: f64,
    pub pass: bool,
}

/// The Hadamard condition at `z = 1`, checked on the matrix and on the filters.
///
/// Filters are sampled at `ρ^{-k}`, which is where the matrix form puts the
/// peak of `m_k` (`ρ = e^{i2π/N}`).
pub fn check_lowpass(a: &PolyphaseMatrix, tol: f64) -> LowpassReport {
    let n = a.n;
    let rho = |p: i64| Complex64::cis(TAU * p as f64 / n as f64);
    let sqrt_n = (n as f64).sqrt();
    let at_one = a.eval(Complex64::new(1.0, 0.0));
    let mut matrix_deviation: f64 = 0.0;
    for (j, row) in at_one.iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            let target = rho((j * k) as i64) / sqrt_n;
            matrix_deviation = matrix_deviation.max((v - target).norm());
        }
    }
    let bank = synthesize_filters(a);
    let mut filter_deviation: f64 = 0.0;
    for (j, m) in bank.filters.iter().enumerate() {
        for k in 0..n {
            let target = if j == k { sqrt_n } else { 0.0 };
            filter_deviation = filter_deviation.max((m.eval(rho(-(k as i64))) - target).norm());
        }
    }
    let pass = matrix_deviation.max(filter_deviation) <= tol;
    LowpassReport { matrix_deviation, filter_deviation, pass }
}

/// `M_1 = N^{-1/2} max_j ‖m_j'‖_∞`.
pub fn lipschitz_m1(bank: &FilterBank) -> f64 {
    let max = bank.filters.iter().map(LaurentPoly::derivative_sup_norm).fold(0.0, f64::max);
    max / (bank.n as f64).sqrt()
}
