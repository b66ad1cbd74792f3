use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients at or below this modulus are dropped after every operation.
pub const PRUNE_TOL: f64 = 1e-14;

/// A finite Laurent series `Σ c_n z^n` on the unit circle.
///
/// Terms are kept sorted by exponent with pruned zeros, so `min_index` and
/// `max_index` are O(1).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "LaurentRepr", into = "LaurentRepr")]
pub struct LaurentPoly {
    terms: Vec<(i64, Complex64)>,
}

#[derive(Serialize, Deserialize)]
struct LaurentRepr {
    coeffs: Vec<(i64, f64, f64)>,
}

impl From<LaurentRepr> for LaurentPoly {
    fn from(r: LaurentRepr) -> Self {
        LaurentPoly::from_terms(r.coeffs.into_iter().map(|(n, re, im)| (n, Complex64::new(re, im))))
    }
}

impl From<LaurentPoly> for LaurentRepr {
    fn from(p: LaurentPoly) -> Self {
        LaurentRepr { coeffs: p.terms.into_iter().map(|(n, c)| (n, c.re, c.im)).collect() }
    }
}

fn keep(c: Complex64) -> bool {
    c.norm() > PRUNE_TOL
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The basis vector `e_n(z) = z^n`.
    pub fn e(n: i64) -> Self {
        Self::monomial(n, Complex64::new(1.0, 0.0))
    }

    pub fn monomial(n: i64, c: Complex64) -> Self {
        Self::from_sorted(vec![(n, c)])
    }

    pub fn constant(c: Complex64) -> Self {
        Self::monomial(0, c)
    }

    /// Builds a polynomial from arbitrary terms; repeated exponents are summed.
    pub fn from_terms<I: IntoIterator<Item = (i64, Complex64)>>(terms: I) -> Self {
        let mut acc: BTreeMap<i64, Complex64> = BTreeMap::new();
        for (n, c) in terms {
            *acc.entry(n).or_default() += c;
        }
        Self::from_sorted(acc.into_iter().collect())
    }

    pub fn from_real(terms: &[(i64, f64)]) -> Self {
        Self::from_terms(terms.iter().map(|&(n, c)| (n, Complex64::new(c, 0.0))))
    }

    fn from_sorted(mut terms: Vec<(i64, Complex64)>) -> Self {
        terms.retain(|&(_, c)| keep(c));
        LaurentPoly { terms }
    }

    pub fn terms(&self) -> &[(i64, Complex64)] {
        &self.terms
    }

    pub fn nnz(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, n: i64) -> Complex64 {
        match self.terms.binary_search_by_key(&n, |&(k, _)| k) {
            Ok(i) => self.terms[i].1,
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn min_index(&self) -> Option<i64> {
        self.terms.first().map(|t| t.0)
    }

    pub fn max_index(&self) -> Option<i64> {
        self.terms.last().map(|t| t.0)
    }

    /// Largest `|n|` in the support, 0 for the zero polynomial.
    pub fn radius(&self) -> i64 {
        match (self.min_index(), self.max_index()) {
            (Some(a), Some(b)) => a.abs().max(b.abs()),
            _ => 0,
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_sorted(self.terms.iter().map(|&(n, c)| (n, c * s)).collect())
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// Multiplication by `z^k`.
    pub fn shift(&self, k: i64) -> Self {
        LaurentPoly { terms: self.terms.iter().map(|&(n, c)| (n + k, c)).collect() }
    }

    fn merge(&self, other: &Self, sign: f64) -> Self {
        let (a, b) = (&self.terms, &other.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                out.push((b[j].0, b[j].1 * sign));
                j += 1;
            } else {
                out.push((a[i].0, a[i].1 + b[j].1 * sign));
                i += 1;
                j += 1;
            }
        }
        Self::from_sorted(out)
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: Complex64, other: &Self) -> Self {
        self.merge(&other.scale(s), 1.0)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        if self.nnz() == 1 {
            let (k, c) = self.terms[0];
            return other.shift(k).scale(c);
        }
        Self::from_terms(
            self.terms
                .iter()
                .flat_map(|&(n, a)| other.terms.iter().map(move |&(m, b)| (n + m, a * b))),
        )
    }

    /// Coefficients `conj(g_{-n})`: the pointwise conjugate on the circle.
    pub fn tilde(&self) -> Self {
        LaurentPoly { terms: self.terms.iter().rev().map(|&(n, c)| (-n, c.conj())).collect() }
    }

    /// `f(z^N)`.
    pub fn compose_power(&self, n: usize) -> Self {
        let n = n as i64;
        LaurentPoly { terms: self.terms.iter().map(|&(k, c)| (k * n, c)).collect() }
    }

    /// `T_j^*`: keeps exponents `≡ j (mod N)` and maps `e_k` to `e_{(k-j)/N}`.
    pub fn downsample(&self, j: usize, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidScale(n));
        }
        if j >= n {
            return Err(Error::IndexOutOfRange { index: j, n });
        }
        let (j, n) = (j as i64, n as i64);
        Ok(LaurentPoly {
            terms: self
                .terms
                .iter()
                .filter(|&&(k, _)| (k - j).rem_euclid(n) == 0)
                .map(|&(k, c)| ((k - j).div_euclid(n), c))
                .collect(),
        })
    }

    /// Keeps only the exponents in `lo..=hi`.
    pub fn restrict(&self, lo: i64, hi: i64) -> Self {
        LaurentPoly { terms: self.terms.iter().copied().filter(|&(n, _)| lo <= n && n <= hi).collect() }
    }

    /// `⟨self|other⟩ = Σ conj(f_n) g_n`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        let (a, b) = (&self.terms, &other.terms);
        let (mut i, mut j) = (0, 0);
        let mut acc = Complex64::new(0.0, 0.0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += a[i].1.conj() * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.iter().map(|t| t.1.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.terms.iter().map(|&(n, c)| c * z.powi(n as i32)).sum()
    }

    /// `f(e^{-i2πx})`, the additive coordinate used by the Lipschitz estimates.
    pub fn eval_angle(&self, x: f64) -> Complex64 {
        self.terms.iter().map(|&(n, c)| c * Complex64::cis(-TAU * n as f64 * x)).sum()
    }

    /// Coefficients of `d/dx f(e^{-i2πx})`.
    pub fn derivative(&self) -> Self {
        Self::from_sorted(
            self.terms.iter().map(|&(n, c)| (n, c * Complex64::new(0.0, -TAU * n as f64))).collect(),
        )
    }

    /// `Σ |f_n|`, an upper bound for the sup norm.
    pub fn coefficient_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.1.norm()).sum()
    }

    fn grid_size(&self) -> usize {
        let span = match (self.min_index(), self.max_index()) {
            (Some(a), Some(b)) => (b - a) as usize,
            _ => 0,
        };
        4096.max(64 * (span + 1))
    }

    /// Sampled supremum of `|f|` on the circle, clamped to the coefficient bound.
    pub fn sup_norm(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let g = self.grid_size();
        let table: Vec<Complex64> = (0..g).map(|m| Complex64::cis(-TAU * m as f64 / g as f64)).collect();
        let gi = g as i128;
        let sample = |p: usize| -> f64 {
            self.terms
                .iter()
                .map(|&(n, c)| c * table[((n as i128 * p as i128).rem_euclid(gi)) as usize])
                .sum::<Complex64>()
                .norm()
        };
        let max = crate::par::max_f64(g, sample);
        max.min(self.coefficient_bound())
    }

    /// Sampled supremum of the derivative of `x ↦ f(e^{-i2πx})`.
    pub fn derivative_sup_norm(&self) -> f64 {
        self.derivative().sup_norm()
    }

    /// Largest coefficient deviation from `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.merge(other, -1.0).terms.iter().map(|t| t.1.norm()).fold(0.0, f64::max)
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.merge(rhs, 1.0)
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.merge(rhs, -1.0)
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        LaurentPoly::mul(self, rhs)
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        self.scale_real(-1.0)
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (n, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if c.im == 0.0 {
                write!(f, "{}·e_{}", c.re, n)?;
            } else {
                write!(f, "({}{:+}i)·e_{}", c.re, c.im, n)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn basis_inner_products() {
        assert_eq!(LaurentPoly::e(0).inner(&LaurentPoly::e(0)), c(1.0));
        assert_eq!(LaurentPoly::e(1).inner(&LaurentPoly::e(2)), c(0.0));
        let p = LaurentPoly::from_real(&[(0, FRAC_1_SQRT_2), (1, FRAC_1_SQRT_2)]);
        let m = LaurentPoly::from_real(&[(0, FRAC_1_SQRT_2), (1, -FRAC_1_SQRT_2)]);
        assert!(p.inner(&m).norm() < 1e-16);
    }

    #[test]
    fn inner_is_conjugate_linear_on_the_left() {
        let f = LaurentPoly::monomial(2, Complex64::new(0.0, 1.0));
        let g = LaurentPoly::e(2);
        assert_eq!(f.inner(&g), Complex64::new(0.0, -1.0));
    }

    #[test]
    fn compose_power_examples() {
        assert_eq!(LaurentPoly::e(1).compose_power(2), LaurentPoly::e(2));
        assert_eq!(LaurentPoly::e(0).compose_power(3), LaurentPoly::e(0));
        let f = LaurentPoly::from_real(&[(-1, 1.0), (2, 1.0)]);
        assert_eq!(f.compose_power(2), LaurentPoly::from_real(&[(-2, 1.0), (4, 1.0)]));
    }

    #[test]
    fn downsample_examples() {
        assert_eq!(LaurentPoly::e(4).downsample(0, 2).unwrap(), LaurentPoly::e(2));
        assert!(LaurentPoly::e(4).downsample(1, 2).unwrap().is_zero());
        assert_eq!(LaurentPoly::e(5).downsample(1, 2).unwrap(), LaurentPoly::e(2));
        assert_eq!(LaurentPoly::e(-3).downsample(1, 2).unwrap(), LaurentPoly::e(-2));
        assert!(LaurentPoly::e(5).downsample(2, 2).is_err());
    }

    #[test]
    fn sup_norm_examples() {
        assert!((LaurentPoly::e(5).sup_norm() - 1.0).abs() < 1e-15);
        let h = LaurentPoly::from_real(&[(0, FRAC_1_SQRT_2), (1, FRAC_1_SQRT_2)]);
        assert!((h.sup_norm() - SQRT_2).abs() < 1e-15);
        for n in [-4, 0, 3] {
            let d = LaurentPoly::e(n).derivative_sup_norm();
            assert!((d - TAU * (n as f64).abs()).abs() < 1e-12);
        }
        assert_eq!(LaurentPoly::zero().sup_norm(), 0.0);
    }

    #[test]
    fn tilde_conjugates_on_the_circle() {
        let f = LaurentPoly::from_terms([(2, Complex64::new(1.0, 2.0)), (-1, c(3.0))]);
        let z = Complex64::cis(0.7);
        assert!((f.tilde().eval(z) - f.eval(z).conj()).norm() < 1e-13);
    }

    #[test]
    fn pruning_and_cancellation() {
        let f = LaurentPoly::from_real(&[(3, 1.0)]);
        assert!((&f - &f).is_zero());
        assert!(LaurentPoly::monomial(1, c(1e-15)).is_zero());
        assert_eq!(LaurentPoly::from_real(&[(1, 1.0), (1, 2.0)]).coeff(1), c(3.0));
    }

    #[test]
    fn json_round_trip() {
        let f = LaurentPoly::from_terms([(-2, Complex64::new(0.5, -1.0)), (3, c(2.0))]);
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"coeffs":[[-2,0.5,-1.0],[3,2.0,0.0]]}"#);
        let g: LaurentPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(f, g);
    }
}
