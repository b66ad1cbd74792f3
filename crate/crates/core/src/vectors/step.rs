use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::laurent::PRUNE_TOL;
use crate::error::{Error, Result};

/// A piecewise-constant function on the N-adic partition of `[0,1)` at some level.
///
/// `values[m]` is the value on `[m N^{-k}, (m+1) N^{-k})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StepRepr", into = "StepRepr")]
pub struct StepFunction {
    n: usize,
    level: u32,
    values: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct StepRepr {
    #[serde(rename = "N")]
    n: usize,
    level: u32,
    values: Vec<(f64, f64)>,
}

impl TryFrom<StepRepr> for StepFunction {
    type Error = Error;
    fn try_from(r: StepRepr) -> Result<Self> {
        StepFunction::new(r.n, r.level, r.values.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
    }
}

impl From<StepFunction> for StepRepr {
    fn from(f: StepFunction) -> Self {
        StepRepr { n: f.n, level: f.level, values: f.values.into_iter().map(|c| (c.re, c.im)).collect() }
    }
}

pub(crate) fn cells(n: usize, level: u32) -> Result<usize> {
    if n < 2 {
        return Err(Error::InvalidScale(n));
    }
    n.checked_pow(level)
        .filter(|&c| c <= 1 << 26)
        .ok_or(Error::TooManyTerms { terms: (n as u128).saturating_pow(level), cap: 1 << 26 })
}

impl StepFunction {
    pub fn new(n: usize, level: u32, values: Vec<Complex64>) -> Result<Self> {
        let expected = cells(n, level)?;
        if values.len() != expected {
            return Err(Error::StepLength { level, expected, found: values.len() });
        }
        Ok(StepFunction { n, level, values })
    }

    pub fn from_real(n: usize, level: u32, values: &[f64]) -> Result<Self> {
        Self::new(n, level, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn constant(n: usize, c: Complex64) -> Self {
        StepFunction { n, level: 0, values: vec![c] }
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, Complex64::new(1.0, 0.0))
    }

    pub fn zero(n: usize) -> Self {
        Self::constant(n, Complex64::new(0.0, 0.0))
    }

    /// Indicator of a union of level-`level` cells.
    pub fn indicator(n: usize, level: u32, cell_list: &[usize]) -> Result<Self> {
        let len = cells(n, level)?;
        let mut values = vec![Complex64::new(0.0, 0.0); len];
        for &c in cell_list {
            if c >= len {
                return Err(Error::IndexOutOfRange { index: c, n: len });
            }
            values[c] = Complex64::new(1.0, 0.0);
        }
        Ok(StepFunction { n, level, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Value on cell `c` of the finer partition at `level >= self.level`.
    pub fn value_at_cell(&self, level: u32, c: usize) -> Complex64 {
        self.values[c / self.n.pow(level - self.level)]
    }

    pub fn value_at(&self, x: f64) -> Complex64 {
        let len = self.values.len();
        let m = ((x.rem_euclid(1.0)) * len as f64).floor() as usize;
        self.values[m.min(len - 1)]
    }

    pub fn refine(&self, target: u32) -> Result<Self> {
        if target < self.level {
            return Err(Error::StepLevel { from: self.level, to: target });
        }
        let rep = self.n.pow(target - self.level);
        cells(self.n, target)?;
        let values = self.values.iter().flat_map(|&v| std::iter::repeat_n(v, rep)).collect();
        Ok(StepFunction { n: self.n, level: target, values })
    }

    /// Same function at the coarsest level representing it exactly.
    pub fn coarsened(&self) -> Self {
        let mut f = self.clone();
        while f.level > 0 {
            let blocks = f.values.chunks(f.n);
            if !blocks.clone().all(|b| b.iter().all(|v| (v - b[0]).norm() <= PRUNE_TOL)) {
                break;
            }
            f.values = f.values.chunks(f.n).map(|b| b[0]).collect();
            f.level -= 1;
        }
        f
    }

    fn zip_with(&self, other: &Self, op: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::InvalidScale(other.n));
        }
        let level = self.level.max(other.level);
        let (a, b) = (self.refine(level)?, other.refine(level)?);
        let values = a.values.iter().zip(&b.values).map(|(&x, &y)| op(x, y)).collect();
        Ok(StepFunction { n: self.n, level, values }.coarsened())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |x, y| x + y)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |x, y| x - y)
    }

    pub fn pointwise_mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |x, y| x * y)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        StepFunction { n: self.n, level: self.level, values: self.values.iter().map(|v| v * s).collect() }
    }

    /// `⟨f|g⟩ = ∫ conj(f) g` for normalized Lebesgue measure.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.n != other.n {
            return Err(Error::InvalidScale(other.n));
        }
        let level = self.level.max(other.level);
        let len = self.n.pow(level);
        let sum: Complex64 =
            (0..len).map(|c| self.value_at_cell(level, c).conj() * other.value_at_cell(level, c)).sum();
        Ok(sum / len as f64)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.values.len() as f64
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        let d = self.sub(other)?;
        Ok(d.values.iter().map(|v| v.norm()).fold(0.0, f64::max))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refine_examples() {
        let one = StepFunction::one(2);
        assert_eq!(one.refine(1).unwrap(), StepFunction::from_real(2, 1, &[1.0, 1.0]).unwrap());
        let half = StepFunction::indicator(2, 1, &[0]).unwrap();
        assert_eq!(half.refine(2).unwrap(), StepFunction::from_real(2, 2, &[1.0, 1.0, 0.0, 0.0]).unwrap());
        assert!(half.refine(0).is_err());
    }

    #[test]
    fn half_interval_has_measure_one_half() {
        let half = StepFunction::indicator(2, 1, &[0]).unwrap();
        assert!((half.inner(&half).unwrap().re - 0.5).abs() < 1e-16);
    }

    #[test]
    fn binary_ops_coarsen() {
        let a = StepFunction::indicator(2, 2, &[0, 3]).unwrap();
        let b = StepFunction::indicator(2, 2, &[1, 2]).unwrap();
        let s = a.add(&b).unwrap();
        assert_eq!(s.level(), 0);
        assert_eq!(s.values(), &[Complex64::new(1.0, 0.0)]);
        assert!(a.pointwise_mul(&b).unwrap().norm() == 0.0);
    }

    #[test]
    fn length_is_checked() {
        assert!(StepFunction::from_real(2, 2, &[1.0, 0.0]).is_err());
        let json = r#"{"N":2,"level":1,"values":[[1.0,0.0]]}"#;
        assert!(serde_json::from_str::<StepFunction>(json).is_err());
    }

    #[test]
    fn json_round_trip() {
        let f = StepFunction::indicator(3, 1, &[2]).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"N":3,"level":1,"values":[[0.0,0.0],[0.0,0.0],[1.0,0.0]]}"#);
        assert_eq!(serde_json::from_str::<StepFunction>(&s).unwrap(), f);
    }
}
