//! Scaling functions and wavelets on `ℝ` as piecewise-constant functions on `N`-adic grids.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filterbank::{check_lowpass, polyphase, FilterBank, DEFAULT_TOL};
use crate::vectors::LaurentPoly;

/// Upper bound on the number of cells in a single function.
pub const MAX_CELLS: usize = 1 << 24;

/// Values on the cells `[c, c+1)·N^{-level}` for `c = start, start+1, …`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SampledRepr", into = "SampledRepr")]
pub struct SampledFunction {
    n: usize,
    level: i32,
    start: i64,
    values: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct SampledRepr {
    #[serde(rename = "N")]
    n: usize,
    level: i32,
    start: i64,
    values: Vec<(f64, f64)>,
}

impl TryFrom<SampledRepr> for SampledFunction {
    type Error = Error;
    fn try_from(r: SampledRepr) -> Result<Self> {
        SampledFunction::new(r.n, r.level, r.start, r.values.into_iter().map(|(re, im)| Complex64::new(re, im)).collect())
    }
}

impl From<SampledFunction> for SampledRepr {
    fn from(f: SampledFunction) -> Self {
        SampledRepr { n: f.n, level: f.level, start: f.start, values: f.values.into_iter().map(|c| (c.re, c.im)).collect() }
    }
}

fn too_many(cells: usize) -> Error {
    Error::TooManyTerms { terms: cells as u128, cap: MAX_CELLS as u128 }
}

fn pow(n: usize, e: i32) -> Result<i64> {
    u32::try_from(e)
        .ok()
        .and_then(|e| (n as i64).checked_pow(e))
        .ok_or_else(|| Error::Grid(format!("grid factor {n}^{e} out of range")))
}

impl SampledFunction {
    pub fn new(n: usize, level: i32, start: i64, values: Vec<Complex64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidScale(n));
        }
        if level < 0 {
            return Err(Error::Grid(format!("negative level {level}")));
        }
        if values.len() > MAX_CELLS {
            return Err(too_many(values.len()));
        }
        Ok(SampledFunction { n, level, start, values })
    }

    pub fn zero(n: usize) -> Self {
        SampledFunction { n, level: 0, start: 0, values: Vec::new() }
    }

    /// `χ_{[lo, hi)}` for integers `lo ≤ hi`.
    pub fn indicator(n: usize, lo: i64, hi: i64) -> Result<Self> {
        let len = usize::try_from(hi - lo).map_err(|_| Error::Grid(format!("empty interval [{lo}, {hi})")))?;
        Self::new(n, 0, lo, vec![Complex64::new(1.0, 0.0); len])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn level(&self) -> i32 {
        self.level
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    fn width(&self) -> f64 {
        (self.n as f64).powi(-self.level)
    }

    /// Support bounds `[lo, hi]` in `x`.
    pub fn support(&self) -> (f64, f64) {
        let w = self.width();
        (self.start as f64 * w, (self.start + self.values.len() as i64) as f64 * w)
    }

    pub fn value_at(&self, x: f64) -> Complex64 {
        let c = (x / self.width()).floor() as i64 - self.start;
        usize::try_from(c).ok().and_then(|c| self.values.get(c)).copied().unwrap_or_default()
    }

    fn cell(&self, c: i64) -> Complex64 {
        usize::try_from(c - self.start).ok().and_then(|c| self.values.get(c)).copied().unwrap_or_default()
    }

    /// `(x_left, value)` per cell.
    pub fn rows(&self) -> Vec<(f64, Complex64)> {
        let w = self.width();
        self.values.iter().enumerate().map(|(i, v)| ((self.start + i as i64) as f64 * w, *v)).collect()
    }

    /// The same function on a finer grid.
    pub fn refine(&self, level: i32) -> Result<Self> {
        if level < self.level {
            return Err(Error::Grid(format!("cannot refine level {} to {level}", self.level)));
        }
        let f = pow(self.n, level - self.level)?;
        let len = self.values.len().checked_mul(f as usize).filter(|&l| l <= MAX_CELLS).ok_or_else(|| too_many(usize::MAX))?;
        let mut values = Vec::with_capacity(len);
        for v in &self.values {
            values.extend(std::iter::repeat_n(*v, f as usize));
        }
        Self::new(self.n, level, self.start * f, values)
    }

    /// Orthogonal projection onto functions constant on level-`level` cells.
    pub fn project(&self, level: i32) -> Result<Self> {
        if level >= self.level {
            return self.refine(level);
        }
        if level < 0 {
            return Err(Error::Grid(format!("negative level {level}")));
        }
        if self.values.is_empty() {
            return Ok(Self { level, start: 0, ..self.clone() });
        }
        let f = pow(self.n, self.level - level)?;
        let lo = self.start.div_euclid(f);
        let hi = (self.start + self.values.len() as i64 - 1).div_euclid(f);
        let values = (lo..=hi)
            .map(|c| (c * f..(c + 1) * f).map(|d| self.cell(d)).sum::<Complex64>() / f as f64)
            .collect();
        Self::new(self.n, level, lo, values)
    }

    /// Drops zero cells at both ends.
    pub fn trimmed(&self) -> Self {
        let first = self.values.iter().position(|v| *v != Complex64::default());
        match first {
            None => Self { values: Vec::new(), start: 0, ..self.clone() },
            Some(a) => {
                let b = self.values.iter().rposition(|v| *v != Complex64::default()).unwrap_or(a);
                Self { start: self.start + a as i64, values: self.values[a..=b].to_vec(), ..self.clone() }
            }
        }
    }

    fn check_n(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Unsupported(format!("scale mismatch: {} vs {}", self.n, other.n)));
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, op: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        self.check_n(other)?;
        let level = self.level.max(other.level);
        let a = self.refine(level)?;
        let b = other.refine(level)?;
        let (lo, hi) = match (a.values.is_empty(), b.values.is_empty()) {
            (true, true) => return Ok(Self { level, ..Self::zero(self.n) }),
            (true, false) => (b.start, b.start + b.values.len() as i64),
            (false, true) => (a.start, a.start + a.values.len() as i64),
            (false, false) => (
                a.start.min(b.start),
                (a.start + a.values.len() as i64).max(b.start + b.values.len() as i64),
            ),
        };
        Self::new(self.n, level, lo, (lo..hi).map(|c| op(a.cell(c), b.cell(c))).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |x, y| x + y)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |x, y| x - y)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { values: self.values.iter().map(|v| v * s).collect(), ..self.clone() }
    }

    /// `∫ conj(self)·other`, exact on the finer of the two grids.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_n(other)?;
        let (fine, coarse, flip) = if self.level >= other.level { (self, other, false) } else { (other, self, true) };
        let f = pow(self.n, fine.level - coarse.level)?;
        let mut acc = Complex64::default();
        for (i, v) in fine.values.iter().enumerate() {
            let c = coarse.cell((fine.start + i as i64).div_euclid(f));
            acc += if flip { v * c.conj() } else { v.conj() * c };
        }
        Ok(acc * fine.width())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(Complex64::norm_sqr).sum::<f64>() * self.width()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn distance(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.norm())
    }
}

/// Integer-valued masks such as `√N·(1/√N)` then run in exact arithmetic.
fn snap(c: Complex64) -> Complex64 {
    let r = |x: f64| if (x - x.round()).abs() < 1e-12 { x.round() } else { x };
    Complex64::new(r(c.re), r(c.im))
}

/// `√N Σ_l a_l φ(Nx - l)` for `m = Σ a_l z^l`, one level finer than `φ`.
pub fn refine_with(m: &LaurentPoly, phi: &SampledFunction) -> Result<SampledFunction> {
    let n = phi.n;
    let level = phi.level + 1;
    if phi.values.is_empty() || m.is_zero() {
        return SampledFunction::new(n, level, 0, Vec::new());
    }
    let shift = pow(n, phi.level)?;
    let (lo, hi) = (m.min_index().unwrap_or(0), m.max_index().unwrap_or(0));
    let len = phi.values.len() as i64;
    let start = phi.start + lo * shift;
    let end = phi.start + len + hi * shift;
    let total = usize::try_from(end - start).map_err(|_| too_many(usize::MAX))?;
    if total > MAX_CELLS {
        return Err(too_many(total));
    }
    let mut values = vec![Complex64::default(); total];
    let s = (n as f64).sqrt();
    for &(l, a) in m.terms() {
        let a = snap(s * a);
        let offset = (phi.start + l * shift - start) as usize;
        for (i, v) in phi.values.iter().enumerate() {
            values[offset + i] += a * v;
        }
    }
    SampledFunction::new(n, level, start, values)
}

/// Cascade settings.
#[derive(Clone, Debug, PartialEq)]
pub struct CascadeOptions {
    pub iterations: usize,
    /// Grid the iterates are projected back onto after each step.
    pub grid_level: i32,
    /// Starting function; `χ_{[0,1)}` when absent.
    pub init: Option<SampledFunction>,
}

impl CascadeOptions {
    pub fn new(iterations: usize) -> Self {
        CascadeOptions { iterations, grid_level: 0, init: None }
    }
}

fn lowpass_guard(bank: &FilterBank) -> Result<()> {
    let r = check_lowpass(&polyphase(bank), DEFAULT_TOL);
    if !r.pass {
        return Err(Error::NotLowpass { deviation: r.matrix_deviation.max(r.filter_deviation) });
    }
    Ok(())
}

fn init_for(bank: &FilterBank, init: Option<&SampledFunction>) -> Result<SampledFunction> {
    match init {
        Some(f) if f.n != bank.n() => Err(Error::Unsupported(format!("init has N = {}, bank has N = {}", f.n, bank.n()))),
        Some(f) => Ok(f.clone()),
        None => SampledFunction::indicator(bank.n(), 0, 1),
    }
}

/// `φ_{k+1} = P(√N Σ a_l φ_k(N· - l))` with `P` the projection onto the level-`grid_level` grid.
pub fn cascade(bank: &FilterBank, opts: &CascadeOptions) -> Result<SampledFunction> {
    lowpass_guard(bank)?;
    let mut phi = init_for(bank, opts.init.as_ref())?.project(opts.grid_level)?;
    for _ in 0..opts.iterations {
        phi = refine_with(bank.filter(0), &phi)?.project(opts.grid_level)?.trimmed();
    }
    Ok(phi)
}

/// The unprojected cascade; the grid gets `N` times finer every step.
pub fn cascade_refine(bank: &FilterBank, iterations: usize, init: Option<&SampledFunction>) -> Result<SampledFunction> {
    lowpass_guard(bank)?;
    let mut phi = init_for(bank, init)?;
    for _ in 0..iterations {
        phi = refine_with(bank.filter(0), &phi)?.trimmed();
    }
    Ok(phi)
}

/// `ψ_j(x) = √N Σ_l b_l^{(j)} φ(Nx - l)` for `j = 1, …, N-1`.
pub fn wavelets_from_scaling(bank: &FilterBank, phi: &SampledFunction) -> Result<Vec<SampledFunction>> {
    (1..bank.n()).map(|j| refine_with(bank.filter(j), phi).map(|f| f.trimmed())).collect()
}

/// `‖φ - √N Σ a_l φ(N· - l)‖`.
pub fn refinement_residual(bank: &FilterBank, phi: &SampledFunction) -> Result<f64> {
    refine_with(bank.filter(0), phi)?.distance(phi)
}

/// `N^{j/2} ψ(N^j x - k)`.
pub fn dilate_translate(psi: &SampledFunction, j: i32, k: i64) -> Result<SampledFunction> {
    let level = psi.level + j;
    if level < 0 {
        return Err(Error::ResolutionUnderflow { j, k, level: psi.level });
    }
    let shift = pow(psi.n, psi.level)?;
    let start = k.checked_mul(shift).and_then(|s| s.checked_add(psi.start)).ok_or_else(|| Error::Grid("translation out of range".into()))?;
    let s = (psi.n as f64).powf(j as f64 / 2.0);
    SampledFunction::new(psi.n, level, start, psi.values.iter().map(|v| v * s).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BesselReport {
    pub sum: f64,
    pub norm2: f64,
    pub gap: f64,
    pub terms: usize,
    pub pass: bool,
}

/// `Σ_{i,j,k} |⟨ψ_{i,j,k}|F⟩|²` over `j_range` and `k_range` (inclusive).
///
/// Without a `k_range` every `k` whose translate meets the support of `F` is used.
pub fn bessel_sum(
    psis: &[SampledFunction],
    f: &SampledFunction,
    j_range: (i32, i32),
    k_range: Option<(i64, i64)>,
) -> Result<BesselReport> {
    let (j_lo, j_hi) = j_range;
    if j_lo > j_hi || k_range.is_some_and(|(a, b)| a > b) {
        return Err(Error::Grid("empty index range".into()));
    }
    let psis: Vec<SampledFunction> = psis
        .iter()
        .map(|p| {
            p.check_n(f)?;
            p.trimmed().refine(p.level.max(-j_lo))
        })
        .collect::<Result<_>>()?;
    let f = f.trimmed();
    let norm2 = f.norm_sqr();
    let mut jobs = Vec::new();
    for (i, p) in psis.iter().enumerate() {
        if p.values.is_empty() || f.values.is_empty() {
            continue;
        }
        let (a, b) = p.support();
        let (c, d) = f.support();
        for j in j_lo..=j_hi {
            let nj = (f.n as f64).powi(j);
            let (lo, hi) = match k_range {
                Some(r) => r,
                None => ((c * nj - b).floor() as i64, (d * nj - a).ceil() as i64),
            };
            jobs.push((i, j, lo, hi));
        }
    }
    let parts: Vec<Result<(f64, usize)>> = crate::par::map(&jobs, |&(i, j, lo, hi)| {
        let mut s = 0.0;
        for k in lo..=hi {
            s += dilate_translate(&psis[i], j, k)?.inner(&f)?.norm_sqr();
        }
        Ok((s, (hi - lo + 1) as usize))
    });
    let mut sum = 0.0;
    let mut terms = 0;
    for p in parts {
        let (s, t) = p?;
        sum += s;
        terms += t;
    }
    Ok(BesselReport { sum, norm2, gap: norm2 - sum, terms, pass: sum <= norm2 + 1e-10 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn third_box() -> SampledFunction {
        SampledFunction::indicator(2, 0, 3).unwrap().scale(c(1.0 / 3.0))
    }

    #[test]
    fn haar_cascade_is_the_box() {
        let phi = cascade(&fixtures::haar(), &CascadeOptions::new(8)).unwrap();
        assert_eq!(phi, SampledFunction::indicator(2, 0, 1).unwrap());
        assert_eq!(cascade_refine(&fixtures::haar(), 8, None).unwrap().project(0).unwrap(), phi);
        assert_eq!(refinement_residual(&fixtures::haar(), &phi).unwrap(), 0.0);
    }

    #[test]
    fn stretched_cascade_converges_on_the_grid() {
        let bank = fixtures::stretched_haar();
        let phi = cascade(&bank, &CascadeOptions::new(12)).unwrap();
        assert!(phi.distance(&third_box()).unwrap() < 1e-3);
        let phi = cascade(&bank, &CascadeOptions::new(60)).unwrap();
        assert!(phi.distance(&third_box()).unwrap() < 1e-15);
        assert!(refinement_residual(&bank, &third_box()).unwrap() < 1e-16);
    }

    #[test]
    fn stretched_refinement_does_not_converge() {
        let bank = fixtures::stretched_haar();
        for it in [6, 10] {
            let phi = cascade_refine(&bank, it, None).unwrap();
            assert!((phi.norm() - 1.0).abs() < 1e-12);
            assert!((phi.distance(&third_box()).unwrap() - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_init_stays_zero() {
        let opts = CascadeOptions { init: Some(SampledFunction::zero(2)), ..CascadeOptions::new(5) };
        assert_eq!(cascade(&fixtures::haar(), &opts).unwrap().norm(), 0.0);
        let psi = wavelets_from_scaling(&fixtures::haar(), &SampledFunction::zero(2)).unwrap();
        assert_eq!(psi[0].norm(), 0.0);
    }

    #[test]
    fn non_lowpass_bank_is_rejected() {
        assert!(cascade(&crate::filterbank::FilterBank::identity(2).unwrap(), &CascadeOptions::new(2)).is_err());
    }

    #[test]
    fn wavelet_examples() {
        let phi = cascade(&fixtures::haar(), &CascadeOptions::new(4)).unwrap();
        let psi = wavelets_from_scaling(&fixtures::haar(), &phi).unwrap();
        assert_eq!(psi[0].values(), &[c(1.0), c(-1.0)]);
        assert_eq!(psi[0].level(), 1);

        let bank = fixtures::stretched_haar();
        let phi = cascade(&bank, &CascadeOptions::new(40)).unwrap();
        let psi = &wavelets_from_scaling(&bank, &phi).unwrap()[0];
        assert!((psi.norm() - 1.0 / 3f64.sqrt()).abs() < 1e-6);
        let target = SampledFunction::new(2, 1, 0, [c(1.0), c(1.0), c(1.0), c(-1.0), c(-1.0), c(-1.0)].into()).unwrap();
        assert!(psi.distance(&target.scale(c(1.0 / 3.0))).unwrap() < 1e-3);
    }

    #[test]
    fn dilation_examples() {
        let psi = SampledFunction::new(2, 1, 0, vec![c(1.0), c(-1.0)]).unwrap();
        assert_eq!(dilate_translate(&psi, 0, 0).unwrap(), psi);
        let d = dilate_translate(&psi, 1, 0).unwrap();
        assert_eq!(d.support(), (0.0, 0.5));
        assert_eq!(d.values()[0], c(2f64.sqrt()));
        assert!((dilate_translate(&psi, -1, 3).unwrap().norm_sqr() - psi.norm_sqr()).abs() < 1e-15);
        assert!(dilate_translate(&psi, -2, 3).is_err());
        let fine = psi.refine(3).unwrap();
        assert!((dilate_translate(&fine, -2, 3).unwrap().norm_sqr() - psi.norm_sqr()).abs() < 1e-15);
    }

    #[test]
    fn haar_bessel_sum() {
        let psi = SampledFunction::new(2, 1, 0, vec![c(1.0), c(-1.0)]).unwrap();
        let f = SampledFunction::indicator(2, 0, 1).unwrap();
        let r = bessel_sum(std::slice::from_ref(&psi), &f, (-8, 8), None).unwrap();
        assert!((r.sum - (1.0 - 2f64.powi(-8))).abs() < 1e-12);
        assert!(r.pass);
        let z = bessel_sum(&[psi], &SampledFunction::zero(2), (-8, 8), None).unwrap();
        assert_eq!((z.sum, z.norm2), (0.0, 0.0));
    }

    #[test]
    fn stretched_cross_inner_product() {
        let psi = SampledFunction::new(2, 1, 0, [1.0, 1.0, 1.0, -1.0, -1.0, -1.0].map(|x| c(x / 3.0)).into()).unwrap();
        let a = dilate_translate(&psi, 0, 0).unwrap();
        let b = dilate_translate(&psi, 1, 1).unwrap();
        assert!((a.inner(&b).unwrap() - c(2f64.sqrt() / 9.0)).norm() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let f = SampledFunction::new(3, 2, -4, vec![c(1.0), Complex64::new(0.5, -2.0)]).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(serde_json::from_str::<SampledFunction>(&s).unwrap(), f);
        assert!(serde_json::from_str::<SampledFunction>(r#"{"N":2,"level":-1,"start":0,"values":[]}"#).is_err());
    }
}
