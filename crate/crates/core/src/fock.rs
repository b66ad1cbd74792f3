//! Exact words in the Cuntz algebra, the state `ω(s_I s_J^*) = δ_{IJ} N^{-|I|}` and its GNS vectors.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rep::MultiIndex;
use crate::subspace::Subspace;
use crate::vectors::PRUNE_TOL;

pub type Rational = Ratio<i128>;

/// Largest label family the exact routines will build.
pub const MAX_FOCK_LABELS: usize = 126;

/// The nonzero word `s_I s_J^*`. Products that vanish are `None`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NormalWord {
    pub isometries: MultiIndex,
    pub coisometries: MultiIndex,
}

impl NormalWord {
    pub fn new(isometries: MultiIndex, coisometries: MultiIndex) -> Self {
        NormalWord { isometries, coisometries }
    }

    pub fn one() -> Self {
        Self::new(MultiIndex::empty(), MultiIndex::empty())
    }

    pub fn s(i: usize) -> Self {
        Self::new(MultiIndex::from(vec![i]), MultiIndex::empty())
    }

    pub fn s_star(i: usize) -> Self {
        Self::new(MultiIndex::empty(), MultiIndex::from(vec![i]))
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.coisometries.clone(), self.isometries.clone())
    }

    /// Left multiplication by `s_i`.
    pub fn prepend(&self, i: usize) -> Self {
        Self::new(self.isometries.prepend(i), self.coisometries.clone())
    }
}

impl fmt::Display for NormalWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.isometries.is_empty() && self.coisometries.is_empty() {
            return f.write_str("1");
        }
        let mut parts = Vec::new();
        if !self.isometries.is_empty() {
            parts.push(format!("s_({})", self.isometries));
        }
        if !self.coisometries.is_empty() {
            parts.push(format!("s_({})*", self.coisometries));
        }
        f.write_str(&parts.join(" "))
    }
}

/// `(s_I s_J^*)(s_K s_L^*)` in normal form.
pub fn reduce(a: &NormalWord, b: &NormalWord) -> Option<NormalWord> {
    let (j, k) = (&a.coisometries, &b.isometries);
    if let Some(rest) = k.strip_prefix(j) {
        Some(NormalWord::new(a.isometries.concat(&rest), b.coisometries.clone()))
    } else {
        j.strip_prefix(k).map(|rest| NormalWord::new(a.isometries.clone(), b.coisometries.concat(&rest)))
    }
}

/// Product of an optional word with another, propagating zero.
pub fn reduce_opt(a: Option<&NormalWord>, b: Option<&NormalWord>) -> Option<NormalWord> {
    reduce(a?, b?)
}

fn pow_inv(n: usize, k: usize) -> Rational {
    Rational::new(1, (n as i128).pow(k as u32))
}

/// `ω(s_I s_J^*) = δ_{IJ} N^{-|I|}`.
pub fn omega(w: &NormalWord, n: usize) -> Rational {
    if w.isometries == w.coisometries {
        pow_inv(n, w.isometries.len())
    } else {
        Rational::zero()
    }
}

pub fn omega_opt(w: Option<&NormalWord>, n: usize) -> Rational {
    w.map_or_else(Rational::zero, |w| omega(w, n))
}

/// `⟨aΩ|bΩ⟩ = ω(a^* b)`.
pub fn label_inner(a: &NormalWord, b: &NormalWord, n: usize) -> Rational {
    omega_opt(reduce(&a.adjoint(), b).as_ref(), n)
}

/// Gram matrix of the GNS vectors `S_I S_J^* Ω`.
pub fn gram(labels: &[NormalWord], n: usize) -> Vec<Vec<Rational>> {
    crate::par::map(labels, |a| labels.iter().map(|b| label_inner(a, b, n)).collect())
}

/// An element `a + b√N` of `Q(√N)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Surd {
    pub rational: Rational,
    pub radical: Rational,
    pub n: i128,
}

impl Surd {
    pub fn from_rational(n: usize, r: Rational) -> Self {
        Surd { rational: r, radical: Rational::zero(), n: n as i128 }
    }

    /// `N^{k/2}`.
    pub fn sqrt_n_pow(n: usize, k: usize) -> Self {
        let base = Rational::from_integer((n as i128).pow((k / 2) as u32));
        if k.is_multiple_of(2) {
            Surd { rational: base, radical: Rational::zero(), n: n as i128 }
        } else {
            Surd { rational: Rational::zero(), radical: base, n: n as i128 }
        }
    }

    pub fn mul(&self, o: &Surd) -> Surd {
        let nn = Rational::from_integer(self.n);
        Surd {
            rational: self.rational * o.rational + nn * self.radical * o.radical,
            radical: self.rational * o.radical + self.radical * o.rational,
            n: self.n,
        }
    }

    pub fn scale(&self, r: Rational) -> Surd {
        Surd { rational: self.rational * r, radical: self.radical * r, n: self.n }
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.radical.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        ratio_f64(self.rational) + ratio_f64(self.radical) * (self.n as f64).sqrt()
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.rational.is_zero(), self.radical.is_zero()) {
            (_, true) => write!(f, "{}", self.rational),
            (true, false) => write!(f, "{}√{}", self.radical, self.n),
            (false, false) => write!(f, "{} + {}√{}", self.rational, self.radical, self.n),
        }
    }
}

pub fn ratio_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// A word together with an exact positive scale.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledLabel {
    pub word: NormalWord,
    pub scale: Surd,
}

/// `⟨aΩ|bΩ⟩` for scaled labels.
pub fn scaled_inner(a: &ScaledLabel, b: &ScaledLabel, n: usize) -> Surd {
    a.scale.mul(&b.scale).scale(label_inner(&a.word, &b.word, n))
}

pub fn gram_scaled(labels: &[ScaledLabel], n: usize) -> Vec<Vec<Surd>> {
    crate::par::map(labels, |a| labels.iter().map(|b| scaled_inner(a, b, n)).collect())
}

fn label_count(n: usize, depth: usize) -> Result<usize> {
    let mut total: u128 = 0;
    for k in 1..=depth {
        total += (n as u128).pow(k as u32);
        if total > MAX_FOCK_LABELS as u128 {
            return Err(Error::TooManyTerms { terms: total, cap: MAX_FOCK_LABELS as u128 });
        }
    }
    Ok(total as usize)
}

/// `{N^{|I|/2} S_I^* Ω : 1 ≤ |I| ≤ depth}`, orthonormal for ω.
pub fn coinvariant_basis(n: usize, depth: usize) -> Result<Vec<ScaledLabel>> {
    if n < 2 {
        return Err(Error::InvalidScale(n));
    }
    label_count(n, depth)?;
    let mut out = Vec::new();
    for k in 1..=depth {
        for idx in MultiIndex::all_of_length(n, k) {
            out.push(ScaledLabel { word: NormalWord::new(MultiIndex::empty(), idx), scale: Surd::sqrt_n_pow(n, k) });
        }
    }
    Ok(out)
}

/// The coinvariant basis as numeric Fock vectors.
pub fn coinvariant_subspace(n: usize, depth: usize) -> Result<Subspace> {
    let vectors = coinvariant_basis(n, depth)?
        .into_iter()
        .map(|l| FockVector::from_label(n, l.word, Complex64::new(l.scale.to_f64(), 0.0)).into())
        .collect();
    Subspace::orthonormalize(vectors)
}

/// `‖P S_i P‖` for `P` the projection onto the depth-limited coinvariant span.
pub fn compressed_norm(n: usize, i: usize, depth: usize) -> Result<f64> {
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    let basis = coinvariant_basis(n, depth)?;
    let size = basis.len();
    if size == 0 {
        return Ok(0.0);
    }
    let rows = crate::par::map(&basis, |a| {
        basis
            .iter()
            .map(|b| {
                let moved = ScaledLabel { word: b.word.prepend(i), scale: b.scale };
                scaled_inner(a, &moved, n).to_f64()
            })
            .collect::<Vec<_>>()
    });
    let m = DMatrix::from_fn(size, size, |r, c| rows[r][c]);
    Ok(m.singular_values().max())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FockWanderingReport {
    pub pass: bool,
    pub max_overlap: f64,
    /// The largest overlap as an exact rational.
    pub max_overlap_exact: String,
    pub pairs_checked: usize,
}

/// Checks `⟨x|S_K y⟩ = 0` exactly for `x, y` among `{S_i S_j^* Ω} ∪ extra` and `1 ≤ |K| ≤ depth`.
pub fn fock_wandering_check(n: usize, depth: usize, extra: &[NormalWord]) -> Result<FockWanderingReport> {
    if n < 2 {
        return Err(Error::InvalidScale(n));
    }
    let words: u128 = (1..=depth).map(|k| (n as u128).pow(k as u32)).sum();
    if words > 4096 {
        return Err(Error::TooManyTerms { terms: words, cap: 4096 });
    }
    let mut labels: Vec<NormalWord> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            labels.push(NormalWord::new(MultiIndex::from(vec![i]), MultiIndex::from(vec![j])));
        }
    }
    labels.extend_from_slice(extra);
    let ks: Vec<MultiIndex> = (1..=depth).flat_map(|k| MultiIndex::all_of_length(n, k)).collect();
    let per_k = crate::par::map(&ks, |k| {
        let mut worst = Rational::zero();
        for x in &labels {
            for y in &labels {
                let moved = NormalWord::new(k.concat(&y.isometries), y.coisometries.clone());
                let v = label_inner(x, &moved, n).abs();
                if v > worst {
                    worst = v;
                }
            }
        }
        worst
    });
    let worst = per_k.into_iter().max().unwrap_or_else(Rational::zero);
    Ok(FockWanderingReport {
        pass: worst.is_zero(),
        max_overlap: ratio_f64(worst),
        max_overlap_exact: worst.to_string(),
        pairs_checked: ks.len() * labels.len() * labels.len(),
    })
}

/// A finite combination of GNS vectors `S_I S_J^* Ω` with float coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FockRepr", into = "FockRepr")]
pub struct FockVector {
    n: usize,
    terms: BTreeMap<NormalWord, Complex64>,
}

#[derive(Serialize, Deserialize)]
struct FockRepr {
    #[serde(rename = "N")]
    n: usize,
    terms: Vec<(Vec<usize>, Vec<usize>, f64, f64)>,
}

impl TryFrom<FockRepr> for FockVector {
    type Error = Error;
    fn try_from(r: FockRepr) -> Result<Self> {
        if r.n < 2 {
            return Err(Error::InvalidScale(r.n));
        }
        let mut v = FockVector::zero(r.n);
        for (i, j, re, im) in r.terms {
            if let Some(&bad) = i.iter().chain(&j).find(|&&x| x >= r.n) {
                return Err(Error::IndexOutOfRange { index: bad, n: r.n });
            }
            v.add_term(NormalWord::new(i.into(), j.into()), Complex64::new(re, im));
        }
        Ok(v)
    }
}

impl From<FockVector> for FockRepr {
    fn from(v: FockVector) -> Self {
        FockRepr {
            n: v.n,
            terms: v
                .terms
                .into_iter()
                .map(|(w, c)| (w.isometries.into(), w.coisometries.into(), c.re, c.im))
                .collect(),
        }
    }
}

impl FockVector {
    pub fn zero(n: usize) -> Self {
        FockVector { n, terms: BTreeMap::new() }
    }

    /// The cyclic vector `Ω`.
    pub fn vacuum(n: usize) -> Self {
        Self::from_label(n, NormalWord::one(), Complex64::one())
    }

    pub fn from_label(n: usize, word: NormalWord, c: Complex64) -> Self {
        let mut v = Self::zero(n);
        v.add_term(word, c);
        v
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&NormalWord, &Complex64)> {
        self.terms.iter()
    }

    fn add_term(&mut self, w: NormalWord, c: Complex64) {
        let e = self.terms.entry(w).or_default();
        *e += c;
        if e.norm() <= PRUNE_TOL {
            self.terms.retain(|_, c| c.norm() > PRUNE_TOL);
        }
    }

    pub fn inner(&self, other: &FockVector) -> Result<Complex64> {
        if self.n != other.n {
            return Err(Error::InvalidScale(other.n));
        }
        let mut acc = Complex64::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let w = label_inner(a, b, self.n);
                if !w.is_zero() {
                    acc += ca.conj() * cb * ratio_f64(w);
                }
            }
        }
        Ok(acc)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.inner(self).map(|c| c.re).unwrap_or(0.0)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut v = Self::zero(self.n);
        for (w, c) in &self.terms {
            v.add_term(w.clone(), c * s);
        }
        v
    }

    pub fn axpy(&self, s: Complex64, other: &FockVector) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::InvalidScale(other.n));
        }
        let mut v = self.clone();
        for (w, c) in &other.terms {
            v.add_term(w.clone(), c * s);
        }
        Ok(v)
    }

    pub fn apply_s(&self, i: usize) -> Self {
        let mut v = Self::zero(self.n);
        for (w, c) in &self.terms {
            v.add_term(w.prepend(i), *c);
        }
        v
    }

    pub fn apply_s_star(&self, i: usize) -> Self {
        let mut v = Self::zero(self.n);
        for (w, c) in &self.terms {
            if let Some(r) = reduce(&NormalWord::s_star(i), w) {
                v.add_term(r, *c);
            }
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(v: &[usize]) -> MultiIndex {
        MultiIndex::from(v.to_vec())
    }

    fn w(i: &[usize], j: &[usize]) -> NormalWord {
        NormalWord::new(mi(i), mi(j))
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(reduce(&NormalWord::s_star(1), &NormalWord::s(1)), Some(NormalWord::one()));
        assert_eq!(reduce(&NormalWord::s_star(1), &NormalWord::s(2)), None);
        assert_eq!(reduce(&w(&[1], &[2]), &w(&[2], &[1])), Some(w(&[1], &[1])));
        assert_eq!(reduce(&w(&[], &[0, 1]), &w(&[0], &[])), Some(w(&[], &[1])));
    }

    #[test]
    fn omega_examples() {
        assert_eq!(omega(&NormalWord::one(), 2), Rational::one());
        assert_eq!(omega(&w(&[1], &[1]), 2), Rational::new(1, 2));
        assert_eq!(omega(&w(&[1], &[0]), 2), Rational::zero());
    }

    #[test]
    fn gram_examples() {
        assert_eq!(gram(&[NormalWord::one()], 2), vec![vec![Rational::one()]]);
        let pairs: Vec<NormalWord> =
            (0..2).flat_map(|i| (0..2).map(move |j| w(&[i], &[j]))).collect();
        let g = gram(&pairs, 2);
        for (a, row) in g.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                assert_eq!(*v, if a == b { Rational::new(1, 2) } else { Rational::zero() });
            }
        }
    }

    #[test]
    fn coinvariant_basis_is_orthonormal() {
        let b = coinvariant_basis(2, 1).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b[0].scale, Surd::sqrt_n_pow(2, 1));
        for (n, depth, count) in [(2, 2, 6), (3, 1, 3), (3, 2, 12)] {
            let b = coinvariant_basis(n, depth).unwrap();
            assert_eq!(b.len(), count);
            let g = gram_scaled(&b, n);
            for (a, row) in g.iter().enumerate() {
                for (c, v) in row.iter().enumerate() {
                    let t = if a == c { Rational::one() } else { Rational::zero() };
                    assert_eq!(*v, Surd::from_rational(n, t));
                }
            }
        }
        assert!(coinvariant_basis(2, 7).is_err());
    }

    #[test]
    fn compressed_norm_values() {
        assert_eq!(compressed_norm(2, 0, 1).unwrap(), 0.0);
        for depth in 2..=4 {
            let v = compressed_norm(2, 1, depth).unwrap();
            assert!((v - 0.5f64.sqrt()).abs() < 1e-12, "{depth}: {v}");
        }
    }

    #[test]
    fn wandering_examples() {
        let r = fock_wandering_check(2, 3, &[]).unwrap();
        assert!(r.pass && r.max_overlap_exact == "0");
        assert!(fock_wandering_check(2, 0, &[]).unwrap().pass);
        // Ω = Σ S_i S_i^* Ω already lies in W, so adding it changes nothing.
        assert!(fock_wandering_check(2, 2, &[NormalWord::one()]).unwrap().pass);
        let r = fock_wandering_check(2, 1, &[NormalWord::s_star(0)]).unwrap();
        assert!(!r.pass);
        assert_eq!(r.max_overlap_exact, "1/2");
    }

    #[test]
    fn vacuum_is_a_sum_of_range_projections() {
        let omega = FockVector::vacuum(2);
        let sum = (0..2)
            .map(|i| omega.apply_s_star(i).apply_s(i))
            .fold(FockVector::zero(2), |a, b| a.axpy(Complex64::one(), &b).unwrap());
        let d = sum.axpy(-Complex64::one(), &omega).unwrap();
        assert!(d.norm_sqr().abs() < 1e-15);
    }

    #[test]
    fn surd_arithmetic() {
        let r2 = Surd::sqrt_n_pow(2, 1);
        assert_eq!(r2.mul(&r2), Surd::from_rational(2, Rational::from_integer(2)));
        assert_eq!(Surd::sqrt_n_pow(3, 3).to_string(), "3√3");
    }
}
