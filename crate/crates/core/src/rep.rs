//! Representations of the Cuntz relations: filter, step-function and Fock backends.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filterbank::{check_unitary, polyphase, FilterBank, PolyphaseMatrix, DEFAULT_TOL};
use crate::fock::FockVector;
use crate::vectors::{step_cells, Backend, ComplexVec, LaurentPoly, StepFunction};

/// Cap on the number of words enumerated at one level.
pub const MAX_WORDS: u128 = 1 << 12;

/// A finite word over `{0, …, N-1}`; `S_I = S_{i_1} ⋯ S_{i_k}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn empty() -> Self {
        MultiIndex(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn push(&self, j: usize) -> Self {
        let mut v = self.0.clone();
        v.push(j);
        MultiIndex(v)
    }

    pub fn prepend(&self, j: usize) -> Self {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(j);
        v.extend_from_slice(&self.0);
        MultiIndex(v)
    }

    pub fn concat(&self, other: &MultiIndex) -> Self {
        MultiIndex([self.0.as_slice(), other.0.as_slice()].concat())
    }

    /// The remainder of `self` after `prefix`, if `prefix` is one.
    pub fn strip_prefix(&self, prefix: &MultiIndex) -> Option<MultiIndex> {
        self.0.strip_prefix(prefix.0.as_slice()).map(|r| MultiIndex(r.to_vec()))
    }

    /// All `N^k` words of length `k` in lexicographic order.
    pub fn all_of_length(n: usize, k: usize) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex::empty()];
        for _ in 0..k {
            out = out.iter().flat_map(|w| (0..n).map(move |j| w.push(j))).collect();
        }
        out
    }

    pub fn check(&self, n: usize) -> Result<()> {
        match self.0.iter().find(|&&j| j >= n) {
            Some(&j) => Err(Error::IndexOutOfRange { index: j, n }),
            None => Ok(()),
        }
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        MultiIndex(v)
    }
}

impl From<MultiIndex> for Vec<usize> {
    fn from(m: MultiIndex) -> Self {
        m.0
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|j| j.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for MultiIndex {
    type Err = std::num::ParseIntError;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(MultiIndex::empty());
        }
        s.split(',').map(|p| p.trim().parse()).collect::<std::result::Result<Vec<_>, _>>().map(MultiIndex)
    }
}

fn word_count(n: usize, k: usize) -> Result<u128> {
    let terms = (n as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if terms > MAX_WORDS {
        return Err(Error::TooManyTerms { terms, cap: MAX_WORDS });
    }
    Ok(terms)
}

/// `S_j f = m_j · f(z^N)` on Laurent polynomials.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterRep {
    bank: FilterBank,
    polyphase: PolyphaseMatrix,
    adjoint_entries: Vec<Vec<LaurentPoly>>,
}

impl FilterRep {
    /// Rejects banks whose polyphase matrix is not unitary.
    pub fn new(bank: FilterBank) -> Result<Self> {
        let report = check_unitary(&polyphase(&bank), DEFAULT_TOL);
        if !report.pass {
            return Err(Error::NotUnitary { residual: report.max_residual });
        }
        Ok(Self::new_unchecked(bank))
    }

    /// Builds the operators without the unitarity check, for diagnostics.
    pub fn new_unchecked(bank: FilterBank) -> Self {
        let polyphase = polyphase(&bank);
        let adjoint_entries =
            polyphase.entries().iter().map(|row| row.iter().map(LaurentPoly::tilde).collect()).collect();
        FilterRep { bank, polyphase, adjoint_entries }
    }

    pub fn n(&self) -> usize {
        self.bank.n()
    }

    pub fn bank(&self) -> &FilterBank {
        &self.bank
    }

    pub fn polyphase(&self) -> &PolyphaseMatrix {
        &self.polyphase
    }

    pub fn s(&self, j: usize, f: &LaurentPoly) -> LaurentPoly {
        self.bank.filter(j).mul(&f.compose_power(self.n()))
    }

    /// `S_j^* f = Σ_k Ã_{j,k} · T_k^* f`.
    pub fn s_star(&self, j: usize, f: &LaurentPoly) -> LaurentPoly {
        let n = self.n();
        (0..n).fold(LaurentPoly::zero(), |acc, k| {
            let part = f.downsample(k, n).expect("k < N");
            &acc + &self.adjoint_entries[j][k].mul(&part)
        })
    }

    pub fn word(&self, idx: &MultiIndex, f: &LaurentPoly) -> LaurentPoly {
        idx.as_slice().iter().rev().fold(f.clone(), |v, &j| self.s(j, &v))
    }

    pub fn word_star(&self, idx: &MultiIndex, f: &LaurentPoly) -> LaurentPoly {
        idx.as_slice().iter().fold(f.clone(), |v, &j| self.s_star(j, &v))
    }

    /// Smallest `R` such that `S_j` restricted to `e_{-R..R}` only needs inputs from that window.
    pub fn reach(&self, j: usize) -> i64 {
        let m = self.bank.filter(j);
        let (lo, hi) = (m.min_index().unwrap_or(0), m.max_index().unwrap_or(0));
        let n1 = self.n() as i64 - 1;
        let need = hi.max(-lo).max(0);
        (need + n1 - 1) / n1
    }
}

/// N-adic step representation: `S_j f = √N · χ_{C_j} · f(Nx mod 1)`.
///
/// `C_j` is the union of the level-`p` cells that `assignment` maps to `j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRep {
    #[serde(rename = "N")]
    n: usize,
    level: u32,
    assignment: Vec<usize>,
}

impl StepRep {
    /// Each `C_j` must meet every fibre of `x ↦ Nx mod 1` exactly once.
    pub fn new(n: usize, level: u32, assignment: Vec<usize>) -> Result<Self> {
        if level == 0 {
            return Err(Error::InvalidAssignment("level must be at least 1".into()));
        }
        let len = step_cells(n, level)?;
        if assignment.len() != len {
            return Err(Error::InvalidAssignment(format!("expected {len} cells, got {}", assignment.len())));
        }
        let fibre = len / n;
        for r in 0..fibre {
            let mut seen = vec![false; n];
            for t in 0..n {
                let j = assignment[r + t * fibre];
                if j >= n || seen[j] {
                    return Err(Error::InvalidAssignment(format!("fibre over cell {r} is not a permutation")));
                }
                seen[j] = true;
            }
        }
        Ok(StepRep { n, level, assignment })
    }

    /// `N = 2` with `A = [0,1/4) ∪ [3/4,1)` and `B = [1/4,3/4)`.
    pub fn dyadic_default() -> Self {
        StepRep::new(2, 2, vec![0, 1, 1, 0]).expect("valid assignment")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Indicator of `C_j`.
    pub fn cell_set(&self, j: usize) -> StepFunction {
        let cells: Vec<usize> = (0..self.assignment.len()).filter(|&c| self.assignment[c] == j).collect();
        StepFunction::indicator(self.n, self.level, &cells).expect("cells in range")
    }

    fn assigned(&self, level: u32, c: usize) -> usize {
        self.assignment[c / self.n.pow(level - self.level)]
    }

    pub fn s(&self, j: usize, f: &StepFunction) -> Result<StepFunction> {
        let n = self.n;
        let out = (f.level() + 1).max(self.level);
        let len = step_cells(n, out)?;
        let inner = f.refine(out - 1)?;
        let fibre = len / n;
        let root = (n as f64).sqrt();
        let values = (0..len)
            .map(|c| if self.assigned(out, c) == j { inner.values()[c % fibre] * root } else { Complex64::new(0.0, 0.0) })
            .collect();
        Ok(StepFunction::new(n, out, values)?.coarsened())
    }

    pub fn s_star(&self, j: usize, g: &StepFunction) -> Result<StepFunction> {
        let n = self.n;
        let level = g.level().max(self.level);
        let g = g.refine(level)?;
        let fibre = step_cells(n, level - 1)?;
        let root = (n as f64).sqrt();
        let values = (0..fibre)
            .map(|d| {
                (0..n)
                    .map(|t| d + t * fibre)
                    .filter(|&c| self.assigned(level, c) == j)
                    .map(|c| g.values()[c])
                    .sum::<Complex64>()
                    / root
            })
            .collect();
        Ok(StepFunction::new(n, level - 1, values)?.coarsened())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum RepSpec {
    Filter { bank: FilterBank },
    Base {
        #[serde(rename = "N")]
        n: usize,
    },
    Step {
        #[serde(rename = "N")]
        n: usize,
        level: u32,
        assignment: Vec<usize>,
    },
    Fock {
        #[serde(rename = "N")]
        n: usize,
    },
}

/// An operator backend providing `S_j` and `S_j^*`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RepSpec", into = "RepSpec")]
pub enum Representation {
    Filter(FilterRep),
    Step(StepRep),
    /// GNS representation of `ω(s_I s_J^*) = δ_{IJ} N^{-|I|}`.
    Fock { n: usize },
}

impl TryFrom<RepSpec> for Representation {
    type Error = Error;
    fn try_from(s: RepSpec) -> Result<Self> {
        match s {
            RepSpec::Filter { bank } => Ok(Representation::Filter(FilterRep::new(bank)?)),
            RepSpec::Base { n } => Representation::base(n),
            RepSpec::Step { n, level, assignment } => Ok(Representation::Step(StepRep::new(n, level, assignment)?)),
            RepSpec::Fock { n } if n >= 2 => Ok(Representation::Fock { n }),
            RepSpec::Fock { n } => Err(Error::InvalidScale(n)),
        }
    }
}

impl From<Representation> for RepSpec {
    fn from(r: Representation) -> Self {
        match r {
            Representation::Filter(f) => RepSpec::Filter { bank: f.bank },
            Representation::Step(s) => RepSpec::Step { n: s.n, level: s.level, assignment: s.assignment },
            Representation::Fock { n } => RepSpec::Fock { n },
        }
    }
}

impl Representation {
    /// The permutative representation `T_j e_n = e_{Nn+j}`.
    pub fn base(n: usize) -> Result<Self> {
        Ok(Representation::Filter(FilterRep::new(FilterBank::identity(n)?)?))
    }

    pub fn filter(bank: FilterBank) -> Result<Self> {
        Ok(Representation::Filter(FilterRep::new(bank)?))
    }

    pub fn n(&self) -> usize {
        match self {
            Representation::Filter(f) => f.n(),
            Representation::Step(s) => s.n,
            Representation::Fock { n } => *n,
        }
    }

    pub fn backend(&self) -> Backend {
        match self {
            Representation::Filter(_) => Backend::Laurent,
            Representation::Step(_) => Backend::Step,
            Representation::Fock { .. } => Backend::Fock,
        }
    }

    pub fn as_filter(&self) -> Option<&FilterRep> {
        match self {
            Representation::Filter(f) => Some(f),
            _ => None,
        }
    }

    fn check_index(&self, j: usize) -> Result<()> {
        if j >= self.n() {
            return Err(Error::IndexOutOfRange { index: j, n: self.n() });
        }
        Ok(())
    }

    fn mismatch(&self, v: &ComplexVec) -> Error {
        Error::BackendMismatch { expected: self.backend(), found: v.backend() }
    }

    pub fn apply_s(&self, j: usize, v: &ComplexVec) -> Result<ComplexVec> {
        self.check_index(j)?;
        match (self, v) {
            (Representation::Filter(r), ComplexVec::Laurent(f)) => Ok(r.s(j, f).into()),
            (Representation::Step(r), ComplexVec::Step(f)) => Ok(r.s(j, f)?.into()),
            (Representation::Fock { .. }, ComplexVec::Fock(f)) => Ok(f.apply_s(j).into()),
            _ => Err(self.mismatch(v)),
        }
    }

    pub fn apply_s_star(&self, j: usize, v: &ComplexVec) -> Result<ComplexVec> {
        self.check_index(j)?;
        match (self, v) {
            (Representation::Filter(r), ComplexVec::Laurent(f)) => Ok(r.s_star(j, f).into()),
            (Representation::Step(r), ComplexVec::Step(f)) => Ok(r.s_star(j, f)?.into()),
            (Representation::Fock { .. }, ComplexVec::Fock(f)) => Ok(f.apply_s_star(j).into()),
            _ => Err(self.mismatch(v)),
        }
    }

    /// `S_I v`; the last letter acts first.
    pub fn apply_word(&self, idx: &MultiIndex, v: &ComplexVec) -> Result<ComplexVec> {
        idx.as_slice().iter().rev().try_fold(v.clone(), |acc, &j| self.apply_s(j, &acc))
    }

    /// `S_I^* v = S_{i_k}^* ⋯ S_{i_1}^* v`.
    pub fn apply_word_star(&self, idx: &MultiIndex, v: &ComplexVec) -> Result<ComplexVec> {
        idx.as_slice().iter().try_fold(v.clone(), |acc, &j| self.apply_s_star(j, &acc))
    }

    /// `E_j = S_j S_j^*`.
    pub fn projection_e(&self, j: usize, v: &ComplexVec) -> Result<ComplexVec> {
        self.apply_s(j, &self.apply_s_star(j, v)?)
    }

    /// Largest violation of `S_i^* S_j = δ_{ij}` and `Σ E_j = I` over the probes.
    pub fn cuntz_residual(&self, probes: &[ComplexVec]) -> Result<f64> {
        let n = self.n();
        let per_probe = crate::par::map(probes, |v| -> Result<f64> {
            let mut worst: f64 = 0.0;
            let mut sum = v.zero_like();
            for j in 0..n {
                let sj = self.apply_s(j, v)?;
                for i in 0..n {
                    let back = self.apply_s_star(i, &sj)?;
                    let target = if i == j { v.clone() } else { v.zero_like() };
                    worst = worst.max(back.distance(&target)?);
                }
                sum = sum.add(&self.projection_e(j, v)?)?;
            }
            Ok(worst.max(sum.distance(v)?))
        });
        per_probe.into_iter().try_fold(0.0, |a: f64, r| Ok(a.max(r?)))
    }

    /// `S_J^* v` for every `|J| = k`, in lexicographic order of `J`.
    pub fn star_orbit_level(&self, v: &ComplexVec, k: usize) -> Result<Vec<ComplexVec>> {
        word_count(self.n(), k)?;
        let mut level = vec![v.clone()];
        for _ in 0..k {
            let next: Vec<Result<Vec<ComplexVec>>> = crate::par::map(&level, |u| {
                (0..self.n()).map(|j| self.apply_s_star(j, u)).collect::<Result<Vec<_>>>()
            });
            level = next.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect();
        }
        Ok(level)
    }

    /// `|Σ_{|I|=k} ‖S_I^* x‖² - ‖x‖²|`.
    pub fn parseval_level(&self, x: &ComplexVec, k: usize) -> Result<f64> {
        let total: f64 = self.star_orbit_level(x, k)?.iter().map(ComplexVec::norm_sqr).sum();
        Ok((total - x.norm_sqr()).abs())
    }
}

/// The cyclic vector `Ω` of the Fock backend.
pub fn fock_vacuum(n: usize) -> ComplexVec {
    FockVector::vacuum(n).into()
}
