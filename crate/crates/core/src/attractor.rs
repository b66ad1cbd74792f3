//! Normalized backward orbits `f_J = N^{|J|/2} S_J^* f`, their spans, and the `√N S_0^*` eigenspace.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::filterbank::{check_lowpass, lipschitz_m1, DEFAULT_TOL};
use crate::linalg;
use crate::rep::{FilterRep, MultiIndex, MAX_WORDS};
use crate::subspace::{Subspace, RANK_TOL};
use crate::vectors::{Backend, ComplexVec, LaurentPoly};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitRecord {
    pub index: MultiIndex,
    pub vector: LaurentPoly,
    pub sup_norm: f64,
    pub derivative_sup_norm: f64,
    pub value_at_one: Complex64,
}

fn root_n(rep: &FilterRep) -> f64 {
    (rep.n() as f64).sqrt()
}

/// `√N S_j^* f`.
pub fn normalized_star(rep: &FilterRep, j: usize, f: &LaurentPoly) -> LaurentPoly {
    rep.s_star(j, f).scale_real(root_n(rep))
}

/// `(J, f_J)` for every `|J| ≤ depth`, shortest words first.
pub fn orbit_vectors(rep: &FilterRep, f: &LaurentPoly, depth: usize) -> Result<Vec<(MultiIndex, LaurentPoly)>> {
    let n = rep.n();
    let total: u128 = (0..=depth).map(|k| (n as u128).saturating_pow(k as u32)).sum();
    if total > 2 * MAX_WORDS {
        return Err(Error::TooManyTerms { terms: total, cap: 2 * MAX_WORDS });
    }
    let mut out = vec![(MultiIndex::empty(), f.clone())];
    let mut level = out.clone();
    for _ in 0..depth {
        let next = crate::par::map(&level, |(idx, v)| {
            (0..n).map(|j| (idx.push(j), normalized_star(rep, j, v))).collect::<Vec<_>>()
        });
        level = next.into_iter().flatten().collect();
        out.extend(level.iter().cloned());
    }
    Ok(out)
}

/// Orbit records with sampled norms, for every `|J| ≤ depth`.
pub fn orbit(rep: &FilterRep, f: &LaurentPoly, depth: usize) -> Result<Vec<OrbitRecord>> {
    let vectors = orbit_vectors(rep, f, depth)?;
    Ok(crate::par::map(&vectors, |(index, v)| OrbitRecord {
        index: index.clone(),
        sup_norm: v.sup_norm(),
        derivative_sup_norm: v.derivative_sup_norm(),
        value_at_one: v.eval(Complex64::new(1.0, 0.0)),
        vector: v.clone(),
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttractorSpan {
    pub subspace: Subspace,
    /// Dimension of the span at each depth.
    pub dims: Vec<usize>,
    /// First depth at which the span stopped changing.
    pub stabilized_at: Option<usize>,
    pub stabilized: bool,
}

fn laurent_span(vectors: &[LaurentPoly]) -> Result<Subspace> {
    Subspace::span(Backend::Laurent, &vectors.iter().cloned().map(ComplexVec::from).collect::<Vec<_>>())
}

fn same_span(a: &Subspace, b: &Subspace, tol: f64) -> Result<bool> {
    Ok(a.dim() == b.dim() && a.max_principal_angle_sin(b)? <= tol)
}

/// `∨{S_I^* e_0 : |I| ≤ depth}`, the co-invariant hull of the constant function.
pub fn attractor_span(rep: &FilterRep, depth: usize, tol: f64) -> Result<AttractorSpan> {
    coinvariant_hull(rep, &[LaurentPoly::e(0)], depth, tol)
}

/// `∨{S_I^* f : |I| ≤ depth, f ∈ seeds}`; co-invariant once it stabilizes.
pub fn coinvariant_hull(rep: &FilterRep, seeds: &[LaurentPoly], depth: usize, tol: f64) -> Result<AttractorSpan> {
    iterate_spans(rep, seeds, depth, tol, true)
}

/// `A_d = span{f_J : |J| = d, f ∈ seeds}`: the span of normalized orbit points at exact depth `d`.
///
/// Once `A_d = A_{d-1}` the span is co-invariant and contains every limit of
/// the orbits, so with window probes as seeds it is the attractor subspace.
pub fn attractor_from_seeds(rep: &FilterRep, seeds: &[LaurentPoly], depth: usize, tol: f64) -> Result<AttractorSpan> {
    iterate_spans(rep, seeds, depth, tol, false)
}

fn iterate_spans(rep: &FilterRep, seeds: &[LaurentPoly], depth: usize, tol: f64, cumulative: bool) -> Result<AttractorSpan> {
    let mut current = laurent_span(seeds)?;
    let mut dims = vec![current.dim()];
    let mut stabilized_at = None;
    for d in 1..=depth {
        let mut images = Vec::new();
        for b in current.basis() {
            let b = b.as_laurent().expect("laurent backend");
            for j in 0..rep.n() {
                images.push(ComplexVec::from(normalized_star(rep, j, b)));
            }
        }
        let next = if cumulative { current.extend(&images)? } else { Subspace::span(Backend::Laurent, &images)? };
        dims.push(next.dim());
        if stabilized_at.is_none() && same_span(&next, &current, tol)? {
            stabilized_at = Some(d);
        }
        current = next;
    }
    let stabilized = stabilized_at.is_some();
    Ok(AttractorSpan { subspace: current, dims, stabilized_at, stabilized })
}

/// `e_{-radius}, …, e_radius`.
pub fn probe_seeds(radius: i64) -> Vec<LaurentPoly> {
    (-radius..=radius).map(LaurentPoly::e).collect()
}

/// Smallest window radius that `S_0^*` maps into itself.
pub fn required_window(rep: &FilterRep) -> i64 {
    rep.reach(0)
}

/// `⌈D/(N-1)⌉ + D` with `D` the degree span of `m_0`.
pub fn default_window(rep: &FilterRep) -> i64 {
    let m0 = rep.bank().filter(0);
    let span = m0.max_index().unwrap_or(0) - m0.min_index().unwrap_or(0);
    required_window(rep) + span
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Eigenspace {
    pub window: i64,
    pub dim: usize,
    /// Unit vectors, one per pivot, largest coefficient real positive.
    pub basis: Vec<LaurentPoly>,
    /// Independent solutions normalized to `f(1) = 1`.
    pub affine_basis: Vec<LaurentPoly>,
    /// `max ‖√N S_0^* f - f‖` over the basis, applied without truncation.
    pub global_residual: f64,
    pub lowpass: bool,
}

/// Kernel of `√N S_0^* - I` on `span{e_{-M..M}}`.
pub fn eigenspace(rep: &FilterRep, window: Option<i64>) -> Result<Eigenspace> {
    let required = required_window(rep);
    let m = window.unwrap_or_else(|| default_window(rep));
    if m < required {
        return Err(Error::WindowTooSmall { given: m, required });
    }
    let size = (2 * m + 1) as usize;
    let pos = |n: i64| (n + m) as usize;
    let mut matrix = nalgebra::DMatrix::<Complex64>::zeros(size, size);
    for n in -m..=m {
        let image = normalized_star(rep, 0, &LaurentPoly::e(n));
        for &(k, c) in image.terms() {
            if k.abs() > m {
                return Err(Error::WindowTooSmall { given: m, required: m + 1 });
            }
            matrix[(pos(k), pos(n))] += c;
        }
        matrix[(pos(n), pos(n))] -= Complex64::new(1.0, 0.0);
    }
    let kernel = linalg::null_space(&matrix, RANK_TOL);
    let reduced = rref_descending(&kernel, m);
    let basis: Vec<LaurentPoly> = reduced.iter().map(unit_positive).collect();
    let affine_basis = affine_solutions(&reduced);
    let global_residual = basis
        .iter()
        .map(|f| (&normalized_star(rep, 0, f) - f).norm())
        .fold(0.0, f64::max);
    let lowpass = check_lowpass(rep.polyphase(), DEFAULT_TOL).pass;
    Ok(Eigenspace { window: m, dim: basis.len(), basis, affine_basis, global_residual, lowpass })
}

/// Row-reduces kernel vectors with pivots taken from the highest exponent down.
fn rref_descending(kernel: &[nalgebra::DVector<Complex64>], m: i64) -> Vec<LaurentPoly> {
    let size = (2 * m + 1) as usize;
    let mut rows: Vec<Vec<Complex64>> =
        kernel.iter().map(|v| (0..size).rev().map(|i| v[i]).collect()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..size {
        if r == rows.len() {
            break;
        }
        let (best, mag) = (r..rows.len())
            .map(|i| (i, rows[i][col].norm()))
            .fold((r, -1.0), |a, b| if b.1 > a.1 { b } else { a });
        if mag < RANK_TOL {
            continue;
        }
        rows.swap(r, best);
        let p = rows[r][col];
        rows[r].iter_mut().for_each(|x| *x /= p);
        for i in 0..rows.len() {
            if i != r {
                let f = rows[i][col];
                if f.norm() > 0.0 {
                    let pivot_row = rows[r].clone();
                    rows[i].iter_mut().zip(&pivot_row).for_each(|(x, y)| *x -= f * y);
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    rows.truncate(r);
    rows.iter()
        .map(|row| LaurentPoly::from_terms(row.iter().enumerate().map(|(i, &c)| (m - i as i64, clean(c)))))
        .collect()
}

fn clean(c: Complex64) -> Complex64 {
    let snap = |x: f64| if (x - x.round()).abs() < 1e-12 { x.round() } else { x };
    Complex64::new(snap(c.re), snap(c.im))
}

fn unit_positive(f: &LaurentPoly) -> LaurentPoly {
    let lead = f
        .terms()
        .iter()
        .rev()
        .fold((0.0, Complex64::new(1.0, 0.0)), |a, &(_, c)| if c.norm() > a.0 + 1e-12 { (c.norm(), c) } else { a })
        .1;
    let phase = lead.conj() / lead.norm();
    f.scale(phase / f.norm())
}

fn value_at_one(f: &LaurentPoly) -> Complex64 {
    f.eval(Complex64::new(1.0, 0.0))
}

/// `a_0 = r_0 / r_0(1)` and `a_k = (a_0 + t r_k) / (1 + t r_k(1))` for the remaining pivots.
fn affine_solutions(reduced: &[LaurentPoly]) -> Vec<LaurentPoly> {
    let Some(first) = reduced.iter().position(|r| value_at_one(r).norm() > RANK_TOL) else {
        return Vec::new();
    };
    let a0 = reduced[first].scale(value_at_one(&reduced[first]).inv());
    let mut out = vec![a0.clone()];
    for (i, r) in reduced.iter().enumerate() {
        if i == first {
            continue;
        }
        let v = value_at_one(r);
        let t = if (Complex64::new(1.0, 0.0) + v).norm() > RANK_TOL { 1.0 } else { 2.0 };
        let denom = Complex64::new(1.0, 0.0) + v * t;
        out.push((&a0 + &r.scale_real(t)).scale(denom.inv()));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LipschitzRow {
    pub index: MultiIndex,
    /// `‖f_J'‖ = N^{k/2} ‖(S_J^* f)'‖`.
    pub lhs: f64,
    /// `N^{-k/2} ‖f'‖ + M_1 ‖f‖`.
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
    pub norm: f64,
    /// `N^{-k/2} ‖f'‖ + (M_1 + K) ‖f‖`.
    pub norm_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LipschitzReport {
    pub m1: f64,
    /// `max_J |f_J(1)| / ‖f‖`.
    pub k_estimate: f64,
    pub rows: Vec<LipschitzRow>,
    pub derivative_pass: bool,
    pub norm_pass: bool,
    /// First index where the derivative estimate fails.
    pub first_failure: Option<MultiIndex>,
}

/// Relative slack allowed for sampled sup norms.
pub const GRID_SLACK: f64 = 1e-6;

/// Compares the sampled orbit derivatives with the Lipschitz estimate for every `|J| ≤ depth`.
pub fn lipschitz_bound_check(rep: &FilterRep, f: &LaurentPoly, depth: usize) -> Result<LipschitzReport> {
    let m1 = lipschitz_m1(rep.bank());
    let records = orbit(rep, f, depth)?;
    let sup = f.sup_norm();
    let dsup = f.derivative_sup_norm();
    let k_estimate =
        if sup > 0.0 { records.iter().map(|r| r.value_at_one.norm()).fold(0.0, f64::max) / sup } else { 0.0 };
    let root = root_n(rep);
    let rows: Vec<LipschitzRow> = records
        .iter()
        .map(|r| {
            let k = r.index.len() as i32;
            let decay = root.powi(-k) * dsup;
            let rhs = decay + m1 * sup;
            let lhs = r.derivative_sup_norm;
            let norm_bound = decay + (m1 + k_estimate) * sup;
            LipschitzRow {
                index: r.index.clone(),
                lhs,
                rhs,
                slack: rhs - lhs,
                pass: lhs <= rhs + GRID_SLACK * rhs,
                norm: r.sup_norm,
                norm_bound,
            }
        })
        .collect();
    let first_failure = rows.iter().find(|r| !r.pass).map(|r| r.index.clone());
    let norm_pass = rows.iter().all(|r| r.norm <= r.norm_bound * (1.0 + GRID_SLACK));
    Ok(LipschitzReport { m1, k_estimate, derivative_pass: first_failure.is_none(), rows, norm_pass, first_failure })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointEvaluationReport {
    /// `|√N (S_j^* f)(1) - f(ρ^{-j})|` for each `j`.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub pass: bool,
}

/// `√N (S_j^* f)(1) = f(ρ^{-j})`; for `j = 0` this is `f(1)`.
pub fn point_evaluation_check(rep: &FilterRep, f: &LaurentPoly) -> Result<PointEvaluationReport> {
    let low = check_lowpass(rep.polyphase(), DEFAULT_TOL);
    if !low.pass {
        return Err(Error::NotLowpass { deviation: low.matrix_deviation.max(low.filter_deviation) });
    }
    let n = rep.n();
    let residuals: Vec<f64> = (0..n)
        .map(|j| {
            let lhs = value_at_one(&normalized_star(rep, j, f));
            let z = Complex64::cis(-std::f64::consts::TAU * j as f64 / n as f64);
            (lhs - f.eval(z)).norm()
        })
        .collect();
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    Ok(PointEvaluationReport { residuals, max_residual, pass: max_residual <= DEFAULT_TOL })
}
