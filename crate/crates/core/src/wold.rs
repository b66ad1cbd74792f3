//! The shift `S_0`: decay of `S_0^{*k}`, its analytic model, `λ`-eigenvectors of `S_0^*`,
//! and the Szegő kernel and Blaschke factor.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::rep::{FilterRep, Representation};
use crate::subspace::{Subspace, COINVARIANCE_TOL};
use crate::vectors::{Backend, ComplexVec, LaurentPoly};

/// `‖S_j^{*k} f‖` for `k = 0..=n_max`.
pub fn shift_decay(rep: &FilterRep, j: usize, f: &LaurentPoly, n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut v = f.clone();
    out.push(v.norm());
    for _ in 0..n_max {
        v = rep.s_star(j, &v);
        out.push(v.norm());
    }
    out
}

/// `span{S_k e_n : k ≠ 0, |n| ≤ radius}`, a finite slice of `ker S_0^*`.
pub fn s0_wandering_slice(rep: &FilterRep, radius: i64) -> Result<Subspace> {
    let mut vectors = Vec::new();
    for n in -radius..=radius {
        for k in 1..rep.n() {
            vectors.push(ComplexVec::from(rep.s(k, &LaurentPoly::e(n))));
        }
    }
    Subspace::span(Backend::Laurent, &vectors)
}

/// Largest `|⟨a|S_0^k b⟩|` over basis pairs and `1 ≤ k ≤ depth`.
pub fn s0_wandering_overlap(rep: &Representation, w: &Subspace, depth: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    let mut moved: Vec<ComplexVec> = w.basis().to_vec();
    for _ in 0..depth {
        moved = moved.iter().map(|v| rep.apply_s(0, v)).collect::<Result<_>>()?;
        for a in w.basis() {
            for b in &moved {
                worst = worst.max(a.inner(b)?.norm());
            }
        }
    }
    Ok(worst)
}

/// Truncated `Σ z^k w_k` with `w_k ∈ W`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalyticSeries {
    pub coeffs: Vec<ComplexVec>,
    /// `‖S_0^{*(n+1)} x‖²`, the mass not yet captured.
    pub tail: f64,
}

impl AnalyticSeries {
    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(ComplexVec::norm_sqr).sum()
    }
}

/// `w_k = P_W S_0^{*k} x` for `k = 0..=n`.
pub fn analytic_coefficients(rep: &Representation, w: &Subspace, x: &ComplexVec, n: usize) -> Result<AnalyticSeries> {
    let overlap = s0_wandering_overlap(rep, w, 3)?;
    if overlap > COINVARIANCE_TOL {
        return Err(Error::NotWandering { overlap });
    }
    let mut coeffs = Vec::with_capacity(n + 1);
    let mut v = x.clone();
    for _ in 0..=n {
        coeffs.push(w.project(&v)?);
        v = rep.apply_s_star(0, &v)?;
    }
    Ok(AnalyticSeries { coeffs, tail: v.norm_sqr() })
}

/// The vector `Σ_k S_0^k c_k`, kept unexpanded.
///
/// `S_0^k` spreads support like `N^k`, so inner products are evaluated on a
/// window that `S_0` maps into itself instead of materializing the sum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftSeries {
    pub terms: Vec<LaurentPoly>,
}

impl ShiftSeries {
    pub fn new(terms: Vec<LaurentPoly>) -> Self {
        ShiftSeries { terms }
    }

    fn radius(&self) -> i64 {
        self.terms.iter().map(LaurentPoly::radius).max().unwrap_or(0)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        ShiftSeries { terms: self.terms.iter().map(|t| t.scale(s)).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let len = self.terms.len().max(other.terms.len());
        let zero = LaurentPoly::zero();
        let terms = (0..len)
            .map(|k| self.terms.get(k).unwrap_or(&zero) - other.terms.get(k).unwrap_or(&zero))
            .collect();
        ShiftSeries { terms }
    }

    /// `S_0` applied: every term moves up one power.
    pub fn s0(&self) -> Self {
        let mut terms = vec![LaurentPoly::zero()];
        terms.extend(self.terms.iter().cloned());
        ShiftSeries { terms }
    }

    /// `S_0^*` applied, using `S_0^* S_0 = I`.
    pub fn s0_star(&self, rep: &FilterRep) -> Self {
        let mut terms: Vec<LaurentPoly> = self.terms.iter().skip(1).cloned().collect();
        if let Some(c0) = self.terms.first() {
            let head = rep.s_star(0, c0);
            match terms.first_mut() {
                Some(t) => *t = &*t + &head,
                None => terms.push(head),
            }
        }
        ShiftSeries { terms }
    }

    /// `⟨self|other⟩`, exact up to rounding.
    pub fn inner(&self, rep: &FilterRep, other: &Self) -> Complex64 {
        let r = self.radius().max(other.radius()).max(rep.reach(0));
        let a = &self.terms;
        let b = &other.terms;
        let half = |x: &[LaurentPoly], y: &[LaurentPoly], strict: bool| -> Complex64 {
            let per_l: Vec<Complex64> = crate::par::map_range(y.len(), |l| {
                let mut acc = Complex64::new(0.0, 0.0);
                let mut g = y[l].restrict(-r, r);
                for k in (0..=l).rev() {
                    if !(strict && k == l) {
                        if let Some(xk) = x.get(k) {
                            acc += xk.inner(&g);
                        }
                    }
                    if k > 0 {
                        g = rep.s(0, &g).restrict(-r, r);
                    }
                }
                acc
            });
            per_l.into_iter().sum()
        };
        half(a, b, false) + half(b, a, true).conj()
    }

    pub fn norm_sqr(&self, rep: &FilterRep) -> f64 {
        self.inner(rep, self).re
    }

    /// The full Laurent polynomial; support grows like `N^{len}`.
    pub fn materialize(&self, rep: &FilterRep) -> LaurentPoly {
        self.terms.iter().rev().fold(LaurentPoly::zero(), |acc, c| &rep.s(0, &acc) + c)
    }
}

/// `(I - λ̄ S_0)^{-1} w ≈ Σ_{k ≤ n} λ̄^k S_0^k w` with its residual.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LambdaEigenvector {
    pub vector: ShiftSeries,
    /// `‖S_0^* v - λ̄ v‖`.
    pub residual: f64,
    /// `|λ|^n ‖w‖ / (1 - |λ|)`.
    pub bound: f64,
    /// Floating-point allowance `4(n+1)ε ‖w‖ / (1 - |λ|)`.
    pub roundoff: f64,
}

impl LambdaEigenvector {
    pub fn pass(&self) -> bool {
        self.residual <= self.bound + self.roundoff
    }
}

fn check_lambda(lambda: Complex64) -> Result<()> {
    if lambda.norm() >= 1.0 || !lambda.norm().is_finite() {
        return Err(Error::LambdaOutsideDisk(lambda.norm()));
    }
    Ok(())
}

fn check_in_kernel(rep: &FilterRep, w: &LaurentPoly) -> Result<()> {
    let leak = rep.s_star(0, w).norm();
    if leak > COINVARIANCE_TOL * w.norm().max(1.0) {
        return Err(Error::NotWandering { overlap: leak });
    }
    Ok(())
}

pub fn neumann_series(lambda: Complex64, w: &LaurentPoly, n: usize) -> ShiftSeries {
    let lb = lambda.conj();
    ShiftSeries::new((0..=n).map(|k| w.scale(lb.powu(k as u32))).collect())
}

/// An approximate solution of `S_0^* v = λ̄ v` generated by `w ∈ ker S_0^*`.
pub fn lambda_eigenvector(rep: &FilterRep, lambda: Complex64, w: &LaurentPoly, n: usize) -> Result<LambdaEigenvector> {
    check_lambda(lambda)?;
    check_in_kernel(rep, w)?;
    let vector = neumann_series(lambda, w, n);
    let defect = vector.s0_star(rep).sub(&vector.scale(lambda.conj()));
    let residual = defect.norm_sqr(rep).max(0.0).sqrt();
    let bound = lambda.norm().powi(n as i32) * w.norm() / (1.0 - lambda.norm());
    let roundoff = 4.0 * (n + 1) as f64 * f64::EPSILON * w.norm() / (1.0 - lambda.norm());
    Ok(LambdaEigenvector { vector, residual, bound, roundoff })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelReport {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub error: f64,
    /// Truncation tail `3|λ|^n ‖w_1‖‖w_2‖ / (1 - |λ|)²`.
    pub bound: f64,
    /// Floating-point allowance `4(n+1)ε ‖w_1‖‖w_2‖ / (1 - |λ|²)`.
    pub roundoff: f64,
    pub pass: bool,
}

/// `⟨v_1|v_2⟩` against `⟨w_1|w_2⟩ / (1 - |λ|²)` for the truncated eigenvectors.
pub fn kernel_ip_check(rep: &FilterRep, lambda: Complex64, w1: &LaurentPoly, w2: &LaurentPoly, n: usize) -> Result<KernelReport> {
    check_lambda(lambda)?;
    check_in_kernel(rep, w1)?;
    check_in_kernel(rep, w2)?;
    let v1 = neumann_series(lambda, w1, n);
    let v2 = neumann_series(lambda, w2, n);
    let lhs = v1.inner(rep, &v2);
    let r = lambda.norm();
    let rhs = w1.inner(w2) / (1.0 - r * r);
    let error = (lhs - rhs).norm();
    let scale = w1.norm() * w2.norm();
    let bound = 3.0 * r.powi(n as i32) / (1.0 - r).powi(2) * scale;
    let roundoff = 4.0 * (n + 1) as f64 * f64::EPSILON * scale / (1.0 - r * r);
    Ok(KernelReport { lhs, rhs, error, bound, roundoff, pass: error <= bound + roundoff })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DiskKind {
    Szego,
    Blaschke,
}

/// `C_λ(z) = 1/(1 - λ̄z)` or `u_λ(z) = (λ - z)/(1 - λ̄z)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScalarDiskFunction {
    pub kind: DiskKind,
    pub lambda: Complex64,
}

impl ScalarDiskFunction {
    pub fn new(kind: DiskKind, lambda: Complex64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(ScalarDiskFunction { kind, lambda })
    }

    pub fn szego(lambda: Complex64) -> Result<Self> {
        Self::new(DiskKind::Szego, lambda)
    }

    pub fn blaschke(lambda: Complex64) -> Result<Self> {
        Self::new(DiskKind::Blaschke, lambda)
    }

    /// Taylor coefficients `a_0, …, a_n`.
    pub fn coeffs(&self, n: usize) -> Vec<Complex64> {
        let lb = self.lambda.conj();
        match self.kind {
            DiskKind::Szego => (0..=n).map(|k| lb.powu(k as u32)).collect(),
            DiskKind::Blaschke => {
                let m = self.lambda.norm_sqr() - 1.0;
                (0..=n).map(|k| if k == 0 { self.lambda } else { lb.powu(k as u32 - 1) * m }).collect()
            }
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let denom = Complex64::new(1.0, 0.0) - self.lambda.conj() * z;
        match self.kind {
            DiskKind::Szego => denom.inv(),
            DiskKind::Blaschke => (self.lambda - z) / denom,
        }
    }

    /// `max | |f(e^{iθ})| - 1 |` over `samples` equispaced points.
    pub fn modulus_deviation(&self, samples: usize) -> f64 {
        (0..samples)
            .map(|s| (self.eval(Complex64::cis(std::f64::consts::TAU * s as f64 / samples as f64)).norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn as_laurent(&self, n: usize) -> LaurentPoly {
        LaurentPoly::from_terms(self.coeffs(n).into_iter().enumerate().map(|(k, c)| (k as i64, c)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InnerRelationsReport {
    /// `‖Σ A_n A_n^* - I‖`.
    pub identity_residual: f64,
    /// `‖Σ A_n A_{n+k}^*‖` for `k = 1..=k_max`.
    pub shift_residuals: Vec<f64>,
}

impl InnerRelationsReport {
    pub fn max_residual(&self) -> f64 {
        self.shift_residuals.iter().copied().fold(self.identity_residual, f64::max)
    }
}

/// Residuals of the relations making `Σ A_n z^n` an inner function.
pub fn inner_relations_check(a: &[DMatrix<Complex64>], k_max: usize) -> Result<InnerRelationsReport> {
    let d = a.first().map(|m| m.nrows()).ok_or(Error::EmptySpan)?;
    if a.iter().any(|m| m.nrows() != d || m.ncols() != d) {
        return Err(Error::Unsupported("coefficient matrices must be square and equal-sized".into()));
    }
    let sum_shift = |k: usize| {
        let mut s = DMatrix::<Complex64>::zeros(d, d);
        for n in 0..a.len().saturating_sub(k) {
            s += &a[n] * a[n + k].adjoint();
        }
        s
    };
    let identity_residual = linalg::max_singular(&(sum_shift(0) - DMatrix::identity(d, d)));
    let shift_residuals = (1..=k_max).map(|k| linalg::max_singular(&sum_shift(k))).collect();
    Ok(InnerRelationsReport { identity_residual, shift_residuals })
}

/// Scalar coefficients as `1 × 1` matrices.
pub fn scalar_matrices(coeffs: &[Complex64]) -> Vec<DMatrix<Complex64>> {
    coeffs.iter().map(|&c| DMatrix::from_element(1, 1, c)).collect()
}

/// `dist(z^k f, L(u)) / ‖z^k f‖` for `f = C_λ` spanning `L(u_λ) = H_+ ⊖ u_λ H_+`.
pub fn model_space_orbit_residuals(lambda: Complex64, k_max: usize, truncation: usize) -> Result<Vec<f64>> {
    let f = ScalarDiskFunction::szego(lambda)?.as_laurent(truncation);
    let unit = f.scale_real(1.0 / f.norm());
    Ok((0..=k_max)
        .map(|k| {
            let moved = unit.shift(k as i64);
            let c = unit.inner(&moved).norm();
            (1.0 - c * c).max(0.0).sqrt()
        })
        .collect())
}
