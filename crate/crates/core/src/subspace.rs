//! Finite-dimensional subspaces and the co-invariance, wandering, stability and saturation calculus.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::rep::{Representation, MAX_WORDS};
use crate::vectors::{Backend, ComplexVec, LaurentPoly, StepFunction};

/// Gram–Schmidt drops vectors whose residual norm is below this.
pub const RANK_TOL: f64 = 1e-9;
pub const COINVARIANCE_TOL: f64 = 1e-10;

/// An orthonormal family spanning a subspace of one backend.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SubspaceRepr", into = "SubspaceRepr")]
pub struct Subspace {
    backend: Backend,
    basis: Vec<ComplexVec>,
}

#[derive(Serialize, Deserialize)]
struct SubspaceRepr {
    backend: Backend,
    basis: Vec<ComplexVec>,
}

impl TryFrom<SubspaceRepr> for Subspace {
    type Error = Error;
    /// Files may hold any spanning set; it is orthonormalized on load.
    fn try_from(r: SubspaceRepr) -> Result<Self> {
        if let Some(v) = r.basis.iter().find(|v| v.backend() != r.backend) {
            return Err(Error::BackendMismatch { expected: r.backend, found: v.backend() });
        }
        Subspace::span(r.backend, &r.basis)
    }
}

impl From<Subspace> for SubspaceRepr {
    fn from(s: Subspace) -> Self {
        SubspaceRepr { backend: s.backend, basis: s.basis }
    }
}

impl Subspace {
    pub fn empty(backend: Backend) -> Self {
        Subspace { backend, basis: Vec::new() }
    }

    /// Modified Gram–Schmidt with one re-orthogonalization pass; input order is kept.
    pub fn orthonormalize(vectors: Vec<ComplexVec>) -> Result<Self> {
        let backend = vectors.first().ok_or(Error::EmptySpan)?.backend();
        let s = Self::span(backend, &vectors)?;
        if s.basis.is_empty() {
            return Err(Error::EmptySpan);
        }
        Ok(s)
    }

    /// Like [`Subspace::orthonormalize`] but allows the zero subspace.
    pub fn span(backend: Backend, vectors: &[ComplexVec]) -> Result<Self> {
        Subspace::empty(backend).extend(vectors)
    }

    /// The span of `self` and `vectors`, keeping the current basis as a prefix.
    pub fn extend(&self, vectors: &[ComplexVec]) -> Result<Self> {
        let mut out = self.clone();
        for v in vectors {
            if v.backend() != self.backend {
                return Err(Error::BackendMismatch { expected: self.backend, found: v.backend() });
            }
            let r = out.residual(v)?;
            let norm = r.norm();
            if norm >= RANK_TOL {
                out.basis.push(r.scale(Complex64::new(1.0 / norm, 0.0)));
            }
        }
        Ok(out)
    }

    pub fn from_laurent(vectors: &[LaurentPoly]) -> Result<Self> {
        Self::span(Backend::Laurent, &vectors.iter().cloned().map(ComplexVec::from).collect::<Vec<_>>())
    }

    /// `span{e_n : n ∈ indices}`.
    pub fn monomials(indices: &[i64]) -> Self {
        let basis = indices.iter().map(|&n| LaurentPoly::e(n).into()).collect();
        Subspace { backend: Backend::Laurent, basis }
    }

    pub fn from_step(vectors: &[StepFunction]) -> Result<Self> {
        Self::span(Backend::Step, &vectors.iter().cloned().map(ComplexVec::from).collect::<Vec<_>>())
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[ComplexVec] {
        &self.basis
    }

    /// `⟨b_i|v⟩` for each basis vector.
    pub fn coordinates(&self, v: &ComplexVec) -> Result<Vec<Complex64>> {
        self.basis.iter().map(|b| b.inner(v)).collect()
    }

    /// `(I - P) v`, with two projection sweeps.
    pub fn residual(&self, v: &ComplexVec) -> Result<ComplexVec> {
        let mut r = v.clone();
        for _ in 0..2 {
            for b in &self.basis {
                let c = b.inner(&r)?;
                r = r.axpy(-c, b)?;
            }
        }
        Ok(r)
    }

    pub fn project(&self, v: &ComplexVec) -> Result<ComplexVec> {
        v.sub(&self.residual(v)?)
    }

    pub fn distance(&self, v: &ComplexVec) -> Result<f64> {
        Ok(self.residual(v)?.norm())
    }

    /// `max_b dist(b, self)` over the basis of `other`.
    pub fn containment_residual(&self, other: &Subspace) -> Result<f64> {
        let d = crate::par::map(&other.basis, |b| self.distance(b));
        d.into_iter().try_fold(0.0, |a: f64, r| Ok(a.max(r?)))
    }

    pub fn contains(&self, other: &Subspace, tol: f64) -> Result<bool> {
        Ok(self.containment_residual(other)? <= tol)
    }

    /// Sine of the largest principal angle; 1 when dimensions differ.
    pub fn max_principal_angle_sin(&self, other: &Subspace) -> Result<f64> {
        if self.dim() != other.dim() {
            return Ok(1.0);
        }
        let one_way = |a: &Subspace, b: &Subspace| -> Result<f64> {
            let residuals: Vec<ComplexVec> = a.basis.iter().map(|x| b.residual(x)).collect::<Result<_>>()?;
            let k = residuals.len();
            let mut g = nalgebra::DMatrix::<Complex64>::zeros(k, k);
            for r in 0..k {
                for c in 0..k {
                    g[(r, c)] = residuals[r].inner(&residuals[c])?;
                }
            }
            Ok(linalg::hermitian_max_eig(&g).max(0.0).sqrt())
        };
        Ok(one_way(self, other)?.max(one_way(other, self)?).min(1.0))
    }

    /// Largest principal angle in radians.
    pub fn max_principal_angle(&self, other: &Subspace) -> Result<f64> {
        Ok(self.max_principal_angle_sin(other)?.asin())
    }

    pub fn gram_deviation(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate() {
                let t = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.inner(b)? - t).norm());
            }
        }
        Ok(worst)
    }

    /// `self ∨ other`.
    pub fn join(&self, other: &Subspace) -> Result<Subspace> {
        self.extend(&other.basis)
    }

    /// `{x ∈ ambient : x ⊥ self}`.
    pub fn complement_in(&self, ambient: &Subspace) -> Result<Subspace> {
        if ambient.is_empty() {
            return Ok(Subspace::empty(ambient.backend));
        }
        let images: Vec<ComplexVec> = ambient.basis.clone();
        let m = linalg::coordinates(self, &images)?;
        let kernel = linalg::null_space(&m, RANK_TOL);
        let vectors: Vec<ComplexVec> =
            kernel.iter().map(|c| linalg::combine(&images, c)).collect::<Result<_>>()?;
        Subspace::span(ambient.backend, &vectors)
    }
}

fn check_backend(rep: &Representation, l: &Subspace) -> Result<()> {
    if rep.backend() != l.backend {
        return Err(Error::BackendMismatch { expected: rep.backend(), found: l.backend });
    }
    Ok(())
}

fn images(rep: &Representation, l: &Subspace, star: bool) -> Result<Vec<ComplexVec>> {
    let n = rep.n();
    let pairs: Vec<(usize, usize)> = (0..l.dim()).flat_map(|b| (0..n).map(move |j| (b, j))).collect();
    let out = crate::par::map(&pairs, |&(b, j)| {
        if star {
            rep.apply_s_star(j, &l.basis[b])
        } else {
            rep.apply_s(j, &l.basis[b])
        }
    });
    out.into_iter().collect()
}

/// `S L = span{S_j x}`.
pub fn alpha_project(rep: &Representation, l: &Subspace) -> Result<Subspace> {
    check_backend(rep, l)?;
    Subspace::span(l.backend, &images(rep, l, false)?)
}

/// `S^* L = span{S_j^* x}`.
pub fn star_image(rep: &Representation, l: &Subspace) -> Result<Subspace> {
    check_backend(rep, l)?;
    Subspace::span(l.backend, &images(rep, l, true)?)
}

/// A residual and whether it is within tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub pass: bool,
    pub residual: f64,
}

impl Certificate {
    fn new(residual: f64, tol: f64) -> Self {
        Certificate { pass: residual <= tol, residual }
    }
}

fn max_distance(l: &Subspace, vectors: &[ComplexVec]) -> Result<f64> {
    let d = crate::par::map(vectors, |v| l.distance(v));
    d.into_iter().try_fold(0.0, |a: f64, r| Ok(a.max(r?)))
}

/// `S_j^* L ⊆ L` for all `j`.
pub fn is_coinvariant(rep: &Representation, l: &Subspace, tol: f64) -> Result<Certificate> {
    check_backend(rep, l)?;
    Ok(Certificate::new(max_distance(l, &images(rep, l, true)?)?, tol))
}

/// `L ⊆ S L`.
pub fn is_contained_in_sl(rep: &Representation, l: &Subspace, tol: f64) -> Result<Certificate> {
    let sl = alpha_project(rep, l)?;
    Ok(Certificate::new(sl.containment_residual(l)?, tol))
}

/// `E_j L ⊆ L` for all `j`.
pub fn is_stable(rep: &Representation, l: &Subspace, tol: f64) -> Result<Certificate> {
    check_backend(rep, l)?;
    let projected = projections(rep, l)?;
    Ok(Certificate::new(max_distance(l, &projected)?, tol))
}

fn projections(rep: &Representation, l: &Subspace) -> Result<Vec<ComplexVec>> {
    let mut out = Vec::new();
    for x in &l.basis {
        for j in 0..rep.n() {
            out.push(rep.projection_e(j, x)?);
        }
    }
    Ok(out)
}

fn require_coinvariant(rep: &Representation, l: &Subspace) -> Result<()> {
    let c = is_coinvariant(rep, l, COINVARIANCE_TOL)?;
    if !c.pass {
        return Err(Error::NotCoinvariant { residual: c.residual });
    }
    Ok(())
}

/// `μ(L) = S L ⊖ L` for co-invariant `L`.
pub fn wandering_part(rep: &Representation, l: &Subspace) -> Result<Subspace> {
    require_coinvariant(rep, l)?;
    let sl = alpha_project(rep, l)?;
    let residuals: Vec<ComplexVec> = sl.basis.iter().map(|v| l.residual(v)).collect::<Result<_>>()?;
    Subspace::span(l.backend, &residuals)
}

/// `∨{E_j L}`, the smallest stable space containing a co-invariant `L`.
pub fn stabilize(rep: &Representation, l: &Subspace) -> Result<Subspace> {
    require_coinvariant(rep, l)?;
    Subspace::span(l.backend, &projections(rep, l)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WanderingReport {
    pub pass: bool,
    pub max_overlap: f64,
}

/// Largest `|⟨x|S_I y⟩|` over basis vectors and `1 ≤ |I| ≤ depth`.
pub fn is_wandering(rep: &Representation, w: &Subspace, depth: usize, tol: f64) -> Result<WanderingReport> {
    check_backend(rep, w)?;
    let mut worst: f64 = 0.0;
    let mut level: Vec<ComplexVec> = w.basis.clone();
    for k in 1..=depth {
        let words = (rep.n() as u128).pow(k as u32) * w.dim() as u128;
        if words > MAX_WORDS * 16 {
            return Err(Error::TooManyTerms { terms: words, cap: MAX_WORDS * 16 });
        }
        let next = crate::par::map(&level, |y| (0..rep.n()).map(|j| rep.apply_s(j, y)).collect::<Result<Vec<_>>>());
        level = next.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect();
        let overlaps = crate::par::map(&level, |sy| -> Result<f64> {
            w.basis.iter().try_fold(0.0, |a: f64, x| Ok(a.max(x.inner(sy)?.norm())))
        });
        for o in overlaps {
            worst = worst.max(o?);
        }
    }
    Ok(WanderingReport { pass: worst <= tol, max_overlap: worst })
}

/// `S^k L` for `k = 0..=depth`.
pub fn power_layers(rep: &Representation, l: &Subspace, depth: usize) -> Result<Vec<Subspace>> {
    let mut layers = vec![l.clone()];
    for _ in 0..depth {
        let next = alpha_project(rep, layers.last().expect("nonempty"))?;
        layers.push(next);
    }
    Ok(layers)
}

/// `∨_{k ≤ depth} S^k L`.
pub fn generated_span(rep: &Representation, l: &Subspace, depth: usize) -> Result<Subspace> {
    power_layers(rep, l, depth)?.iter().try_fold(Subspace::empty(l.backend), |acc, s| acc.join(s))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decomposition {
    /// `L, W, S W, …, S^depth W`.
    pub layers: Vec<Subspace>,
    pub max_overlap: f64,
    /// Distance of `S^{k+1} L` from `L ⊕ W ⊕ ⋯ ⊕ S^k W`, for `k < depth`.
    pub inclusion_residuals: Vec<f64>,
}

/// `H ⊇ L ⊕ W ⊕ S W ⊕ ⋯` for a co-invariant, non-reducing `L`.
pub fn decompose(rep: &Representation, l: &Subspace, depth: usize) -> Result<Decomposition> {
    let w = wandering_part(rep, l)?;
    if w.is_empty() {
        return Err(Error::Reducing);
    }
    let mut layers = vec![l.clone()];
    layers.extend(power_layers(rep, &w, depth)?);
    let mut max_overlap: f64 = 0.0;
    for a in 0..layers.len() {
        for b in a + 1..layers.len() {
            for x in &layers[a].basis {
                for y in &layers[b].basis {
                    max_overlap = max_overlap.max(x.inner(y)?.norm());
                }
            }
        }
    }
    let powers = power_layers(rep, l, depth)?;
    let mut inclusion_residuals = Vec::new();
    let mut partial = l.join(&layers[1])?;
    for k in 0..depth {
        inclusion_residuals.push(partial.containment_residual(&powers[k + 1])?);
        partial = partial.join(&layers[k + 2])?;
    }
    Ok(Decomposition { layers, max_overlap, inclusion_residuals })
}

/// The finite window a saturation claim is tested against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Window {
    /// `span{e_{-radius}, …, e_radius}`.
    Laurent { radius: i64 },
    /// All step functions at `level`.
    Step {
        #[serde(rename = "N")]
        n: usize,
        level: u32,
    },
}

impl Window {
    /// Orthonormal basis of the window.
    pub fn basis(&self) -> Result<Vec<ComplexVec>> {
        match *self {
            Window::Laurent { radius } => Ok((-radius..=radius).map(|n| LaurentPoly::e(n).into()).collect()),
            Window::Step { n, level } => {
                let cells = crate::vectors::step_cells(n, level)?;
                let s = Complex64::new((cells as f64).sqrt(), 0.0);
                (0..cells)
                    .map(|c| Ok(StepFunction::indicator(n, level, &[c])?.scale(s).into()))
                    .collect()
            }
        }
    }

    pub fn subspace(&self) -> Result<Subspace> {
        let backend = match self {
            Window::Laurent { .. } => Backend::Laurent,
            Window::Step { .. } => Backend::Step,
        };
        Ok(Subspace { backend, basis: self.basis()? })
    }
}

/// `max_n dist(e_n, ∨_{k ≤ depth} S^k L)²` over the window basis.
pub fn saturation_defect(rep: &Representation, l: &Subspace, depth: usize, window: &Window) -> Result<f64> {
    let span = generated_span(rep, l, depth)?;
    let d = max_distance(&span, &window.basis()?)?;
    Ok(d * d)
}

/// Saturation of `L ⊕ W ⊕ S W ⊕ ⋯ ⊕ S^depth W` against the window.
pub fn minimality_defect(rep: &Representation, l: &Subspace, depth: usize, window: &Window) -> Result<f64> {
    let w = wandering_part(rep, l)?;
    let family = generated_span(rep, &w, depth)?;
    let span = l.join(&family)?;
    let d = max_distance(&span, &window.basis()?)?;
    Ok(d * d)
}

/// A unit vector `x ∈ L` whose images `S_I x`, `|I| ≤ depth`, stay in `L`, if one exists.
///
/// Runs `L_{k+1} = {x ∈ L_k : S_j x ∈ L_k ∀j}` `depth` times.
pub fn invariance_witness(rep: &Representation, l: &Subspace, depth: usize) -> Result<Option<ComplexVec>> {
    check_backend(rep, l)?;
    let mut current = l.clone();
    for _ in 0..depth {
        if current.is_empty() {
            return Ok(None);
        }
        let n = rep.n();
        let mut residuals = Vec::with_capacity(n * current.dim());
        for j in 0..n {
            for x in &current.basis {
                residuals.push(current.residual(&rep.apply_s(j, x)?)?);
            }
        }
        let frame = Subspace::span(l.backend, &residuals)?;
        if frame.is_empty() {
            continue;
        }
        let d = current.dim();
        let blocks = linalg::coordinates(&frame, &residuals)?;
        let stacked = nalgebra::DMatrix::from_fn(frame.dim() * n, d, |r, c| {
            let (j, row) = (r / frame.dim(), r % frame.dim());
            blocks[(row, j * d + c)]
        });
        let kernel = linalg::null_space(&stacked, RANK_TOL);
        let vectors: Vec<ComplexVec> =
            kernel.iter().map(|c| linalg::combine(&current.basis, c)).collect::<Result<_>>()?;
        current = Subspace::span(l.backend, &vectors)?;
    }
    Ok(current.basis.first().cloned())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LambdaComplement {
    /// `window ⊖ (W ⊕ S W ⊕ ⋯ ⊕ S^depth W)`.
    pub complement: Subspace,
    pub coinvariance_residual: f64,
    /// `μ` of the complement, when it is co-invariant.
    pub mu: Option<Subspace>,
    /// `max dist(w, μ)` over the basis of `W`.
    pub w_residual: Option<f64>,
    /// `dim μ - dim W`: directions produced by the window edge.
    pub boundary_dim: Option<usize>,
}

/// Windowed `λ(W) = H ⊖ F(W)` and the check `W ⊆ μ(λ(W))`.
pub fn lambda_complement(rep: &Representation, w: &Subspace, window: &Window, depth: usize) -> Result<LambdaComplement> {
    if w.is_empty() {
        return Err(Error::EmptySpan);
    }
    let wan = is_wandering(rep, w, depth.max(1), COINVARIANCE_TOL)?;
    if !wan.pass {
        return Err(Error::NotWandering { overlap: wan.max_overlap });
    }
    let family = generated_span(rep, w, depth)?;
    let complement = family.complement_in(&window.subspace()?)?;
    let coinv = is_coinvariant(rep, &complement, COINVARIANCE_TOL)?;
    let (mu, w_residual, boundary_dim) = if coinv.pass && !complement.is_empty() {
        let mu = wandering_part(rep, &complement)?;
        let res = mu.containment_residual(w)?;
        let extra = mu.dim().saturating_sub(w.dim());
        (Some(mu), Some(res), Some(extra))
    } else {
        (None, None, None)
    };
    Ok(LambdaComplement { complement, coinvariance_residual: coinv.residual, mu, w_residual, boundary_dim })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ToeplitzReport {
    /// `‖T_i^* T_j - δ_{ij}‖` on `W ⊕ ⋯ ⊕ S^{depth-1} W`.
    pub isometry_residual: f64,
    /// Smallest eigenvalue of `P - Σ T_i T_i^*`.
    pub range_min_eigenvalue: f64,
    /// `‖T_i^* w‖` on `W`.
    pub vacuum_residual: f64,
    pub dim: usize,
    pub pass: bool,
}

/// Compressions `T_i = P S_i P` to `F = W ⊕ S W ⊕ ⋯ ⊕ S^depth W`.
pub fn cuntz_toeplitz_check(rep: &Representation, w: &Subspace, depth: usize, tol: f64) -> Result<ToeplitzReport> {
    check_backend(rep, w)?;
    let layers = power_layers(rep, w, depth)?;
    let family = layers.iter().try_fold(Subspace::empty(w.backend), |a, s| a.join(s))?;
    let inner = layers[..depth.max(1)].iter().try_fold(Subspace::empty(w.backend), |a, s| a.join(s))?;
    let d = family.dim();
    let mut t = Vec::new();
    for i in 0..rep.n() {
        let images: Vec<ComplexVec> = family.basis.iter().map(|q| rep.apply_s(i, q)).collect::<Result<_>>()?;
        t.push(linalg::coordinates(&family, &images)?);
    }
    let inner_c = linalg::coordinates(&family, &inner.basis)?;
    let w_c = linalg::coordinates(&family, &w.basis)?;
    let eye = nalgebra::DMatrix::<Complex64>::identity(d, d);
    let mut isometry: f64 = 0.0;
    let mut vacuum: f64 = 0.0;
    let mut range = eye.clone();
    for (i, ti) in t.iter().enumerate() {
        for (j, tj) in t.iter().enumerate() {
            let target = if i == j { eye.clone() } else { eye.scale(0.0) };
            let m = (ti.adjoint() * tj - target) * &inner_c;
            isometry = isometry.max(linalg::max_singular(&m));
        }
        vacuum = vacuum.max(linalg::max_singular(&(ti.adjoint() * &w_c)));
        range -= ti * ti.adjoint();
    }
    let min_eig = linalg::hermitian_min_eig(&range);
    let pass = isometry <= tol && vacuum <= tol && min_eig >= -tol;
    Ok(ToeplitzReport { isometry_residual: isometry, range_min_eigenvalue: min_eig, vacuum_residual: vacuum, dim: d, pass })
}
