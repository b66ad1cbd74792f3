mod common;

use common::*;
use cuntz_lab::attractor::{eigenspace, orbit, point_evaluation_check};
use cuntz_lab::filterbank::{check_lowpass, check_unitary, polyphase, synthesize_filters, FilterBank};
use cuntz_lab::fock::{self, gram, reduce, reduce_opt, FockVector, NormalWord};
use cuntz_lab::rep::{FilterRep, MultiIndex, Representation};
use cuntz_lab::subspace::*;
use cuntz_lab::vectors::{ComplexVec, LaurentPoly, StepFunction};
use cuntz_lab::wavelet::{bessel_sum, SampledFunction};
use cuntz_lab::{fixtures, Subspace};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn filter_rep(seed: u64, n: usize) -> FilterRep {
    let mut r = rng(seed);
    FilterRep::new(synthesize_filters(&random_paraunitary(&mut r, n, 2))).expect("paraunitary")
}

fn lowpass_rep(seed: u64, n: usize) -> FilterRep {
    let mut r = rng(seed);
    FilterRep::new(synthesize_filters(&random_lowpass(&mut r, n, 2))).expect("paraunitary")
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn laurent_parseval(seed in any::<u64>()) {
        let f = random_laurent(&mut rng(seed), 20, 12);
        let direct: f64 = f.terms().iter().map(|(_, c)| c.norm_sqr()).sum();
        prop_assert!((f.inner(&f).re - direct).abs() < 1e-13 * direct.max(1.0));
    }

    #[test]
    fn downsample_inverts_upsampling(seed in any::<u64>(), n in 2usize..5) {
        let mut r = rng(seed);
        let f = random_laurent(&mut r, 10, 8);
        let j = r.gen_range(0..n);
        let up = LaurentPoly::e(j as i64).mul(&f.compose_power(n));
        prop_assert!(up.downsample(j, n).unwrap().max_abs_diff(&f) < 1e-13);
    }

    #[test]
    fn polyphase_components_rebuild(seed in any::<u64>(), n in 2usize..5) {
        let f = random_laurent(&mut rng(seed), 15, 10);
        let rebuilt = (0..n).fold(LaurentPoly::zero(), |acc, j| {
            &acc + &LaurentPoly::e(j as i64).mul(&f.downsample(j, n).unwrap().compose_power(n))
        });
        prop_assert!(rebuilt.max_abs_diff(&f) < 1e-13);
    }

    #[test]
    fn sup_norm_bounds(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = random_laurent(&mut r, 6, 5);
        let g = random_laurent(&mut r, 6, 5);
        prop_assert!(f.sup_norm() <= f.coefficient_bound() + 1e-12);
        prop_assert!(f.mul(&g).sup_norm() <= f.sup_norm() * g.sup_norm() * (1.0 + 1e-6) + 1e-12);
    }

    #[test]
    fn step_refinement_preserves_values(seed in any::<u64>(), level in 0u32..4, extra in 1u32..3) {
        let mut r = rng(seed);
        let n: usize = r.gen_range(2..4);
        let cells = n.pow(level);
        let f = StepFunction::new(n, level, (0..cells).map(|_| gaussian_complex(&mut r)).collect()).unwrap();
        let g = f.refine(level + extra).unwrap();
        for _ in 0..20 {
            let x: f64 = r.gen();
            prop_assert_eq!(f.value_at(x), g.value_at(x));
        }
        prop_assert!((f.norm_sqr() - g.norm_sqr()).abs() < 1e-12 * f.norm_sqr().max(1.0));
    }

    #[test]
    fn synthesis_inverts_polyphase(seed in any::<u64>(), n in 2usize..5) {
        let mut r = rng(seed);
        let filters = (0..n).map(|_| random_laurent(&mut r, 9, 6)).collect();
        let bank = FilterBank::new(n, filters).unwrap();
        prop_assert_eq!(synthesize_filters(&polyphase(&bank)), bank);
    }

    #[test]
    fn causal_filters_have_causal_polyphase(seed in any::<u64>(), n in 2usize..5, d in 0i64..12) {
        let mut r = rng(seed);
        let filters = (0..n)
            .map(|_| LaurentPoly::from_terms((0..6).map(|_| (r.gen_range(0..=d), gaussian_complex(&mut r)))))
            .collect();
        let a = polyphase(&FilterBank::new(n, filters).unwrap());
        for row in a.entries() {
            for e in row {
                prop_assert!(e.min_index().unwrap_or(0) >= 0);
                prop_assert!(e.max_index().unwrap_or(0) <= d / n as i64);
            }
        }
    }
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn isometry_and_adjoint(seed in any::<u64>(), n in 2usize..4) {
        let rep = filter_rep(seed, n);
        let mut r = rng(seed ^ 0x5eed);
        let u = random_laurent(&mut r, 8, 6);
        let v = random_laurent(&mut r, 8, 6);
        for j in 0..n {
            let su = rep.s(j, &u);
            prop_assert!((su.norm() - u.norm()).abs() < 1e-12 * u.norm().max(1.0));
            let lhs = su.inner(&v);
            let rhs = u.inner(&rep.s_star(j, &v));
            prop_assert!((lhs - rhs).norm() < 1e-12 * (u.norm() * v.norm()).max(1.0));
        }
    }

    #[test]
    fn components_of_s_are_multiplications(seed in any::<u64>(), n in 2usize..4) {
        let rep = filter_rep(seed, n);
        let a = rep.polyphase().clone();
        let f = random_laurent(&mut rng(seed ^ 7), 6, 5);
        for i in 0..n {
            let g = rep.s(i, &f);
            prop_assert!(rep.s_star(i, &g).max_abs_diff(&f) < 1e-12);
            prop_assert!((g.norm() - f.norm()).abs() < 1e-12);
            for k in 0..n {
                let t = g.downsample(k, n).unwrap();
                prop_assert!(t.max_abs_diff(&f.mul(a.entry(i, k))) < 1e-12);
            }
        }
    }

    #[test]
    fn range_projections_commute(seed in any::<u64>()) {
        let mut r = rng(seed);
        let reps = [Representation::Filter(filter_rep(seed, 2)), fixtures::step_rep()];
        let haar_probe: ComplexVec = random_laurent(&mut r, 6, 5).into();
        let step_probe: ComplexVec =
            StepFunction::new(2, 3, (0..8).map(|_| gaussian_complex(&mut r)).collect()).unwrap().into();
        for (rep, v) in reps.iter().zip([haar_probe, step_probe]) {
            for i in 0..2 {
                let ei = rep.projection_e(i, &v).unwrap();
                prop_assert!(rep.projection_e(i, &ei).unwrap().distance(&ei).unwrap() < 1e-12);
                for j in 0..2 {
                    let ij = rep.projection_e(i, &rep.projection_e(j, &v).unwrap()).unwrap();
                    let ji = rep.projection_e(j, &ei).unwrap();
                    prop_assert!(ij.distance(&ji).unwrap() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn lowpass_constructions_pass(seed in any::<u64>(), n in 2usize..4) {
        let a = random_lowpass(&mut rng(seed), n, 2);
        prop_assert!(check_unitary(&a, 1e-10).pass);
        prop_assert!(check_lowpass(&a, 1e-10).pass);
    }

    #[test]
    fn eigenvectors_hold_globally(seed in any::<u64>(), n in 2usize..4) {
        let rep = lowpass_rep(seed, n);
        let e = eigenspace(&rep, None).unwrap();
        prop_assert!(e.dim >= 1);
        prop_assert!(!e.affine_basis.is_empty());
        prop_assert!(e.global_residual <= 1e-10);
        let s = (n as f64).sqrt();
        for f in &e.basis {
            prop_assert!(rep.s_star(0, f).scale_real(s).max_abs_diff(f) < 1e-10);
        }
    }

    #[test]
    fn orbit_supports_contract(seed in any::<u64>()) {
        let rep = lowpass_rep(seed, 2);
        let (lo, hi) = rep.bank().support();
        let d = hi.max(-lo).max(0);
        let f = random_laurent(&mut rng(seed ^ 3), 12, 6);
        let r0 = f.radius();
        for rec in orbit(&rep, &f, 5).unwrap() {
            let k = rec.index.len() as u32;
            let bound = (r0 + d + 2i64.pow(k) - 1) / 2i64.pow(k) + d;
            prop_assert!(rec.vector.radius() <= bound);
        }
    }

    #[test]
    fn point_evaluation_identity(seed in any::<u64>(), n in 2usize..4) {
        let rep = lowpass_rep(seed, n);
        let f = random_laurent(&mut rng(seed ^ 11), 6, 4);
        let r = point_evaluation_check(&rep, &f).unwrap();
        prop_assert!(r.max_residual < 1e-10 * f.coefficient_bound().max(1.0));
    }
}

fn random_word(r: &mut impl Rng, n: usize) -> NormalWord {
    let a = r.gen_range(0..4);
    let b = r.gen_range(0..4);
    let mut pick = |len: usize| -> MultiIndex { (0..len).map(|_| r.gen_range(0..n)).collect::<Vec<_>>().into() };
    let isometries = pick(a);
    NormalWord::new(isometries, pick(b))
}

proptest! {
    #![proptest_config(config(128))]

    #[test]
    fn fock_reduce_is_associative(seed in any::<u64>(), n in 2usize..4) {
        let mut r = rng(seed);
        let (a, b, c) = (random_word(&mut r, n), random_word(&mut r, n), random_word(&mut r, n));
        let left = reduce_opt(reduce(&a, &b).as_ref(), Some(&c));
        let right = reduce_opt(Some(&a), reduce(&b, &c).as_ref());
        prop_assert_eq!(left, right);
    }

    #[test]
    fn fock_gram_is_positive(seed in any::<u64>(), n in 2usize..4) {
        let mut r = rng(seed);
        let labels: Vec<NormalWord> = (0..6).map(|_| random_word(&mut r, n)).collect();
        let g = gram(&labels, n);
        let m = DMatrix::from_fn(6, 6, |i, j| fock::ratio_f64(g[i][j]));
        let eig = m.symmetric_eigen();
        prop_assert!(eig.eigenvalues.iter().all(|&l| l >= -1e-12));
    }

    #[test]
    fn fock_cuntz_relations(seed in any::<u64>(), n in 2usize..4) {
        let mut r = rng(seed);
        let v = FockVector::from_label(n, random_word(&mut r, n), gaussian_complex(&mut r))
            .axpy(c(1.0), &FockVector::from_label(n, random_word(&mut r, n), gaussian_complex(&mut r))).unwrap();
        let w = FockVector::from_label(n, random_word(&mut r, n), gaussian_complex(&mut r));
        let base = v.inner(&w).unwrap();
        let mut sum = Complex64::new(0.0, 0.0);
        for i in 0..n {
            prop_assert!((v.apply_s(i).inner(&w.apply_s(i)).unwrap() - base).norm() < 1e-14);
            sum += v.apply_s_star(i).apply_s(i).inner(&w).unwrap();
        }
        prop_assert!((sum - base).norm() < 1e-14);
    }
}

/// The finite co-invariant hull of `f` in the base representation.
fn base_hull(f: &LaurentPoly) -> Subspace {
    let base = fixtures::base_rep();
    let mut l = Subspace::from_laurent(std::slice::from_ref(f)).unwrap();
    loop {
        let next = l.join(&star_image(&base, &l).unwrap()).unwrap();
        if next.dim() == l.dim() {
            return l;
        }
        l = next;
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn stabilized_spaces_are_stable(seed in any::<u64>()) {
        let base = fixtures::base_rep();
        let f = random_laurent(&mut rng(seed), 6, 3);
        prop_assume!(f.norm() > 1e-6);
        let l = base_hull(&f);
        prop_assert!(is_coinvariant(&base, &l, 1e-10).unwrap().pass);
        let m = stabilize(&base, &l).unwrap();
        prop_assert!(m.containment_residual(&l).unwrap() < 1e-10);
        prop_assert!(is_stable(&base, &m, 1e-10).unwrap().pass);
        prop_assert!(is_coinvariant(&base, &m, 1e-10).unwrap().pass);
    }

    #[test]
    fn coinvariant_iff_inside_sl(seed in any::<u64>()) {
        let base = fixtures::base_rep();
        let mut r = rng(seed);
        let l = Subspace::from_laurent(&[random_laurent(&mut r, 4, 2), random_laurent(&mut r, 4, 2)]).unwrap();
        let hull = base_hull(&random_laurent(&mut r, 5, 3));
        for s in [l, hull] {
            prop_assert_eq!(
                is_coinvariant(&base, &s, 1e-9).unwrap().pass,
                is_contained_in_sl(&base, &s, 1e-9).unwrap().pass
            );
        }
    }

    #[test]
    fn finite_hulls_are_pure(seed in any::<u64>()) {
        let base = fixtures::base_rep();
        let f = random_laurent(&mut rng(seed), 6, 3);
        prop_assume!(f.norm() > 1e-6);
        let l = base_hull(&f);
        let depth = (l.dim() as f64).log2().ceil() as usize + 1;
        prop_assert!(invariance_witness(&base, &l, depth).unwrap().is_none());
    }

    #[test]
    fn alpha_grows_coinvariant_spaces(seed in any::<u64>()) {
        let base = fixtures::base_rep();
        let f = random_laurent(&mut rng(seed), 6, 3);
        prop_assume!(f.norm() > 1e-6);
        let l = base_hull(&f);
        prop_assert!(alpha_project(&base, &l).unwrap().containment_residual(&l).unwrap() < 1e-12);
        let w = wandering_part(&base, &l).unwrap();
        prop_assert!(is_wandering(&base, &w, 3, 1e-12).unwrap().pass);
    }

    #[test]
    fn bessel_sums_are_monotone(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = SampledFunction::new(2, 1, -2, (0..8).map(|_| gaussian_complex(&mut r)).collect()).unwrap();
        for bank in [fixtures::haar(), fixtures::stretched_haar()] {
            let phi = cuntz_lab::wavelet::cascade(&bank, &cuntz_lab::wavelet::CascadeOptions::new(40)).unwrap();
            let psi = cuntz_lab::wavelet::wavelets_from_scaling(&bank, &phi).unwrap();
            let mut last = 0.0;
            for width in 0..4 {
                let b = bessel_sum(&psi, &f, (-width, width), None).unwrap();
                prop_assert!(b.sum >= last - 1e-12);
                prop_assert!(b.sum <= b.norm2 + 1e-10);
                last = b.sum;
            }
        }
    }
}

#[test]
fn compressed_norms_increase_with_depth() {
    for (n, max_depth) in [(2, 4), (3, 2)] {
        for i in 0..n {
            let norms: Vec<f64> = (1..=max_depth).map(|d| fock::compressed_norm(n, i, d).unwrap()).collect();
            assert!(norms.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{norms:?}");
            assert!(norms.iter().all(|&x| x <= 1.0 / (n as f64).sqrt() + 1e-10));
        }
    }
}

#[test]
fn decomposition_saturates_when_the_core_does() {
    let base = fixtures::base_rep();
    let l = Subspace::monomials(&[-1, 0]);
    let window = Window::Laurent { radius: 4 };
    assert!(saturation_defect(&base, &l, 3, &window).unwrap() < 1e-24);
    let d = decompose(&base, &l, 3).unwrap();
    let union = d.layers.iter().try_fold(Subspace::empty(cuntz_lab::Backend::Laurent), |a, s| a.join(s)).unwrap();
    assert!(union.containment_residual(&window.subspace().unwrap()).unwrap() < 1e-12);
}
