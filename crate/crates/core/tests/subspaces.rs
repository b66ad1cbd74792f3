use cuntz_lab::fixtures;
use cuntz_lab::fock::coinvariant_subspace;
use cuntz_lab::rep::Representation;
use cuntz_lab::subspace::*;
use cuntz_lab::vectors::{ComplexVec, LaurentPoly, StepFunction};
use cuntz_lab::Subspace;
use num_complex::Complex64;

fn mono(ix: &[i64]) -> Subspace {
    Subspace::monomials(ix)
}

fn same(a: &Subspace, b: &Subspace, tol: f64) {
    assert_eq!(a.dim(), b.dim(), "dimensions differ");
    let s = a.max_principal_angle_sin(b).unwrap();
    assert!(s < tol, "principal angle sine {s}");
}

fn step_ab() -> Subspace {
    let r = fixtures::step_rep();
    let Representation::Step(s) = &r else { unreachable!() };
    Subspace::from_step(&[s.cell_set(0), s.cell_set(1)]).unwrap()
}

fn step_one() -> Subspace {
    Subspace::from_step(&[StepFunction::one(2)]).unwrap()
}

#[test]
fn orthonormalize_examples() {
    let e0: ComplexVec = LaurentPoly::e(0).into();
    assert_eq!(Subspace::orthonormalize(vec![e0.clone(), e0.clone()]).unwrap().dim(), 1);
    let p = LaurentPoly::from_real(&[(0, 1.0), (1, 1.0)]);
    let m = LaurentPoly::from_real(&[(0, 1.0), (1, -1.0)]);
    let s = Subspace::from_laurent(&[p, m]).unwrap();
    assert_eq!(s.dim(), 2);
    assert!(s.gram_deviation().unwrap() < 1e-15);
    let near = LaurentPoly::from_real(&[(0, 1.0), (1, 1e-12)]);
    let s = Subspace::orthonormalize(vec![e0, near.into()]).unwrap();
    assert_eq!(s.dim(), 1);
    assert!(Subspace::orthonormalize(vec![LaurentPoly::zero().into()]).is_err());
}

#[test]
fn coinvariance_examples() {
    let base = fixtures::base_rep();
    assert!(is_coinvariant(&base, &mono(&[-1, 0]), COINVARIANCE_TOL).unwrap().pass);
    let c = is_coinvariant(&base, &mono(&[1]), COINVARIANCE_TOL).unwrap();
    assert!(!c.pass && (c.residual - 1.0).abs() < 1e-15);
    assert!(is_coinvariant(&fixtures::step_rep(), &step_ab(), 1e-12).unwrap().pass);
}

#[test]
fn contained_in_sl_examples() {
    let base = fixtures::base_rep();
    assert!(is_contained_in_sl(&base, &mono(&[-1, 0]), 1e-12).unwrap().pass);
    let l = mono(&[0]);
    assert!(is_contained_in_sl(&base, &l, 1e-12).unwrap().pass);
    assert!(is_coinvariant(&base, &l, 1e-12).unwrap().pass);
    same(&star_image(&base, &l).unwrap(), &l, 1e-12);
    assert_eq!(alpha_project(&base, &l).unwrap().dim(), 2);
    assert!(!is_contained_in_sl(&base, &mono(&[1]), 1e-12).unwrap().pass);
}

#[test]
fn coinvariance_equivalence_on_fixtures() {
    let base = fixtures::base_rep();
    let haar = fixtures::haar_rep();
    let cases: Vec<(&Representation, Subspace)> = vec![
        (&base, mono(&[-1, 0])),
        (&base, mono(&[0])),
        (&base, mono(&[0, 1])),
        (&base, mono(&[1])),
        (&base, mono(&[-2, -1, 0, 1])),
        (&haar, mono(&[-1, 0])),
        (&haar, mono(&[2])),
    ];
    for (rep, l) in cases {
        let a = is_coinvariant(rep, &l, 1e-10).unwrap().pass;
        let b = is_contained_in_sl(rep, &l, 1e-10).unwrap().pass;
        assert_eq!(a, b);
    }
}

#[test]
fn wandering_part_examples() {
    let base = fixtures::base_rep();
    same(&wandering_part(&base, &mono(&[-1, 0])).unwrap(), &mono(&[-2, 1]), 1e-15);
    same(&wandering_part(&base, &mono(&[0, 1])).unwrap(), &mono(&[2, 3]), 1e-15);
    same(&wandering_part(&base, &mono(&[-2, -1, 0, 1])).unwrap(), &mono(&[-4, -3, 2, 3]), 1e-15);
    match wandering_part(&base, &mono(&[1])) {
        Err(cuntz_lab::Error::NotCoinvariant { residual }) => assert!(residual > 0.5),
        other => panic!("expected a co-invariance error, got {other:?}"),
    }
}

#[test]
fn wandering_part_is_wandering() {
    let base = fixtures::base_rep();
    for l in [mono(&[-1, 0]), mono(&[0, 1]), mono(&[-2, -1, 0, 1])] {
        let w = wandering_part(&base, &l).unwrap();
        assert!(is_wandering(&base, &w, 3, 1e-12).unwrap().pass);
    }
    let haar = fixtures::haar_rep();
    let w = wandering_part(&haar, &mono(&[-1, 0])).unwrap();
    assert!(is_wandering(&haar, &w, 4, 1e-10).unwrap().pass);
}

#[test]
fn is_wandering_examples() {
    let base = fixtures::base_rep();
    for depth in 1..=5 {
        assert!(is_wandering(&base, &mono(&[1]), depth, 1e-15).unwrap().pass);
    }
    let r = is_wandering(&base, &mono(&[0]), 1, 1e-12).unwrap();
    assert!(!r.pass && r.max_overlap == 1.0);
}

#[test]
fn decompose_examples() {
    let base = fixtures::base_rep();
    let d = decompose(&base, &mono(&[-1, 0]), 2).unwrap();
    assert_eq!(d.layers.len(), 4);
    assert!(d.max_overlap < 1e-12);
    let all = d.layers.iter().try_fold(Subspace::empty(cuntz_lab::Backend::Laurent), |a, s| a.join(s)).unwrap();
    same(&all, &mono(&(-8..=7).collect::<Vec<_>>()), 1e-12);
    assert!(d.inclusion_residuals.iter().all(|&r| r < 1e-12));

    let haar = fixtures::haar_rep();
    let d = decompose(&haar, &mono(&[-1, 0]), 3).unwrap();
    assert!(d.max_overlap < 1e-10);
    assert!(d.inclusion_residuals.iter().all(|&r| r < 1e-10));

    let d = decompose(&fixtures::step_rep(), &step_ab(), 2).unwrap();
    assert!(d.max_overlap < 1e-12);
}

#[test]
fn decompose_rejects_reducing_subspaces() {
    let base = fixtures::base_rep();
    let zero = Subspace::empty(cuntz_lab::Backend::Laurent);
    assert!(matches!(decompose(&base, &zero, 1), Err(cuntz_lab::Error::Reducing)));
    assert!(matches!(decompose(&base, &mono(&[1]), 1), Err(cuntz_lab::Error::NotCoinvariant { .. })));
}

#[test]
fn stabilize_examples() {
    let step = fixtures::step_rep();
    same(&stabilize(&step, &step_one()).unwrap(), &step_ab(), 1e-12);
    let base = fixtures::base_rep();
    same(&stabilize(&base, &mono(&[-1, 0])).unwrap(), &mono(&[-1, 0]), 1e-15);
    let m = stabilize(&step, &step_ab()).unwrap();
    same(&m, &step_ab(), 1e-12);
    assert!(is_stable(&step, &m, 1e-12).unwrap().pass);
    assert!(is_coinvariant(&step, &m, 1e-12).unwrap().pass);
}

#[test]
fn stability_examples() {
    let step = fixtures::step_rep();
    assert!(!is_stable(&step, &step_one(), 1e-12).unwrap().pass);
    assert!(is_stable(&step, &step_ab(), 1e-12).unwrap().pass);
    assert!(is_stable(&fixtures::base_rep(), &mono(&[-1, 0]), 1e-12).unwrap().pass);
}

#[test]
fn saturation_examples() {
    let base = fixtures::base_rep();
    let d = saturation_defect(&base, &mono(&[-1, 0]), 3, &Window::Laurent { radius: 4 }).unwrap();
    assert!(d.abs() < 1e-24);
    let d = saturation_defect(&base, &mono(&[0]), 3, &Window::Laurent { radius: 2 }).unwrap();
    assert!((d - 1.0).abs() < 1e-15);
}

#[test]
fn step_saturation_stops_at_even_functions() {
    // A and B are unions of mirror-image cells, so every S_I χ_A is symmetric about 1/2
    let step = fixtures::step_rep();
    let d = saturation_defect(&step, &step_ab(), 2, &Window::Step { n: 2, level: 3 }).unwrap();
    assert!((d - 0.5).abs() < 1e-12);
    let window = Window::Step { n: 2, level: 3 }.subspace().unwrap();
    let reached = generated_span(&step, &step_ab(), 4).unwrap();
    let odd = reached.complement_in(&window).unwrap();
    assert_eq!(odd.dim(), 4);
    assert!(is_coinvariant(&step, &odd, 1e-12).unwrap().pass);
    let images = generated_span(&step, &odd, 1).unwrap();
    assert!(images.basis().iter().all(|v| reached.distance(v).unwrap() > 1.0 - 1e-12));
}

#[test]
fn minimality_on_the_core() {
    let base = fixtures::base_rep();
    let d = minimality_defect(&base, &mono(&[-1, 0]), 2, &Window::Laurent { radius: 4 }).unwrap();
    assert!(d < 1e-24);
}

#[test]
fn invariance_witness_examples() {
    let base = fixtures::base_rep();
    let chain = mono(&fixtures::chain_fixture_indices(31));
    let w = invariance_witness(&base, &chain, 3).unwrap().expect("witness");
    assert!((w.inner(&LaurentPoly::e(3).into()).unwrap().norm() - 1.0).abs() < 1e-12);
    assert!(invariance_witness(&base, &mono(&[0, 1]), 2).unwrap().is_none());
    assert!(invariance_witness(&base, &mono(&[0]), 1).unwrap().is_none());
}

#[test]
fn finite_coinvariant_spaces_are_pure() {
    let base = fixtures::base_rep();
    for l in [mono(&[0]), mono(&[-1, 0]), mono(&[0, 1]), mono(&[-2, -1, 0, 1])] {
        let depth = (l.dim() as f64).log2().ceil() as usize + 1;
        assert!(invariance_witness(&base, &l, depth).unwrap().is_none());
    }
    let fock = Representation::Fock { n: 2 };
    assert!(invariance_witness(&fock, &coinvariant_subspace(2, 4).unwrap(), 2).unwrap().is_none());
}

#[test]
fn lambda_complement_examples() {
    let base = fixtures::base_rep();
    let r = lambda_complement(&base, &mono(&[1]), &Window::Laurent { radius: 2 }, 1).unwrap();
    assert!(r.complement.contains(&mono(&[0, -1, -2]), 1e-12).unwrap());
    let r = lambda_complement(&base, &mono(&[-2, 1]), &Window::Laurent { radius: 4 }, 1).unwrap();
    assert!(r.complement.contains(&mono(&[-1, 0]), 1e-12).unwrap());
    assert!(r.w_residual.is_none_or(|x| x < 1e-12));
    assert!(lambda_complement(&base, &Subspace::empty(cuntz_lab::Backend::Laurent), &Window::Laurent { radius: 2 }, 1).is_err());
    assert!(lambda_complement(&base, &mono(&[0]), &Window::Laurent { radius: 2 }, 1).is_err());
}

#[test]
fn toeplitz_examples() {
    let base = fixtures::base_rep();
    let r = cuntz_toeplitz_check(&base, &mono(&[1]), 3, 1e-12).unwrap();
    assert!(r.pass && r.isometry_residual < 1e-12 && r.vacuum_residual == 0.0);
    let haar = fixtures::haar_rep();
    let w = wandering_part(&haar, &mono(&[-1, 0])).unwrap();
    let r = cuntz_toeplitz_check(&haar, &w, 3, 1e-10).unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn alpha_iterates_telescope() {
    let base = fixtures::base_rep();
    let l = mono(&[-1, 0]);
    let w = wandering_part(&base, &l).unwrap();
    assert!(alpha_project(&base, &l).unwrap().containment_residual(&l).unwrap() < 1e-12);
    let mut a = l.clone();
    for k in 1..=3 {
        a = alpha_project(&base, &a).unwrap();
        let target = l.join(&generated_span(&base, &w, k - 1).unwrap()).unwrap();
        same(&a, &target, 1e-12);
    }
}

#[test]
fn subspace_json_round_trip() {
    let s = Subspace::from_laurent(&[LaurentPoly::from_terms([(0, Complex64::new(0.6, 0.0)), (2, Complex64::new(0.0, 0.8))])]).unwrap();
    let j = serde_json::to_string(&s).unwrap();
    assert!(j.contains("\"backend\":\"laurent\""));
    let back: Subspace = serde_json::from_str(&j).unwrap();
    same(&back, &s, 1e-15);
}
