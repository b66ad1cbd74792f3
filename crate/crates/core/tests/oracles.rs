//! Values cross-checked against computations that share no code path with the library.

mod common;

use std::f64::consts::{PI, TAU};

use common::*;
use cuntz_lab::attractor::eigenspace;
use cuntz_lab::filterbank::{lipschitz_m1, polyphase, synthesize_filters};
use cuntz_lab::fixtures;
use cuntz_lab::rep::FilterRep;
use cuntz_lab::vectors::LaurentPoly;
use cuntz_lab::wavelet::{cascade, dilate_translate, wavelets_from_scaling, CascadeOptions, SampledFunction};
use cuntz_lab::wold::shift_decay;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

/// `A_ij(z^N) z^j = N^{-1} Σ_k ρ^{-kj} m_i(ρ^k z)`.
#[test]
fn polyphase_by_roots_of_unity() {
    let mut r = rng(1);
    for n in 2..5 {
        let a = random_paraunitary(&mut r, n, 2);
        let bank = synthesize_filters(&a);
        let back = polyphase(&bank);
        for _ in 0..10 {
            let z = Complex64::cis(r.gen_range(0.0..TAU));
            for i in 0..n {
                for j in 0..n {
                    let oracle: Complex64 = (0..n)
                        .map(|k| {
                            let rho = Complex64::cis(TAU * k as f64 / n as f64);
                            Complex64::cis(-TAU * (k * j) as f64 / n as f64) * bank.filter(i).eval(rho * z)
                        })
                        .sum::<Complex64>()
                        / n as f64
                        / z.powu(j as u32);
                    let lib = back.entry(i, j).eval(z.powu(n as u32));
                    assert!((oracle - lib).norm() < 1e-12, "n={n} i={i} j={j}");
                }
            }
        }
    }
}

/// `(S_j^* f)(z) = N^{-1} Σ_{w^N = z} conj(m_j(w)) f(w)` on the circle.
#[test]
fn adjoint_by_preimage_sums() {
    let mut r = rng(2);
    for n in 2..4 {
        let rep = FilterRep::new(synthesize_filters(&random_paraunitary(&mut r, n, 2))).unwrap();
        let f = random_laurent(&mut r, 8, 6);
        for j in 0..n {
            let g = rep.s_star(j, &f);
            for _ in 0..8 {
                let theta: f64 = r.gen_range(0.0..TAU);
                let z = Complex64::cis(theta);
                let oracle: Complex64 = (0..n)
                    .map(|k| {
                        let w = Complex64::cis((theta + TAU * k as f64) / n as f64);
                        rep.bank().filter(j).eval(w).conj() * f.eval(w)
                    })
                    .sum::<Complex64>()
                    / n as f64;
                assert!((g.eval(z) - oracle).norm() < 1e-12);
            }
        }
    }
}

/// `√N S_0^*` as a dense matrix on `e_{-M..M}`.
fn dense_transfer(rep: &FilterRep, m: i64) -> DMatrix<Complex64> {
    let size = (2 * m + 1) as usize;
    let s = (rep.n() as f64).sqrt();
    let mut out = DMatrix::zeros(size, size);
    // coefficient formula: (S_0^* e_k)_q = conj(a_{k - N q})
    for k in -m..=m {
        for q in -m..=m {
            out[((q + m) as usize, (k + m) as usize)] = rep.bank().filter(0).coeff(k - rep.n() as i64 * q).conj() * s;
        }
    }
    out
}

fn kernel_dim(mat: &DMatrix<Complex64>) -> usize {
    let shifted = mat - DMatrix::identity(mat.nrows(), mat.ncols());
    let sv = shifted.svd(false, false).singular_values;
    sv.iter().filter(|&&x| x < 1e-9).count()
}

#[test]
fn eigenspace_by_dense_kernel() {
    for (rep, window, dim) in [
        (fixtures::haar_rep(), 4, 2),
        (fixtures::stretched_haar_rep(), 6, 3),
        (fixtures::base_rep(), 4, 0),
    ] {
        let rep = rep.as_filter().unwrap().clone();
        assert_eq!(kernel_dim(&dense_transfer(&rep, window)), dim);
        assert_eq!(eigenspace(&rep, Some(window)).unwrap().dim, dim);
    }
}

#[test]
fn haar_decay_by_dense_powers() {
    let haar = fixtures::haar_rep().as_filter().unwrap().clone();
    let t = dense_transfer(&haar, 12).unscale(2f64.sqrt());
    let mut v = nalgebra::DVector::from_fn(25, |i, _| if i == 13 { c(1.0) } else { c(0.0) });
    let lib = shift_decay(&haar, 0, &LaurentPoly::e(1), 10);
    for expected in &lib {
        assert!((v.norm() - expected).abs() < 1e-14);
        v = &t * v;
    }
    assert!(lib[10] < 0.05);
}

#[test]
fn lipschitz_constants_by_finite_differences() {
    for (bank, expected) in [(fixtures::haar(), PI), (fixtures::stretched_haar(), 3.0 * PI)] {
        let h = 1e-6;
        let slope = (0..2000)
            .map(|s| {
                let x = s as f64 / 2000.0;
                bank.filters()
                    .iter()
                    .map(|m| (m.eval_angle(x + h) - m.eval_angle(x - h)).norm() / (2.0 * h))
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
            / 2f64.sqrt();
        assert!((slope - expected).abs() < 1e-5);
        assert!((lipschitz_m1(&bank) - expected).abs() < 1e-9);
    }
}

fn midpoint_inner(a: &SampledFunction, b: &SampledFunction, lo: f64, hi: f64, steps: usize) -> Complex64 {
    let h = (hi - lo) / steps as f64;
    (0..steps).map(|i| {
        let x = lo + (i as f64 + 0.5) * h;
        a.value_at(x).conj() * b.value_at(x)
    }).sum::<Complex64>() * h
}

#[test]
fn frame_coefficients_by_quadrature() {
    let bank = fixtures::stretched_haar();
    let phi = cascade(&bank, &CascadeOptions::new(60)).unwrap();
    let psi = &wavelets_from_scaling(&bank, &phi).unwrap()[0].refine(4).unwrap();
    let f = SampledFunction::indicator(2, 0, 1).unwrap();
    for (j, k) in [(0, 0), (1, 1), (2, -3), (-1, 0), (-2, -1), (3, 5)] {
        let d = dilate_translate(psi, j, k).unwrap();
        let exact = d.inner(&f).unwrap();
        // cell edges sit on a 2^-7 grid, so a midpoint rule on 2^-10 cells is exact
        let quad = midpoint_inner(&d, &f, -8.0, 8.0, 1 << 14);
        assert!((exact - quad).norm() < 1e-12, "({j}, {k})");
    }
    let a = dilate_translate(psi, 0, 0).unwrap();
    let b = dilate_translate(psi, 1, 1).unwrap();
    let quad = midpoint_inner(&a, &b, 0.0, 3.0, 3 << 10);
    assert!((quad - c(2f64.sqrt() / 9.0)).norm() < 1e-12);
}
