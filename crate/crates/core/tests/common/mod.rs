#![allow(dead_code)]

use cuntz_lab::filterbank::PolyphaseMatrix;
use cuntz_lab::vectors::LaurentPoly;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Random coefficients on a random subset of `[-radius, radius]`.
pub fn random_laurent(rng: &mut ChaCha8Rng, radius: i64, nnz: usize) -> LaurentPoly {
    LaurentPoly::from_terms((0..nnz).map(|_| (rng.gen_range(-radius..=radius), gaussian_complex(rng))))
}

/// Haar-distributed unitary from the QR factorization of a Gaussian matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(n, n, |_, _| gaussian_complex(rng));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |i, _| {
        let d = r[(i, i)];
        if d.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { d / d.norm() }
    }));
    q * phases
}

fn constant(m: &DMatrix<Complex64>) -> Vec<Vec<LaurentPoly>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| LaurentPoly::constant(m[(i, j)])).collect()).collect()
}

pub fn poly_matmul(a: &[Vec<LaurentPoly>], b: &[Vec<LaurentPoly>]) -> Vec<Vec<LaurentPoly>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).fold(LaurentPoly::zero(), |acc, k| &acc + &a[i][k].mul(&b[k][j])))
                .collect()
        })
        .collect()
}

/// `U_0 D_1(z) U_1 ⋯ D_f(z) U_f` with random unitaries `U_k` and diagonal monomial factors.
pub fn random_paraunitary(rng: &mut ChaCha8Rng, n: usize, factors: usize) -> PolyphaseMatrix {
    let mut acc = constant(&random_unitary(rng, n));
    for _ in 0..factors {
        let d: Vec<Vec<LaurentPoly>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { LaurentPoly::e(rng.gen_range(-1..=1)) } else { LaurentPoly::zero() })
                    .collect()
            })
            .collect();
        acc = poly_matmul(&acc, &d);
        acc = poly_matmul(&acc, &constant(&random_unitary(rng, n)));
    }
    PolyphaseMatrix::new(n, acc).expect("square")
}

pub fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `Π (U_k D_k(z) U_k^*) · F` with `F = N^{-1/2}(ρ^{jk})`, so `A(1) = F`.
pub fn random_lowpass(rng: &mut ChaCha8Rng, n: usize, factors: usize) -> PolyphaseMatrix {
    let s = 1.0 / (n as f64).sqrt();
    let f = DMatrix::from_fn(n, n, |j, k| Complex64::cis(std::f64::consts::TAU * (j * k) as f64 / n as f64) * s);
    let mut acc = constant(&DMatrix::identity(n, n));
    for _ in 0..factors {
        let u = random_unitary(rng, n);
        let d: Vec<Vec<LaurentPoly>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { LaurentPoly::e(rng.gen_range(0..=1)) } else { LaurentPoly::zero() })
                    .collect()
            })
            .collect();
        acc = poly_matmul(&poly_matmul(&acc, &constant(&u)), &poly_matmul(&d, &constant(&u.adjoint())));
    }
    PolyphaseMatrix::new(n, poly_matmul(&acc, &constant(&f))).expect("square")
}
