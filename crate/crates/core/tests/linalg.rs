mod oracles;

use nalgebra::DMatrix;
use oracles::{eigenvalues, expm, max_diff, to_na, C};
use poslab_core::linalg::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_hermitian(n: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = CMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = C::new(rng.gen_range(-1.0..1.0), 0.0);
        for j in 0..i {
            let z = C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            a[(i, j)] = z;
            a[(j, i)] = z.conj();
        }
    }
    a
}

/// Rank-`r` orthogonal projector from `r` random vectors.
fn random_projector(n: usize, r: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = DMatrix::from_fn(n, r, |_, _| {
        C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let q = m.qr().q();
    let p = &q * q.adjoint();
    CMatrix::from_fn(n, n, |i, j| p[(i, j)])
}

fn check_decomposition(a: &CMatrix) {
    let eig = HermitianEigen::new(a).unwrap();
    let n = a.rows();
    let oracle = eigenvalues(&to_na(a));
    let scale = oracle.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    for (x, y) in eig.values.iter().zip(&oracle) {
        assert!((x - y).abs() < 1e-12 * scale * n as f64, "{x} vs {y}");
    }
    assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    let v = to_na(&eig.vectors);
    let lam = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C::new(eig.values[i], 0.0)
        } else {
            C::new(0.0, 0.0)
        }
    });
    assert!(max_diff(&(&v * lam * v.adjoint()), &to_na(a)) < 1e-12 * scale * n as f64);
    assert!(max_diff(&(v.adjoint() * &v), &DMatrix::identity(n, n)) < 1e-12 * n as f64);
}

#[test]
fn degenerate_spectra_converge() {
    for (n, r) in [(40, 1), (64, 20), (96, 48), (50, 49)] {
        check_decomposition(&random_projector(n, r, n as u64));
    }
    check_decomposition(&CMatrix::zeros(7, 7));
    check_decomposition(&CMatrix::identity(9));
    // compression of a projector by a diagonal 0/1 mask
    let p = random_projector(60, 30, 5);
    let chi = CMatrix::from_fn(60, 60, |i, j| {
        if i == j && i % 3 == 0 {
            C::new(1.0, 0.0)
        } else {
            C::new(0.0, 0.0)
        }
    });
    check_decomposition(&p.mul(&chi).mul(&p));
}

#[test]
fn spectral_norm_matches_svd() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = CMatrix::from_fn(30, 30, |_, _| {
        C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let oracle = oracles::spectral_norm(&to_na(&a));
    assert!((a.spectral_norm().unwrap() - oracle).abs() < 1e-10);
}

#[test]
fn propagator_matches_pade_expm() {
    let h = random_hermitian(24, 8);
    let eig = HermitianEigen::new(&h).unwrap();
    for t in [0.0, 0.37, -2.5] {
        let u = to_na(&unitary_propagator(&eig, t));
        assert!(max_diff(&u, &expm(&to_na(&h), t)) < 1e-11);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_hermitian_decomposes(n in 1usize..48, seed in any::<u64>()) {
        check_decomposition(&random_hermitian(n, seed));
    }
}
