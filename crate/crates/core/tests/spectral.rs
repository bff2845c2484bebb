mod oracles;

use oracles::{dense_projector, max_diff, to_na, vec_diff, C};
use poslab_core::evolution::compact_bump;
use poslab_core::spectral::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_field(params: SimulationParams, seed: u64) -> SpinorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SpinorField::from_fn(params, |_| {
        [
            C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        ]
    })
}

#[test]
fn three_four_five_eigenvalues() {
    let e = dirac_symbol(3.0, 4.0).hermitian_eigenvalues();
    assert!((e[0] + 5.0).abs() < 1e-14 && (e[1] - 5.0).abs() < 1e-14);
    let p = energy_projector(3.0, 4.0, EnergySign::Positive);
    assert!((p.trace().re - 1.0).abs() < 1e-15);
    assert!(p.mul(&p).max_abs_diff(&p) < 1e-15);
}

#[test]
fn rest_frame_values() {
    let p = energy_projector(0.0, 1.0, EnergySign::Positive);
    assert_eq!(p.0[0][0], C::new(1.0, 0.0));
    assert_eq!(p.0[1][1], C::new(0.0, 0.0));
    let w = positive_spinor(0.0, 1.0);
    assert_eq!(w, [C::new(1.0, 0.0), C::new(0.0, 0.0)]);
    let a = dirac_symbol(-1.7, 0.3).hermitian_eigenvalues();
    let b = dirac_symbol(1.7, 0.3).hermitian_eigenvalues();
    assert!((a[0] - b[0]).abs() < 1e-15 && (a[1] - b[1]).abs() < 1e-15);
}

#[test]
fn fft_projector_matches_mode_sum_matrix() {
    let params = SimulationParams::with_half_step(1.0, 2.0, 8).unwrap();
    for (sign, s) in [(EnergySign::Positive, 1.0), (EnergySign::Negative, -1.0)] {
        let ours = to_na(&projector_matrix(&params, sign));
        assert!(max_diff(&ours, &dense_projector(&params, s)) < 1e-12);
    }
    let oracle = dense_projector(&params, 1.0);
    for seed in 0..5 {
        let f = random_field(params, seed);
        let split = split_energy(&f).unwrap();
        let expect = &oracle * nalgebra::DVector::from_vec(f.to_vector());
        assert!(vec_diff(&split.plus.to_vector(), expect.as_slice()) < 1e-10);
        let total = split.plus.norm_sqr() + split.minus.norm_sqr();
        assert!((total - f.norm_sqr()).abs() < 1e-10);
        assert!(split.plus.inner(&split.minus).norm() < 1e-10);
    }
}

#[test]
fn plus_part_is_fixed_point() {
    let params = SimulationParams::with_half_step(1.0, 16.0, 64).unwrap();
    let plus = split_energy(&random_field(params, 7)).unwrap().plus;
    let again = split_energy(&plus).unwrap();
    assert!(again.minus.norm() < 1e-10);
}

#[test]
fn fraction_of_mode_superposition_is_half() {
    let params = SimulationParams::with_half_step(1.0, 16.0, 64).unwrap();
    let k = 3;
    let p = params.momentum_grid().get(k);
    let plus = SpinorField::from_momentum_profile(params, |j, _| {
        if j == k {
            positive_spinor(p, 1.0)
        } else {
            [C::new(0.0, 0.0); 2]
        }
    });
    assert!(negative_fraction(&plus).unwrap() < 1e-12);
    let both = SpinorField::from_momentum_profile(params, |j, _| {
        if j == k {
            let (a, b) = (positive_spinor(p, 1.0), negative_spinor(p, 1.0));
            [a[0] + b[0], a[1] + b[1]]
        } else {
            [C::new(0.0, 0.0); 2]
        }
    });
    assert!((negative_fraction(&both).unwrap() - 0.5).abs() < 1e-12);
    assert!(negative_fraction(&SpinorField::zeros(params)).is_err());
}

#[test]
fn non_finite_field_is_rejected() {
    let params = SimulationParams::with_half_step(1.0, 16.0, 64).unwrap();
    let mut f = random_field(params, 1);
    f.set(5, [C::new(f64::NAN, 0.0), C::new(0.0, 0.0)]);
    assert!(split_energy(&f).is_err());
}

#[test]
fn truncated_packet_has_fraction_in_open_unit_interval() {
    let params = SimulationParams::with_half_step(1.0, 16.0, 64).unwrap();
    let packet = make_positive_packet(params, 0.0, 2.0, 0.0).unwrap();
    let cut = packet.multiply_pointwise(|n| {
        if params.position(n).abs() < 1.0 {
            C::new(1.0, 0.0)
        } else {
            C::new(0.0, 0.0)
        }
    });
    let f = negative_fraction(&cut).unwrap();
    assert!(f > 0.0 && f < 1.0);
    // dense oracle
    let v = nalgebra::DVector::from_vec(cut.to_vector());
    let minus = &dense_projector(&params, -1.0) * &v;
    let oracle = minus.norm_squared() / v.norm_squared();
    assert!((f - oracle).abs() < 1e-12);
    assert_eq!(f, negative_fraction(&cut).unwrap());
}

#[test]
fn packet_contract() {
    let params = SimulationParams::with_half_step(1.0, 40.0, 1024).unwrap();
    let packet = make_positive_packet(params, 0.0, 2.0, 0.0).unwrap();
    assert!((packet.norm_sqr() - 1.0).abs() < 1e-12);
    assert!(negative_fraction(&packet).unwrap() < 1e-10);
    assert!(make_positive_packet(params, 0.0, 0.5 * params.dx(), 0.0).is_err());
    assert!(make_positive_packet(params, 0.0, 2.0, 79.0).is_err());
}

#[test]
fn projected_bump_has_no_zeros_dense_oracle() {
    let params = SimulationParams::with_half_step(1.0, 16.0, 64).unwrap();
    let bump = compact_bump(params, 0.0, params.length() / 8.0).unwrap();
    let plus = split_energy(&bump).unwrap().plus;
    let oracle = &dense_projector(&params, 1.0) * nalgebra::DVector::from_vec(bump.to_vector());
    assert!(vec_diff(&plus.to_vector(), oracle.as_slice()) < 1e-10);
    let max = plus.max_abs();
    assert!((0..64).all(|n| plus.abs_at(n) > 1e-8 * max));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn projector_algebra(p in -200.0f64..200.0, m in 0.01f64..50.0) {
        let plus = energy_projector(p, m, EnergySign::Positive);
        let minus = energy_projector(p, m, EnergySign::Negative);
        let h = dirac_symbol(p, m);
        let e = (p * p + m * m).sqrt();
        prop_assert!(plus.mul(&plus).max_abs_diff(&plus) < 1e-12);
        prop_assert!(minus.mul(&minus).max_abs_diff(&minus) < 1e-12);
        prop_assert!(plus.mul(&minus).max_abs_diff(&Mat2([[C::new(0.0, 0.0); 2]; 2])) < 1e-12);
        prop_assert!(plus.add(&minus).max_abs_diff(&Mat2::IDENTITY) < 1e-12);
        prop_assert!(h.mul(&plus).max_abs_diff(&plus.scale(e)) < 1e-12 * e.max(1.0));
        prop_assert!(h.mul(&minus).max_abs_diff(&minus.scale(-e)) < 1e-12 * e.max(1.0));
        prop_assert!(plus.is_hermitian(0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn split_round_trip(seed in any::<u64>(), log_n in 3u32..8) {
        let n = 1usize << log_n;
        let params = SimulationParams::with_half_step(1.0, n as f64 / 8.0, n).unwrap();
        let f = random_field(params, seed);
        let split = split_energy(&f).unwrap();
        prop_assert!(split.reconstruct().max_abs_diff(&f) < 1e-12);
        let total = split.plus.norm_sqr() + split.minus.norm_sqr();
        prop_assert!((total - f.norm_sqr()).abs() < 1e-10 * f.norm_sqr().max(1.0));
    }

    #[test]
    fn split_round_trip_odd_factor_grid(seed in any::<u64>()) {
        let params = SimulationParams::with_half_step(1.0, 12.0, 48).unwrap();
        let f = random_field(params, seed);
        prop_assert!(split_energy(&f).unwrap().reconstruct().max_abs_diff(&f) < 1e-12);
    }
}
