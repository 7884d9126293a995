//! Randomized invariants of the state algebra, weak values, series
//! expansions, and crystal transmission.

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use weakwave::crystal::{perturbed_density, CrystalSetup, DetectionPlane};
use weakwave::pointer::TransverseProfile;
use weakwave::qcore::{
    expectation, inner, make_postselection_wrapped, make_preselection, poincare_coords,
    HermitianObservable, Ket, PolarizationConfig,
};
use weakwave::weakval::{
    perturbed_probability, ratio_series, weak_value, SeriesOrder, ORTHOGONALITY_THRESHOLD,
};

fn complex_strategy() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im))
}

fn ket_strategy(dim: usize) -> impl Strategy<Value = Ket> {
    prop::collection::vec(complex_strategy(), dim)
        .prop_filter_map("needs a usable norm", |components| {
            let norm_sq: f64 = components.iter().map(|z| z.norm_sqr()).sum();
            if norm_sq > 1e-3 {
                Ket::normalized(&components).ok()
            } else {
                None
            }
        })
}

fn hermitian_strategy(dim: usize) -> impl Strategy<Value = HermitianObservable> {
    prop::collection::vec(complex_strategy(), dim * dim).prop_map(move |entries| {
        let raw = DMatrix::from_vec(dim, dim, entries);
        let symmetrized = (raw.clone() + raw.adjoint()) * Complex64::new(0.5, 0.0);
        HermitianObservable::new(symmetrized).expect("symmetrized matrix is Hermitian")
    })
}

fn spun(ket: &Ket, angle: f64) -> Ket {
    let phase = Complex64::from_polar(1.0, angle);
    let rotated: Vec<Complex64> = (0..ket.dim()).map(|k| ket.amplitude(k) * phase).collect();
    Ket::normalized(&rotated).expect("phase rotation preserves the norm")
}

proptest! {
    #[test]
    fn kets_normalize_to_unit_length(ket in ket_strategy(3)) {
        let norm_sq: f64 = (0..3).map(|k| ket.amplitude(k).norm_sqr()).sum();
        prop_assert!((norm_sq - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inner_products_conjugate_under_swap(a in ket_strategy(3), b in ket_strategy(3)) {
        let forward = inner(&a, &b).unwrap();
        let backward = inner(&b, &a).unwrap();
        prop_assert!((forward - backward.conj()).norm() < 1e-12);
    }

    #[test]
    fn poincare_coordinates_land_on_the_unit_sphere(ket in ket_strategy(2)) {
        let [s1, s2, s3] = poincare_coords(&ket).unwrap();
        let radius = (s1 * s1 + s2 * s2 + s3 * s3).sqrt();
        prop_assert!((radius - 1.0).abs() < 1e-10);
    }

    #[test]
    fn expectations_respect_the_spectral_range(
        observable in hermitian_strategy(4),
        psi in ket_strategy(4),
    ) {
        let value = expectation(&observable, &psi).unwrap();
        let eigenvalues = observable.matrix().clone().symmetric_eigen().eigenvalues;
        let low = eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        let high = eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(value >= low - 1e-10 && value <= high + 1e-10);
    }

    #[test]
    fn basis_projector_weak_values_sum_to_one(i in ket_strategy(2), f in ket_strategy(2)) {
        prop_assume!(inner(&f, &i).unwrap().norm_sqr() > 1e-6);
        let mut h = DMatrix::zeros(2, 2);
        h[(0, 0)] = Complex64::ONE;
        let mut v = DMatrix::zeros(2, 2);
        v[(1, 1)] = Complex64::ONE;
        let h_w = weak_value(&HermitianObservable::new(h).unwrap(), &i, &f, 1).unwrap().value;
        let v_w = weak_value(&HermitianObservable::new(v).unwrap(), &i, &f, 1).unwrap().value;
        let scale = 1.0 + h_w.norm() + v_w.norm();
        prop_assert!((h_w + v_w - Complex64::ONE).norm() < 1e-9 * scale);
    }

    #[test]
    fn weak_values_ignore_global_phases(
        i in ket_strategy(2),
        f in ket_strategy(2),
        observable in hermitian_strategy(2),
        alpha in 0.0f64..std::f64::consts::TAU,
        beta in 0.0f64..std::f64::consts::TAU,
    ) {
        prop_assume!(inner(&f, &i).unwrap().norm_sqr() > 1e-4);
        let plain = weak_value(&observable, &i, &f, 1).unwrap().value;
        let rotated = weak_value(&observable, &spun(&i, alpha), &spun(&f, beta), 1)
            .unwrap()
            .value;
        prop_assert!((plain - rotated).norm() < 1e-9 * (1.0 + plain.norm()));
        let p_plain = perturbed_probability(&observable, &i, &f, 0.3).unwrap();
        let p_rotated = perturbed_probability(&observable, &spun(&i, alpha), &spun(&f, beta), 0.3)
            .unwrap();
        prop_assert!((p_plain - p_rotated).abs() < 1e-12);
    }

    #[test]
    fn perturbed_probabilities_stay_physical(
        i in ket_strategy(2),
        f in ket_strategy(2),
        observable in hermitian_strategy(2),
        epsilon in 0.0f64..3.0,
    ) {
        let p = perturbed_probability(&observable, &i, &f, epsilon).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn series_truncations_carry_their_advertised_orders(
        i in ket_strategy(2),
        f in ket_strategy(2),
        observable in hermitian_strategy(2),
    ) {
        let survival = inner(&f, &i).unwrap().norm_sqr();
        prop_assume!(survival > 0.1);
        let epsilon = 1e-3;
        let exact = perturbed_probability(&observable, &i, &f, epsilon).unwrap() / survival;
        let first = ratio_series(&observable, &i, &f, epsilon, SeriesOrder::First).unwrap();
        let second = ratio_series(&observable, &i, &f, epsilon, SeriesOrder::Second).unwrap();
        // entries are bounded by 1, survival by 0.1, so loose analytic
        // bounds on the remainder constants apply
        prop_assert!((exact - first).abs() < 1e3 * epsilon * epsilon);
        prop_assert!((exact - second).abs() < 1e3 * epsilon * epsilon * epsilon);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transmission_does_not_depend_on_the_detection_plane(
        phi in -3.1f64..3.1,
        theta in 0.0f64..std::f64::consts::TAU,
        epsilon in 0.0f64..2.0,
        sigma in 0.5f64..2.0,
    ) {
        let i = make_preselection(PolarizationConfig::new(phi, 0.0).unwrap());
        let f = make_postselection_wrapped(theta);
        let profile = TransverseProfile::gaussian(sigma).unwrap();
        let mut totals = [0.0f64; 2];
        for (slot, plane) in [DetectionPlane::Position, DetectionPlane::Fourier]
            .into_iter()
            .enumerate()
        {
            let setup = CrystalSetup::new(
                i.clone(),
                f.clone(),
                profile.clone(),
                epsilon,
                plane,
                None,
            )
            .unwrap();
            totals[slot] = perturbed_density(&setup).unwrap().total();
        }
        prop_assert!((totals[0] - totals[1]).abs() < 1e-9);
    }

    #[test]
    fn weak_values_blow_up_only_past_the_orthogonality_threshold(
        i in ket_strategy(2),
        f in ket_strategy(2),
    ) {
        let survival = inner(&f, &i).unwrap().norm_sqr();
        let result = weak_value(&HermitianObservable::stokes(), &i, &f, 1);
        if survival <= ORTHOGONALITY_THRESHOLD {
            prop_assert!(result.is_err());
        } else {
            prop_assert!(result.is_ok());
        }
    }
}
