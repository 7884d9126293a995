//! Weak values and exact pre/postselected detection probabilities.
//!
//! The n-th order weak value of an observable `A` between preselection `i`
//! and postselection `f` is `<f|A^n|i> / <f|i>`. It is complex in general and
//! unbounded as the selections approach orthogonality; both features carry
//! physics, so no clipping is applied anywhere.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qcore::{inner, HermitianObservable, Ket};

/// Selections with squared overlap at or below this are treated as orthogonal.
pub const ORTHOGONALITY_THRESHOLD: f64 = 1e-12;

/// Spectral decomposition is kept to small generators; detection-side grids
/// never enter operator space.
pub const SPECTRAL_DIMENSION_CAP: usize = 16;

/// A weak value together with the selections that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakValueResult {
    pub value: Complex64,
    pub order: u32,
    pub preselect: Ket,
    pub postselect: Ket,
}

/// Truncation order for the detection-probability ratio expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesOrder {
    /// Linear in the coupling: `1 + 2 eps Im A_w`.
    First,
    /// Adds the quadratic term `eps^2 (|A_w|^2 - Re A2_w)`.
    Second,
}

fn postselected_overlap(i: &Ket, f: &Ket) -> Result<Complex64> {
    let ov = inner(f, i)?;
    let overlap = ov.norm_sqr();
    if overlap <= ORTHOGONALITY_THRESHOLD {
        return Err(Error::OrthogonalPostselection { overlap });
    }
    Ok(ov)
}

/// `<f|A^n|i> / <f|i>` with `A^n|i>` built by repeated application.
pub fn weak_value(
    a: &HermitianObservable,
    i: &Ket,
    f: &Ket,
    order: u32,
) -> Result<WeakValueResult> {
    if order == 0 {
        return Err(Error::parameter("weak-value order must be a positive integer"));
    }
    let ov = postselected_overlap(i, f)?;
    let mut v = i.amplitudes().clone();
    for _ in 0..order {
        v = a.apply(&v)?;
    }
    if f.dim() != v.len() {
        return Err(Error::DimensionMismatch {
            left: f.dim(),
            right: v.len(),
        });
    }
    let value = f.amplitudes().dotc(&v) / ov;
    Ok(WeakValueResult {
        value,
        order,
        preselect: i.clone(),
        postselect: f.clone(),
    })
}

/// First-order weak value of the polarization observable `S`.
pub fn stokes_weak_value(i: &Ket, f: &Ket) -> Result<Complex64> {
    Ok(weak_value(&HermitianObservable::stokes(), i, f, 1)?.value)
}

/// `exp(-i eps A)` through the spectral decomposition of `A`.
pub fn unitary_from_generator(
    a: &HermitianObservable,
    epsilon: f64,
) -> Result<DMatrix<Complex64>> {
    if !epsilon.is_finite() {
        return Err(Error::parameter(format!("coupling epsilon = {epsilon} must be finite")));
    }
    let dim = a.dim();
    if dim > SPECTRAL_DIMENSION_CAP {
        return Err(Error::DimensionCap {
            dim,
            cap: SPECTRAL_DIMENSION_CAP,
        });
    }
    let eig = a.matrix().clone().symmetric_eigen();
    let phases = DMatrix::from_diagonal(
        &eig.eigenvalues
            .map(|lambda| Complex64::from_polar(1.0, -epsilon * lambda)),
    );
    Ok(&eig.eigenvectors * phases * eig.eigenvectors.adjoint())
}

/// Exact postselected detection probability `|<f| exp(-i eps A) |i>|^2`.
pub fn perturbed_probability(
    a: &HermitianObservable,
    i: &Ket,
    f: &Ket,
    epsilon: f64,
) -> Result<f64> {
    let u = unitary_from_generator(a, epsilon)?;
    if i.dim() != a.dim() || f.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            left: i.dim().max(f.dim()),
            right: a.dim(),
        });
    }
    let evolved = &u * i.amplitudes();
    Ok(f.amplitudes().dotc(&evolved).norm_sqr().min(1.0))
}

/// Truncated expansion of the probability ratio `P_eps / P`.
///
/// `ratio = 1 + 2 eps Im A_w + eps^2 (|A_w|^2 - Re A2_w) + O(eps^3)`, where
/// `A2_w` is the second-order weak value.
pub fn ratio_series(
    a: &HermitianObservable,
    i: &Ket,
    f: &Ket,
    epsilon: f64,
    order: SeriesOrder,
) -> Result<f64> {
    if !epsilon.is_finite() {
        return Err(Error::parameter(format!("coupling epsilon = {epsilon} must be finite")));
    }
    let first = weak_value(a, i, f, 1)?.value;
    let mut ratio = 1.0 + 2.0 * epsilon * first.im;
    if order == SeriesOrder::Second {
        let second = weak_value(a, i, f, 2)?.value;
        ratio += epsilon * epsilon * (first.norm_sqr() - second.re);
    }
    Ok(ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{make_postselection, make_preselection, PolarizationConfig};

    // Operating-point weak value of S, frozen from the closed-form 2x2
    // arithmetic.
    const SW_RE: f64 = 8.001286702803057;
    const SW_IM: f64 = 3.9405833416544858;
    const OVERLAP_PROB: f64 = 0.012414836399092036;

    fn operating_point() -> (Ket, Ket) {
        let cfg = PolarizationConfig::default();
        (make_preselection(cfg), make_postselection(cfg))
    }

    #[test]
    fn operating_point_weak_value_is_large_and_complex() {
        let (i, f) = operating_point();
        let s = HermitianObservable::stokes();
        let wv = weak_value(&s, &i, &f, 1).unwrap();
        assert!((wv.value.re - SW_RE).abs() < 1e-12);
        assert!((wv.value.im - SW_IM).abs() < 1e-12);
        assert_eq!(wv.order, 1);
        // both quadratures exceed the eigenvalue range
        assert!(wv.value.re > 1.0 && wv.value.im > 1.0);
    }

    #[test]
    fn second_order_weak_value_of_involution_is_unity() {
        let (i, f) = operating_point();
        let s = HermitianObservable::stokes();
        let wv2 = weak_value(&s, &i, &f, 2).unwrap();
        assert!((wv2.value - Complex64::ONE).norm() < 1e-12);
    }

    #[test]
    fn eigenstate_preselection_pins_the_weak_value() {
        let f = make_postselection(PolarizationConfig::default());
        let s = HermitianObservable::stokes();
        let wv = weak_value(&s, &Ket::horizontal(), &f, 1).unwrap();
        assert!((wv.value - Complex64::ONE).norm() < 1e-14);
    }

    #[test]
    fn orthogonal_selections_are_rejected_not_diverged() {
        let s = HermitianObservable::stokes();
        let err = weak_value(&s, &Ket::horizontal(), &Ket::vertical(), 1).unwrap_err();
        assert!(matches!(err, Error::OrthogonalPostselection { .. }));
    }

    #[test]
    fn zero_order_is_rejected() {
        let (i, f) = operating_point();
        let s = HermitianObservable::stokes();
        assert!(weak_value(&s, &i, &f, 0).is_err());
    }

    #[test]
    fn generator_exponential_matches_closed_form_for_stokes() {
        let eps = 0.37;
        let u = unitary_from_generator(&HermitianObservable::stokes(), eps).unwrap();
        assert!((u[(0, 0)] - Complex64::from_polar(1.0, -eps)).norm() < 1e-14);
        assert!((u[(1, 1)] - Complex64::from_polar(1.0, eps)).norm() < 1e-14);
        assert!(u[(0, 1)].norm() < 1e-14);
        assert!(u[(1, 0)].norm() < 1e-14);
    }

    #[test]
    fn generator_exponential_is_unitary_and_invertible() {
        // fixed dense Hermitian 4x4
        let mut m = DMatrix::zeros(4, 4);
        let entries = [
            (0, 0, 0.3, 0.0),
            (1, 1, -1.1, 0.0),
            (2, 2, 0.75, 0.0),
            (3, 3, 0.0, 0.0),
            (0, 1, 0.2, 0.5),
            (0, 2, -0.4, 0.1),
            (1, 3, 0.9, -0.3),
            (2, 3, 0.05, 0.6),
        ];
        for &(r, c, re, im) in &entries {
            m[(r, c)] = Complex64::new(re, im);
            if r != c {
                m[(c, r)] = Complex64::new(re, -im);
            }
        }
        let a = HermitianObservable::new(m).unwrap();
        let u = unitary_from_generator(&a, 0.8).unwrap();
        let gram = u.adjoint() * &u;
        let dev = (gram - DMatrix::<Complex64>::identity(4, 4))
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max);
        assert!(dev < 1e-12, "unitarity deviation {dev:e}");
        let round_trip = unitary_from_generator(&a, -0.8).unwrap() * &u;
        let dev = (round_trip - DMatrix::<Complex64>::identity(4, 4))
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max);
        assert!(dev < 1e-12, "inverse deviation {dev:e}");
    }

    #[test]
    fn spectral_cap_is_enforced() {
        let a = HermitianObservable::identity(17);
        assert!(matches!(
            unitary_from_generator(&a, 0.1),
            Err(Error::DimensionCap { dim: 17, cap: 16 })
        ));
    }

    #[test]
    fn perturbed_probability_matches_rotation_closed_form() {
        // exp(-i eps S) acts as |<f|i>| cos(eps) - i <f|S|i> sin(eps), so the
        // ratio to P is cos^2 + |S_w|^2 sin^2 + Im S_w sin(2 eps).
        let (i, f) = operating_point();
        let s = HermitianObservable::stokes();
        for eps in [0.0, 1e-3, 0.05, 0.3, 1.2] {
            let p = perturbed_probability(&s, &i, &f, eps).unwrap();
            let sw = Complex64::new(SW_RE, SW_IM);
            let expected = OVERLAP_PROB
                * (eps.cos().powi(2)
                    + eps.sin().powi(2) * sw.norm_sqr()
                    + (2.0 * eps).sin() * sw.im);
            assert!((p - expected).abs() < 1e-13, "eps = {eps}");
            assert!((0.0..=1.0).contains(&p));
        }
    }

    #[test]
    fn unperturbed_probability_reduces_to_the_overlap() {
        let (i, f) = operating_point();
        let s = HermitianObservable::stokes();
        let p = perturbed_probability(&s, &i, &f, 0.0).unwrap();
        assert!((p - OVERLAP_PROB).abs() < 1e-15);
    }

    #[test]
    fn series_at_zero_coupling_is_exactly_one() {
        let (i, f) = operating_point();
        let s = HermitianObservable::stokes();
        assert_eq!(ratio_series(&s, &i, &f, 0.0, SeriesOrder::First).unwrap(), 1.0);
        assert_eq!(ratio_series(&s, &i, &f, 0.0, SeriesOrder::Second).unwrap(), 1.0);
    }

    #[test]
    fn second_order_series_tracks_the_exact_ratio_at_cubic_accuracy() {
        let (i, f) = operating_point();
        let s = HermitianObservable::stokes();
        let residual = |eps: f64| {
            let exact = perturbed_probability(&s, &i, &f, eps).unwrap() / OVERLAP_PROB;
            let series = ratio_series(&s, &i, &f, eps, SeriesOrder::Second).unwrap();
            (exact - series).abs()
        };
        // leading missed term is -(4/3) eps^3 Im S_w
        assert!(residual(1e-3) < 6e-9);
        assert!(residual(1e-2) < 6e-6);
        assert!(residual(1e-2) > residual(1e-3) * 500.0);
    }

    #[test]
    fn first_order_series_matches_documented_coefficients() {
        let (i, f) = operating_point();
        let s = HermitianObservable::stokes();
        let eps = 0.01;
        let first = ratio_series(&s, &i, &f, eps, SeriesOrder::First).unwrap();
        assert!((first - (1.0 + 2.0 * eps * SW_IM)).abs() < 1e-14);
        let second = ratio_series(&s, &i, &f, eps, SeriesOrder::Second).unwrap();
        let sw_sq = SW_RE * SW_RE + SW_IM * SW_IM;
        assert!((second - (1.0 + 2.0 * eps * SW_IM + eps * eps * (sw_sq - 1.0))).abs() < 1e-14);
    }
}
