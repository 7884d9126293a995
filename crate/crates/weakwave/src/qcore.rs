//! Polarization kets, Hermitian observables, and Poincare-sphere coordinates.
//!
//! States are normalized at construction and immutable afterwards. The
//! polarization basis is `|H>`, `|V>`; the Stokes-like observable measured by
//! the crystal is `S = |H><H| - |V><V|`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Maximum allowed deviation from Hermitian symmetry, and the tolerance to
/// which kets are normalized.
const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// A normalized pure state on an n-level system.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    amplitudes: DVector<Complex64>,
}

impl Ket {
    /// Normalizes `components` into a unit ket.
    pub fn normalized(components: &[Complex64]) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::parameter("a ket needs at least one amplitude"));
        }
        let v = DVector::from_column_slice(components);
        let norm = v.norm();
        if !(norm > 1e-150) || !norm.is_finite() {
            return Err(Error::ZeroVector { norm });
        }
        Ok(Ket {
            amplitudes: v / Complex64::new(norm, 0.0),
        })
    }

    /// `|H>`.
    pub fn horizontal() -> Self {
        Ket {
            amplitudes: DVector::from_vec(vec![Complex64::ONE, Complex64::ZERO]),
        }
    }

    /// `|V>`.
    pub fn vertical() -> Self {
        Ket {
            amplitudes: DVector::from_vec(vec![Complex64::ZERO, Complex64::ONE]),
        }
    }

    /// `(|H> + |V>)/sqrt(2)`, the port used for direct state reconstruction.
    pub fn diagonal() -> Self {
        let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Ket {
            amplitudes: DVector::from_vec(vec![r, r]),
        }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, k: usize) -> Complex64 {
        self.amplitudes[k]
    }
}

/// `<a|b>`, conjugate-linear in the first argument.
pub fn inner(a: &Ket, b: &Ket) -> Result<Complex64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(a.amplitudes.dotc(&b.amplitudes))
}

/// A Hermitian operator, validated at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianObservable {
    matrix: DMatrix<Complex64>,
}

impl HermitianObservable {
    /// Accepts a square matrix whose deviation from `A = A^dagger` stays
    /// below `1e-12` in max-entry norm.
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() || matrix.is_empty() {
            return Err(Error::parameter("observable matrix must be square and nonempty"));
        }
        let deviation = (&matrix - matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max);
        if !(deviation <= SYMMETRY_TOLERANCE) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(HermitianObservable { matrix })
    }

    /// `S = |H><H| - |V><V|`, eigenvalues `+1` (H) and `-1` (V).
    pub fn stokes() -> Self {
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 0)] = Complex64::ONE;
        m[(1, 1)] = -Complex64::ONE;
        HermitianObservable { matrix: m }
    }

    pub fn identity(dim: usize) -> Self {
        HermitianObservable {
            matrix: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// `A |psi>` as a raw (generally unnormalized) amplitude vector.
    pub fn apply(&self, v: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        if self.dim() != v.len() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: v.len(),
            });
        }
        Ok(&self.matrix * v)
    }
}

/// `<psi| A |psi>`; the imaginary part vanishes for Hermitian `A` and is
/// dropped.
pub fn expectation(a: &HermitianObservable, psi: &Ket) -> Result<f64> {
    let av = a.apply(psi.amplitudes())?;
    Ok(psi.amplitudes().dotc(&av).re)
}

/// Pre/postselection angles for the polarization interferometer.
///
/// The preselection is `(|H> - e^{i phi}|V>)/sqrt(2)`; the postselection is
/// `cos(theta/2)|H> + sin(theta/2)|V>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationConfig {
    phi: f64,
    theta: f64,
}

impl PolarizationConfig {
    /// Requires `phi` in `[-pi, pi]` and `theta` in `[0, 2*pi)`.
    pub fn new(phi: f64, theta: f64) -> Result<Self> {
        use std::f64::consts::PI;
        if !phi.is_finite() || !(-PI..=PI).contains(&phi) {
            return Err(Error::parameter(format!("phi = {phi} outside [-pi, pi]")));
        }
        if !theta.is_finite() || !(0.0..2.0 * PI).contains(&theta) {
            return Err(Error::parameter(format!("theta = {theta} outside [0, 2*pi)")));
        }
        Ok(PolarizationConfig { phi, theta })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

impl Default for PolarizationConfig {
    /// The elliptical preselection `phi = 0.1` and nearly-crossed analyzer
    /// `theta = pi/2 - 0.2` used as the running operating point.
    fn default() -> Self {
        PolarizationConfig {
            phi: 0.1,
            theta: std::f64::consts::FRAC_PI_2 - 0.2,
        }
    }
}

/// `(|H> - e^{i phi}|V>)/sqrt(2)`.
pub fn make_preselection(config: PolarizationConfig) -> Ket {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    Ket {
        amplitudes: DVector::from_vec(vec![
            Complex64::new(r, 0.0),
            -Complex64::from_polar(r, config.phi),
        ]),
    }
}

/// `cos(theta/2)|H> + sin(theta/2)|V>`.
pub fn make_postselection(config: PolarizationConfig) -> Ket {
    let half = 0.5 * config.theta;
    Ket {
        amplitudes: DVector::from_vec(vec![
            Complex64::new(half.cos(), 0.0),
            Complex64::new(half.sin(), 0.0),
        ]),
    }
}

/// `make_postselection` for an arbitrary finite angle, wrapped into
/// `[0, 2*pi)`. Angle sweeps generate endpoints like `2*pi` or small
/// negative values that the strict constructor rejects.
pub fn make_postselection_wrapped(theta: f64) -> Ket {
    use std::f64::consts::PI;
    let mut wrapped = theta.rem_euclid(2.0 * PI);
    // rem_euclid of a tiny negative angle can round up to exactly 2*pi
    if wrapped >= 2.0 * PI {
        wrapped = 0.0;
    }
    let config = PolarizationConfig::new(0.0, wrapped).expect("wrapped angle is in range");
    make_postselection(config)
}

/// Poincare-sphere coordinates `(s1, s2, s3)` of a polarization ket.
///
/// `s1 = <S>` separates H from V, `s2` separates the diagonal pair, and `s3`
/// the circular pair; pure states land on the unit sphere.
pub fn poincare_coords(psi: &Ket) -> Result<[f64; 3]> {
    if psi.dim() != 2 {
        return Err(Error::DimensionMismatch {
            left: psi.dim(),
            right: 2,
        });
    }
    let h = psi.amplitude(0);
    let v = psi.amplitude(1);
    let cross = h.conj() * v;
    Ok([h.norm_sqr() - v.norm_sqr(), 2.0 * cross.re, 2.0 * cross.im])
}

/// Conversion between natural units (`hbar = 1`, lengths in beam widths) and
/// reporting units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    hbar: f64,
    sigma_unit: f64,
}

impl UnitSystem {
    pub fn new(hbar: f64, sigma_unit: f64) -> Result<Self> {
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(Error::parameter(format!("hbar = {hbar} must be positive")));
        }
        if !(sigma_unit > 0.0) || !sigma_unit.is_finite() {
            return Err(Error::parameter(format!(
                "sigma_unit = {sigma_unit} must be positive"
            )));
        }
        Ok(UnitSystem { hbar, sigma_unit })
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn sigma_unit(&self) -> f64 {
        self.sigma_unit
    }

    /// Rescales a length expressed in beam widths.
    pub fn length_out(&self, x: f64) -> f64 {
        x * self.sigma_unit
    }

    /// Rescales a momentum expressed in natural units of `hbar / sigma`.
    pub fn momentum_out(&self, p: f64) -> f64 {
        p * self.hbar / self.sigma_unit
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        UnitSystem {
            hbar: 1.0,
            sigma_unit: 1.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn preselection_matches_closed_form_amplitudes() {
        let i = make_preselection(PolarizationConfig::default());
        assert!((i.amplitude(0) - c(0.70710678118654746, 0.0)).norm() < 1e-15);
        assert!((i.amplitude(1) - c(-0.70357419257695231, -0.070592885899994143)).norm() < 1e-15);
    }

    #[test]
    fn postselection_matches_closed_form_amplitudes() {
        let f = make_postselection(PolarizationConfig::default());
        assert!((f.amplitude(0).re - 0.77416707847694644).abs() < 1e-15);
        assert!((f.amplitude(1).re - 0.63298130667695818).abs() < 1e-15);
        assert_eq!(f.amplitude(0).im, 0.0);
        assert_eq!(f.amplitude(1).im, 0.0);
    }

    #[test]
    fn operating_point_overlap_probability_is_just_over_one_percent() {
        let cfg = PolarizationConfig::default();
        let ov = inner(&make_postselection(cfg), &make_preselection(cfg)).unwrap();
        assert!((ov.norm_sqr() - 0.012414836399092036).abs() < 1e-15);
        // agrees with the nominal 0.012 at the quoted precision
        assert!((ov.norm_sqr() - 0.012).abs() < 1e-3);
    }

    #[test]
    fn phase_pi_preselection_is_diagonal() {
        let i = make_preselection(PolarizationConfig::new(std::f64::consts::PI, 0.0).unwrap());
        let d = Ket::diagonal();
        let fidelity = inner(&d, &i).unwrap().norm_sqr();
        assert!((fidelity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inner_is_conjugate_symmetric() {
        let a = Ket::normalized(&[c(0.3, 0.4), c(-0.1, 0.85)]).unwrap();
        let b = Ket::normalized(&[c(-0.7, 0.2), c(0.5, 0.3)]).unwrap();
        let ab = inner(&a, &b).unwrap();
        let ba = inner(&b, &a).unwrap();
        assert!((ab - ba.conj()).norm() < 1e-15);
    }

    #[test]
    fn inner_rejects_dimension_mismatch() {
        let a = Ket::normalized(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let b = Ket::horizontal();
        assert!(matches!(
            inner(&a, &b),
            Err(Error::DimensionMismatch { left: 3, right: 2 })
        ));
    }

    #[test]
    fn zero_vector_cannot_be_normalized() {
        let err = Ket::normalized(&[c(0.0, 0.0), c(0.0, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::ZeroVector { .. }));
    }

    #[test]
    fn kets_are_unit_norm_after_construction() {
        let k = Ket::normalized(&[c(3.0, -4.0), c(0.0, 12.0)]).unwrap();
        assert!((k.amplitudes().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stokes_expectation_interpolates_between_eigenvalues() {
        let s = HermitianObservable::stokes();
        let psi = Ket::normalized(&[c((0.3f64).cos(), 0.0), c((0.3f64).sin(), 0.0)]).unwrap();
        let val = expectation(&s, &psi).unwrap();
        assert!((val - 0.82533561490967822).abs() < 1e-15);
        assert!((expectation(&s, &Ket::horizontal()).unwrap() - 1.0).abs() < 1e-15);
        assert!((expectation(&s, &Ket::vertical()).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_hermitian_matrix_is_rejected() {
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = c(0.0, 1.0);
        m[(1, 0)] = c(0.0, 1.0); // adjoint would need -i here
        assert!(matches!(
            HermitianObservable::new(m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn poincare_puts_basis_states_on_the_poles() {
        assert_eq!(poincare_coords(&Ket::horizontal()).unwrap(), [1.0, 0.0, 0.0]);
        assert_eq!(poincare_coords(&Ket::vertical()).unwrap(), [-1.0, 0.0, 0.0]);
        let [s1, s2, s3] = poincare_coords(&Ket::diagonal()).unwrap();
        assert!(s1.abs() < 1e-15 && (s2 - 1.0).abs() < 1e-15 && s3.abs() < 1e-15);
    }

    #[test]
    fn poincare_of_elliptical_preselection_sits_near_antidiagonal() {
        let i = make_preselection(PolarizationConfig::default());
        let [s1, s2, s3] = poincare_coords(&i).unwrap();
        assert!(s1.abs() < 1e-15);
        assert!((s2 - -0.99500416527802562).abs() < 1e-15);
        assert!((s3 - -0.099833416646828141).abs() < 1e-15);
        let norm = (s1 * s1 + s2 * s2 + s3 * s3).sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn polarization_config_rejects_out_of_range_angles() {
        assert!(PolarizationConfig::new(4.0, 0.0).is_err());
        assert!(PolarizationConfig::new(0.0, -0.1).is_err());
        assert!(PolarizationConfig::new(0.0, 2.0 * std::f64::consts::PI).is_err());
        assert!(PolarizationConfig::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn unit_system_rescales_lengths_and_momenta() {
        let units = UnitSystem::new(2.0, 4.0).unwrap();
        assert_eq!(units.length_out(3.0), 12.0);
        assert_eq!(units.momentum_out(3.0), 1.5);
        let natural = UnitSystem::default();
        assert_eq!(natural.length_out(0.25), 0.25);
        assert_eq!(natural.momentum_out(0.25), 0.25);
        assert!(UnitSystem::new(0.0, 1.0).is_err());
        assert!(UnitSystem::new(1.0, -1.0).is_err());
    }
}
