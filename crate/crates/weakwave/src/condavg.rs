//! Generalized eigenvalues and conditioned averages of the polarization.
//!
//! Reading each detector pixel `x` as the value `x / epsilon` turns the
//! displaced-beam measurement into an unsharp measurement of the polarization
//! observable `S`: without postselection the assignment averages to `<S>`
//! exactly, for any displacement. With postselection the same assignment
//! averages to `Re S_w` in the weak limit, interpolates smoothly, and can
//! leave the eigenvalue range `[-1, 1]` entirely; in the strong limit it
//! reduces to a classical convex combination that cannot.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::crystal::{perturbed_density, CrystalSetup, DetectionPlane, GridSpec};
use crate::error::{Error, Result};
use crate::metrology::SweepRange;
use crate::pointer::TransverseProfile;
use crate::qcore::{make_postselection_wrapped, Ket};
use crate::quad::simpson;
use crate::weakval::stokes_weak_value;

/// How a detector coordinate is mapped to a measured value.
pub enum ValueAssignment {
    /// The generalized eigenvalue `alpha(x) = x / epsilon`.
    GeneralizedPosition { epsilon: f64 },
    /// An arbitrary finite reading `alpha(x)`.
    Custom(Box<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl ValueAssignment {
    pub fn evaluate(&self, x: f64) -> f64 {
        match self {
            ValueAssignment::GeneralizedPosition { epsilon } => x / epsilon,
            ValueAssignment::Custom(alpha) => alpha(x),
        }
    }

    fn validate(&self) -> Result<()> {
        if let ValueAssignment::GeneralizedPosition { epsilon } = self {
            if !(*epsilon > 0.0) || !epsilon.is_finite() {
                return Err(Error::parameter(format!(
                    "generalized eigenvalues need epsilon > 0, got {epsilon}"
                )));
            }
        }
        Ok(())
    }
}

impl std::fmt::Debug for ValueAssignment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ValueAssignment::GeneralizedPosition { epsilon } => {
                write!(f, "GeneralizedPosition {{ epsilon: {epsilon} }}")
            }
            ValueAssignment::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// The positive operator measured by pixel `x`: diagonal in the `H`/`V`
/// basis with the two displaced beam densities as weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityOperator {
    pub x: f64,
    pub weight_h: f64,
    pub weight_v: f64,
}

impl ProbabilityOperator {
    /// The operator as an explicit 2x2 matrix.
    pub fn matrix(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 0)] = Complex64::new(self.weight_h, 0.0);
        m[(1, 1)] = Complex64::new(self.weight_v, 0.0);
        m
    }
}

fn validate_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::parameter(format!(
            "pixel operators need a positive displacement, got epsilon = {epsilon}"
        )));
    }
    Ok(())
}

/// Requires the beam centroid to sit at the origin, so that pixel values
/// `x / epsilon` average to `<S>` without bias.
fn require_centered(profile: &TransverseProfile, grid: &GridSpec) -> Result<()> {
    let axis = grid.axis();
    let weighted: Vec<f64> = axis.iter().map(|&x| x * profile.psi_x(x).norm_sqr()).collect();
    let mean = simpson(&weighted, grid.step())?;
    if mean.abs() >= 1e-10 {
        return Err(Error::NonCenteredProfile { mean });
    }
    Ok(())
}

/// `P_x = |psi(x - eps)|^2 |H><H| + |psi(x + eps)|^2 |V><V|`.
pub fn probability_operator(
    profile: &TransverseProfile,
    epsilon: f64,
    x: f64,
) -> Result<ProbabilityOperator> {
    validate_epsilon(epsilon)?;
    if !x.is_finite() {
        return Err(Error::parameter(format!("pixel coordinate {x} must be finite")));
    }
    Ok(ProbabilityOperator {
        x,
        weight_h: profile.psi_x(x - epsilon).norm_sqr(),
        weight_v: profile.psi_x(x + epsilon).norm_sqr(),
    })
}

/// Unconditioned detection density `<i| P_x |i>`.
pub fn pixel_probability(
    i: &Ket,
    profile: &TransverseProfile,
    epsilon: f64,
    x: f64,
) -> Result<f64> {
    if i.dim() != 2 {
        return Err(Error::DimensionMismatch { left: i.dim(), right: 2 });
    }
    let op = probability_operator(profile, epsilon, x)?;
    Ok(i.amplitude(0).norm_sqr() * op.weight_h + i.amplitude(1).norm_sqr() * op.weight_v)
}

/// Average of the generalized eigenvalue without postselection:
/// `integral (x / eps) <i|P_x|i> dx`, which equals `<i|S|i>` exactly for a
/// centered beam, at every displacement strength.
pub fn generalized_average(i: &Ket, profile: &TransverseProfile, epsilon: f64) -> Result<f64> {
    validate_epsilon(epsilon)?;
    if i.dim() != 2 {
        return Err(Error::DimensionMismatch { left: i.dim(), right: 2 });
    }
    let grid = GridSpec::for_profile(profile, epsilon, DetectionPlane::Position)?;
    require_centered(profile, &grid)?;
    let axis = grid.axis();
    let mut integrand = Vec::with_capacity(axis.len());
    for &x in &axis {
        integrand.push((x / epsilon) * pixel_probability(i, profile, epsilon, x)?);
    }
    simpson(&integrand, grid.step())
}

/// Max-entry deviation of `integral alpha(x) P_x dx` from the polarization
/// observable `S`. Zero (up to quadrature) for the generalized eigenvalue on
/// a centered beam.
pub fn operator_identity_residual(
    profile: &TransverseProfile,
    epsilon: f64,
    assignment: &ValueAssignment,
) -> Result<f64> {
    validate_epsilon(epsilon)?;
    assignment.validate()?;
    let grid = GridSpec::for_profile(profile, epsilon, DetectionPlane::Position)?;
    let axis = grid.axis();
    let mut alpha_h = Vec::with_capacity(axis.len());
    let mut alpha_v = Vec::with_capacity(axis.len());
    for &x in &axis {
        let alpha = assignment.evaluate(x);
        if !alpha.is_finite() {
            return Err(Error::parameter(format!(
                "value assignment is not finite at x = {x}"
            )));
        }
        let op = probability_operator(profile, epsilon, x)?;
        alpha_h.push(alpha * op.weight_h);
        alpha_v.push(alpha * op.weight_v);
    }
    let m_h = simpson(&alpha_h, grid.step())?;
    let m_v = simpson(&alpha_v, grid.step())?;
    Ok((m_h - 1.0).abs().max((m_v + 1.0).abs()))
}

/// Postselected average of the generalized eigenvalue, using the exact
/// interference density. Approaches `Re S_w` as `epsilon -> 0` and a
/// classical convex combination of `+-1` as `epsilon -> infinity`.
pub fn conditioned_average(
    i: &Ket,
    f: &Ket,
    profile: &TransverseProfile,
    epsilon: f64,
) -> Result<f64> {
    validate_epsilon(epsilon)?;
    let setup = CrystalSetup::new(
        i.clone(),
        f.clone(),
        profile.clone(),
        epsilon,
        DetectionPlane::Position,
        None,
    )?;
    Ok(perturbed_density(&setup)?.conditioned_mean()? / epsilon)
}

/// The classical (strong-measurement) limit of the conditioned average:
/// which-path probabilities reweighted by the analyzer, always in `[-1, 1]`.
pub fn classical_conditioned_average(i: &Ket, f: &Ket) -> Option<f64> {
    let w_h = (f.amplitude(0).conj() * i.amplitude(0)).norm_sqr();
    let w_v = (f.amplitude(1).conj() * i.amplitude(1)).norm_sqr();
    let total = w_h + w_v;
    if total > 1e-300 {
        Some((w_h - w_v) / total)
    } else {
        None
    }
}

/// One analyzer setting in an interpolation sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationRow {
    pub theta: f64,
    pub epsilon: f64,
    /// Absent when no intensity reaches the detector.
    pub conditioned_average: Option<f64>,
    /// Absent at dark ports, where the weak value diverges.
    pub re_weak_value: Option<f64>,
    /// Absent only when both paths are fully blocked.
    pub classical: Option<f64>,
}

/// Conditioned averages swept over analyzer angle and coupling strength,
/// with the weak and classical limits alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationTable {
    pub rows: Vec<InterpolationRow>,
}

/// Sweeps `conditioned_average` over analyzer angles (rows, theta-major) and
/// displacement strengths, tagging each row with its two limiting curves.
pub fn interpolation_sweep(
    i: &Ket,
    profile: &TransverseProfile,
    theta_range: &SweepRange,
    epsilons: &[f64],
) -> Result<InterpolationTable> {
    if epsilons.is_empty() {
        return Err(Error::parameter("interpolation sweep needs at least one epsilon"));
    }
    for &eps in epsilons {
        validate_epsilon(eps)?;
    }
    if i.dim() != 2 {
        return Err(Error::DimensionMismatch { left: i.dim(), right: 2 });
    }
    let thetas: Vec<f64> = theta_range.values().collect();
    let rows: Vec<InterpolationRow> = thetas
        .par_iter()
        .map(|&theta| -> Result<Vec<InterpolationRow>> {
            let f = make_postselection_wrapped(theta);
            let re_weak_value = stokes_weak_value(i, &f).ok().map(|sw| sw.re);
            let classical = classical_conditioned_average(i, &f);
            let mut chunk = Vec::with_capacity(epsilons.len());
            for &epsilon in epsilons {
                let avg = match conditioned_average(i, &f, profile, epsilon) {
                    Ok(v) => Some(v),
                    Err(Error::ZeroPostselectedIntensity) => None,
                    Err(e) => return Err(e),
                };
                chunk.push(InterpolationRow {
                    theta,
                    epsilon,
                    conditioned_average: avg,
                    re_weak_value,
                    classical,
                });
            }
            Ok(chunk)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(InterpolationTable { rows })
}
