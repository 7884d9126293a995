//! Analytic transverse beam profiles and pointer weak values.
//!
//! A profile is a superposition of Gaussian modes kept in closed form, so
//! position amplitudes, momentum amplitudes, derivatives, moments, and
//! overlaps are all evaluated analytically. Detection grids only ever enter
//! when a density is integrated, never to discretize the beam itself.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Amplitudes at or below this level count as a node of the beam.
const NODE_THRESHOLD: f64 = 1e-15;

/// One Gaussian component `coeff * (2 pi sigma^2)^{-1/4}
/// exp(-(x - center)^2 / (4 sigma^2)) exp(i phase_momentum x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMode {
    pub sigma: f64,
    pub center: f64,
    pub phase_momentum: f64,
    pub coeff: Complex64,
}

impl GaussianMode {
    fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::parameter(format!(
                "mode width sigma = {} must be positive and finite",
                self.sigma
            )));
        }
        if !self.center.is_finite() || !self.phase_momentum.is_finite() {
            return Err(Error::parameter("mode center and phase momentum must be finite"));
        }
        if !self.coeff.re.is_finite() || !self.coeff.im.is_finite() {
            return Err(Error::parameter("mode coefficient must be finite"));
        }
        Ok(())
    }

    /// Normalized single-mode amplitude at `x`, without `coeff`.
    fn amplitude(&self, x: f64) -> Complex64 {
        let norm = (2.0 * std::f64::consts::PI * self.sigma * self.sigma).powf(-0.25);
        let u = x - self.center;
        let envelope = (-u * u / (4.0 * self.sigma * self.sigma)).exp();
        norm * envelope * Complex64::from_polar(1.0, self.phase_momentum * x)
    }

    /// Logarithmic derivative `g'(x) / g(x)` of the single-mode amplitude.
    fn log_derivative(&self, x: f64) -> Complex64 {
        Complex64::new(
            -(x - self.center) / (2.0 * self.sigma * self.sigma),
            self.phase_momentum,
        )
    }
}

/// Gaussian moments of `conj(g_j) g_k` for a pair of modes: the overlap and
/// the first two moments in `x`, all in closed form.
fn pair_integrals(j: &GaussianMode, k: &GaussianMode) -> (Complex64, Complex64, Complex64) {
    let aj = 1.0 / (4.0 * j.sigma * j.sigma);
    let ak = 1.0 / (4.0 * k.sigma * k.sigma);
    let a = aj + ak;
    let b = Complex64::new(
        2.0 * aj * j.center + 2.0 * ak * k.center,
        k.phase_momentum - j.phase_momentum,
    );
    let c = -aj * j.center * j.center - ak * k.center * k.center;
    let norm = (2.0 * std::f64::consts::PI * j.sigma * j.sigma).powf(-0.25)
        * (2.0 * std::f64::consts::PI * k.sigma * k.sigma).powf(-0.25);
    let base = norm * (std::f64::consts::PI / a).sqrt() * (b * b / (4.0 * a) + c).exp();
    let mean = b / (2.0 * a);
    (base, base * mean, base * (mean * mean + 0.5 / a))
}

/// A normalized superposition of Gaussian modes.
#[derive(Debug, Clone, PartialEq)]
pub struct TransverseProfile {
    modes: Vec<GaussianMode>,
}

impl TransverseProfile {
    /// Validates the modes and rescales the coefficients so the profile has
    /// unit norm, including all cross-mode interference terms.
    pub fn new(modes: Vec<GaussianMode>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::parameter("a profile needs at least one mode"));
        }
        for mode in &modes {
            mode.validate()?;
        }
        let mut total = 0.0;
        for j in &modes {
            for k in &modes {
                total += (j.coeff.conj() * k.coeff * pair_integrals(j, k).0).re;
            }
        }
        if !(total > 1e-150) || !total.is_finite() {
            return Err(Error::ZeroVector { norm: total.max(0.0).sqrt() });
        }
        let scale = Complex64::new(1.0 / total.sqrt(), 0.0);
        let modes = modes
            .into_iter()
            .map(|m| GaussianMode { coeff: m.coeff * scale, ..m })
            .collect();
        Ok(TransverseProfile { modes })
    }

    /// A single centered Gaussian of width `sigma`.
    pub fn gaussian(sigma: f64) -> Result<Self> {
        TransverseProfile::new(vec![GaussianMode {
            sigma,
            center: 0.0,
            phase_momentum: 0.0,
            coeff: Complex64::ONE,
        }])
    }

    /// Two equal slits at `+-offset`, each of width `sigma`, tilted toward
    /// the axis with transverse momentum `convergence`.
    pub fn two_slit(offset: f64, sigma: f64, convergence: f64) -> Result<Self> {
        TransverseProfile::new(vec![
            GaussianMode {
                sigma,
                center: -offset,
                phase_momentum: convergence,
                coeff: Complex64::ONE,
            },
            GaussianMode {
                sigma,
                center: offset,
                phase_momentum: -convergence,
                coeff: Complex64::ONE,
            },
        ])
    }

    pub fn modes(&self) -> &[GaussianMode] {
        &self.modes
    }

    /// The same beam displaced by `delta`; the norm is unaffected.
    pub fn shifted(&self, delta: f64) -> TransverseProfile {
        TransverseProfile {
            modes: self
                .modes
                .iter()
                .map(|m| GaussianMode {
                    center: m.center + delta,
                    // the translation also advances each mode's plane-wave
                    // factor by a constant phase e^{-i p0 delta}
                    coeff: m.coeff * Complex64::from_polar(1.0, -m.phase_momentum * delta),
                    ..*m
                })
                .collect(),
        }
    }

    /// Position amplitude `psi(x)`.
    pub fn psi_x(&self, x: f64) -> Complex64 {
        self.modes.iter().map(|m| m.coeff * m.amplitude(x)).sum()
    }

    /// Spatial derivative `psi'(x)`.
    pub fn derivative_x(&self, x: f64) -> Complex64 {
        self.modes
            .iter()
            .map(|m| m.coeff * m.amplitude(x) * m.log_derivative(x))
            .sum()
    }

    /// The momentum representation, itself a Gaussian superposition: each
    /// mode maps to width `1/(2 sigma)` centered on its phase momentum.
    pub fn momentum_profile(&self) -> TransverseProfile {
        TransverseProfile {
            modes: self
                .modes
                .iter()
                .map(|m| GaussianMode {
                    sigma: 1.0 / (2.0 * m.sigma),
                    center: m.phase_momentum,
                    phase_momentum: -m.center,
                    coeff: m.coeff * Complex64::from_polar(1.0, m.phase_momentum * m.center),
                })
                .collect(),
        }
    }

    /// Momentum amplitude `psi~(p)` under `psi~(p) = (2 pi)^{-1/2} integral
    /// psi(x) e^{-i p x} dx` with `hbar = 1`.
    pub fn psi_p(&self, p: f64) -> Complex64 {
        self.momentum_profile().psi_x(p)
    }

    /// Analytic beam centroid.
    pub fn mean_x(&self) -> f64 {
        let mut m1 = Complex64::ZERO;
        for j in &self.modes {
            for k in &self.modes {
                m1 += j.coeff.conj() * k.coeff * pair_integrals(j, k).1;
            }
        }
        m1.re
    }

    /// Analytic beam variance.
    pub fn variance_x(&self) -> f64 {
        let mut m1 = Complex64::ZERO;
        let mut m2 = Complex64::ZERO;
        for j in &self.modes {
            for k in &self.modes {
                let (_, p1, p2) = pair_integrals(j, k);
                m1 += j.coeff.conj() * k.coeff * p1;
                m2 += j.coeff.conj() * k.coeff * p2;
            }
        }
        m2.re - m1.re * m1.re
    }

    /// How far the position density reaches before decaying below any
    /// tolerance used here: largest `|center| + 8 sigma`.
    pub fn position_reach(&self) -> f64 {
        self.modes
            .iter()
            .map(|m| m.center.abs() + 8.0 * m.sigma)
            .fold(0.0, f64::max)
    }

    /// The corresponding reach in the Fourier plane.
    pub fn momentum_reach(&self) -> f64 {
        self.modes
            .iter()
            .map(|m| m.phase_momentum.abs() + 4.0 / m.sigma)
            .fold(0.0, f64::max)
    }
}

/// Analytic inner product `<a|b>` of two profiles.
pub fn overlap(a: &TransverseProfile, b: &TransverseProfile) -> Complex64 {
    let mut total = Complex64::ZERO;
    for j in &a.modes {
        for k in &b.modes {
            total += j.coeff.conj() * k.coeff * pair_integrals(j, k).0;
        }
    }
    total
}

/// Position-plane pointer weak value `-i psi'(x) / psi(x)` (`hbar = 1`).
///
/// Its real part is the local Bohmian momentum; its imaginary part is the
/// log-derivative of the density envelope. Errors with [`Error::NodePoint`]
/// where the amplitude vanishes.
pub fn pointer_weak_value_position(profile: &TransverseProfile, x: f64) -> Result<Complex64> {
    let amp = profile.psi_x(x);
    if amp.norm() <= NODE_THRESHOLD {
        return Err(Error::NodePoint { point: x });
    }
    Ok(Complex64::new(0.0, -1.0) * profile.derivative_x(x) / amp)
}

/// Fourier-plane pointer weak value of momentum: exactly `p` wherever the
/// momentum amplitude is nonzero.
pub fn pointer_weak_value_momentum(profile: &TransverseProfile, p: f64) -> Result<Complex64> {
    if profile.psi_p(p).norm() <= NODE_THRESHOLD {
        return Err(Error::NodePoint { point: p });
    }
    Ok(Complex64::new(p, 0.0))
}

/// Bohmian momentum `Re[-i psi'(x)/psi(x)]`, the gradient of the beam phase.
pub fn bohm_momentum(profile: &TransverseProfile, x: f64) -> Result<f64> {
    Ok(pointer_weak_value_position(profile, x)?.re)
}

/// The beam phase sampled on a grid and unwrapped by nearest-branch
/// continuation.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseField {
    axis: Vec<f64>,
    values: Vec<f64>,
}

impl PhaseField {
    pub fn from_profile(profile: &TransverseProfile, axis: &[f64]) -> Result<Self> {
        if axis.len() < 2 {
            return Err(Error::parameter("phase field needs at least two samples"));
        }
        if !axis.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::parameter("phase field axis must be strictly increasing"));
        }
        let mut values = Vec::with_capacity(axis.len());
        let mut prev_raw = 0.0;
        let mut offset = 0.0;
        for (idx, &x) in axis.iter().enumerate() {
            let raw = profile.psi_x(x).arg();
            if idx > 0 {
                let mut delta = raw - prev_raw;
                while delta > std::f64::consts::PI {
                    delta -= 2.0 * std::f64::consts::PI;
                }
                while delta <= -std::f64::consts::PI {
                    delta += 2.0 * std::f64::consts::PI;
                }
                offset += delta - (raw - prev_raw);
            }
            prev_raw = raw;
            values.push(raw + offset);
        }
        Ok(PhaseField {
            axis: axis.to_vec(),
            values,
        })
    }

    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Central-difference gradient (one-sided at the ends).
    pub fn finite_difference_gradient(&self) -> Vec<f64> {
        let n = self.axis.len();
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            let (lo, hi) = match j {
                0 => (0, 1),
                _ if j == n - 1 => (n - 2, n - 1),
                _ => (j - 1, j + 1),
            };
            out.push((self.values[hi] - self.values[lo]) / (self.axis[hi] - self.axis[lo]));
        }
        out
    }
}
