//! Composite Simpson quadrature on uniform symmetric grids.
//!
//! Detection densities in this crate are smooth Gaussian mixtures evaluated
//! analytically, so a fixed-order rule on the (already validated) grid is
//! accurate far beyond the tolerances quoted by callers.

use crate::error::{Error, Result};

/// Integrates uniformly spaced samples with the composite Simpson rule.
///
/// Requires an odd number of at least three samples.
pub fn simpson(values: &[f64], step: f64) -> Result<f64> {
    if values.len() < 3 || values.len() % 2 == 0 {
        return Err(Error::parameter(format!(
            "Simpson rule needs an odd sample count >= 3, got {}",
            values.len()
        )));
    }
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::parameter(format!("quadrature step {step} must be positive")));
    }
    let mut sum = values[0] + values[values.len() - 1];
    for (k, v) in values.iter().enumerate().skip(1).take(values.len() - 2) {
        sum += if k % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    Ok(sum * step / 3.0)
}

/// Cumulative trapezoid integral, anchored at zero on the first sample.
///
/// The result is nondecreasing for nonnegative input and backs the
/// piecewise-linear inverse-CDF sampler.
pub fn cumulative_trapezoid(values: &[f64], step: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for pair in values.windows(2) {
        acc += 0.5 * (pair[0] + pair[1]) * step;
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_on_cubics() {
        let n = 65;
        let step = 2.0 / (n as f64 - 1.0);
        let values: Vec<f64> = (0..n)
            .map(|j| {
                let x = -1.0 + j as f64 * step;
                3.0 * x * x * x - 2.0 * x * x + x - 5.0
            })
            .collect();
        // integral over [-1, 1] is -4/3 - 10
        assert!((simpson(&values, step).unwrap() - (-4.0 / 3.0 - 10.0)).abs() < 1e-13);
    }

    #[test]
    fn simpson_resolves_a_wide_gaussian_to_machine_precision() {
        let integrate = |n: usize| {
            let half = 8.0;
            let step = 2.0 * half / (n as f64 - 1.0);
            let values: Vec<f64> = (0..n)
                .map(|j| {
                    let x = -half + j as f64 * step;
                    (-0.5 * x * x).exp()
                })
                .collect();
            simpson(&values, step).unwrap()
        };
        let exact = (2.0 * std::f64::consts::PI).sqrt();
        assert!((integrate(4097) - exact).abs() < 1e-13);
    }

    #[test]
    fn simpson_converges_at_fourth_order_with_active_boundaries() {
        let integrate = |n: usize| {
            let step = 1.0 / (n as f64 - 1.0);
            let values: Vec<f64> = (0..n).map(|j| (j as f64 * step).exp()).collect();
            simpson(&values, step).unwrap()
        };
        let exact = std::f64::consts::E - 1.0;
        let coarse = (integrate(17) - exact).abs();
        let fine = (integrate(33) - exact).abs();
        assert!(fine < coarse / 12.0, "coarse {coarse:e}, fine {fine:e}");
    }

    #[test]
    fn simpson_rejects_even_or_short_grids() {
        assert!(simpson(&[1.0, 2.0], 0.1).is_err());
        assert!(simpson(&[1.0, 2.0, 3.0, 4.0], 0.1).is_err());
        assert!(simpson(&[1.0, 2.0, 3.0], 0.0).is_err());
    }

    #[test]
    fn cumulative_trapezoid_matches_total_on_linear_data() {
        let values = vec![0.0, 1.0, 2.0, 3.0];
        let cdf = cumulative_trapezoid(&values, 0.5);
        assert_eq!(cdf.len(), 4);
        assert_eq!(cdf[0], 0.0);
        assert!((cdf[3] - 2.25).abs() < 1e-15);
        assert!(cdf.windows(2).all(|w| w[1] >= w[0]));
    }
}
