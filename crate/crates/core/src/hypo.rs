//! Minimum error probability Π(θ, φ, q) of the binary test
//! H₀: Y ~ P_θ (prior q) against H₁: Y ~ P_φ (prior 1 − q).

use std::f64::consts::SQRT_2;

use libm::erfc;

use crate::error::{Error, Result};
use crate::measure::{integrate_weighted, ParamPoint};
use crate::models::GaussianLocationModel;

/// Q(x) = Pr(Z ≥ x) for a standard normal Z.
pub fn q_function(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::NonFinite("Q-function argument"));
    }
    Ok(q_unchecked(x))
}

#[inline]
pub(crate) fn q_unchecked(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// A binary hypothesis test between two parameter points.
#[derive(Debug, Clone, PartialEq)]
pub struct HypoTestSpec {
    pub theta0: ParamPoint,
    pub theta1: ParamPoint,
    /// Prior probability of H₀.
    pub q: f64,
}

impl HypoTestSpec {
    pub fn new(theta0: ParamPoint, theta1: ParamPoint, q: f64) -> Result<Self> {
        check_prior(q)?;
        theta1.expect_dim(theta0.dim())?;
        Ok(HypoTestSpec { theta0, theta1, q })
    }
}

fn check_prior(q: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParameter {
            name: "q",
            reason: format!("prior probability must lie in [0, 1], got {q}"),
        });
    }
    Ok(())
}

/// Bayes error of the Gaussian location test. The likelihood ratio reduces
/// to a threshold on the projection of Y onto θ₁ − θ₀; with
/// d = ‖θ₀ − θ₁‖/σ and γ = ln((1−q)/q)/d,
/// Π = q·Q(d/2 − γ) + (1−q)·Q(d/2 + γ).
pub fn pi_gaussian(model: &GaussianLocationModel, spec: &HypoTestSpec) -> Result<f64> {
    spec.theta0.expect_dim(model.dim())?;
    spec.theta1.expect_dim(model.dim())?;
    check_prior(spec.q)?;
    Ok(pi_gaussian_separation(
        spec.theta0.distance(&spec.theta1) / model.sigma(),
        spec.q,
    ))
}

/// [`pi_gaussian`] in terms of the normalized separation d = ‖θ₀ − θ₁‖/σ.
pub fn pi_gaussian_separation(d: f64, q: f64) -> f64 {
    if q <= 0.0 || q >= 1.0 {
        return 0.0;
    }
    if d == 0.0 {
        return q.min(1.0 - q);
    }
    if q == 0.5 {
        return q_unchecked(0.5 * d);
    }
    let gamma = ((1.0 - q) / q).ln() / d;
    let pi = q * q_unchecked(0.5 * d - gamma) + (1.0 - q) * q_unchecked(0.5 * d + gamma);
    pi.min(q.min(1.0 - q))
}

/// Bayes error ∑ w_j min(q p₀(y_j), (1−q) p₁(y_j)) of two densities sampled
/// on a shared observation grid with quadrature weights `weights`.
pub fn pi_numeric_1d(p0: &[f64], p1: &[f64], weights: &[f64], q: f64) -> Result<f64> {
    check_prior(q)?;
    if p0.len() != weights.len() || p1.len() != weights.len() {
        return Err(Error::LengthMismatch {
            left: p0.len().max(p1.len()),
            right: weights.len(),
        });
    }
    for (which, curve) in [p0, p1].into_iter().enumerate() {
        if curve.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter {
                name: "densities",
                reason: format!("curve {which} must be finite and nonnegative"),
            });
        }
        let mass = integrate_weighted(curve, weights)?;
        if (mass - 1.0).abs() > 1e-6 {
            return Err(Error::NotNormalized { which, mass });
        }
    }
    let mins: Vec<f64> = p0.iter().zip(p1).map(|(a, b)| (q * a).min((1.0 - q) * b)).collect();
    integrate_weighted(&mins, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::trapezoid_weights;
    use proptest::prelude::*;

    fn normal_pdf(y: f64, mean: f64, sigma: f64) -> f64 {
        (-0.5 * ((y - mean) / sigma).powi(2)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
    }

    /// Adaptive Simpson quadrature, used only as an independent oracle.
    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        #[allow(clippy::too_many_arguments)]
        fn rec(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50)
    }

    fn pt(c: &[f64]) -> ParamPoint {
        ParamPoint::new(c.to_vec()).unwrap()
    }

    #[test]
    fn q_function_values() {
        assert_eq!(q_function(0.0).unwrap(), 0.5);
        assert!(q_function(10.0).unwrap() < 1e-22);
        let oracle = adaptive_simpson(&|y| normal_pdf(y, 0.0, 1.0), 1.0, 40.0, 1e-15);
        assert!((oracle - 0.15865525393145707).abs() < 1e-12);
        assert!((q_function(1.0).unwrap() - oracle).abs() < 1e-12);
        assert!((q_function(-1.0).unwrap() - (1.0 - oracle)).abs() < 1e-12);
        assert!(q_function(f64::NAN).is_err());
    }

    #[test]
    fn pi_gaussian_examples() {
        let m = GaussianLocationModel::new(2, 1.0).unwrap();
        let a = pt(&[0.3, -1.0]);
        let same = HypoTestSpec::new(a.clone(), a.clone(), 0.3).unwrap();
        assert!((pi_gaussian(&m, &same).unwrap() - 0.3).abs() < 1e-15);

        let apart = HypoTestSpec::new(pt(&[0.0, 0.0]), pt(&[2.0, 0.0]), 0.5).unwrap();
        let grid: Vec<f64> = (0..200_001).map(|i| -12.0 + 26.0 * i as f64 / 200_000.0).collect();
        let w = trapezoid_weights(&grid);
        let numeric: f64 = grid
            .iter()
            .zip(&w)
            .map(|(y, w)| w * (0.5 * normal_pdf(*y, 0.0, 1.0)).min(0.5 * normal_pdf(*y, 2.0, 1.0)))
            .sum();
        let closed = pi_gaussian(&m, &apart).unwrap();
        assert!((closed - 0.158655253931457).abs() < 1e-12);
        assert!((closed - numeric).abs() < 1e-9);

        let certain = HypoTestSpec::new(pt(&[0.0, 0.0]), pt(&[1.0, 1.0]), 0.0).unwrap();
        assert_eq!(pi_gaussian(&m, &certain).unwrap(), 0.0);
        let certain = HypoTestSpec::new(pt(&[0.0, 0.0]), pt(&[1.0, 1.0]), 1.0).unwrap();
        assert_eq!(pi_gaussian(&m, &certain).unwrap(), 0.0);
    }

    #[test]
    fn pi_gaussian_errors() {
        let m = GaussianLocationModel::new(2, 1.0).unwrap();
        assert!(HypoTestSpec::new(pt(&[0.0]), pt(&[1.0]), 1.5).is_err());
        let wrong_dim = HypoTestSpec::new(pt(&[0.0]), pt(&[1.0]), 0.5).unwrap();
        assert!(matches!(
            pi_gaussian(&m, &wrong_dim),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn pi_numeric_examples() {
        let grid: Vec<f64> = (0..20_001).map(|i| -10.0 + 22.0 * i as f64 / 20_000.0).collect();
        let w = trapezoid_weights(&grid);
        let p0: Vec<f64> = grid.iter().map(|y| normal_pdf(*y, 0.0, 1.0)).collect();
        let p1: Vec<f64> = grid.iter().map(|y| normal_pdf(*y, 2.0, 1.0)).collect();
        assert!((pi_numeric_1d(&p0, &p0, &w, 0.5).unwrap() - 0.5).abs() < 1e-9);
        let m = GaussianLocationModel::new(1, 1.0).unwrap();
        let spec = HypoTestSpec::new(pt(&[0.0]), pt(&[2.0]), 0.5).unwrap();
        let closed = pi_gaussian(&m, &spec).unwrap();
        let numeric = pi_numeric_1d(&p0, &p1, &w, 0.5).unwrap();
        assert!((numeric - closed).abs() <= 1e-6 * closed);

        // disjoint boxes
        let w = vec![0.01; 400];
        let a: Vec<f64> = (0..400).map(|i| if i < 100 { 1.0 } else { 0.0 }).collect();
        let b: Vec<f64> = (0..400).map(|i| if i >= 300 { 1.0 } else { 0.0 }).collect();
        assert_eq!(pi_numeric_1d(&a, &b, &w, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn pi_numeric_rejects_unnormalized() {
        let w = [0.5, 0.5];
        assert!(matches!(
            pi_numeric_1d(&[1.0, 1.2], &[1.0, 1.0], &w, 0.5),
            Err(Error::NotNormalized { which: 0, .. })
        ));
        assert!(pi_numeric_1d(&[1.0, 1.0], &[1.0, 1.0], &w, -0.1).is_err());
    }

    proptest! {
        #[test]
        fn bounded_by_smaller_prior(d in 0.0f64..20.0, q in 0.0f64..=1.0) {
            let pi = pi_gaussian_separation(d, q);
            prop_assert!(pi >= 0.0);
            prop_assert!(pi <= q.min(1.0 - q) + 1e-15);
        }

        #[test]
        fn symmetric_under_swap(a in -3.0f64..3.0, b in -3.0f64..3.0, q in 0.01f64..0.99, sigma in 0.1f64..3.0) {
            let m = GaussianLocationModel::new(1, sigma).unwrap();
            let fwd = pi_gaussian(&m, &HypoTestSpec::new(pt(&[a]), pt(&[b]), q).unwrap()).unwrap();
            let rev = pi_gaussian(&m, &HypoTestSpec::new(pt(&[b]), pt(&[a]), 1.0 - q).unwrap()).unwrap();
            prop_assert!((fwd - rev).abs() <= 1e-14);
        }

        #[test]
        fn nonincreasing_in_separation(d in 0.0f64..10.0, extra in 0.0f64..5.0, q in 0.01f64..0.99) {
            prop_assert!(pi_gaussian_separation(d + extra, q) <= pi_gaussian_separation(d, q) + 1e-15);
        }
    }
}
