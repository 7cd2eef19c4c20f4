//! Parameter points, discretized reference measures and the fixed-order
//! weighted reduction used for every integral in the crate.

use crate::error::{Error, Result};

/// A point θ of the parameter space ℝ^p.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamPoint(Vec<f64>);

impl ParamPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParameter {
                name: "theta",
                reason: "dimension must be at least 1".into(),
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("parameter point"));
        }
        Ok(ParamPoint(coords))
    }

    /// Builds a point without the finiteness check. Callers guarantee the
    /// invariant (e.g. the point is an affine image of a valid point).
    pub(crate) fn from_vec_unchecked(coords: Vec<f64>) -> Self {
        ParamPoint(coords)
    }

    pub fn scalar(x: f64) -> Result<Self> {
        Self::new(vec![x])
    }

    /// r·e₁ in p dimensions.
    pub fn on_first_axis(p: usize, r: f64) -> Self {
        let mut c = vec![0.0; p];
        c[0] = r;
        ParamPoint(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        self.0.iter().zip(other).map(|(a, b)| a * b).sum()
    }

    pub fn distance(&self, other: &ParamPoint) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub(crate) fn expect_dim(&self, p: usize) -> Result<()> {
        if self.dim() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                got: self.dim(),
            });
        }
        Ok(())
    }
}

/// Quadrature nodes and nonnegative weights for the reference measure μ
/// restricted to a flock domain.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureDiscretization {
    nodes: Vec<ParamPoint>,
    weights: Vec<f64>,
}

impl MeasureDiscretization {
    pub fn new(nodes: Vec<ParamPoint>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(Error::LengthMismatch {
                left: nodes.len(),
                right: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("quadrature weights"));
        }
        if let Some(&w) = weights.iter().find(|w| **w < 0.0) {
            return Err(Error::InvalidParameter {
                name: "weights",
                reason: format!("quadrature weights must be nonnegative, got {w}"),
            });
        }
        Ok(MeasureDiscretization { nodes, weights })
    }

    pub fn nodes(&self) -> &[ParamPoint] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// ∑ w_i h(θ_i) in ascending node order.
    pub fn integrate<F>(&self, mut h: F) -> Result<f64>
    where
        F: FnMut(&ParamPoint) -> Result<f64>,
    {
        let values = self.nodes.iter().map(&mut h).collect::<Result<Vec<_>>>()?;
        integrate_weighted(&values, &self.weights)
    }
}

/// ∑ w_i v_i, accumulated strictly in ascending index order.
pub fn integrate_weighted(values: &[f64], weights: &[f64]) -> Result<f64> {
    if values.len() != weights.len() {
        return Err(Error::LengthMismatch {
            left: values.len(),
            right: weights.len(),
        });
    }
    let mut acc = 0.0;
    for (v, w) in values.iter().zip(weights) {
        if v.is_nan() || w.is_nan() {
            return Err(Error::NonFinite("integrand"));
        }
        acc += w * v;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::trapezoid_weights;
    use proptest::prelude::*;

    #[test]
    fn weighted_sum_examples() {
        assert_eq!(integrate_weighted(&[1.0, 1.0, 1.0], &[0.5, 0.25, 0.25]).unwrap(), 1.0);
        assert_eq!(integrate_weighted(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 0.0);
        let x: Vec<f64> = (0..101).map(|i| i as f64 / 100.0).collect();
        let w = trapezoid_weights(&x);
        assert!((integrate_weighted(&x, &w).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn weighted_sum_errors() {
        assert!(matches!(
            integrate_weighted(&[1.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(integrate_weighted(&[f64::NAN], &[1.0]).is_err());
    }

    #[test]
    fn discretization_rejects_negative_weights() {
        let p = ParamPoint::scalar(0.0).unwrap();
        assert!(MeasureDiscretization::new(vec![p.clone()], vec![-1.0]).is_err());
        assert!(MeasureDiscretization::new(vec![p], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn param_point_rejects_non_finite() {
        assert!(ParamPoint::new(vec![1.0, f64::INFINITY]).is_err());
        assert!(ParamPoint::new(vec![]).is_err());
        assert_eq!(ParamPoint::new(vec![3.0, 4.0]).unwrap().norm(), 5.0);
    }

    proptest! {
        #[test]
        fn linear_in_values(v in prop::collection::vec(-10.0f64..10.0, 1..50), a in -3.0f64..3.0) {
            let w: Vec<f64> = (0..v.len()).map(|i| 1.0 / (i as f64 + 1.0)).collect();
            let scaled: Vec<f64> = v.iter().map(|x| a * x).collect();
            let lhs = integrate_weighted(&scaled, &w).unwrap();
            let rhs = a * integrate_weighted(&v, &w).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        }

        #[test]
        fn splitting_preserves_sum(v in prop::collection::vec(-10.0f64..10.0, 2..60), cut in 0usize..60) {
            let cut = cut % v.len();
            let w: Vec<f64> = v.iter().map(|x| x.abs() + 0.5).collect();
            let whole = integrate_weighted(&v, &w).unwrap();
            // Continuing the accumulation from the prefix reproduces the whole sum bit-for-bit.
            let mut acc = integrate_weighted(&v[..cut], &w[..cut]).unwrap();
            for (x, y) in v[cut..].iter().zip(&w[cut..]) {
                acc += y * x;
            }
            prop_assert_eq!(whole.to_bits(), acc.to_bits());
        }
    }
}
