//! Distortion functions D and their derivatives.

use serde::{Deserialize, Serialize};

use crate::error::{check_nonnegative, Error, Result};

/// A nondecreasing error cost with D(0) = 0.
///
/// The error being bounded is E[D(|estimate - truth|)].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistortionFn {
    /// D(x) = x², the mean-square error.
    Squared,
    /// D(x) = x.
    Absolute,
    /// D(x) = x^r with r ≥ 1.
    Power { r: f64 },
}

impl DistortionFn {
    pub fn power(r: f64) -> Result<Self> {
        let d = DistortionFn::Power { r };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if let DistortionFn::Power { r } = *self {
            if !r.is_finite() || r < 1.0 {
                return Err(Error::InvalidParameter {
                    name: "distortion.power.r",
                    reason: format!("exponent must be finite and >= 1, got {r}"),
                });
            }
        }
        Ok(())
    }

    /// D(x).
    pub fn eval(&self, x: f64) -> Result<f64> {
        check_nonnegative("distortion argument", x)?;
        Ok(match *self {
            DistortionFn::Squared => x * x,
            DistortionFn::Absolute => x,
            DistortionFn::Power { r } => x.powf(r),
        })
    }

    /// Ḋ(x). At x = 0 the right-derivative limit is returned, so
    /// `Absolute` gives 1 and `Power { r > 1 }` gives 0.
    pub fn deriv(&self, x: f64) -> Result<f64> {
        check_nonnegative("distortion argument", x)?;
        Ok(match *self {
            DistortionFn::Squared => 2.0 * x,
            DistortionFn::Absolute => 1.0,
            DistortionFn::Power { r } => {
                if r == 1.0 {
                    1.0
                } else if x == 0.0 {
                    0.0
                } else {
                    r * x.powf(r - 1.0)
                }
            }
        })
    }
}

/// Free-function form of [`DistortionFn::eval`].
pub fn distortion_eval(d: DistortionFn, x: f64) -> Result<f64> {
    d.eval(x)
}

/// Free-function form of [`DistortionFn::deriv`].
pub fn distortion_deriv(d: DistortionFn, x: f64) -> Result<f64> {
    d.deriv(x)
}
