//! Priors, the Gaussian location observation model and parameters of
//! interest. The reference measure μ is Lebesgue measure on ℝ^p throughout.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::measure::ParamPoint;
use crate::rng::{substream, StreamRng};

/// Volume of the unit ball in p dimensions, π^{p/2} / Γ(p/2 + 1).
pub fn unit_ball_volume(p: usize) -> Result<f64> {
    if p == 0 {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: "dimension must be at least 1".into(),
        });
    }
    Ok(match p {
        1 => 2.0,
        2 => PI,
        _ => PI.powf(p as f64 / 2.0) / gamma(p as f64 / 2.0 + 1.0),
    })
}

/// Y ~ N(θ, σ² I) in p dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianLocationModel {
    dim: usize,
    sigma: f64,
}

impl GaussianLocationModel {
    pub fn new(dim: usize, sigma: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter {
                name: "model.p",
                reason: "dimension must be at least 1".into(),
            });
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParameter {
                name: "model.sigma",
                reason: format!("noise level must be positive and finite, got {sigma}"),
            });
        }
        Ok(GaussianLocationModel { dim, sigma })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// log N(y; θ, σ² I).
    pub fn log_likelihood(&self, y: &[f64], theta: &ParamPoint) -> Result<f64> {
        theta.expect_dim(self.dim)?;
        if y.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: y.len(),
            });
        }
        let s2 = self.sigma * self.sigma;
        let sq: f64 = y.iter().zip(theta.coords()).map(|(a, b)| (a - b) * (a - b)).sum();
        let p = self.dim as f64;
        Ok(-0.5 * sq / s2 - 0.5 * p * (2.0 * PI * s2).ln())
    }

    /// Draws Y ~ P_θ.
    pub fn sample<R: Rng + ?Sized>(&self, theta: &ParamPoint, rng: &mut R) -> Vec<f64> {
        theta
            .coords()
            .iter()
            .map(|&m| {
                let z: f64 = StandardNormal.sample(rng);
                m + self.sigma * z
            })
            .collect()
    }
}

/// Uniform prior on the ball ‖θ‖ ≤ R.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformBallPrior {
    dim: usize,
    radius: f64,
    density: f64,
}

impl UniformBallPrior {
    pub fn new(dim: usize, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParameter {
                name: "prior.uniform_ball.radius",
                reason: format!("radius must be positive and finite, got {radius}"),
            });
        }
        let volume = unit_ball_volume(dim)?;
        Ok(UniformBallPrior {
            dim,
            radius,
            density: 1.0 / (volume * radius.powi(dim as i32)),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// The constant 1 / (V_p R^p) inside the ball.
    pub fn inner_density(&self) -> f64 {
        self.density
    }

    /// Surface area of the unit sphere S^{p-1}, p·V_p.
    pub fn unit_sphere_area(&self) -> f64 {
        self.dim as f64 * unit_ball_volume(self.dim).expect("dim checked at construction")
    }

    /// Density as a function of the radius alone.
    pub fn radial_density(&self, r: f64) -> f64 {
        if r <= self.radius {
            self.density
        } else {
            0.0
        }
    }
}

/// Uniform prior on the interval [lo, hi] (p = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformIntervalPrior {
    lo: f64,
    hi: f64,
}

impl UniformIntervalPrior {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidParameter {
                name: "prior.uniform_interval",
                reason: format!("need finite lo < hi, got [{lo}, {hi}]"),
            });
        }
        Ok(UniformIntervalPrior { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }
}

/// A prior π with density f = dπ/dμ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Prior {
    UniformBall(UniformBallPrior),
    UniformInterval(UniformIntervalPrior),
}

impl From<UniformBallPrior> for Prior {
    fn from(p: UniformBallPrior) -> Self {
        Prior::UniformBall(p)
    }
}

impl From<UniformIntervalPrior> for Prior {
    fn from(p: UniformIntervalPrior) -> Self {
        Prior::UniformInterval(p)
    }
}

impl Prior {
    pub fn dim(&self) -> usize {
        match self {
            Prior::UniformBall(b) => b.dim,
            Prior::UniformInterval(_) => 1,
        }
    }

    /// f(θ).
    pub fn density(&self, theta: &ParamPoint) -> Result<f64> {
        theta.expect_dim(self.dim())?;
        Ok(self.density_unchecked(theta))
    }

    pub(crate) fn density_unchecked(&self, theta: &ParamPoint) -> f64 {
        match self {
            Prior::UniformBall(b) => b.radial_density(theta.norm()),
            Prior::UniformInterval(iv) => {
                let x = theta.coords()[0];
                if x >= iv.lo && x <= iv.hi {
                    1.0 / iv.length()
                } else {
                    0.0
                }
            }
        }
    }

    /// Whether θ lies in the support of f.
    pub fn contains(&self, theta: &ParamPoint) -> bool {
        self.density_unchecked(theta) > 0.0
    }

    /// Center and radius of a ball containing the support.
    pub fn bounding_ball(&self) -> (Vec<f64>, f64) {
        match self {
            Prior::UniformBall(b) => (vec![0.0; b.dim], b.radius),
            Prior::UniformInterval(iv) => (vec![0.5 * (iv.lo + iv.hi)], 0.5 * iv.length()),
        }
    }

    /// Support endpoints for one-dimensional priors.
    pub fn interval(&self) -> Option<(f64, f64)> {
        match self {
            Prior::UniformBall(b) if b.dim == 1 => Some((-b.radius, b.radius)),
            Prior::UniformBall(_) => None,
            Prior::UniformInterval(iv) => Some((iv.lo, iv.hi)),
        }
    }

    /// Width of the range of β over the support of the prior.
    pub fn beta_span(&self, poi: &ParamOfInterest) -> f64 {
        match (self, poi) {
            (Prior::UniformBall(b), ParamOfInterest::Norm) => b.radius,
            (Prior::UniformBall(b), ParamOfInterest::Linear { u }) => {
                2.0 * b.radius * u.iter().map(|x| x * x).sum::<f64>().sqrt()
            }
            (Prior::UniformInterval(iv), ParamOfInterest::Norm) => {
                if iv.lo <= 0.0 && iv.hi >= 0.0 {
                    iv.lo.abs().max(iv.hi.abs())
                } else {
                    iv.lo.abs().max(iv.hi.abs()) - iv.lo.abs().min(iv.hi.abs())
                }
            }
            (Prior::UniformInterval(iv), ParamOfInterest::Linear { u }) => u[0].abs() * iv.length(),
        }
    }

    /// Draws one θ ~ π.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> ParamPoint {
        match self {
            Prior::UniformBall(b) => {
                // uniform direction times inverse-CDF radius R·U^{1/p}
                let dir = loop {
                    let g: Vec<f64> = (0..b.dim).map(|_| StandardNormal.sample(rng)).collect();
                    let n = g.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if n > 0.0 {
                        break g.into_iter().map(|x| x / n).collect::<Vec<_>>();
                    }
                };
                let u: f64 = rng.random();
                let r = b.radius * u.powf(1.0 / b.dim as f64);
                ParamPoint::from_vec_unchecked(dir.into_iter().map(|x| r * x).collect())
            }
            Prior::UniformInterval(iv) => {
                let u: f64 = rng.random();
                ParamPoint::from_vec_unchecked(vec![iv.lo + iv.length() * u])
            }
        }
    }

    /// `n` i.i.d. draws from π, deterministic in `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<ParamPoint>> {
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: "sample count must be positive".into(),
            });
        }
        let mut rng: StreamRng = substream(seed, 0);
        Ok((0..n).map(|_| self.draw(&mut rng)).collect())
    }
}

/// Free-function form of [`Prior::density`].
pub fn prior_density(prior: &Prior, theta: &ParamPoint) -> Result<f64> {
    prior.density(theta)
}

/// Free-function form of [`Prior::sample`].
pub fn prior_sample(prior: &Prior, n: usize, seed: u64) -> Result<Vec<ParamPoint>> {
    prior.sample(n, seed)
}

/// The scalar parameter of interest β(θ).
#[derive(Debug, Clone, PartialEq)]
pub enum ParamOfInterest {
    /// β(θ) = u·θ.
    Linear { u: Vec<f64> },
    /// β(θ) = ‖θ‖.
    Norm,
}

impl ParamOfInterest {
    pub fn linear(u: Vec<f64>) -> Result<Self> {
        let n = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if u.is_empty() || !n.is_finite() || n == 0.0 {
            return Err(Error::InvalidParameter {
                name: "poi.linear.u",
                reason: "direction must be finite and nonzero".into(),
            });
        }
        Ok(ParamOfInterest::Linear { u })
    }

    pub fn eval(&self, theta: &ParamPoint) -> Result<f64> {
        match self {
            ParamOfInterest::Linear { u } => {
                theta.expect_dim(u.len())?;
                Ok(theta.dot(u))
            }
            ParamOfInterest::Norm => Ok(theta.norm()),
        }
    }

    /// Applies β to a raw coordinate slice (estimator outputs, observations).
    pub fn eval_slice(&self, x: &[f64]) -> f64 {
        match self {
            ParamOfInterest::Linear { u } => x.iter().zip(u).map(|(a, b)| a * b).sum(),
            ParamOfInterest::Norm => x.iter().map(|a| a * a).sum::<f64>().sqrt(),
        }
    }
}

/// Free-function form of [`ParamOfInterest::eval`].
pub fn beta_eval(poi: &ParamOfInterest, theta: &ParamPoint) -> Result<f64> {
    poi.eval(theta)
}
