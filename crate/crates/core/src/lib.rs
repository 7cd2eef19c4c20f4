//! Ziv-Zakai-type lower bounds on the Bayesian error of estimating a scalar
//! parameter of interest β(θ), where β need not be linear in θ.
//!
//! For each transport time t a *flock* moves parameter points θ to T_t(θ)
//! with β(T_t(θ)) ≥ β(θ) + t. The minimum error probability of the binary
//! test θ vs T_t(θ), weighted by the prior density f and the pushforward
//! density f_t, gives curves g₁(t) and g₂(t) whose valley-filled envelopes
//! integrate to the lower bounds
//!
//! ```text
//! Z = ½ ∫₀^∞ Ḋ(t/2)·𝒱g(t) dt ≤ E[D(|β̌(Y) − β(X)|)].
//! ```
//!
//! Modules:
//!
//! - [`distortion`], [`grid`], [`measure`]: distortion functions, t-grids,
//!   discretized reference measures and fixed-order reductions.
//! - [`models`]: uniform priors, the Gaussian location model, β.
//! - [`hypo`]: Q-function and the minimum error probability Π.
//! - [`transport`]: flocks, pushforward densities and their validators.
//! - [`engine`]: g₁, g₂, valley filling and the bounds Z₁, Z₂.
//! - [`oracle`]: Monte Carlo Bayes risk, tail identity, BCRB, scalar ZZB.
//!
//! The per-t and per-trial loops run on rayon when the `parallel` feature is
//! enabled (default). All reductions are sequential in index order, so
//! results are bit-identical across thread counts and policies.

pub mod distortion;
pub mod engine;
pub mod error;
pub mod exec;
pub mod grid;
pub mod hypo;
pub mod measure;
pub mod models;
pub mod oracle;
pub mod quadrature;
pub mod rng;
pub mod transport;

pub use distortion::DistortionFn;
pub use engine::{
    compute_bounds, BoundCurve, BoundKind, BoundOptions, BoundPair, BoundProblem, BoundResult, Discretizer,
};
pub use error::{Error, Result};
pub use exec::Execution;
pub use grid::TGrid;
pub use measure::{MeasureDiscretization, ParamPoint};
pub use models::{GaussianLocationModel, ParamOfInterest, Prior, UniformBallPrior, UniformIntervalPrior};
pub use transport::{DensityMode, Flock, FlockKind};
