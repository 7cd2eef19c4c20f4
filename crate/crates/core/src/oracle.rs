//! Independent checks on the bounds: simulated Bayes risk of a concrete
//! estimator, the tail-probability form of the error, the high-SNR Bayesian
//! Cramér-Rao value and a direct quadrature of the scalar Ziv-Zakai bound.

use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::distortion::DistortionFn;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::grid::TGrid;
use crate::hypo::q_unchecked;
use crate::measure::{integrate_weighted, ParamPoint};
use crate::models::{GaussianLocationModel, ParamOfInterest, Prior, UniformBallPrior};
use crate::quadrature::gauss_legendre;
use crate::rng::{child_seed, substream};

/// Monte Carlo estimate of E[D(|β̌(Y) − β(X)|)].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskEstimate {
    pub mean_risk: f64,
    pub std_error: f64,
    pub n_trials: usize,
    pub seed: u64,
}

/// Per-trial information handed to an estimator.
#[derive(Debug, Clone, Copy)]
pub struct TrialContext<'a> {
    pub index: usize,
    /// Seed reserved for the estimator's own randomness in this trial.
    pub seed: u64,
    /// The drawn parameter. Real estimators must ignore it; it exists so
    /// tests can build oracle estimators.
    pub truth: &'a ParamPoint,
}

/// An estimator β̌ of the parameter of interest from one observation.
pub trait Estimator: Sync {
    fn estimate(&self, y: &[f64], ctx: &TrialContext<'_>) -> Result<f64>;
}

impl<F> Estimator for F
where
    F: Fn(&[f64], &TrialContext<'_>) -> Result<f64> + Sync,
{
    fn estimate(&self, y: &[f64], ctx: &TrialContext<'_>) -> Result<f64> {
        self(y, ctx)
    }
}

/// Self-normalized importance-sampling estimate of E[β(X) | Y = y] for a
/// uniform prior. With proposal N(y, σ²I) the likelihood cancels and the
/// weights reduce to the prior support indicator. When fewer than half the
/// draws land in the support (y far outside it, or σ large against the
/// support) the prior-as-proposal estimator with likelihood weights is also
/// run and the one with the larger effective sample size is returned.
pub fn posterior_mean(
    y: &[f64],
    model: &GaussianLocationModel,
    prior: &Prior,
    poi: &ParamOfInterest,
    n_is: usize,
    seed: u64,
) -> Result<f64> {
    if n_is < 1000 {
        return Err(Error::InvalidParameter {
            name: "oracle.n_is",
            reason: format!("need at least 1000 importance samples, got {n_is}"),
        });
    }
    if y.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: y.len(),
        });
    }
    let sigma = model.sigma();
    let mut rng = substream(seed, 0);
    let mut theta = vec![0.0; y.len()];
    let mut hits = 0usize;
    let mut acc = 0.0;
    for _ in 0..n_is {
        for (th, &m) in theta.iter_mut().zip(y) {
            let z: f64 = StandardNormal.sample(&mut rng);
            *th = m + sigma * z;
        }
        let point = ParamPoint::from_vec_unchecked(theta.clone());
        if prior.contains(&point) {
            hits += 1;
            acc += poi.eval_slice(&theta);
        }
    }
    // Indicator weights: effective sample size equals the hit count.
    if 2 * hits >= n_is {
        return Ok(acc / hits as f64);
    }
    let fallback = prior_proposal_mean(y, model, prior, poi, n_is, seed);
    match fallback {
        Ok((estimate, ess)) if ess > hits as f64 => Ok(estimate),
        _ if hits > 0 => Ok(acc / hits as f64),
        Ok((estimate, _)) => Ok(estimate),
        Err(e) => Err(e),
    }
}

/// Prior as proposal with likelihood weights; returns the estimate and the
/// effective sample size (Σw)²/Σw².
fn prior_proposal_mean(
    y: &[f64],
    model: &GaussianLocationModel,
    prior: &Prior,
    poi: &ParamOfInterest,
    n_is: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let mut rng = substream(seed, 1);
    let mut log_w = Vec::with_capacity(n_is);
    let mut values = Vec::with_capacity(n_is);
    for _ in 0..n_is {
        let x = prior.draw(&mut rng);
        log_w.push(model.log_likelihood(y, &x)?);
        values.push(poi.eval(&x)?);
    }
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::ZeroWeights(y.to_vec()));
    }
    let weights: Vec<f64> = log_w.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroWeights(y.to_vec()));
    }
    let sq: f64 = weights.iter().map(|w| w * w).sum();
    Ok((integrate_weighted(&values, &weights)? / total, total * total / sq))
}

/// [`posterior_mean`] of ‖X‖ under a uniform ball prior.
pub fn posterior_mean_norm(
    y: &[f64],
    model: &GaussianLocationModel,
    prior: &UniformBallPrior,
    n_is: usize,
    seed: u64,
) -> Result<f64> {
    posterior_mean(
        y,
        model,
        &Prior::UniformBall(*prior),
        &ParamOfInterest::Norm,
        n_is,
        seed,
    )
}

/// The approximate Bayes estimator used for certification.
#[derive(Debug, Clone)]
pub struct PosteriorMeanEstimator {
    pub model: GaussianLocationModel,
    pub prior: Prior,
    pub poi: ParamOfInterest,
    pub n_is: usize,
}

impl Estimator for PosteriorMeanEstimator {
    fn estimate(&self, y: &[f64], ctx: &TrialContext<'_>) -> Result<f64> {
        posterior_mean(y, &self.model, &self.prior, &self.poi, self.n_is, ctx.seed)
    }
}

/// Simulates X ~ π, Y ~ P_X and averages D(|β̌(Y) − β(X)|). Trial i draws
/// from its own substream of `seed`, so the estimate does not depend on
/// `exec`.
#[allow(clippy::too_many_arguments)]
pub fn mc_bayes_risk(
    model: &GaussianLocationModel,
    prior: &Prior,
    poi: &ParamOfInterest,
    estimator: &dyn Estimator,
    d: DistortionFn,
    n: usize,
    seed: u64,
    exec: Execution,
) -> Result<RiskEstimate> {
    if n < 1000 {
        return Err(Error::InvalidParameter {
            name: "oracle.n_trials",
            reason: format!("need at least 1000 trials, got {n}"),
        });
    }
    d.validate()?;
    let losses = exec.try_map(n, |i| {
        let mut rng = substream(seed, i as u64);
        let x = prior.draw(&mut rng);
        let y = model.sample(&x, &mut rng);
        let ctx = TrialContext {
            index: i,
            seed: child_seed(seed, i as u64),
            truth: &x,
        };
        let wrap = |e: Error| Error::Estimator {
            trial: i,
            source: Box::new(e),
        };
        let est = estimator.estimate(&y, &ctx).map_err(wrap)?;
        let truth = poi.eval(&x).map_err(wrap)?;
        d.eval((est - truth).abs()).map_err(wrap)
    })?;
    let nf = n as f64;
    let mut sum = 0.0;
    for l in &losses {
        sum += l;
    }
    let mean = sum / nf;
    let mut ss = 0.0;
    for l in &losses {
        ss += (l - mean) * (l - mean);
    }
    let var = ss / (nf - 1.0);
    Ok(RiskEstimate {
        mean_risk: mean,
        std_error: (var / nf).sqrt(),
        n_trials: n,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailIdentityReport {
    /// Mean of D(e) over the samples.
    pub direct: f64,
    /// ½ ∫ Ḋ(t/2)·Pr(e ≥ t/2) dt with the empirical survival function.
    pub tail_integral: f64,
    pub rel_gap: f64,
    /// Whether the grid reaches 2·max(e), i.e. covers the full tail.
    pub covers_support: bool,
}

impl TailIdentityReport {
    pub fn passed(&self) -> bool {
        self.covers_support && self.rel_gap < 1e-3
    }
}

/// Compares E[D(e)] computed directly with its tail-integral form on the
/// trapezoid rule of `tgrid`.
pub fn tail_identity_check(samples: &[f64], d: DistortionFn, tgrid: &TGrid) -> Result<TailIdentityReport> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter {
            name: "samples",
            reason: "need at least one error sample".into(),
        });
    }
    let mut sorted = samples.to_vec();
    for &e in &sorted {
        if e.is_nan() || e < 0.0 {
            return Err(Error::NegativeArgument {
                what: "error sample",
                value: e,
            });
        }
    }
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut direct = 0.0;
    for &e in samples {
        direct += d.eval(e)?;
    }
    direct /= n;

    let nodes = tgrid.nodes();
    let integrand = nodes
        .iter()
        .map(|&t| {
            let s = 0.5 * t;
            let below = sorted.partition_point(|&e| e < s);
            let survival = (sorted.len() - below) as f64 / n;
            Ok(0.5 * d.deriv(s)? * survival)
        })
        .collect::<Result<Vec<f64>>>()?;
    let tail_integral = integrate_weighted(&integrand, &tgrid.trapezoid_weights())?;
    let scale = direct.abs().max(tail_integral.abs());
    let rel_gap = if scale == 0.0 {
        0.0
    } else {
        (direct - tail_integral).abs() / scale
    };
    Ok(TailIdentityReport {
        direct,
        tail_integral,
        rel_gap,
        covers_support: tgrid.t_max() >= 2.0 * sorted[sorted.len() - 1],
    })
}

/// High-SNR Bayesian Cramér-Rao value E[uᵀJ⁻¹u] for β = ‖θ‖ under the
/// Gaussian location model: u = θ/‖θ‖ is a unit vector and J⁻¹ = σ²I, so the
/// value is σ². This is an asymptotic approximation, not an exact bound.
pub fn bcrb_norm_example(model: &GaussianLocationModel) -> f64 {
    model.sigma() * model.sigma()
}

/// High-SNR value E[∇βᵀ J⁻¹ ∇β] = σ²·E‖∇β‖² for the built-in parameters
/// of interest: σ² for the norm, σ²‖u‖² for β = u·θ.
pub fn bcrb_high_snr(model: &GaussianLocationModel, poi: &ParamOfInterest) -> f64 {
    match poi {
        ParamOfInterest::Norm => bcrb_norm_example(model),
        ParamOfInterest::Linear { u } => model.sigma() * model.sigma() * u.iter().map(|x| x * x).sum::<f64>(),
    }
}

/// ∫₀^A t·(1 − t/A)·Q(t/2σ) dt by composite 16-point Gauss-Legendre on
/// `n_quad` panels.
pub fn classical_zzb_scalar(a: f64, sigma: f64, n_quad: usize) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "sigma",
            reason: format!("must be positive, got {sigma}"),
        });
    }
    if !(a >= 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "A",
            reason: format!("must be nonnegative, got {a}"),
        });
    }
    if a == 0.0 {
        return Ok(0.0);
    }
    let panels = n_quad.max(1);
    let (x, w) = gauss_legendre(16);
    let h = a / panels as f64;
    let mut acc = 0.0;
    for k in 0..panels {
        let mid = (k as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(&w) {
            let t = mid + 0.5 * h * xi;
            acc += 0.5 * h * wi * t * (1.0 - t / a) * q_unchecked(t / (2.0 * sigma));
        }
    }
    Ok(acc)
}
