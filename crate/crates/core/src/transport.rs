//! Flocks (Φ_t, T_t, π_t): a transport map with its domain and the density
//! f_t of the initial measure, plus diagnostics for the two conditions a
//! flock must meet. The pushforward of π_t under T_t must equal the prior on
//! Φ_t′, and β must increase by at least t along the map.

use nalgebra::DMatrix;

use crate::engine::{line_rule, radial_rule};
use crate::error::{Error, Result};
use crate::measure::{MeasureDiscretization, ParamPoint};
use crate::models::{unit_ball_volume, ParamOfInterest, Prior, UniformBallPrior};
use crate::rng::substream;

/// Slack below which β(T_t(θ)) < β(θ) + t counts as a violation.
pub const RULE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum FlockKind {
    /// T_t(θ) = θ + v t on Φ_t = Φ_t′ = ℝ^p.
    Linear { v: Vec<f64> },
    /// T_t(θ) = θ + t θ/‖θ‖ on Φ_t = ℝ^p ∖ {0}, Φ_t′ = {‖θ‖ > t}.
    Radial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DensityMode {
    #[default]
    ClosedForm,
    /// f(T_t(θ))·|det J| with a central-difference Jacobian.
    NumericJacobian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Flock {
    kind: FlockKind,
    density_mode: DensityMode,
}

impl Flock {
    pub fn radial() -> Self {
        Flock {
            kind: FlockKind::Radial,
            density_mode: DensityMode::ClosedForm,
        }
    }

    pub fn linear(v: Vec<f64>) -> Result<Self> {
        if v.is_empty() || v.iter().any(|x| !x.is_finite()) || v.iter().all(|x| *x == 0.0) {
            return Err(Error::InvalidParameter {
                name: "flock.linear.v",
                reason: "velocity must be finite and nonzero".into(),
            });
        }
        Ok(Flock {
            kind: FlockKind::Linear { v },
            density_mode: DensityMode::ClosedForm,
        })
    }

    pub fn with_density_mode(mut self, mode: DensityMode) -> Self {
        self.density_mode = mode;
        self
    }

    pub fn kind(&self) -> &FlockKind {
        &self.kind
    }

    pub fn density_mode(&self) -> DensityMode {
        self.density_mode
    }

    /// Whether θ ∈ Φ_t.
    pub fn in_domain(&self, theta: &ParamPoint) -> bool {
        match &self.kind {
            FlockKind::Linear { v } => theta.dim() == v.len(),
            FlockKind::Radial => theta.norm() > 0.0,
        }
    }

    /// Whether θ ∈ Φ_t′, the image of Φ_t under T_t.
    pub fn in_image(&self, theta: &ParamPoint, t: f64) -> bool {
        match &self.kind {
            FlockKind::Linear { v } => theta.dim() == v.len(),
            FlockKind::Radial => theta.norm() > t,
        }
    }

    /// ‖T_t(θ) − θ‖ per unit t.
    pub fn displacement_rate(&self) -> f64 {
        match &self.kind {
            FlockKind::Linear { v } => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            FlockKind::Radial => 1.0,
        }
    }

    /// T_t(θ).
    pub fn apply(&self, theta: &ParamPoint, t: f64) -> Result<ParamPoint> {
        if !self.in_domain(theta) {
            if let FlockKind::Linear { v } = &self.kind {
                theta.expect_dim(v.len())?;
            }
            return Err(Error::OutsideDomain {
                theta: theta.coords().to_vec(),
                t,
            });
        }
        Ok(self.apply_unchecked(theta, t))
    }

    pub(crate) fn apply_unchecked(&self, theta: &ParamPoint, t: f64) -> ParamPoint {
        let out = match &self.kind {
            FlockKind::Linear { v } => theta.coords().iter().zip(v).map(|(x, v)| x + v * t).collect(),
            FlockKind::Radial => {
                let scale = 1.0 + t / theta.norm();
                theta.coords().iter().map(|x| x * scale).collect()
            }
        };
        ParamPoint::from_vec_unchecked(out)
    }

    /// f_t(θ), the density of π_t with respect to Lebesgue measure.
    pub fn pushforward_density(&self, prior: &Prior, theta: &ParamPoint, t: f64) -> Result<f64> {
        theta.expect_dim(prior.dim())?;
        if !self.in_domain(theta) {
            return Err(Error::OutsideDomain {
                theta: theta.coords().to_vec(),
                t,
            });
        }
        match self.density_mode {
            DensityMode::ClosedForm => Ok(self.closed_form_density(prior, theta, t)),
            DensityMode::NumericJacobian => self.numeric_jacobian_density(prior, theta, t),
        }
    }

    fn closed_form_density(&self, prior: &Prior, theta: &ParamPoint, t: f64) -> f64 {
        match (&self.kind, prior) {
            (FlockKind::Radial, Prior::UniformBall(ball)) => {
                let r = theta.norm();
                if r <= ball.radius() - t {
                    ball.inner_density() * (1.0 + t / r).powi(ball.dim() as i32 - 1)
                } else {
                    0.0
                }
            }
            (FlockKind::Radial, _) => {
                let r = theta.norm();
                let image = self.apply_unchecked(theta, t);
                prior.density_unchecked(&image) * (1.0 + t / r).powi(theta.dim() as i32 - 1)
            }
            (FlockKind::Linear { .. }, _) => prior.density_unchecked(&self.apply_unchecked(theta, t)),
        }
    }

    fn numeric_jacobian_density(&self, prior: &Prior, theta: &ParamPoint, t: f64) -> Result<f64> {
        let p = theta.dim();
        let h = (1e-6 * theta.norm()).max(1e-6);
        let mut jac = DMatrix::<f64>::zeros(p, p);
        let mut probe = theta.coords().to_vec();
        for k in 0..p {
            let x0 = probe[k];
            probe[k] = x0 + h;
            let plus = self.apply(&ParamPoint::from_vec_unchecked(probe.clone()), t)?;
            probe[k] = x0 - h;
            let minus = self.apply(&ParamPoint::from_vec_unchecked(probe.clone()), t)?;
            probe[k] = x0;
            for j in 0..p {
                jac[(j, k)] = (plus.coords()[j] - minus.coords()[j]) / (2.0 * h);
            }
        }
        let det = jac.determinant().abs();
        if !(det.is_finite() && det > 0.0) {
            return Err(Error::SingularJacobian {
                theta: theta.coords().to_vec(),
                t,
            });
        }
        let image = self.apply_unchecked(theta, t);
        Ok(prior.density_unchecked(&image) * det)
    }

    /// Breakpoints of every integrand of a one-dimensional flock at `t`
    /// (prior support, its preimage under T_t, Φ_t′ and kinks of |θ|).
    pub(crate) fn breakpoints_1d(&self, lo: f64, hi: f64, t: f64) -> Vec<f64> {
        let mut b = vec![lo, hi, 0.0];
        match &self.kind {
            FlockKind::Linear { v } => {
                let s = v[0] * t;
                b.extend([lo - s, hi - s, -s]);
            }
            FlockKind::Radial => {
                b.extend([lo - t, hi - t, lo + t, hi + t, -t, t]);
            }
        }
        b
    }
}

/// Free-function form of [`Flock::apply`].
pub fn apply_map(flock: &Flock, theta: &ParamPoint, t: f64) -> Result<ParamPoint> {
    flock.apply(theta, t)
}

/// Free-function form of [`Flock::pushforward_density`].
pub fn pushforward_density(flock: &Flock, prior: &Prior, theta: &ParamPoint, t: f64) -> Result<f64> {
    flock.pushforward_density(prior, theta, t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleViolation {
    pub theta: Vec<f64>,
    pub t: f64,
    /// β(T_t(θ)) − β(θ) − t.
    pub slack: f64,
}

/// Outcome of checking β(T_t(θ)) ≥ β(θ) + t on sampled points.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleReport {
    pub checked: usize,
    pub violations: Vec<RuleViolation>,
    pub min_slack: f64,
    pub max_abs_slack: f64,
}

impl RuleReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the monotone-transport rule at every (sample, t) pair. Samples
/// outside Φ_t are skipped.
pub fn validate_rule(
    flock: &Flock,
    poi: &ParamOfInterest,
    t_values: &[f64],
    samples: &[ParamPoint],
) -> Result<RuleReport> {
    let mut report = RuleReport {
        checked: 0,
        violations: Vec::new(),
        min_slack: f64::INFINITY,
        max_abs_slack: 0.0,
    };
    for theta in samples {
        if !flock.in_domain(theta) {
            continue;
        }
        let base = poi.eval(theta)?;
        for &t in t_values {
            let moved = poi.eval(&flock.apply_unchecked(theta, t))?;
            let slack = moved - base - t;
            report.checked += 1;
            report.min_slack = report.min_slack.min(slack);
            report.max_abs_slack = report.max_abs_slack.max(slack.abs());
            if slack < -RULE_TOLERANCE {
                report.violations.push(RuleViolation {
                    theta: theta.coords().to_vec(),
                    t,
                    slack,
                });
            }
        }
    }
    Ok(report)
}

/// How the two sides of the pushforward identity are integrated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PushforwardMethod {
    /// Breakpoint-aligned Gauss-Legendre; radial quadrature for ball priors
    /// in p ≥ 2 (test functions must then be radially symmetric).
    Quadrature {
        n_nodes: usize,
    },
    MonteCarlo {
        n_samples: usize,
        seed: u64,
    },
}

impl PushforwardMethod {
    pub fn tolerance(&self) -> f64 {
        match self {
            PushforwardMethod::Quadrature { .. } => 1e-6,
            PushforwardMethod::MonteCarlo { .. } => 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PushforwardReport {
    /// ∫_{Φ_t′} h dπ per test function.
    pub prior_side: Vec<f64>,
    /// ∫_{Φ_t} (h∘T_t) f_t dμ per test function.
    pub transported_side: Vec<f64>,
    pub max_rel_discrepancy: f64,
    pub tolerance: f64,
}

impl PushforwardReport {
    pub fn passed(&self) -> bool {
        self.max_rel_discrepancy < self.tolerance
    }
}

pub type TestFn<'a> = &'a (dyn Fn(&ParamPoint) -> f64 + Sync);

/// Checks π = π_t T_t⁻¹ on Φ_t′ through ∫ h dπ = ∫ (h∘T_t) dπ_t for each
/// test function h.
pub fn validate_pushforward(
    flock: &Flock,
    prior: &Prior,
    t: f64,
    test_fns: &[TestFn<'_>],
    method: PushforwardMethod,
) -> Result<PushforwardReport> {
    validate_pushforward_with(flock, prior, t, test_fns, method, |theta| {
        flock.pushforward_density(prior, theta, t)
    })
}

/// [`validate_pushforward`] with a caller-supplied f_t, for checking
/// candidate densities against the map.
pub fn validate_pushforward_with<F>(
    flock: &Flock,
    prior: &Prior,
    t: f64,
    test_fns: &[TestFn<'_>],
    method: PushforwardMethod,
    f_t: F,
) -> Result<PushforwardReport>
where
    F: Fn(&ParamPoint) -> Result<f64>,
{
    let (prior_side, transported_side) = match method {
        PushforwardMethod::Quadrature { n_nodes } => {
            let (lhs_rule, rhs_rule) = pushforward_rules(flock, prior, t, n_nodes)?;
            let mut lhs = Vec::with_capacity(test_fns.len());
            let mut rhs = Vec::with_capacity(test_fns.len());
            for h in test_fns {
                lhs.push(lhs_rule.integrate(|theta| {
                    Ok(if flock.in_image(theta, t) {
                        h(theta) * prior.density_unchecked(theta)
                    } else {
                        0.0
                    })
                })?);
                rhs.push(rhs_rule.integrate(|theta| {
                    if !flock.in_domain(theta) {
                        return Ok(0.0);
                    }
                    let density = f_t(theta)?;
                    Ok(if density == 0.0 {
                        0.0
                    } else {
                        h(&flock.apply_unchecked(theta, t)) * density
                    })
                })?);
            }
            (lhs, rhs)
        }
        PushforwardMethod::MonteCarlo { n_samples, seed } => {
            let draws = prior.sample(n_samples, seed)?;
            let (center, radius) = prior.bounding_ball();
            let reach = radius + flock.displacement_rate() * t;
            let proposal = UniformBallPrior::new(prior.dim(), reach)?;
            let volume = unit_ball_volume(prior.dim())? * reach.powi(prior.dim() as i32);
            let mut rng = substream(seed, 1);
            let candidates: Vec<ParamPoint> = (0..n_samples)
                .map(|_| {
                    let z = Prior::UniformBall(proposal).draw(&mut rng);
                    let shifted = z.coords().iter().zip(&center).map(|(a, c)| a + c).collect();
                    ParamPoint::from_vec_unchecked(shifted)
                })
                .collect();
            let n = n_samples as f64;
            let mut lhs = Vec::with_capacity(test_fns.len());
            let mut rhs = Vec::with_capacity(test_fns.len());
            for h in test_fns {
                let mut acc = 0.0;
                for x in &draws {
                    if flock.in_image(x, t) {
                        acc += h(x);
                    }
                }
                lhs.push(acc / n);
                let mut acc = 0.0;
                for theta in &candidates {
                    if !flock.in_domain(theta) {
                        continue;
                    }
                    let density = f_t(theta)?;
                    if density > 0.0 {
                        acc += h(&flock.apply_unchecked(theta, t)) * density;
                    }
                }
                rhs.push(acc * volume / n);
            }
            (lhs, rhs)
        }
    };
    let max_rel_discrepancy = prior_side
        .iter()
        .zip(&transported_side)
        .map(|(a, b)| {
            let scale = a.abs().max(b.abs());
            if scale == 0.0 {
                0.0
            } else {
                (a - b).abs() / scale
            }
        })
        .fold(0.0, f64::max);
    Ok(PushforwardReport {
        prior_side,
        transported_side,
        max_rel_discrepancy,
        tolerance: method.tolerance(),
    })
}

fn pushforward_rules(
    flock: &Flock,
    prior: &Prior,
    t: f64,
    n_nodes: usize,
) -> Result<(MeasureDiscretization, MeasureDiscretization)> {
    if let Some((lo, hi)) = prior.interval() {
        let breaks = flock.breakpoints_1d(lo, hi, t);
        let rule = line_rule(&breaks, n_nodes)?;
        return Ok((rule.clone(), rule));
    }
    match (prior, flock.kind()) {
        (Prior::UniformBall(ball), FlockKind::Radial) => {
            let r = ball.radius();
            let lhs = radial_rule(ball, &[0.0, t.min(r), r], n_nodes)?;
            let rhs = radial_rule(ball, &[0.0, (r - t).max(0.0), r], n_nodes)?;
            Ok((lhs, rhs))
        }
        _ => Err(Error::Unsupported(
            "quadrature pushforward check needs a one-dimensional prior or a radial flock on a ball prior; use Monte Carlo"
                .into(),
        )),
    }
}
