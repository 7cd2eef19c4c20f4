//! Assembly of the hypothesis-testing curves g₁(t), g₂(t), their
//! valley-filled envelopes, and the bounds
//! Z = ½ ∫₀^∞ Ḋ(t/2)·𝒱g(t) dt.

use serde::Serialize;

use crate::distortion::DistortionFn;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::grid::TGrid;
use crate::hypo::pi_gaussian_separation;
use crate::measure::{integrate_weighted, MeasureDiscretization, ParamPoint};
use crate::models::{GaussianLocationModel, ParamOfInterest, Prior, UniformBallPrior};
use crate::quadrature::composite_gauss_legendre;
use crate::transport::{Flock, FlockKind};

/// Default number of t-grid nodes.
pub const DEFAULT_T_NODES: usize = 2048;
/// Default number of quadrature nodes for the μ-integral at each t.
pub const DEFAULT_QUAD_NODES: usize = 4096;

/// A fully specified bound computation: observation model, prior,
/// parameter of interest and flock.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundProblem {
    pub model: GaussianLocationModel,
    pub prior: Prior,
    pub poi: ParamOfInterest,
    pub flock: Flock,
}

impl BoundProblem {
    pub fn new(model: GaussianLocationModel, prior: Prior, poi: ParamOfInterest, flock: Flock) -> Result<Self> {
        let p = model.dim();
        if prior.dim() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                got: prior.dim(),
            });
        }
        if let ParamOfInterest::Linear { u } = &poi {
            if u.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    got: u.len(),
                });
            }
        }
        if let FlockKind::Linear { v } = flock.kind() {
            if v.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    got: v.len(),
                });
            }
        }
        Ok(BoundProblem {
            model,
            prior,
            poi,
            flock,
        })
    }

    /// t beyond which g vanishes up to the Gaussian tail: the span of β over
    /// the prior support plus ten noise widths measured in t units.
    pub fn default_t_max(&self) -> f64 {
        self.prior.beta_span(&self.poi) + 10.0 * self.model.sigma() / self.flock.displacement_rate()
    }
}

/// Per-t discretization of μ on Φ_t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Discretizer {
    /// Radial reduction for radial flocks on a ball prior, valid because
    /// f, f_t and ‖θ − T_t(θ)‖ depend on θ only through ‖θ‖.
    Radial { ball: UniformBallPrior, n_nodes: usize },
    /// Breakpoint-aligned Gauss-Legendre on the line (p = 1).
    Line { lo: f64, hi: f64, n_nodes: usize },
}

impl Discretizer {
    pub fn for_problem(problem: &BoundProblem, n_nodes: usize) -> Result<Self> {
        if let Some((lo, hi)) = problem.prior.interval() {
            return Ok(Discretizer::Line { lo, hi, n_nodes });
        }
        match (&problem.prior, problem.flock.kind()) {
            (Prior::UniformBall(ball), FlockKind::Radial) => Ok(Discretizer::Radial { ball: *ball, n_nodes }),
            _ => Err(Error::Unsupported(format!(
                "no μ-discretization for a {:?} flock on a {}-dimensional ball prior",
                problem.flock.kind(),
                problem.prior.dim()
            ))),
        }
    }

    pub fn n_nodes(&self) -> usize {
        match *self {
            Discretizer::Radial { n_nodes, .. } | Discretizer::Line { n_nodes, .. } => n_nodes,
        }
    }

    pub fn with_nodes(self, n: usize) -> Self {
        match self {
            Discretizer::Radial { ball, .. } => Discretizer::Radial { ball, n_nodes: n },
            Discretizer::Line { lo, hi, .. } => Discretizer::Line { lo, hi, n_nodes: n },
        }
    }

    pub fn at(&self, flock: &Flock, t: f64) -> Result<MeasureDiscretization> {
        let disc = match *self {
            Discretizer::Radial { ball, n_nodes } => radial_discretization(&ball, t, n_nodes)?,
            Discretizer::Line { lo, hi, n_nodes } => line_rule(&flock.breakpoints_1d(lo, hi, t), n_nodes)?,
        };
        if disc.is_empty() {
            return Err(Error::EmptyDiscretization(t));
        }
        Ok(disc)
    }
}

/// Radial quadrature for the ball prior at transport time t: nodes r·e₁ on
/// (0, R] with weights S_{p−1} r^{p−1} Δr, panels split at R − t so that
/// min(f, f_t) is integrated exactly. For p = 1 the nodes come in symmetric
/// pairs ±r.
pub fn radial_discretization(prior: &UniformBallPrior, t: f64, n_nodes: usize) -> Result<MeasureDiscretization> {
    if n_nodes < 16 {
        return Err(Error::InvalidParameter {
            name: "quadrature.radial_nodes",
            reason: format!("need at least 16 nodes, got {n_nodes}"),
        });
    }
    let r = prior.radius();
    radial_rule(prior, &[0.0, (r - t).clamp(0.0, r), r], n_nodes)
}

pub(crate) fn radial_rule(prior: &UniformBallPrior, breaks: &[f64], n_nodes: usize) -> Result<MeasureDiscretization> {
    let p = prior.dim();
    let (radii, gl) = composite_gauss_legendre(breaks, n_nodes);
    let mut nodes = Vec::with_capacity(radii.len() * if p == 1 { 2 } else { 1 });
    let mut weights = Vec::with_capacity(nodes.capacity());
    if p == 1 {
        for (r, w) in radii.iter().zip(&gl) {
            nodes.push(ParamPoint::on_first_axis(1, -r));
            weights.push(*w);
            nodes.push(ParamPoint::on_first_axis(1, *r));
            weights.push(*w);
        }
    } else {
        let area = prior.unit_sphere_area();
        for (r, w) in radii.iter().zip(&gl) {
            nodes.push(ParamPoint::on_first_axis(p, *r));
            weights.push(area * r.powi(p as i32 - 1) * w);
        }
    }
    MeasureDiscretization::new(nodes, weights)
}

pub(crate) fn line_rule(breaks: &[f64], n_nodes: usize) -> Result<MeasureDiscretization> {
    let (x, w) = composite_gauss_legendre(breaks, n_nodes);
    let nodes = x.into_iter().map(|x| ParamPoint::on_first_axis(1, x)).collect();
    MeasureDiscretization::new(nodes, w)
}

/// A(t) = (1 − t/R)^p·[t ≤ R], the overlap mass ∫ min(f, f_t) dμ of the
/// radial flock on the uniform ball.
pub fn a_t_uniform_ball(p: usize, radius: f64, t: f64) -> f64 {
    if t <= radius {
        (1.0 - t / radius).powi(p as i32)
    } else {
        0.0
    }
}

/// 𝒱g(t) = sup_{t′ ≥ t} g(t′) on grid nodes (suffix maximum).
pub fn valley_fill(g: &[f64]) -> Result<Vec<f64>> {
    if g.iter().any(|x| x.is_nan()) {
        return Err(Error::NonFinite("curve passed to valley_fill"));
    }
    let mut out = g.to_vec();
    for i in (0..out.len().saturating_sub(1)).rev() {
        out[i] = out[i].max(out[i + 1]);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundKind {
    Z1,
    Z2,
}

/// A sampled curve g on a t-grid together with its valley-filled envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCurve {
    tgrid: TGrid,
    g: Vec<f64>,
    vg: Vec<f64>,
}

impl BoundCurve {
    pub fn new(tgrid: TGrid, g: Vec<f64>) -> Result<Self> {
        if g.len() != tgrid.len() {
            return Err(Error::LengthMismatch {
                left: tgrid.len(),
                right: g.len(),
            });
        }
        let vg = valley_fill(&g)?;
        Ok(BoundCurve { tgrid, g, vg })
    }

    pub fn tgrid(&self) -> &TGrid {
        &self.tgrid
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn vg(&self) -> &[f64] {
        &self.vg
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct QuadratureMeta {
    pub t_nodes: usize,
    pub quad_nodes: usize,
    pub refinement_level: usize,
    /// Ḋ(t_max/2)·𝒱g(t_max)·t_max, a size estimate of the neglected tail.
    pub truncation_estimate: f64,
    /// Relative change of the bound at each refinement.
    pub convergence_deltas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundResult {
    pub value: f64,
    pub which: BoundKind,
    pub curve: BoundCurve,
    pub meta: QuadratureMeta,
}

/// Z = ½ ∫ Ḋ(t/2)·𝒱g(t) dt over the curve's grid.
pub fn zz_bound(d: DistortionFn, curve: BoundCurve, which: BoundKind) -> Result<BoundResult> {
    let nodes = curve.tgrid.nodes();
    if curve.vg.len() != nodes.len() {
        return Err(Error::LengthMismatch {
            left: nodes.len(),
            right: curve.vg.len(),
        });
    }
    let weights = curve.tgrid.outer_weights();
    let integrand = nodes
        .iter()
        .zip(&curve.vg)
        .map(|(&t, &vg)| Ok(0.5 * d.deriv(0.5 * t)? * vg))
        .collect::<Result<Vec<f64>>>()?;
    let value = integrate_weighted(&integrand, &weights)?.max(0.0);
    let t_max = curve.tgrid.t_max();
    let truncation_estimate = d.deriv(0.5 * t_max)? * curve.vg[curve.vg.len() - 1] * t_max;
    Ok(BoundResult {
        value,
        which,
        meta: QuadratureMeta {
            t_nodes: nodes.len(),
            truncation_estimate,
            ..QuadratureMeta::default()
        },
        curve,
    })
}

/// Evaluates g₁ and g₂ on every grid node. Grid nodes are processed
/// independently under `exec`; each μ-integral is a fixed-order sum.
pub fn bound_curves(
    problem: &BoundProblem,
    tgrid: &TGrid,
    disc: &Discretizer,
    exec: Execution,
) -> Result<(BoundCurve, BoundCurve)> {
    let nodes = tgrid.nodes();
    let pairs = exec.try_map(nodes.len(), |k| curve_values_at(problem, disc, nodes[k]))?;
    let (g1, g2): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    Ok((BoundCurve::new(tgrid.clone(), g1)?, BoundCurve::new(tgrid.clone(), g2)?))
}

/// g₂(t) = 2 ∫_{Φ_t} min(f, f_t)·Π(θ, T_t(θ), ½) dμ on every grid node.
pub fn g2_curve(problem: &BoundProblem, tgrid: &TGrid, disc: &Discretizer, exec: Execution) -> Result<BoundCurve> {
    Ok(bound_curves(problem, tgrid, disc, exec)?.1)
}

/// g₁(t) = ∫_{Φ_t} (f + f_t)·Π(θ, T_t(θ), f/(f + f_t)) dμ on every grid node.
pub fn g1_curve(problem: &BoundProblem, tgrid: &TGrid, disc: &Discretizer, exec: Execution) -> Result<BoundCurve> {
    Ok(bound_curves(problem, tgrid, disc, exec)?.0)
}

/// (g₁(t), g₂(t)) at a single t.
pub fn curve_values_at(problem: &BoundProblem, disc: &Discretizer, t: f64) -> Result<(f64, f64)> {
    let rule = disc.at(&problem.flock, t)?;
    let sigma = problem.model.sigma();
    let mut g1_terms = Vec::with_capacity(rule.len());
    let mut g2_terms = Vec::with_capacity(rule.len());
    for theta in rule.nodes() {
        if !problem.flock.in_domain(theta) {
            g1_terms.push(0.0);
            g2_terms.push(0.0);
            continue;
        }
        let f = problem.prior.density_unchecked(theta);
        let f_t = problem.flock.pushforward_density(&problem.prior, theta, t)?;
        let total = f + f_t;
        if total == 0.0 {
            g1_terms.push(0.0);
            g2_terms.push(0.0);
            continue;
        }
        let image = problem.flock.apply_unchecked(theta, t);
        let sep = theta.distance(&image) / sigma;
        g1_terms.push(total * pi_gaussian_separation(sep, f / total));
        g2_terms.push(2.0 * f.min(f_t) * pi_gaussian_separation(sep, 0.5));
    }
    Ok((
        integrate_weighted(&g1_terms, rule.weights())?,
        integrate_weighted(&g2_terms, rule.weights())?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundOptions {
    pub t_nodes: usize,
    /// `None` applies [`BoundProblem::default_t_max`].
    pub t_max: Option<f64>,
    pub quad_nodes: usize,
    pub max_doublings: usize,
    pub rel_tol: f64,
    pub execution: Execution,
}

impl Default for BoundOptions {
    fn default() -> Self {
        BoundOptions {
            t_nodes: DEFAULT_T_NODES,
            t_max: None,
            quad_nodes: DEFAULT_QUAD_NODES,
            max_doublings: 2,
            rel_tol: 1e-6,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RefinementLevel {
    pub t_nodes: usize,
    pub quad_nodes: usize,
    pub z1: f64,
    pub z2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundPair {
    pub z1: BoundResult,
    pub z2: BoundResult,
    pub t_max: f64,
    pub levels: Vec<RefinementLevel>,
    /// Whether the last doubling changed both bounds by less than `rel_tol`.
    /// Always false when `max_doublings` is 0.
    pub converged: bool,
}

fn rel_change(new: f64, old: f64) -> f64 {
    let scale = new.abs().max(old.abs());
    if scale == 0.0 {
        0.0
    } else {
        (new - old).abs() / scale
    }
}

/// Computes Z₁ and Z₂, doubling both grids until successive estimates agree
/// to `rel_tol` or `max_doublings` is reached.
pub fn compute_bounds(problem: &BoundProblem, d: DistortionFn, opts: &BoundOptions) -> Result<BoundPair> {
    d.validate()?;
    let t_max = opts.t_max.unwrap_or_else(|| problem.default_t_max());
    let base = Discretizer::for_problem(problem, opts.quad_nodes)?;
    let mut levels = Vec::new();
    let mut best: Option<(BoundResult, BoundResult)> = None;
    let mut deltas1 = Vec::new();
    let mut deltas2 = Vec::new();
    let mut converged = false;
    for level in 0..=opts.max_doublings {
        let scale = 1usize << level;
        let t_nodes = (opts.t_nodes - 1) * scale + 1;
        let quad_nodes = opts.quad_nodes * scale;
        let tgrid = TGrid::uniform(t_max, t_nodes)?;
        let disc = base.with_nodes(quad_nodes);
        let (c1, c2) = bound_curves(problem, &tgrid, &disc, opts.execution)?;
        let mut z1 = zz_bound(d, c1, BoundKind::Z1)?;
        let mut z2 = zz_bound(d, c2, BoundKind::Z2)?;
        for z in [&mut z1, &mut z2] {
            z.meta.quad_nodes = quad_nodes;
            z.meta.refinement_level = level;
        }
        levels.push(RefinementLevel {
            t_nodes,
            quad_nodes,
            z1: z1.value,
            z2: z2.value,
        });
        if let Some((prev1, prev2)) = &best {
            let d1 = rel_change(z1.value, prev1.value);
            let d2 = rel_change(z2.value, prev2.value);
            deltas1.push(d1);
            deltas2.push(d2);
            best = Some((z1, z2));
            if d1 < opts.rel_tol && d2 < opts.rel_tol {
                converged = true;
                break;
            }
        } else {
            best = Some((z1, z2));
        }
    }
    let (mut z1, mut z2) = best.expect("at least one refinement level runs");
    z1.meta.convergence_deltas = deltas1;
    z2.meta.convergence_deltas = deltas2;
    Ok(BoundPair {
        z1,
        z2,
        t_max,
        levels,
        converged,
    })
}
