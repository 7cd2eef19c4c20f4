//! `bound`, `verify` and `sweep`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use zzbound_core::engine::{compute_bounds, BoundPair, RefinementLevel};
use zzbound_core::oracle::{bcrb_high_snr, mc_bayes_risk, PosteriorMeanEstimator, RiskEstimate};
use zzbound_core::transport::{validate_pushforward, validate_rule, PushforwardMethod};
use zzbound_core::{BoundProblem, Execution, FlockKind, ParamPoint, Prior};

use crate::config::{ModelConfig, PriorConfig, RunConfig};
use crate::error::CliError;

pub const TOOL_NAME: &str = "zzbound";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
/// Standard errors added to the simulated risk before comparing with the bounds.
pub const CERTIFICATION_MARGIN: f64 = 3.0;

/// Options shared by every subcommand.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
    pub execution: Execution,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            out_dir: PathBuf::from("."),
            seed: None,
            execution: Execution::default(),
        }
    }
}

fn load(config_path: &Path, opts: &RunOptions) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(config_path)?;
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct FlockChecks {
    pub rule_points_checked: usize,
    pub rule_max_abs_slack: f64,
    pub rule_min_slack: f64,
    pub pushforward_method: &'static str,
    pub pushforward_t: Vec<f64>,
    pub pushforward_max_rel_discrepancy: f64,
}

/// Checks the transport rule on prior draws over the t-range, and the
/// pushforward identity at three transport times.
pub fn check_flock(problem: &BoundProblem, t_max: f64, seed: u64) -> Result<FlockChecks, CliError> {
    let samples = problem.prior.sample(1000, seed ^ 0x5EED_F10C)?;
    let t_values: Vec<f64> = (0..=64).map(|k| t_max * k as f64 / 64.0).collect();
    let rule = validate_rule(&problem.flock, &problem.poi, &t_values, &samples)?;
    if !rule.passed() {
        let v = &rule.violations[0];
        return Err(CliError::FlockValidation(format!(
            "{} of {} (θ, t) pairs break β(T_t(θ)) ≥ β(θ) + t; first at θ = {:?}, t = {}, slack {}",
            rule.violations.len(),
            rule.checked,
            v.theta,
            v.t,
            v.slack
        )));
    }

    let span = problem.prior.beta_span(&problem.poi).min(t_max);
    let pf_t: Vec<f64> = [0.1, 0.5, 0.9].iter().map(|f| f * span).collect();
    let one = |_: &ParamPoint| 1.0;
    let norm = |x: &ParamPoint| x.norm();
    let quadrature_ok = problem.prior.interval().is_some()
        || matches!(
            (&problem.prior, problem.flock.kind()),
            (Prior::UniformBall(_), FlockKind::Radial)
        );
    let (method, label) = if quadrature_ok {
        (PushforwardMethod::Quadrature { n_nodes: 1024 }, "quadrature")
    } else {
        (
            PushforwardMethod::MonteCarlo {
                n_samples: 200_000,
                seed,
            },
            "monte_carlo",
        )
    };
    let mut worst = 0.0f64;
    for &t in &pf_t {
        let report = validate_pushforward(&problem.flock, &problem.prior, t, &[&one, &norm], method)?;
        if !report.passed() {
            return Err(CliError::FlockValidation(format!(
                "pushforward identity fails at t = {t}: relative discrepancy {} exceeds {}",
                report.max_rel_discrepancy, report.tolerance
            )));
        }
        worst = worst.max(report.max_rel_discrepancy);
    }
    Ok(FlockChecks {
        rule_points_checked: rule.checked,
        rule_max_abs_slack: rule.max_abs_slack,
        rule_min_slack: rule.min_slack,
        pushforward_method: label,
        pushforward_t: pf_t,
        pushforward_max_rel_discrepancy: worst,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Deltas {
    #[serde(rename = "Z1")]
    pub z1: Vec<f64>,
    #[serde(rename = "Z2")]
    pub z2: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Truncation {
    #[serde(rename = "Z1")]
    pub z1: f64,
    #[serde(rename = "Z2")]
    pub z2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub tool: &'static str,
    pub version: &'static str,
    #[serde(rename = "Z1")]
    pub z1: f64,
    #[serde(rename = "Z2")]
    pub z2: f64,
    /// High-SNR Bayesian Cramér-Rao value (approximation, not a bound).
    pub bcrb: f64,
    #[serde(rename = "Z2_over_bcrb")]
    pub z2_over_bcrb: f64,
    pub t_max: f64,
    pub t_nodes: usize,
    pub quad_nodes: usize,
    pub refinement_levels: Vec<RefinementLevel>,
    pub converged: bool,
    pub convergence_deltas: Deltas,
    pub truncation_estimate: Truncation,
    pub flock_checks: FlockChecks,
    pub config: RunConfig,
}

/// Result of one bound computation, before anything is written.
#[derive(Debug, Clone)]
pub struct BoundRun {
    pub pair: BoundPair,
    pub summary: Summary,
}

/// Validates the flock and computes both bounds for a prepared config.
pub fn run_bounds(cfg: &RunConfig, execution: Execution) -> Result<BoundRun, CliError> {
    let prepared = cfg.prepare(execution)?;
    let problem = &prepared.problem;
    let t_max = prepared.options.t_max.unwrap_or_else(|| problem.default_t_max());
    let flock_checks = check_flock(problem, t_max, cfg.seed)?;
    let pair = compute_bounds(problem, prepared.distortion, &prepared.options)?;
    let bcrb = bcrb_high_snr(&problem.model, &problem.poi);
    let summary = Summary {
        tool: TOOL_NAME,
        version: TOOL_VERSION,
        z1: pair.z1.value,
        z2: pair.z2.value,
        bcrb,
        z2_over_bcrb: pair.z2.value / bcrb,
        t_max: pair.t_max,
        t_nodes: pair.z2.meta.t_nodes,
        quad_nodes: pair.z2.meta.quad_nodes,
        refinement_levels: pair.levels.clone(),
        converged: pair.converged,
        convergence_deltas: Deltas {
            z1: pair.z1.meta.convergence_deltas.clone(),
            z2: pair.z2.meta.convergence_deltas.clone(),
        },
        truncation_estimate: Truncation {
            z1: pair.z1.meta.truncation_estimate,
            z2: pair.z2.meta.truncation_estimate,
        },
        flock_checks,
        config: cfg.clone(),
    };
    Ok(BoundRun { pair, summary })
}

/// CSV with columns t, g1, g2, vg1, vg2 in shortest round-trip notation.
pub fn curves_csv(pair: &BoundPair) -> String {
    let c1 = &pair.z1.curve;
    let c2 = &pair.z2.curve;
    let mut out = String::from("t,g1,g2,vg1,vg2\n");
    for (k, t) in c2.tgrid().nodes().iter().enumerate() {
        writeln!(out, "{},{},{},{},{}", t, c1.g()[k], c2.g()[k], c1.vg()[k], c2.vg()[k]).unwrap();
    }
    out
}

/// `zzbound bound <config>`: writes curves.csv and summary.json.
pub fn cmd_bound(config_path: &Path, opts: &RunOptions) -> Result<Summary, CliError> {
    let cfg = load(config_path, opts)?;
    let run = run_bounds(&cfg, opts.execution)?;
    write_file(&opts.out_dir, "curves.csv", &curves_csv(&run.pair))?;
    write_file(&opts.out_dir, "summary.json", &to_json(&run.summary))?;
    Ok(run.summary)
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub risk: f64,
    pub std_error: f64,
    pub n_trials: usize,
    pub n_is: usize,
    pub seed: u64,
    #[serde(rename = "Z1")]
    pub z1: f64,
    #[serde(rename = "Z2")]
    pub z2: f64,
    pub margin_se: f64,
    pub bound_scale: f64,
    pub certified: bool,
}

fn simulate_risk(
    cfg: &RunConfig,
    problem: &BoundProblem,
    execution: Execution,
) -> Result<(RiskEstimate, usize), CliError> {
    let oracle = cfg
        .oracle
        .as_ref()
        .ok_or_else(|| CliError::config("oracle", "the oracle block is required for risk simulation"))?;
    let estimator = PosteriorMeanEstimator {
        model: problem.model,
        prior: problem.prior,
        poi: problem.poi.clone(),
        n_is: oracle.n_is,
    };
    let risk = mc_bayes_risk(
        &problem.model,
        &problem.prior,
        &problem.poi,
        &estimator,
        cfg.distortion,
        oracle.n_trials,
        cfg.seed,
        execution,
    )?;
    Ok((risk, oracle.n_is))
}

/// `zzbound verify <config>`: simulates the posterior-mean risk and checks
/// risk + 3·SE ≥ max(Z₁, Z₂). `bound_scale` multiplies both bounds before
/// the comparison (a negative-control hook; 1 in normal use).
pub fn cmd_verify(config_path: &Path, opts: &RunOptions, bound_scale: f64) -> Result<VerifyReport, CliError> {
    let cfg = load(config_path, opts)?;
    if cfg.oracle.is_none() {
        return Err(CliError::config("oracle", "verify needs an oracle block"));
    }
    let run = run_bounds(&cfg, opts.execution)?;
    let prepared = cfg.prepare(opts.execution)?;
    let (risk, n_is) = simulate_risk(&cfg, &prepared.problem, opts.execution)?;
    let z1 = run.pair.z1.value * bound_scale;
    let z2 = run.pair.z2.value * bound_scale;
    let report = VerifyReport {
        tool: TOOL_NAME,
        version: TOOL_VERSION,
        risk: risk.mean_risk,
        std_error: risk.std_error,
        n_trials: risk.n_trials,
        n_is,
        seed: risk.seed,
        z1,
        z2,
        margin_se: CERTIFICATION_MARGIN,
        bound_scale,
        certified: risk.mean_risk + CERTIFICATION_MARGIN * risk.std_error >= z1.max(z2),
    };
    write_file(&opts.out_dir, "verify.json", &to_json(&report))?;
    Ok(report)
}

/// Numeric fields a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepField {
    Sigma,
    Radius,
    Dim,
}

impl SweepField {
    pub fn parse(name: &str) -> Result<Self, CliError> {
        match name {
            "sigma" => Ok(SweepField::Sigma),
            "R" | "radius" => Ok(SweepField::Radius),
            "p" => Ok(SweepField::Dim),
            other => Err(CliError::config(
                "--field",
                format!("cannot sweep {other:?}; numeric fields are sigma, R, p"),
            )),
        }
    }

    fn apply(self, cfg: &mut RunConfig, value: f64) -> Result<(), CliError> {
        let ModelConfig::GaussianLocation { p, sigma } = &mut cfg.model;
        match self {
            SweepField::Sigma => *sigma = value,
            SweepField::Radius => match &mut cfg.prior {
                PriorConfig::UniformBall { radius } => *radius = value,
                PriorConfig::UniformInterval { .. } => {
                    return Err(CliError::config("--field", "R sweeps need a uniform_ball prior"))
                }
            },
            SweepField::Dim => {
                if !(value >= 1.0 && value.fract() == 0.0 && value <= 64.0) {
                    return Err(CliError::config(
                        "--values",
                        format!("p must be a positive integer, got {value}"),
                    ));
                }
                *p = value as usize;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub z1: f64,
    pub z2: f64,
    pub bcrb: f64,
    pub risk: Option<RiskEstimate>,
}

/// Parses a comma-separated value list; empty lists and non-numbers are
/// config errors.
pub fn parse_values(values: &[String]) -> Result<Vec<f64>, CliError> {
    let parsed = values
        .iter()
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::config("--values", format!("{s:?} is not a number")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if parsed.is_empty() {
        return Err(CliError::config("--values", "value list is empty"));
    }
    Ok(parsed)
}

/// `zzbound sweep <config> --field F --values a,b,...`: one sweep.csv row
/// per value, in input order.
pub fn cmd_sweep(
    config_path: &Path,
    field: &str,
    values: &[String],
    with_risk: bool,
    opts: &RunOptions,
) -> Result<Vec<SweepRow>, CliError> {
    let field = SweepField::parse(field)?;
    let values = parse_values(values)?;
    let base = load(config_path, opts)?;
    if with_risk && base.oracle.is_none() {
        return Err(CliError::config(
            "oracle",
            "--oracle needs an oracle block in the config",
        ));
    }
    let mut rows = Vec::with_capacity(values.len());
    for &value in &values {
        let mut cfg = base.clone();
        field.apply(&mut cfg, value)?;
        let run = run_bounds(&cfg, opts.execution)?;
        let risk = if with_risk {
            let prepared = cfg.prepare(opts.execution)?;
            Some(simulate_risk(&cfg, &prepared.problem, opts.execution)?.0)
        } else {
            None
        };
        rows.push(SweepRow {
            value,
            z1: run.summary.z1,
            z2: run.summary.z2,
            bcrb: run.summary.bcrb,
            risk,
        });
    }
    let mut csv = String::from(if with_risk {
        "value,Z1,Z2,bcrb,risk,risk_std_error\n"
    } else {
        "value,Z1,Z2,bcrb\n"
    });
    for row in &rows {
        write!(csv, "{},{},{},{}", row.value, row.z1, row.z2, row.bcrb).unwrap();
        if let Some(r) = &row.risk {
            write!(csv, ",{},{}", r.mean_risk, r.std_error).unwrap();
        }
        csv.push('\n');
    }
    write_file(&opts.out_dir, "sweep.csv", &csv)?;
    Ok(rows)
}
