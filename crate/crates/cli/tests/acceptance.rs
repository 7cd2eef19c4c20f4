//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use serde_json::Value;
use zzbound_core::distortion::DistortionFn;
use zzbound_core::engine::{a_t_uniform_ball, radial_discretization, valley_fill};
use zzbound_core::hypo::{pi_gaussian, pi_numeric_1d, HypoTestSpec};
use zzbound_core::oracle::{
    bcrb_norm_example, classical_zzb_scalar, tail_identity_check, Estimator, PosteriorMeanEstimator, TrialContext,
};
use zzbound_core::quadrature::composite_gauss_legendre;
use zzbound_core::rng::{child_seed, substream};
use zzbound_core::transport::{validate_pushforward, validate_pushforward_with, validate_rule, PushforwardMethod};
use zzbound_core::{
    DensityMode, Execution, Flock, GaussianLocationModel, ParamOfInterest, ParamPoint, Prior, TGrid, UniformBallPrior,
};

const HIGH_SNR_CONFIGS: [(usize, &str); 3] = [
    (1, "example2_p1_sigma0.005.json"),
    (2, "example2_p2_sigma0.005.json"),
    (3, "example2_p3_sigma0.005.json"),
];
const VERIFY_CONFIGS: [&str; 2] = ["example2_p2_sigma0.2_verify.json", "example2_p2_sigma0.05_verify.json"];
const SCALAR_CONFIGS: [(f64, &str); 2] = [
    (0.1, "example1_scalar_sigma0.1.json"),
    (0.01, "example1_scalar_sigma0.01.json"),
];
const SWEEP_CONFIG: &str = "example2_p2_sweep.json";

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

struct Run {
    code: i32,
    elapsed: Duration,
    stderr: String,
}

fn zzbound(args: &[&str], out_dir: &Path, threads: usize) -> Run {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_zzbound"))
        .args(args)
        .arg("--out-dir")
        .arg(out_dir)
        .arg("--threads")
        .arg(threads.to_string())
        .output()
        .expect("zzbound binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        elapsed: start.elapsed(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).expect("output file exists")).expect("valid JSON")
}

fn num(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or(f64::NAN)
}

/// Summaries of every shipped valid config, computed once.
struct Bounds {
    dir: tempfile::TempDir,
    runs: Vec<(String, Run)>,
}

impl Bounds {
    fn compute() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let mut names: Vec<String> = HIGH_SNR_CONFIGS.iter().map(|(_, n)| n.to_string()).collect();
        names.extend(VERIFY_CONFIGS.iter().map(|n| n.to_string()));
        names.extend(SCALAR_CONFIGS.iter().map(|(_, n)| n.to_string()));
        names.push(SWEEP_CONFIG.to_string());
        let runs = names
            .into_iter()
            .map(|name| {
                let out = dir.path().join(&name);
                let run = zzbound(&["bound", config(&name).to_str().unwrap()], &out, 0);
                (name, run)
            })
            .collect();
        Bounds { dir, runs }
    }

    fn run(&self, name: &str) -> &Run {
        &self.runs.iter().find(|(n, _)| n == name).unwrap().1
    }

    fn summary(&self, name: &str) -> Option<Value> {
        (self.run(name).code == 0).then(|| read_json(&self.dir.path().join(name).join("summary.json")))
    }
}

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn high_snr_limit(b: &Bounds) -> Outcome {
    let mut notes = Vec::new();
    for (p, name) in HIGH_SNR_CONFIGS {
        let run = b.run(name);
        let s = b
            .summary(name)
            .ok_or_else(|| format!("p={p}: exit {} ({})", run.code, run.stderr.trim()))?;
        let sigma2 = 0.005f64 * 0.005;
        let z2 = num(&s, "Z2");
        ensure((0.90 * sigma2..=sigma2 * (1.0 + 1e-6)).contains(&z2), || {
            format!("p={p}: Z2/σ² = {} outside [0.90, 1+1e-6]", z2 / sigma2)
        })?;
        ensure(run.elapsed < Duration::from_secs(30), || {
            format!("p={p}: took {:.1?} (limit 30 s)", run.elapsed)
        })?;
        notes.push(format!("p={p}: Z2/σ²={:.6} in {:.1?}", z2 / sigma2, run.elapsed));
    }
    Ok(notes.join(", "))
}

fn bcrb_agreement(b: &Bounds) -> Outcome {
    for sigma in [0.005, 0.05, 0.2, 1.0, 3.7] {
        for p in 1..=3 {
            let model = GaussianLocationModel::new(p, sigma).unwrap();
            let v = bcrb_norm_example(&model);
            ensure(v == sigma * sigma, || {
                format!("bcrb_norm_example(p={p}, σ={sigma}) = {v}")
            })?;
        }
    }
    let mut ratios = Vec::new();
    for (p, name) in HIGH_SNR_CONFIGS {
        let s = b.summary(name).ok_or_else(|| format!("p={p}: bound run failed"))?;
        let ratio = num(&s, "Z2_over_bcrb");
        ensure(num(&s, "bcrb") == 0.005f64 * 0.005, || {
            format!("p={p}: summary bcrb {}", num(&s, "bcrb"))
        })?;
        ensure((0.90..=1.0 + 1e-6).contains(&ratio), || {
            format!("p={p}: Z2/bcrb = {ratio}")
        })?;
        ratios.push(format!("{ratio:.6}"));
    }
    Ok(format!("bcrb = σ² exactly; Z2/bcrb = {}", ratios.join(", ")))
}

fn closed_form_overlap() -> Outcome {
    let flock = Flock::radial();
    let mut worst = 0.0f64;
    for p in 1..=3 {
        let ball = UniformBallPrior::new(p, 1.0).unwrap();
        let prior = Prior::from(ball);
        for k in 0..100 {
            let t = 1.2 * k as f64 / 99.0;
            let rule = radial_discretization(&ball, t, 4096).map_err(|e| e.to_string())?;
            let numeric = rule
                .integrate(|theta| {
                    let f = prior.density(theta)?;
                    let f_t = flock.pushforward_density(&prior, theta, t)?;
                    Ok(f.min(f_t))
                })
                .map_err(|e| e.to_string())?;
            let closed = if t <= 1.0 { (1.0 - t).powi(p as i32) } else { 0.0 };
            ensure((a_t_uniform_ball(p, 1.0, t) - closed).abs() <= 1e-15, || {
                format!("a_t_uniform_ball({p}, 1, {t})")
            })?;
            let err = (numeric - closed).abs();
            worst = worst.max(err);
            ensure(err <= 1e-8, || format!("p={p}, t={t}: |numeric − A(t)| = {err:e}"))?;
        }
    }
    Ok(format!("300 (p, t) points, max abs error {worst:.2e}"))
}

fn normal_pdf(y: f64, mean: f64, sigma: f64) -> f64 {
    let z = (y - mean) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

fn pi_cross_validation() -> Outcome {
    let mut rng = substream(0xACCE_0004, 0);
    let mut cases: Vec<(f64, f64, f64, f64)> = vec![
        (0.0, 1.0, 0.0, 0.5),
        (0.0, 1.0, 1.0, 0.5),
        (0.3, 0.3, 0.5, 1.0),
        (-1.0, -1.0, 0.2, 0.1),
        (0.5, 0.5, 0.0, 2.0),
        (0.0, 2.0, 0.5, 1.0),
    ];
    while cases.len() < 20 {
        let sigma = 10f64.powf(rng.random_range(-2.0..1.0));
        let theta0 = rng.random_range(-3.0..3.0);
        let sep = sigma * rng.random_range(0.05..5.0);
        let q = match cases.len() % 5 {
            0 => 0.5,
            _ => rng.random_range(0.02..0.98),
        };
        cases.push((
            theta0,
            theta0 + sep * if rng.random::<bool>() { 1.0 } else { -1.0 },
            q,
            sigma,
        ));
    }
    let mut worst = 0.0f64;
    for &(a, b, q, sigma) in &cases {
        let model = GaussianLocationModel::new(1, sigma).unwrap();
        let spec = HypoTestSpec::new(ParamPoint::scalar(a).unwrap(), ParamPoint::scalar(b).unwrap(), q).unwrap();
        let closed = pi_gaussian(&model, &spec).map_err(|e| e.to_string())?;

        let lo = a.min(b) - 14.0 * sigma;
        let hi = a.max(b) + 14.0 * sigma;
        let mut breaks = vec![lo, hi, a, b];
        if a != b && q > 0.0 && q < 1.0 {
            breaks.push(0.5 * (a + b) + sigma * sigma * ((1.0 - q) / q).ln() / (a - b));
        }
        breaks.retain(|x| (lo..=hi).contains(x));
        let (y, w) = composite_gauss_legendre(&breaks, 40_000);
        let p0: Vec<f64> = y.iter().map(|&y| normal_pdf(y, a, sigma)).collect();
        let p1: Vec<f64> = y.iter().map(|&y| normal_pdf(y, b, sigma)).collect();
        let numeric = pi_numeric_1d(&p0, &p1, &w, q).map_err(|e| e.to_string())?;
        let err = if closed == 0.0 {
            numeric.abs()
        } else {
            rel(numeric, closed)
        };
        worst = worst.max(err);
        ensure(err <= 1e-6, || {
            format!("θ₀={a}, θ₁={b}, q={q}, σ={sigma}: closed {closed}, numeric {numeric}")
        })?;
    }
    Ok(format!("{} cases, max rel error {worst:.2e}", cases.len()))
}

fn scalar_oracle(b: &Bounds) -> Outcome {
    let mut notes = Vec::new();
    for (sigma, name) in SCALAR_CONFIGS {
        let s = b.summary(name).ok_or_else(|| format!("σ={sigma}: bound run failed"))?;
        let engine = num(&s, "Z2");
        let oracle = classical_zzb_scalar(1.0, sigma, 4096).map_err(|e| e.to_string())?;
        let err = rel(engine, oracle);
        ensure(err <= 1e-6, || {
            format!("σ={sigma}: engine {engine}, classical {oracle}, rel {err:e}")
        })?;
        notes.push(format!("σ={sigma}: rel {err:.2e}"));
    }
    Ok(notes.join(", "))
}

fn certification() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut notes = Vec::new();
    for name in VERIFY_CONFIGS {
        let out = dir.path().join(name);
        let run = zzbound(&["verify", config(name).to_str().unwrap()], &out, 0);
        ensure(run.code == 0, || {
            format!("{name}: exit {} ({})", run.code, run.stderr.trim())
        })?;
        ensure(run.elapsed < Duration::from_secs(120), || {
            format!("{name}: took {:.1?}", run.elapsed)
        })?;
        let v = read_json(&out.join("verify.json"));
        let (risk, se) = (num(&v, "risk"), num(&v, "std_error"));
        let bound = num(&v, "Z1").max(num(&v, "Z2"));
        ensure(v["certified"] == Value::Bool(true) && risk + 3.0 * se >= bound, || {
            format!("{name}: risk {risk} ± {se} below bound {bound}")
        })?;
        ensure(num(&v, "n_trials") == 20_000.0, || {
            format!("{name}: n_trials {}", v["n_trials"])
        })?;

        let inflated = zzbound(
            &["verify", config(name).to_str().unwrap(), "--bound-scale", "10"],
            &out,
            0,
        );
        ensure(inflated.code == 4, || {
            format!("{name}: ×10 control exited {}", inflated.code)
        })?;
        notes.push(format!(
            "{name}: (risk+3SE)/max(Z) = {:.3} in {:.1?}",
            (risk + 3.0 * se) / bound,
            run.elapsed
        ));
    }
    Ok(format!("{}; ×10 controls exit 4", notes.join(", ")))
}

fn structural(b: &Bounds) -> Outcome {
    for (name, run) in &b.runs {
        let s = b
            .summary(name)
            .ok_or_else(|| format!("{name}: exit {} ({})", run.code, run.stderr.trim()))?;
        ensure(num(&s, "Z1") >= num(&s, "Z2"), || {
            format!("{name}: Z1 {} < Z2 {}", s["Z1"], s["Z2"])
        })?;
    }

    let mut rng = substream(0xACCE_0007, 0);
    for i in 0..1000 {
        let n = rng.random_range(1..200);
        let g: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let h: Vec<f64> = g.iter().map(|x| x + rng.random::<f64>() * 0.3).collect();
        let vg = valley_fill(&g).map_err(|e| e.to_string())?;
        let vh = valley_fill(&h).map_err(|e| e.to_string())?;
        ensure(valley_fill(&vg).unwrap() == vg, || format!("curve {i}: not idempotent"))?;
        ensure(vg.iter().zip(&g).all(|(v, x)| v >= x), || {
            format!("curve {i}: does not dominate")
        })?;
        ensure(vg.windows(2).all(|w| w[0] >= w[1]), || {
            format!("curve {i}: not nonincreasing")
        })?;
        ensure(vg.iter().zip(&vh).all(|(a, b)| a <= b), || {
            format!("curve {i}: not monotone in g")
        })?;
        let expected: Vec<f64> = (0..n)
            .map(|k| g[k..].iter().copied().fold(f64::MIN, f64::max))
            .collect();
        ensure(vg == expected, || {
            format!("curve {i}: not the least nonincreasing majorant")
        })?;
    }

    let model = GaussianLocationModel::new(2, 0.05).unwrap();
    let prior: Prior = UniformBallPrior::new(2, 1.0).unwrap().into();
    let poi = ParamOfInterest::Norm;
    let estimator = PosteriorMeanEstimator {
        model,
        prior,
        poi: poi.clone(),
        n_is: 1000,
    };
    let seed = 0xACCE_7A11;
    let errors = Execution::Parallel
        .try_map(100_000, |i| {
            let mut rng = substream(seed, i as u64);
            let x = prior.draw(&mut rng);
            let y = model.sample(&x, &mut rng);
            let ctx = TrialContext {
                index: i,
                seed: child_seed(seed, i as u64),
                truth: &x,
            };
            Ok::<f64, zzbound_core::Error>((estimator.estimate(&y, &ctx)? - poi.eval(&x)?).abs())
        })
        .map_err(|e| e.to_string())?;
    let e_max = errors.iter().copied().fold(0.0, f64::max);
    let tgrid = TGrid::uniform(2.0 * e_max * 1.001, 200_001).unwrap();
    let mut gaps = Vec::new();
    for d in [DistortionFn::Squared, DistortionFn::Absolute] {
        let report = tail_identity_check(&errors, d, &tgrid).map_err(|e| e.to_string())?;
        ensure(report.passed(), || format!("{d:?}: rel gap {:e}", report.rel_gap))?;
        gaps.push(format!("{d:?} gap {:.1e}", report.rel_gap));
    }
    Ok(format!(
        "Z1 ≥ Z2 on {} configs, 1000 valley-fill curves, tail identity on 1e5 errors ({})",
        b.runs.len(),
        gaps.join(", ")
    ))
}

fn flock_validation() -> Outcome {
    let flock = Flock::radial();
    let numeric = Flock::radial().with_density_mode(DensityMode::NumericJacobian);
    let one = |_: &ParamPoint| 1.0;
    let r1 = |x: &ParamPoint| x.norm();
    let r2 = |x: &ParamPoint| x.norm() * x.norm();
    let decay = |x: &ParamPoint| (-3.0 * x.norm()).exp();
    let mut worst_slack = 0.0f64;
    let mut worst_pf = 0.0f64;
    let mut worst_jac = 0.0f64;
    for p in 1..=3 {
        let prior: Prior = UniformBallPrior::new(p, 1.0).unwrap().into();
        let samples = prior.sample(1000, 0xACCE_0008 + p as u64).unwrap();
        let ts: Vec<f64> = (0..=50).map(|k| 2.0 * k as f64 / 50.0).collect();
        let rule = validate_rule(&flock, &ParamOfInterest::Norm, &ts, &samples).map_err(|e| e.to_string())?;
        ensure(rule.passed() && rule.max_abs_slack <= 1e-12, || {
            format!(
                "p={p}: rule slack {:e}, {} violations",
                rule.max_abs_slack,
                rule.violations.len()
            )
        })?;
        worst_slack = worst_slack.max(rule.max_abs_slack);

        for t in [0.1, 0.3, 0.7] {
            let method = PushforwardMethod::Quadrature { n_nodes: 4096 };
            let report = validate_pushforward(&flock, &prior, t, &[&one, &r1, &r2, &decay], method)
                .map_err(|e| e.to_string())?;
            ensure(report.passed() && report.tolerance == 1e-6, || {
                format!("p={p}, t={t}: pushforward discrepancy {:e}", report.max_rel_discrepancy)
            })?;
            worst_pf = worst_pf.max(report.max_rel_discrepancy);
            if p >= 2 {
                let corrupted = validate_pushforward_with(&flock, &prior, t, &[&one, &r1], method, |theta| {
                    Ok(1.1 * flock.pushforward_density(&prior, theta, t)?)
                })
                .map_err(|e| e.to_string())?;
                ensure(!corrupted.passed(), || format!("p={p}, t={t}: ×1.1 density accepted"))?;
            }

            for theta in prior.sample(200, 0xACCE_0108 + p as u64).unwrap() {
                if theta.norm() < 1e-3 {
                    continue;
                }
                let closed = flock.pushforward_density(&prior, &theta, t).unwrap();
                let jac = numeric
                    .pushforward_density(&prior, &theta, t)
                    .map_err(|e| e.to_string())?;
                let err = rel(closed, jac);
                worst_jac = worst_jac.max(err);
                ensure(err <= 1e-6, || {
                    format!("p={p}, t={t}, θ={:?}: closed {closed}, Jacobian {jac}", theta.coords())
                })?;
            }
        }
    }
    Ok(format!(
        "rule slack {worst_slack:.1e}, pushforward rel {worst_pf:.1e}, Jacobian rel {worst_jac:.1e}"
    ))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(SWEEP_CONFIG);
    let cfg = cfg.to_str().unwrap();
    let commands: [(&str, Vec<&str>, &[&str]); 3] = [
        ("bound", vec!["bound", cfg], &["curves.csv", "summary.json"]),
        ("verify", vec!["verify", cfg], &["verify.json"]),
        (
            "sweep",
            vec!["sweep", cfg, "--field", "sigma", "--values", "0.2,0.1", "--oracle"],
            &["sweep.csv"],
        ),
    ];
    for (label, args, files) in &commands {
        let mut outputs = Vec::new();
        for threads in [1, 1, 8, 8] {
            let out = dir.path().join(format!("{label}-{threads}-{}", outputs.len()));
            let mut args = args.clone();
            args.extend(["--seed", "11"]);
            let run = zzbound(&args, &out, threads);
            ensure(run.code == 0, || {
                format!("{label} at {threads} threads: exit {}", run.code)
            })?;
            let bytes: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(out.join(f)).unwrap()).collect();
            outputs.push(bytes);
        }
        ensure(outputs.windows(2).all(|w| w[0] == w[1]), || {
            format!("{label}: outputs differ between runs")
        })?;
    }
    Ok("bound, verify and sweep byte-identical over 2 runs each at 1 and 8 threads".into())
}

fn main() {
    let bounds = Bounds::compute();
    let criteria: Vec<Criterion<'_>> = vec![
        ("high-SNR Z2 limit", Box::new(|| high_snr_limit(&bounds))),
        ("BCRB agreement", Box::new(|| bcrb_agreement(&bounds))),
        ("closed-form A(t)", Box::new(closed_form_overlap)),
        ("Π cross-validation", Box::new(pi_cross_validation)),
        ("scalar oracle equivalence", Box::new(|| scalar_oracle(&bounds))),
        ("bound certification", Box::new(certification)),
        ("structural properties", Box::new(|| structural(&bounds))),
        ("flock validation", Box::new(flock_validation)),
        ("determinism", Box::new(determinism)),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {} ({name}): PASS: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {} ({name}): FAIL: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
