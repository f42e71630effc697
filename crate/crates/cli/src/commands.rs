use std::path::{Path, PathBuf};
use std::time::Instant;

use arsense::decoder::{
    decode_ar_compressed, decode_ar_noisy, decode_blind, DecodeMode, DecodeResult, GroundTruth,
};
use arsense::experiments::{default_lambda, emit_outputs, run_experiment, ExperimentConfig, OutputFormat};
use arsense::io::{read_json, read_matrix, read_vector, write_json, write_matrix, write_vector};
use arsense::rng::substream;
use arsense::sensing::{
    add_noise, build_regressor, build_sensing, Distribution, RegressorInputs, RegressorVariant, SensingKind,
    SensingOperator, Structure,
};
use arsense::signal::{ar_forward, arma_forward, make_spike_train, ArModel, ArmaModel, SignMode, SpikeParams};
use arsense::solvers::SolverOptions;
use arsense::verify::{
    check_doc, check_theorem1_assumptions, check_theorem2_conditions, estimate_rip, normalize_columns, RipMethod,
};
use clap::Parser;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::cli::*;
use crate::manifest::RunManifest;

/// The AR/ARMA coefficients of an instance directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub ar: Vec<f64>,
    #[serde(default)]
    pub ma: Vec<f64>,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, inputs or configs: exit code 2.
    Usage(String),
    /// The requested computation is impossible on this input: exit code 1.
    Domain(arsense::Error),
}

impl From<arsense::Error> for CliError {
    fn from(e: arsense::Error) -> Self {
        use arsense::Error as E;
        match e {
            E::Io { .. } | E::Parse { .. } | E::Config(_) | E::InvalidArgument(_) | E::DimensionMismatch { .. } => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Domain(other),
        }
    }
}

/// A run either completes, or completes with a negative verdict (a failed
/// certificate or a replay mismatch), which exits with code 1.
pub enum Outcome {
    Done(PathBuf),
    CheckFailed(PathBuf, String),
}

pub fn dispatch(cli: Cli, argv: &[String]) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let (outcome, manifest_args) = match cli.command {
        Command::Synth(a) => synth(a, argv)?,
        Command::Sense(a) => sense(a, argv)?,
        Command::Decode(a) => decode(a, argv)?,
        Command::Verify(v) => verify(v, argv)?,
        Command::Experiment(a) => experiment(a, argv)?,
        Command::Replay(a) => return replay(a, cli.verbose),
    };
    let (mut manifest, dir, written) = manifest_args;
    manifest.timings_ms.insert("total".into(), start.elapsed().as_secs_f64() * 1e3);
    let path = manifest.finish(&dir, &written)?;
    Ok(match outcome {
        Verdict::Pass => Outcome::Done(path),
        Verdict::Fail(msg) => Outcome::CheckFailed(path, msg),
    })
}

enum Verdict {
    Pass,
    Fail(String),
}

type Finished = (Verdict, (RunManifest, PathBuf, Vec<PathBuf>));

fn parse_kind(s: &str) -> Result<SensingKind, CliError> {
    s.parse::<SensingKind>().map_err(CliError::from)
}

fn model_from(ar: &[f64], poles: &[f64]) -> ArModel {
    if poles.is_empty() {
        ArModel::new(ar.to_vec())
    } else {
        ArModel::from_real_poles(poles)
    }
}

fn synth(a: SynthArgs, argv: &[String]) -> Result<Finished, CliError> {
    let sign_mode: SignMode = a.signs.parse()?;
    let model = model_from(&a.ar, &a.poles);
    if !model.is_stable() {
        eprintln!(
            "warning: AR model is not stable (largest pole modulus {:.4})",
            model.max_pole_modulus()
        );
    }
    let params = SpikeParams {
        n: a.n,
        k: a.k,
        min_sep: a.min_sep,
        beta_min: a.beta_min,
        beta_max: a.beta_max,
        sign_mode,
    };
    let u = make_spike_train(&params, substream(a.seed, 1))?;
    let x = if a.ma.is_empty() {
        ar_forward(&model, u.values())
    } else {
        arma_forward(&ArmaModel::new(model.clone(), a.ma.clone()), u.values())
    };
    let mut written = Vec::new();
    let out = &a.out;
    let put_vec = |name: &str, v: &[f64], kind: &str, written: &mut Vec<PathBuf>| -> Result<(), CliError> {
        let p = out.join(name);
        write_vector(&p, v, kind, Some(a.seed))?;
        written.push(p);
        Ok(())
    };
    put_vec("u.csv", u.values(), "spikes", &mut written)?;
    put_vec("x.csv", &x, "signal", &mut written)?;
    let model_path = out.join("model.json");
    write_json(
        &model_path,
        &ModelFile {
            ar: model.coeffs().to_vec(),
            ma: a.ma.clone(),
        },
    )?;
    written.push(model_path);
    if let Some(m) = a.m {
        let kind = parse_kind(&a.kind)?;
        let g_seed = substream(a.seed, 2);
        let g = build_sensing(kind, m, a.n, g_seed)?;
        let y = add_noise(&g.apply(&x)?, a.sigma, substream(a.seed, 3))?;
        let gp = out.join("G.csv");
        write_matrix(&gp, g.matrix(), &kind.label(), Some(g_seed))?;
        written.push(gp);
        put_vec("y.csv", &y, "measurements", &mut written)?;
    }
    println!("synth: k={} spikes, n={}, wrote {}", u.k(), a.n, out.display());
    let config = json!({
        "n": a.n, "k": a.k, "min_sep": a.min_sep, "ar": model.coeffs(), "ma": a.ma,
        "beta_min": a.beta_min, "beta_max": a.beta_max, "signs": a.signs,
        "m": a.m, "kind": a.kind, "sigma": a.sigma,
    });
    let manifest = RunManifest::new("synth", argv, config, Some(a.seed));
    Ok((Verdict::Pass, (manifest, a.out, written)))
}

fn sense(a: SenseArgs, argv: &[String]) -> Result<Finished, CliError> {
    let kind = parse_kind(&a.kind)?;
    let (x, _) = read_vector(&a.x)?;
    let g = build_sensing(kind, a.m, x.len(), a.seed)?;
    let y = add_noise(&g.apply(&x)?, a.sigma, substream(a.seed, 3))?;
    let gp = a.out.join("G.csv");
    write_matrix(&gp, g.matrix(), &kind.label(), Some(a.seed))?;
    let yp = a.out.join("y.csv");
    write_vector(&yp, &y, "measurements", Some(a.seed))?;
    println!("sense: {}x{} {}, wrote {}", a.m, x.len(), kind, a.out.display());
    let mut manifest = RunManifest::new(
        "sense",
        argv,
        json!({"m": a.m, "kind": kind.label(), "sigma": a.sigma}),
        Some(a.seed),
    );
    manifest.add_input(&a.x)?;
    Ok((Verdict::Pass, (manifest, a.out, vec![gp, yp])))
}

/// Reads a sensing matrix; the header's kind tells whether it has the
/// Toeplitz shift structure.
fn read_sensing(path: &Path) -> Result<SensingOperator, CliError> {
    let (matrix, header) = read_matrix(path)?;
    let kind = header
        .kind
        .parse::<SensingKind>()
        .unwrap_or(SensingKind::new(Structure::Dense, Distribution::Gaussian));
    Ok(SensingOperator::from_matrix(kind, header.seed.unwrap_or(0), matrix))
}

fn read_truth(dir: &Path) -> Result<(GroundTruth, ModelFile), CliError> {
    let (u, _) = read_vector(&dir.join("u.csv"))?;
    let model: ModelFile = read_json(&dir.join("model.json"))?;
    Ok((
        GroundTruth {
            u,
            a: model.ar.clone(),
        },
        model,
    ))
}

fn decode(a: DecodeArgs, argv: &[String]) -> Result<Finished, CliError> {
    let opts = SolverOptions::default();
    let (y, _) = read_vector(&a.y)?;
    let mut manifest = RunManifest::new(
        "decode",
        argv,
        json!({"p": a.p, "mode": format!("{:?}", a.mode).to_lowercase(), "epsilon": a.epsilon, "lambda": a.lambda}),
        None,
    );
    manifest.add_input(&a.y)?;
    let mut result: DecodeResult = match &a.g {
        Some(gp) => {
            manifest.add_input(gp)?;
            let g = read_sensing(gp)?;
            match a.epsilon {
                Some(eps) => decode_ar_noisy(&y, &g, a.p, eps, &opts)?,
                None => {
                    let mode = match a.mode {
                        ModeArg::Joint => DecodeMode::Joint,
                        ModeArg::Projected => DecodeMode::Projected,
                    };
                    decode_ar_compressed(&y, &g, a.p, mode, &opts)?
                }
            }
        }
        None => {
            let lambda = a
                .lambda
                .ok_or_else(|| CliError::Usage("blind decoding (no --G) needs --lambda".into()))?;
            decode_blind(&y, a.p, lambda, &opts)?
        }
    };
    if let Some(dir) = &a.truth {
        let (truth, _) = read_truth(dir)?;
        let s = result.score_against(&truth);
        println!("decode: success = {s:?}");
    }
    let mut written = Vec::new();
    for (name, v, kind) in [
        ("u_hat.csv", &result.u_hat, "spikes"),
        ("a_hat.csv", &result.a_hat, "ar"),
        ("x_hat.csv", &result.x_hat, "signal"),
    ] {
        let p = a.out.join(name);
        write_vector(&p, v, kind, None)?;
        written.push(p);
    }
    let rp = a.out.join("decode.json");
    write_json(&rp, &result)?;
    written.push(rp);
    println!(
        "decode: status {:?}, |u|_1 = {:.6}, a_hat = {:?}, wrote {}",
        result.report.status,
        result.report.objective,
        result.a_hat,
        a.out.display()
    );
    Ok((Verdict::Pass, (manifest, a.out, written)))
}

fn verify(v: VerifyCommand, argv: &[String]) -> Result<Finished, CliError> {
    match v {
        VerifyCommand::Doc(a) => {
            let dir = &a.instance;
            let g = read_sensing(&dir.join("G.csv"))?;
            let (y, _) = read_vector(&dir.join("y.csv"))?;
            let (truth, model) = read_truth(dir)?;
            let p = model.ar.len();
            let sys = build_regressor(
                &y,
                p,
                RegressorVariant::Compressed,
                RegressorInputs {
                    sensing: Some(&g),
                    ..Default::default()
                },
            )?;
            let support: Vec<usize> = (0..truth.u.len()).filter(|&i| truth.u[i] != 0.0).collect();
            let signs: Vec<f64> = support.iter().map(|&i| truth.u[i].signum()).collect();
            let mut manifest = RunManifest::new("verify doc", argv, json!({"instance": dir, "p": p}), None);
            for f in ["G.csv", "y.csv", "u.csv", "model.json"] {
                manifest.add_input(&dir.join(f))?;
            }
            let (verdict, record) = match check_doc(&sys.g_sub, &sys.y_lag, &support, &signs, &SolverOptions::default()) {
                Ok(cert) => {
                    println!(
                        "verify doc: feasible = {}, off-support max = {:.6}, null residual = {:.3e}",
                        cert.feasible, cert.off_support_max, cert.null_residual
                    );
                    let verdict = if cert.feasible {
                        Verdict::Pass
                    } else {
                        Verdict::Fail(format!("no dual certificate: off-support max {:.6} >= 1 - margin", cert.t))
                    };
                    (verdict, serde_json::to_value(&cert).unwrap_or_default())
                }
                Err(arsense::Error::DocEqualitiesInfeasible) => {
                    println!("verify doc: feasible = false (equality system has no solution)");
                    (
                        Verdict::Fail("equality conditions of the certificate are infeasible".into()),
                        json!({"feasible": false, "equalities_infeasible": true}),
                    )
                }
                Err(e) => return Err(e.into()),
            };
            let path = a.out.join("doc.json");
            write_json(&path, &record)?;
            Ok((verdict, (manifest, a.out, vec![path])))
        }
        VerifyCommand::Thm1(a) => {
            let (truth, model) = read_truth(&a.instance)?;
            let report = check_theorem1_assumptions(&ArModel::new(model.ar.clone()), &truth.u, a.s);
            println!(
                "verify thm1: all pass = {}, l required = {:?}, l actual = {:?}",
                report.all_pass, report.l_required, report.l_actual
            );
            let mut manifest = RunManifest::new("verify thm1", argv, json!({"instance": a.instance, "s": a.s}), None);
            manifest.add_input(&a.instance.join("u.csv"))?;
            manifest.add_input(&a.instance.join("model.json"))?;
            let path = a.out.join("thm1.json");
            write_json(&path, &report)?;
            let verdict = if report.all_pass {
                Verdict::Pass
            } else {
                Verdict::Fail("assumptions not met".into())
            };
            Ok((verdict, (manifest, a.out, vec![path])))
        }
        VerifyCommand::Thm2(a) => {
            let (truth, model) = read_truth(&a.instance)?;
            let (x, _) = read_vector(&a.instance.join("x.csv"))?;
            let lambda = a.lambda.unwrap_or_else(|| default_lambda(a.sigma, &model.ar, x.len()));
            if lambda.is_nan() || lambda <= 0.0 {
                return Err(CliError::Usage("lambda must be positive; pass --lambda when sigma = 0".into()));
            }
            let report = check_theorem2_conditions(&x, &truth.u, &model.ar, a.sigma, lambda)?;
            println!(
                "verify thm2: (1) {} (2) {} (3) {}/{} lambda {} u_min {}",
                report.condition1,
                report.condition2,
                report.condition3_noise,
                report.condition3_peak,
                report.lambda_ok,
                report.u_min_ok
            );
            let mut manifest = RunManifest::new(
                "verify thm2",
                argv,
                json!({"instance": a.instance, "sigma": a.sigma, "lambda": lambda}),
                None,
            );
            for f in ["x.csv", "u.csv", "model.json"] {
                manifest.add_input(&a.instance.join(f))?;
            }
            let path = a.out.join("thm2.json");
            write_json(&path, &report)?;
            let verdict = if report.all_pass {
                Verdict::Pass
            } else {
                Verdict::Fail("conditions not met".into())
            };
            Ok((verdict, (manifest, a.out, vec![path])))
        }
        VerifyCommand::Rip(a) => {
            let g = read_sensing(&a.g)?;
            let matrix = if a.raw {
                g.matrix().clone()
            } else {
                normalize_columns(g.matrix())
            };
            let method = match a.method {
                RipMethodArg::Auto => RipMethod::Auto,
                RipMethodArg::Exhaustive => RipMethod::Exhaustive,
                RipMethodArg::Sampled => RipMethod::Sampled,
            };
            let est = estimate_rip(&matrix, a.s, a.trials, method, a.seed)?;
            println!(
                "verify rip: delta_{} >= {:.6} ({:?}, {} supports)",
                est.s, est.delta_lower, est.method, est.trials
            );
            let mut manifest = RunManifest::new(
                "verify rip",
                argv,
                json!({"s": a.s, "trials": a.trials, "method": format!("{:?}", a.method).to_lowercase(), "raw": a.raw}),
                Some(a.seed),
            );
            manifest.add_input(&a.g)?;
            let path = a.out.join("rip.json");
            write_json(&path, &est)?;
            Ok((Verdict::Pass, (manifest, a.out, vec![path])))
        }
    }
}

fn experiment(a: ExperimentArgs, argv: &[String]) -> Result<Finished, CliError> {
    let mut config = match (a.profile.as_str(), &a.config) {
        (_, Some(path)) => ExperimentConfig::from_file(path)?,
        ("custom", None) => return Err(CliError::Usage("`experiment custom` needs --config PATH".into())),
        (name, None) => ExperimentConfig::profile(name)?,
    };
    if let Some(seed) = a.seed {
        config.seed = seed;
    }
    if let Some(trials) = a.trials {
        config.trials = trials;
    }
    config.timings |= a.timings;
    config.validate()?;
    let result = run_experiment(&config)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    let dir = a.out.join(&config.name);
    let format = match a.format {
        FormatArg::Csv => OutputFormat::Csv,
        FormatArg::Svg => OutputFormat::Svg,
        FormatArg::Both => OutputFormat::Both,
    };
    let written = emit_outputs(&result, &dir, format)?;
    println!("experiment {}: wrote {} files to {}", config.name, written.len(), dir.display());
    let mut manifest = RunManifest::new(
        "experiment",
        argv,
        serde_json::to_value(&config).map_err(|e| CliError::Usage(e.to_string()))?,
        Some(config.seed),
    );
    if let Some(path) = &a.config {
        manifest.add_input(path)?;
    }
    Ok((Verdict::Pass, (manifest, dir, written)))
}

/// Points the recorded command line at `out`.
fn redirect_out(argv: &[String], out: &Path) -> Vec<String> {
    let out = out.display().to_string();
    let mut args = Vec::with_capacity(argv.len() + 2);
    let mut replaced = false;
    let mut iter = argv.iter();
    while let Some(arg) = iter.next() {
        if arg == "--out" {
            iter.next();
            args.push("--out".to_string());
            args.push(out.clone());
            replaced = true;
        } else if arg.starts_with("--out=") {
            args.push(format!("--out={out}"));
            replaced = true;
        } else {
            args.push(arg.clone());
        }
    }
    if !replaced {
        args.push("--out".into());
        args.push(out);
    }
    args
}

fn replay(a: ReplayArgs, verbose: bool) -> Result<Outcome, CliError> {
    let recorded = RunManifest::load(&a.manifest)?;
    let argv = redirect_out(&recorded.argv, &a.out);
    let cli = Cli::try_parse_from(&argv).map_err(|e| CliError::Usage(format!("recorded command no longer parses: {e}")))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(CliError::Usage("a replay manifest cannot point at another replay".into()));
    }
    let fresh_path = match dispatch(cli, &argv)? {
        Outcome::Done(p) | Outcome::CheckFailed(p, _) => p,
    };
    let fresh = RunManifest::load(&fresh_path)?;
    let mut mismatches = Vec::new();
    for old in &recorded.outputs {
        match fresh.outputs.iter().find(|f| f.path == old.path) {
            Some(new) if new.sha256 == old.sha256 => {}
            Some(_) => mismatches.push(format!("{} differs", old.path.display())),
            None => mismatches.push(format!("{} missing", old.path.display())),
        }
    }
    for new in &fresh.outputs {
        if !recorded.outputs.iter().any(|f| f.path == new.path) {
            mismatches.push(format!("{} is new", new.path.display()));
        }
    }
    if verbose {
        eprintln!("replayed {:?}", argv);
    }
    if mismatches.is_empty() {
        println!("replay: {} outputs identical", recorded.outputs.len());
        Ok(Outcome::Done(fresh_path))
    } else {
        Ok(Outcome::CheckFailed(fresh_path, mismatches.join("; ")))
    }
}

pub const CONFIG_HELP: &str = "\
experiment config (TOML):
  name, kind (sparsity | order | tv_stress | sign | arma_trajectory | reconstruction), seed, n   required
  trials, m, k, sweep = [..], ar = [..] or poles = [..], ma = [..]
  ensembles = [\"toeplitz-gaussian\", ..], sign_modes = [\"bernoulli\", \"all_positive\"]
  min_sep, beta_min, beta_max, sigma, snr_db, lambda, epsilon
  epsilon_schedule = [[3.0, 50], [0.3, 10]], pole_range = [0.2, 0.9], timings
  [solver] feasibility_tol, gap_tol, max_iterations, margin_tol";

