use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind};
use super::stats::wilson_interval;
use crate::decoder::{
    decode_ar_compressed, decode_ar_noisy, decode_arma_iterative, decode_blind, thresholded_support, DecodeMode,
    GroundTruth, Success, TrajectoryPoint,
};
use crate::error::{Error, Result};
use crate::linalg::{l2, linf, max_abs_diff};
use crate::rng::{rng_from_seed, split_seed, substream};
use crate::sensing::{add_noise, build_sensing, SensingKind};
use crate::signal::{
    ar_forward, arma_forward, fit_decay_envelope, make_spike_train, max_feasible_separation, random_stable_ar, ArModel,
    ArmaModel, SignMode, SpikeParams, SpikeTrain, DEFAULT_ENVELOPE_SAFETY,
};
use crate::verify::required_separation;

const TAG_SPIKES: u64 = 1;
const TAG_SENSING: u64 = 2;
const TAG_NOISE: u64 = 3;
const TAG_MODEL: u64 = 4;

/// One Monte Carlo trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub sweep_value: usize,
    pub trial: usize,
    pub seed: u64,
    pub separation: usize,
    pub success: Success,
    /// `‖û − u*‖₂`.
    pub u_error: f64,
    /// `‖â − a*‖∞`.
    pub a_error: f64,
    /// `‖x̂ − x‖∞`.
    pub x_error: f64,
    pub runtime_ms: Option<f64>,
    /// Solver failure, counted as a failed decode.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub sweep_value: usize,
    pub trials: usize,
    pub successes: usize,
    /// Trials whose support was recovered, exact or not.
    pub approx_successes: usize,
    pub frequency: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub approx_frequency: f64,
    pub approx_ci_lo: f64,
    pub approx_ci_hi: f64,
    pub mean_runtime_ms: Option<f64>,
    pub min_separation: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuccessCurve {
    pub label: String,
    pub sweep_name: String,
    pub points: Vec<CurvePoint>,
    pub records: Vec<TrialRecord>,
    /// The model violates the stability assumption of the recovery guarantee.
    pub outside_theorem: bool,
}

impl SuccessCurve {
    pub fn frequencies(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.frequency).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRun {
    pub run: usize,
    pub seed: u64,
    pub points: Vec<TrajectoryPoint>,
    pub b_final: Vec<f64>,
    /// `‖b̂ − b*‖₂`.
    pub b_error: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub b_true: Vec<f64>,
    /// First round (1-based) of every ε stage.
    pub stage_starts: Vec<usize>,
    pub stage_epsilons: Vec<f64>,
    pub runs: Vec<TrajectoryRun>,
}

impl TrajectoryRecord {
    /// Runs whose final `b̂` is within `tol` of the truth.
    pub fn runs_within(&self, tol: f64) -> usize {
        self.runs.iter().filter(|r| r.error.is_none() && r.b_error <= tol).count()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemoRecord {
    pub seed: u64,
    pub sigma: f64,
    pub epsilon: f64,
    pub a_star: Vec<f64>,
    pub a_hat: Vec<f64>,
    pub u_star: Vec<f64>,
    pub u_hat: Vec<f64>,
    pub x: Vec<f64>,
    pub x_hat: Vec<f64>,
    /// The `k` largest `|û_i|` sit on the true support.
    pub support_recovered: bool,
    /// `max_{i ∈ I} |û_i − u*_i|`.
    pub amplitude_error: f64,
    pub x_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum ExperimentOutput {
    Curves { curves: Vec<SuccessCurve> },
    Trajectory(TrajectoryRecord),
    Demo(DemoRecord),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub output: ExperimentOutput,
    pub warnings: Vec<String>,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let mut warnings = Vec::new();
    let output = match config.kind {
        ExperimentKind::Sparsity => ExperimentOutput::Curves {
            curves: run_success_vs_sparsity(config)?,
        },
        ExperimentKind::Order => ExperimentOutput::Curves {
            curves: run_success_vs_order(config)?,
        },
        ExperimentKind::TvStress => {
            let model = config.model()?;
            if model.is_stable() {
                warnings.push("tv_stress run on a stable model".into());
            } else {
                warnings.push(format!(
                    "model is outside the recovery guarantee: largest pole modulus {:.4} >= 1",
                    model.max_pole_modulus()
                ));
            }
            ExperimentOutput::Curves {
                curves: run_tv_stress(config)?,
            }
        }
        ExperimentKind::Sign => ExperimentOutput::Curves {
            curves: run_sign_experiment(config)?,
        },
        ExperimentKind::ArmaTrajectory => ExperimentOutput::Trajectory(run_arma_trajectory(config)?),
        ExperimentKind::Reconstruction => ExperimentOutput::Demo(run_reconstruction_demo(config)?),
    };
    Ok(ExperimentResult {
        config: config.clone(),
        output,
        warnings,
    })
}

/// Evaluates `f` on every index, in parallel when the `parallel` feature is
/// on. Results come back in index order either way.
fn map_indexed<T: Send, F: Fn(usize) -> T + Sync + Send>(count: usize, f: F) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(f).collect()
    }
}

/// The separation required for guaranteed recovery of `model` when `k` spikes fit with it,
/// otherwise the largest feasible separation.
pub fn default_separation(model: &ArModel, n: usize, k: usize, beta_min: f64, beta_max: f64) -> Result<usize> {
    let max_sep = max_feasible_separation(n, k).ok_or(Error::InfeasibleSeparation { n, k, min_sep: 0 })?;
    if !model.is_stable() {
        return Ok(max_sep);
    }
    let envelope = fit_decay_envelope(model, crate::verify::ENVELOPE_HORIZON, DEFAULT_ENVELOPE_SAFETY)?;
    let l = required_separation(model.order(), &envelope, beta_min, beta_max);
    // Gaps strictly greater than `min_sep = ⌊l⌋` are strictly greater than `l`.
    let wanted = l.floor() as usize;
    Ok(wanted.min(max_sep))
}

fn spikes_for(config: &ExperimentConfig, k: usize, min_sep: usize, sign_mode: SignMode, seed: u64) -> Result<SpikeTrain> {
    let params = SpikeParams {
        n: config.n,
        k,
        min_sep,
        beta_min: config.beta_min,
        beta_max: config.beta_max,
        sign_mode,
    };
    make_spike_train(&params, substream(seed, TAG_SPIKES))
}

fn failed_record(sweep_value: usize, trial: usize, seed: u64, separation: usize, err: Error) -> TrialRecord {
    TrialRecord {
        sweep_value,
        trial,
        seed,
        separation,
        success: Success::Failed,
        u_error: f64::NAN,
        a_error: f64::NAN,
        x_error: f64::NAN,
        runtime_ms: None,
        error: Some(err.to_string()),
    }
}

/// Noiseless (or `sigma`-noisy) compressed decoding of one AR instance.
fn compressed_trial(
    config: &ExperimentConfig,
    model: &ArModel,
    kind: SensingKind,
    k: usize,
    sweep_value: usize,
    trial: usize,
    seed: u64,
) -> TrialRecord {
    let start = Instant::now();
    let separation = match config.min_sep {
        Some(s) => Ok(s),
        None => default_separation(model, config.n, k, config.beta_min, config.beta_max),
    };
    let separation = match separation {
        Ok(s) => s,
        Err(e) => return failed_record(sweep_value, trial, seed, 0, e),
    };
    let outcome = (|| -> Result<TrialRecord> {
        let u = spikes_for(config, k, separation, config.sign_modes[0], seed)?;
        let x = ar_forward(model, u.values());
        let g = build_sensing(kind, config.m, config.n, substream(seed, TAG_SENSING))?;
        let sigma = config.sigma.unwrap_or(0.0);
        let y = add_noise(&g.apply(&x)?, sigma, substream(seed, TAG_NOISE))?;
        let p = model.order();
        let mut res = if sigma > 0.0 {
            let eps = config.epsilon.unwrap_or_else(|| default_epsilon(sigma, config.m, model.coeffs()));
            decode_ar_noisy(&y, &g, p, eps, &config.solver)?
        } else {
            decode_ar_compressed(&y, &g, p, DecodeMode::Joint, &config.solver)?
        };
        let truth = GroundTruth {
            u: u.values().to_vec(),
            a: model.coeffs().to_vec(),
        };
        let success = res.score_against(&truth);
        Ok(TrialRecord {
            sweep_value,
            trial,
            seed,
            separation,
            success,
            u_error: l2(&diff(&res.u_hat, u.values())),
            a_error: max_abs_diff(&res.a_hat, model.coeffs()),
            x_error: max_abs_diff(&res.x_hat, &x),
            runtime_ms: None,
            error: None,
        })
    })();
    let mut record = outcome.unwrap_or_else(|e| failed_record(sweep_value, trial, seed, separation, e));
    if config.timings {
        record.runtime_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    record
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `σ·√((m−p)(1 + ‖a‖₂²))`: the expected norm of the measurement noise after
/// it passes through the AR recursion on the regressor rows.
pub fn default_epsilon(sigma: f64, m: usize, a: &[f64]) -> f64 {
    let rows = m.saturating_sub(a.len()) as f64;
    sigma * (rows * (1.0 + a.iter().map(|v| v * v).sum::<f64>())).sqrt()
}

/// `6σ·p·a_max·√ln n`.
pub fn default_lambda(sigma: f64, a: &[f64], n: usize) -> f64 {
    let a_max = linf(a);
    6.0 * sigma * a.len() as f64 * a_max * (n as f64).ln().sqrt()
}

fn aggregate(label: String, sweep_name: &str, values: &[usize], records: Vec<TrialRecord>, outside_theorem: bool) -> SuccessCurve {
    let points = values
        .iter()
        .map(|&v| {
            let rs: Vec<&TrialRecord> = records.iter().filter(|r| r.sweep_value == v).collect();
            let trials = rs.len();
            let successes = rs.iter().filter(|r| r.success == Success::Exact).count();
            let approx_successes = rs.iter().filter(|r| r.success != Success::Failed).count();
            let (ci_lo, ci_hi) = wilson_interval(successes, trials);
            let (approx_ci_lo, approx_ci_hi) = wilson_interval(approx_successes, trials);
            let runtimes: Vec<f64> = rs.iter().filter_map(|r| r.runtime_ms).collect();
            let mean_runtime_ms = (!runtimes.is_empty() && runtimes.len() == trials)
                .then(|| runtimes.iter().sum::<f64>() / trials as f64);
            CurvePoint {
                sweep_value: v,
                trials,
                successes,
                approx_successes,
                frequency: ratio(successes, trials),
                ci_lo,
                ci_hi,
                approx_frequency: ratio(approx_successes, trials),
                approx_ci_lo,
                approx_ci_hi,
                mean_runtime_ms,
                min_separation: rs.iter().map(|r| r.separation).min().unwrap_or(0),
            }
        })
        .collect();
    SuccessCurve {
        label,
        sweep_name: sweep_name.to_string(),
        points,
        records,
        outside_theorem,
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

fn sweep_trials(config: &ExperimentConfig) -> Vec<(usize, usize, u64)> {
    config
        .sweep
        .iter()
        .flat_map(|&v| (0..config.trials).map(move |t| (v, t, split_seed(config.seed, v as u64, t as u64))))
        .collect()
}

fn sparsity_curves(config: &ExperimentConfig, model: &ArModel, outside_theorem: bool) -> Result<Vec<SuccessCurve>> {
    let jobs = sweep_trials(config);
    Ok(config
        .ensembles
        .iter()
        .map(|&kind| {
            let records = map_indexed(jobs.len(), |i| {
                let (k, t, seed) = jobs[i];
                compressed_trial(config, model, kind, k, k, t, seed)
            });
            aggregate(kind.label(), "k", &config.sweep, records, outside_theorem)
        })
        .collect())
}

/// Success frequency against spike count, one curve per ensemble.
pub fn run_success_vs_sparsity(config: &ExperimentConfig) -> Result<Vec<SuccessCurve>> {
    let model = config.model()?;
    sparsity_curves(config, &model, !model.is_stable())
}

/// The sparsity sweep on `x(t) − x(t−1) = u(t)` unless `ar` says otherwise.
pub fn run_tv_stress(config: &ExperimentConfig) -> Result<Vec<SuccessCurve>> {
    let model = if config.ar.is_empty() && config.poles.is_empty() {
        ArModel::new(vec![-1.0])
    } else {
        config.model()?
    };
    sparsity_curves(config, &model, !model.is_stable())
}

/// Success frequency against AR order with `config.k` spikes. Each trial
/// draws its own stable model with pole moduli in `pole_range`.
pub fn run_success_vs_order(config: &ExperimentConfig) -> Result<Vec<SuccessCurve>> {
    let jobs = sweep_trials(config);
    let [lo, hi] = config.pole_range;
    Ok(config
        .ensembles
        .iter()
        .map(|&kind| {
            let records = map_indexed(jobs.len(), |i| {
                let (p, t, seed) = jobs[i];
                let mut rng = rng_from_seed(substream(seed, TAG_MODEL));
                let model = random_stable_ar(p, lo, hi, &mut rng);
                compressed_trial(config, &model, kind, config.k, p, t, seed)
            });
            aggregate(kind.label(), "p", &config.sweep, records, false)
        })
        .collect())
}

fn sign_mode_label(mode: SignMode) -> &'static str {
    match mode {
        SignMode::Bernoulli => "bernoulli-signs",
        SignMode::AllPositive => "positive-signs",
    }
}

/// Sign-pattern recovery by blind deconvolution, one curve per sign mode.
/// Success is `sgn(û) = sgn(u*)` entrywise, exact zeros included; the
/// approximate count compares supports only.
pub fn run_sign_experiment(config: &ExperimentConfig) -> Result<Vec<SuccessCurve>> {
    let model = config.model()?;
    let jobs = sweep_trials(config);
    Ok(config
        .sign_modes
        .iter()
        .map(|&mode| {
            let records = map_indexed(jobs.len(), |i| {
                let (k, t, seed) = jobs[i];
                sign_trial(config, &model, mode, k, t, seed)
            });
            aggregate(sign_mode_label(mode).into(), "k", &config.sweep, records, false)
        })
        .collect())
}

fn sign_trial(config: &ExperimentConfig, model: &ArModel, mode: SignMode, k: usize, trial: usize, seed: u64) -> TrialRecord {
    let start = Instant::now();
    let n = config.n;
    let separation = match config.min_sep {
        Some(s) => Ok(s),
        None => default_separation(model, n, k, config.beta_min, config.beta_max),
    };
    let separation = match separation {
        Ok(s) => s,
        Err(e) => return failed_record(k, trial, seed, 0, e),
    };
    let outcome = (|| -> Result<TrialRecord> {
        let u = spikes_for(config, k, separation, mode, seed)?;
        let x = ar_forward(model, u.values());
        let sigma = match config.snr_db {
            Some(snr) => l2(&x) / (n as f64).sqrt() * 10f64.powf(-snr / 20.0),
            None => config.sigma.unwrap_or(0.0),
        };
        let y = add_noise(&x, sigma, substream(seed, TAG_NOISE))?;
        let lambda = match config.lambda {
            Some(l) => l,
            None => {
                let l = default_lambda(sigma, model.coeffs(), n);
                if l > 0.0 {
                    l
                } else {
                    NOISELESS_LAMBDA_FRACTION * config.beta_min
                }
            }
        };
        let res = decode_blind(&y, model.order(), lambda, &config.solver)?;
        let thr = 1e-6 * config.beta_max;
        let same_support = thresholded_support(&res.u_hat, thr) == u.support();
        let same_signs = same_support && u.support().iter().all(|&i| res.u_hat[i].signum() == u.values()[i].signum());
        let success = match (same_signs, same_support) {
            (true, _) => Success::Exact,
            (false, true) => Success::Approx,
            _ => Success::Failed,
        };
        Ok(TrialRecord {
            sweep_value: k,
            trial,
            seed,
            separation,
            success,
            u_error: l2(&diff(&res.u_hat, u.values())),
            a_error: max_abs_diff(&res.a_hat, model.coeffs()),
            x_error: max_abs_diff(&res.x_hat, &x),
            runtime_ms: None,
            error: None,
        })
    })();
    let mut record = outcome.unwrap_or_else(|e| failed_record(k, trial, seed, separation, e));
    if config.timings {
        record.runtime_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    record
}

/// `λ / β_min` used for noiseless blind runs, where the noise-driven default
/// would be zero.
pub const NOISELESS_LAMBDA_FRACTION: f64 = 1e-3;

/// `trials` seeded runs of the iterative ARMA decoder.
pub fn run_arma_trajectory(config: &ExperimentConfig) -> Result<TrajectoryRecord> {
    let ar = config.model()?;
    let schedule = config.schedule()?;
    let kind = config.ensembles[0];
    let q = config.ma.len();
    let mut stage_starts = Vec::new();
    let mut round = 1;
    for &(_, rounds) in schedule.stages() {
        stage_starts.push(round);
        round += rounds;
    }
    let stage_epsilons = schedule.stages().iter().map(|s| s.0).collect();
    let separation = match config.min_sep {
        Some(s) => s,
        None => default_separation(&ar, config.n, config.k, config.beta_min, config.beta_max)?,
    };
    let runs = map_indexed(config.trials, |r| {
        let seed = split_seed(config.seed, 0, r as u64);
        let outcome = (|| -> Result<TrajectoryRun> {
            let u = spikes_for(config, config.k, separation, config.sign_modes[0], seed)?;
            let model = ArmaModel::new(ar.clone(), config.ma.clone());
            let x = arma_forward(&model, u.values());
            let g = build_sensing(kind, config.m, config.n, substream(seed, TAG_SENSING))?;
            let y = add_noise(&g.apply(&x)?, config.sigma.unwrap_or(0.0), substream(seed, TAG_NOISE))?;
            let res = decode_arma_iterative(&y, &g, ar.order(), q, &schedule, &config.solver)?;
            let b_final = res.b_hat.unwrap_or_default();
            Ok(TrajectoryRun {
                run: r,
                seed,
                points: res.trajectory,
                b_error: l2(&diff(&b_final, &config.ma)),
                b_final,
                error: None,
            })
        })();
        outcome.unwrap_or_else(|e| TrajectoryRun {
            run: r,
            seed,
            points: Vec::new(),
            b_final: Vec::new(),
            b_error: f64::NAN,
            error: Some(e.to_string()),
        })
    });
    Ok(TrajectoryRecord {
        b_true: config.ma.clone(),
        stage_starts,
        stage_epsilons,
        runs,
    })
}

/// One instance: spikes through the AR model, sensed, noise added with
/// standard deviation `sigma`, decoded through the residual ball.
pub fn run_reconstruction_demo(config: &ExperimentConfig) -> Result<DemoRecord> {
    let model = config.model()?;
    let kind = config.ensembles[0];
    let seed = split_seed(config.seed, 0, 0);
    let separation = match config.min_sep {
        Some(s) => s,
        None => default_separation(&model, config.n, config.k, config.beta_min, config.beta_max)?,
    };
    let u = spikes_for(config, config.k, separation, config.sign_modes[0], seed)?;
    let x = ar_forward(&model, u.values());
    let g = build_sensing(kind, config.m, config.n, substream(seed, TAG_SENSING))?;
    let sigma = config.sigma.unwrap_or(0.0);
    let y = add_noise(&g.apply(&x)?, sigma, substream(seed, TAG_NOISE))?;
    let p = model.order();
    let (res, epsilon) = if sigma > 0.0 {
        let eps = config.epsilon.unwrap_or_else(|| default_epsilon(sigma, config.m, model.coeffs()));
        (decode_ar_noisy(&y, &g, p, eps, &config.solver)?, eps)
    } else {
        (decode_ar_compressed(&y, &g, p, DecodeMode::Joint, &config.solver)?, 0.0)
    };
    let mut order: Vec<usize> = (0..config.n).collect();
    order.sort_by(|&i, &j| res.u_hat[j].abs().total_cmp(&res.u_hat[i].abs()).then(i.cmp(&j)));
    let mut top: Vec<usize> = order[..u.k()].to_vec();
    top.sort_unstable();
    let amplitude_error = u.support().iter().map(|&i| (res.u_hat[i] - u.values()[i]).abs()).fold(0.0, f64::max);
    Ok(DemoRecord {
        seed,
        sigma,
        epsilon,
        a_star: model.coeffs().to_vec(),
        support_recovered: top == u.support(),
        amplitude_error,
        x_error: max_abs_diff(&res.x_hat, &x),
        a_hat: res.a_hat,
        u_hat: res.u_hat,
        u_star: u.into_values(),
        x,
        x_hat: res.x_hat,
    })
}
