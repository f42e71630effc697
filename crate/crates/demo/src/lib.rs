//! Browser demo: three operations exported through wasm-bindgen. Each takes
//! a JSON parameter object and returns a JSON result.

use arsense::decoder::{decode_ar_compressed, decode_ar_noisy, decode_noncausal, DecodeMode, GroundTruth, Success};
use arsense::experiments::default_epsilon;
use arsense::linalg::max_abs_diff;
use arsense::rng::substream;
use arsense::sensing::{add_noise, build_sensing, SensingKind};
use arsense::signal::{
    ar_forward, fit_decay_envelope, impulse_response, make_spike_train, noncausal_forward, ArModel, Boundary, NoncausalArModel,
    SignMode, SpikeParams, SpikeTrain, DEFAULT_ENVELOPE_SAFETY,
};
use arsense::solvers::SolverOptions;
use arsense::verify::{required_separation, ENVELOPE_HORIZON};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

/// Keeps a single call responsive in the browser.
pub const MAX_LENGTH: usize = 1000;

#[derive(Debug, thiserror::Error)]
pub enum DemoError {
    #[error("bad parameters: {0}")]
    Params(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] arsense::Error),
    #[error("signal length {0} exceeds the demo limit of {MAX_LENGTH}")]
    TooLong(usize),
}

pub type Result<T> = std::result::Result<T, DemoError>;

fn default_seed() -> u64 {
    1
}

fn default_amplitude() -> f64 {
    1.0
}

#[derive(Clone, Debug, Deserialize)]
pub struct SpikeSpec {
    pub n: usize,
    pub k: usize,
    #[serde(default)]
    pub min_sep: usize,
    #[serde(default = "default_amplitude")]
    pub beta_min: f64,
    #[serde(default = "default_amplitude")]
    pub beta_max: f64,
    #[serde(default)]
    pub all_positive: bool,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl SpikeSpec {
    fn draw(&self) -> Result<SpikeTrain> {
        if self.n > MAX_LENGTH {
            return Err(DemoError::TooLong(self.n));
        }
        let params = SpikeParams {
            n: self.n,
            k: self.k,
            min_sep: self.min_sep,
            beta_min: self.beta_min,
            beta_max: self.beta_max,
            sign_mode: if self.all_positive { SignMode::AllPositive } else { SignMode::Bernoulli },
        };
        Ok(make_spike_train(&params, substream(self.seed, 1))?)
    }
}

#[derive(Clone, Debug, Deserialize)]
pub struct SimulateParams {
    #[serde(flatten)]
    pub spikes: SpikeSpec,
    /// Real poles; ignored when `ar` is given.
    #[serde(default)]
    pub poles: Vec<f64>,
    #[serde(default)]
    pub ar: Vec<f64>,
}

impl SimulateParams {
    fn model(&self) -> ArModel {
        if self.ar.is_empty() {
            ArModel::from_real_poles(&self.poles)
        } else {
            ArModel::new(self.ar.clone())
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Simulation {
    pub a: Vec<f64>,
    pub u: Vec<f64>,
    pub x: Vec<f64>,
    pub impulse: Vec<f64>,
    pub stable: bool,
    pub max_pole_modulus: f64,
    /// Spike gap needed for guaranteed recovery; absent for unstable models.
    pub required_separation: Option<f64>,
}

pub fn simulate_spec(params: &SimulateParams) -> Result<Simulation> {
    let model = params.model();
    let u = params.spikes.draw()?;
    let x = ar_forward(&model, u.values());
    let required = fit_decay_envelope(&model, ENVELOPE_HORIZON, DEFAULT_ENVELOPE_SAFETY)
        .ok()
        .map(|env| required_separation(model.order(), &env, params.spikes.beta_min, params.spikes.beta_max));
    Ok(Simulation {
        a: model.coeffs().to_vec(),
        impulse: impulse_response(&model, params.spikes.n.min(100)),
        stable: model.is_stable(),
        max_pole_modulus: model.max_pole_modulus(),
        required_separation: required,
        u: u.into_values(),
        x,
    })
}

#[derive(Clone, Debug, Deserialize)]
pub struct ReconstructParams {
    #[serde(flatten)]
    pub model: SimulateParams,
    pub m: usize,
    #[serde(default)]
    pub sigma: f64,
    #[serde(default)]
    pub ensemble: Option<SensingKind>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Reconstruction {
    pub a_star: Vec<f64>,
    pub a_hat: Vec<f64>,
    pub u: Vec<f64>,
    pub u_hat: Vec<f64>,
    pub x: Vec<f64>,
    pub x_hat: Vec<f64>,
    pub y: Vec<f64>,
    pub success: Success,
    pub x_error: f64,
}

pub fn reconstruct_spec(params: &ReconstructParams) -> Result<Reconstruction> {
    let model = params.model.model();
    let spikes = &params.model.spikes;
    let u = spikes.draw()?;
    let x = ar_forward(&model, u.values());
    let kind = params.ensemble.unwrap_or_else(|| "toeplitz-gaussian".parse().expect("valid label"));
    let g = build_sensing(kind, params.m, spikes.n, substream(spikes.seed, 2))?;
    let y = add_noise(&g.apply(&x)?, params.sigma, substream(spikes.seed, 3))?;
    let p = model.order();
    let opts = SolverOptions::default();
    let mut decoded = if params.sigma > 0.0 {
        decode_ar_noisy(&y, &g, p, default_epsilon(params.sigma, params.m, model.coeffs()), &opts)?
    } else {
        decode_ar_compressed(&y, &g, p, DecodeMode::Joint, &opts)?
    };
    let truth = GroundTruth { u: u.values().to_vec(), a: model.coeffs().to_vec() };
    let success = decoded.score_against(&truth);
    Ok(Reconstruction {
        a_star: truth.a,
        a_hat: decoded.a_hat,
        x_error: max_abs_diff(&decoded.x_hat, &x),
        u: truth.u,
        u_hat: decoded.u_hat,
        x,
        x_hat: decoded.x_hat,
        y,
        success,
    })
}

#[derive(Clone, Debug, Deserialize)]
pub struct NoncausalParams {
    #[serde(flatten)]
    pub spikes: SpikeSpec,
    pub m: usize,
    pub forward: Vec<f64>,
    pub backward: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NoncausalReconstruction {
    /// `(a_1..a_p, a_{-1}..a_{-p})`
    pub a_hat: Vec<f64>,
    pub u: Vec<f64>,
    pub u_hat: Vec<f64>,
    pub x: Vec<f64>,
    pub x_hat: Vec<f64>,
    pub x_error: f64,
}

/// Circulant sensing of a two-sided AR process, decoded exactly.
pub fn noncausal_spec(params: &NoncausalParams) -> Result<NoncausalReconstruction> {
    let model = NoncausalArModel::new(params.forward.clone(), params.backward.clone(), Boundary::Circulant)?;
    let u = params.spikes.draw()?;
    let x = noncausal_forward(&model, u.values())?;
    let kind: SensingKind = "circulant-gaussian".parse().expect("valid label");
    let g = build_sensing(kind, params.m, params.spikes.n, substream(params.spikes.seed, 2))?;
    let y = g.apply(&x)?;
    let decoded = decode_noncausal(&y, &g, params.forward.len(), Boundary::Circulant, None, None, &SolverOptions::default())?;
    Ok(NoncausalReconstruction {
        a_hat: decoded.a_hat,
        x_error: max_abs_diff(&decoded.x_hat, &x),
        u: u.into_values(),
        u_hat: decoded.u_hat,
        x,
        x_hat: decoded.x_hat,
    })
}

fn run<P, R>(json: &str, op: impl Fn(&P) -> Result<R>) -> Result<String>
where
    P: for<'de> Deserialize<'de>,
    R: Serialize,
{
    let params: P = serde_json::from_str(json)?;
    Ok(serde_json::to_string(&op(&params)?)?)
}

pub fn simulate_json(json: &str) -> Result<String> {
    run(json, simulate_spec)
}

pub fn reconstruct_json(json: &str) -> Result<String> {
    run(json, reconstruct_spec)
}

pub fn noncausal_json(json: &str) -> Result<String> {
    run(json, noncausal_spec)
}

fn to_js(r: Result<String>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn simulate(params: &str) -> std::result::Result<String, JsError> {
    to_js(simulate_json(params))
}

#[wasm_bindgen]
pub fn reconstruct(params: &str) -> std::result::Result<String, JsError> {
    to_js(reconstruct_json(params))
}

#[wasm_bindgen]
pub fn noncausal(params: &str) -> std::result::Result<String, JsError> {
    to_js(noncausal_json(params))
}
