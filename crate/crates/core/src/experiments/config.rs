use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::decoder::EpsilonSchedule;
use crate::error::{Error, Result};
use crate::sensing::{Distribution, SensingKind, Structure};
use crate::signal::{ArModel, SignMode};
use crate::solvers::SolverOptions;

pub const PROFILE_NAMES: [&str; 6] = ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7"];

const TOEPLITZ_GAUSSIAN: SensingKind = SensingKind::new(Structure::Toeplitz, Distribution::Gaussian);
const TOEPLITZ_BERNOULLI: SensingKind = SensingKind::new(Structure::Toeplitz, Distribution::Bernoulli);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Success rate against the number of spikes `k`.
    Sparsity,
    /// Success rate against the AR order `p`, with a fresh random model per trial.
    Order,
    /// Sparsity sweep on the unit-root model `x(t) − x(t−1) = u(t)`.
    TvStress,
    /// Sign-pattern recovery by blind deconvolution, one curve per sign mode.
    Sign,
    /// Per-round `b̂` of the iterative ARMA decoder.
    ArmaTrajectory,
    /// One noisy instance end to end.
    Reconstruction,
}

impl ExperimentKind {
    /// Name of the swept quantity, when the experiment is a sweep.
    pub fn sweep_name(self) -> Option<&'static str> {
        match self {
            ExperimentKind::Sparsity | ExperimentKind::TvStress | ExperimentKind::Sign => Some("k"),
            ExperimentKind::Order => Some("p"),
            ExperimentKind::ArmaTrajectory | ExperimentKind::Reconstruction => None,
        }
    }
}

fn one() -> usize {
    1
}

fn unit() -> f64 {
    1.0
}

fn default_ensembles() -> Vec<SensingKind> {
    vec![TOEPLITZ_GAUSSIAN]
}

fn default_sign_modes() -> Vec<SignMode> {
    vec![SignMode::Bernoulli]
}

fn default_pole_range() -> [f64; 2] {
    [0.2, 0.9]
}

/// A Monte Carlo experiment, read from TOML.
///
/// ```toml
/// name = "fig5"
/// kind = "sparsity"
/// seed = 5
/// trials = 50
/// m = 50
/// n = 200
/// poles = [0.9, 0.5]
/// ensembles = ["toeplitz-gaussian", "toeplitz-bernoulli"]
/// sweep = [1, 2, 3]
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub kind: ExperimentKind,
    pub seed: u64,
    /// Trials per sweep point; runs for the trajectory experiment.
    #[serde(default = "one")]
    pub trials: usize,
    /// Measurements. Ignored by the blind sign experiment.
    #[serde(default)]
    pub m: usize,
    pub n: usize,
    /// AR coefficients `a` of `x(t) + Σ a_i x(t−i) = u(t)`.
    #[serde(default)]
    pub ar: Vec<f64>,
    /// Real poles, an alternative to `ar`.
    #[serde(default)]
    pub poles: Vec<f64>,
    /// Moving-average coefficients `b_1..b_q`.
    #[serde(default)]
    pub ma: Vec<f64>,
    #[serde(default = "default_ensembles")]
    pub ensembles: Vec<SensingKind>,
    /// Swept values of `k` or `p`.
    #[serde(default)]
    pub sweep: Vec<usize>,
    /// Spike count when it is not swept.
    #[serde(default)]
    pub k: usize,
    /// Spikes satisfy `|i − j| > min_sep`. Unset: the separation required for guaranteed recovery
    /// when it fits, otherwise the largest feasible one.
    #[serde(default)]
    pub min_sep: Option<usize>,
    #[serde(default = "unit")]
    pub beta_min: f64,
    #[serde(default = "unit")]
    pub beta_max: f64,
    #[serde(default = "default_sign_modes")]
    pub sign_modes: Vec<SignMode>,
    /// Noise standard deviation on the measurements.
    #[serde(default)]
    pub sigma: Option<f64>,
    /// Per-instance noise level `10·log10(‖x‖²/(nσ²))`; overrides `sigma`.
    #[serde(default)]
    pub snr_db: Option<f64>,
    /// LASSO weight. Unset: `6σ·p·a_max·√ln n`.
    #[serde(default)]
    pub lambda: Option<f64>,
    /// Residual ball radius for noisy compressed decoding.
    /// Unset: `σ·√((m−p)(1 + ‖a‖₂²))`.
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// `(ε, rounds)` stages of the ARMA decoder.
    #[serde(default)]
    pub epsilon_schedule: Option<Vec<(f64, usize)>>,
    /// Pole modulus range of the random models in the order sweep.
    #[serde(default = "default_pole_range")]
    pub pole_range: [f64; 2],
    /// Record wall-clock runtimes. Off by default so that outputs are
    /// byte-for-byte reproducible.
    #[serde(default)]
    pub timings: bool,
    #[serde(default)]
    pub solver: SolverOptions,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// A shipped preset by name (`fig2` … `fig7`).
    pub fn profile(name: &str) -> Result<Self> {
        let base = ExperimentConfig {
            name: name.to_string(),
            kind: ExperimentKind::Sparsity,
            seed: 0,
            trials: 50,
            m: 50,
            n: 200,
            ar: Vec::new(),
            poles: Vec::new(),
            ma: Vec::new(),
            ensembles: vec![TOEPLITZ_GAUSSIAN, TOEPLITZ_BERNOULLI],
            sweep: (1..=20).collect(),
            k: 0,
            min_sep: None,
            beta_min: 1.0,
            beta_max: 1.0,
            sign_modes: default_sign_modes(),
            sigma: None,
            snr_db: None,
            lambda: None,
            epsilon: None,
            epsilon_schedule: None,
            pole_range: default_pole_range(),
            timings: false,
            solver: SolverOptions::default(),
        };
        let cfg = match name {
            "fig2" => ExperimentConfig {
                kind: ExperimentKind::ArmaTrajectory,
                seed: 2,
                trials: 10,
                m: 100,
                n: 200,
                ar: vec![-1.9, 1.06, -0.144],
                ma: vec![0.7, 1.0],
                ensembles: vec![TOEPLITZ_GAUSSIAN],
                sweep: Vec::new(),
                k: 3,
                epsilon_schedule: Some(vec![(3.0, 50), (0.3, 10)]),
                ..base
            },
            "fig3" => ExperimentConfig {
                kind: ExperimentKind::Sign,
                seed: 3,
                trials: 40,
                m: 0,
                n: 500,
                ar: vec![-1.4, 0.45],
                ensembles: Vec::new(),
                sweep: vec![1, 2, 4, 6, 8, 10, 12, 15, 20, 25, 30],
                sign_modes: vec![SignMode::Bernoulli, SignMode::AllPositive],
                snr_db: Some(28.0),
                ..base
            },
            "fig4" => ExperimentConfig {
                kind: ExperimentKind::Reconstruction,
                seed: 1,
                trials: 1,
                m: 80,
                n: 200,
                poles: vec![0.9, 0.5, 0.2],
                ensembles: vec![TOEPLITZ_GAUSSIAN],
                sweep: Vec::new(),
                k: 8,
                beta_min: 1.0,
                beta_max: 2.0,
                min_sep: Some(20),
                sigma: Some(0.1f64.sqrt()),
                ..base
            },
            "fig5" => ExperimentConfig {
                seed: 5,
                poles: vec![0.9, 0.5],
                ..base
            },
            "fig6" => ExperimentConfig {
                kind: ExperimentKind::TvStress,
                seed: 6,
                ar: vec![-1.0],
                ..base
            },
            "fig7" => ExperimentConfig {
                kind: ExperimentKind::Order,
                seed: 7,
                m: 80,
                sweep: (1..=15).collect(),
                k: 10,
                ..base
            },
            other => {
                return Err(Error::Config(format!(
                    "unknown profile {other:?} (expected one of {})",
                    PROFILE_NAMES.join(", ")
                )))
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The fixed AR model, from `ar` or `poles`.
    pub fn model(&self) -> Result<ArModel> {
        match (self.ar.is_empty(), self.poles.is_empty()) {
            (_, true) => Ok(ArModel::new(self.ar.clone())),
            (true, false) => Ok(ArModel::from_real_poles(&self.poles)),
            (false, false) => Err(Error::Config("give either `ar` or `poles`, not both".into())),
        }
    }

    pub fn schedule(&self) -> Result<EpsilonSchedule> {
        match &self.epsilon_schedule {
            Some(stages) => EpsilonSchedule::new(stages.clone()),
            None => Ok(EpsilonSchedule::default()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(format!("{}: {msg}", self.name)));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if !(self.beta_min > 0.0 && self.beta_min <= self.beta_max && self.beta_max.is_finite()) {
            return bad(format!("need 0 < beta_min <= beta_max, got [{}, {}]", self.beta_min, self.beta_max));
        }
        if let Some(s) = self.sigma {
            if !(s >= 0.0 && s.is_finite()) {
                return bad(format!("sigma must be >= 0, got {s}"));
            }
        }
        if let Some(l) = self.lambda {
            if !(l > 0.0 && l.is_finite()) {
                return bad(format!("lambda must be > 0, got {l}"));
            }
        }
        let [lo, hi] = self.pole_range;
        if !(0.0 <= lo && lo <= hi && hi < 1.0) {
            return bad(format!("pole_range must satisfy 0 <= lo <= hi < 1, got [{lo}, {hi}]"));
        }
        self.schedule().map_err(|e| Error::Config(format!("{}: {e}", self.name)))?;
        let model = self.model()?;
        let needs_sensing = !matches!(self.kind, ExperimentKind::Sign);
        if needs_sensing {
            if self.ensembles.is_empty() {
                return bad("at least one sensing ensemble is required".into());
            }
            if self.m == 0 || self.m > self.n {
                return bad(format!("need 0 < m <= n, got m={} n={}", self.m, self.n));
            }
        }
        if self.kind.sweep_name().is_some() && self.sweep.is_empty() {
            return bad("sweep values are required".into());
        }
        if matches!(self.kind, ExperimentKind::Sign) && self.sign_modes.is_empty() {
            return bad("at least one sign mode is required".into());
        }
        if !matches!(self.kind, ExperimentKind::TvStress | ExperimentKind::Order) && !model.is_stable() {
            return bad(format!(
                "model is not stable (largest pole modulus {:.4}); only tv_stress may use an unstable model",
                model.max_pole_modulus()
            ));
        }
        Ok(())
    }
}
