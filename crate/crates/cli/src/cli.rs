use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "arsense", version, about = "Sparse spike recovery through unknown AR filters")]
pub struct Cli {
    /// Print error sources and extra diagnostics.
    #[arg(short, long, global = true)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a spike train, filter it and optionally sense it.
    Synth(SynthArgs),
    /// Measure a signal with a random sensing matrix.
    Sense(SenseArgs),
    /// Recover (u, a) from measurements.
    Decode(DecodeArgs),
    /// Certificates and assumption checks.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Run a shipped experiment profile or a custom config.
    Experiment(ExperimentArgs),
    /// Rerun the command recorded in a manifest and compare output hashes.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    /// Spikes satisfy |i - j| > min_sep.
    #[arg(long, default_value_t = 0)]
    pub min_sep: usize,
    /// AR coefficients a of x(t) + sum a_i x(t-i) = u(t), comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "poles")]
    pub ar: Vec<f64>,
    /// Real poles, an alternative to --ar.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub poles: Vec<f64>,
    /// Moving-average coefficients b_1..b_q.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub ma: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub beta_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta_max: f64,
    #[arg(long, default_value = "bernoulli")]
    pub signs: String,
    /// Also sense the signal with this many measurements.
    #[arg(long)]
    pub m: Option<usize>,
    /// Sensing kind, e.g. toeplitz-gaussian.
    #[arg(long, default_value = "toeplitz-gaussian")]
    pub kind: String,
    /// Noise standard deviation added to the measurements.
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "out/synth")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SenseArgs {
    /// Signal to measure.
    #[arg(long)]
    pub x: PathBuf,
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value = "toeplitz-gaussian")]
    pub kind: String,
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "out/sense")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Joint,
    Projected,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// Measurements.
    #[arg(long)]
    pub y: PathBuf,
    /// Sensing matrix. Without it the measurements are taken as direct
    /// noisy samples and the LASSO (blind) program is solved.
    #[arg(long = "G", alias = "g")]
    pub g: Option<PathBuf>,
    /// AR order.
    #[arg(long)]
    pub p: usize,
    #[arg(long, value_enum, default_value = "joint")]
    pub mode: ModeArg,
    /// Residual ball radius for noisy compressed measurements.
    #[arg(long, conflicts_with = "lambda")]
    pub epsilon: Option<f64>,
    /// LASSO weight for blind decoding.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Instance directory with u.csv and model.json to score against.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long, default_value = "out/decode")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// Dual optimality certificate for the true support of an instance.
    Doc(InstanceArgs),
    /// Recovery-guarantee assumptions for an instance.
    Thm1(Thm1Args),
    /// Blind-deconvolution conditions for an instance.
    Thm2(Thm2Args),
    /// Restricted isometry constant of a sensing matrix.
    Rip(RipArgs),
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    /// Directory written by `synth --m`.
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, default_value = "out/verify")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct Thm1Args {
    #[arg(long)]
    pub instance: PathBuf,
    /// Sparsity level S of the restricted isometry assumption.
    #[arg(long)]
    pub s: usize,
    #[arg(long, default_value = "out/verify")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct Thm2Args {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub sigma: f64,
    /// Defaults to 6 sigma p a_max sqrt(ln n).
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value = "out/verify")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RipMethodArg {
    Auto,
    Exhaustive,
    Sampled,
}

#[derive(Debug, Args)]
pub struct RipArgs {
    #[arg(long = "G", alias = "g")]
    pub g: PathBuf,
    #[arg(long)]
    pub s: usize,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, value_enum, default_value = "auto")]
    pub method: RipMethodArg,
    /// Skip the 1/sqrt(rows) column scaling.
    #[arg(long)]
    pub raw: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "out/verify")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Svg,
    Both,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// fig2 ... fig7, or custom with --config.
    pub profile: String,
    /// TOML experiment config; required for custom, overrides the preset otherwise.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Base seed, overriding the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Trials per sweep point, overriding the config.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Record runtimes (outputs are then no longer byte-reproducible).
    #[arg(long)]
    pub timings: bool,
    /// Parent directory; results go to <out>/<name>/.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    pub format: FormatArg,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Where to write the replayed outputs.
    #[arg(long)]
    pub out: PathBuf,
}
