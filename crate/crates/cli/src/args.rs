//! Command-line and config-file parameters.
//!
//! Every subcommand parameter is optional on the command line so that values
//! from the `--config` file can fill the gaps; flags win over the file.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use serde_json::Value;

use degbias::estimation::DensityMode;
use degbias::simulation::PhaseKind;
use degbias::testing::Alternative;

#[derive(Parser, Debug)]
#[command(name = "degbias", version, about = "Detect and correct minority bias in degree rankings")]
pub struct Cli {
    /// TOML file with top-level `seed`, `format`, `output` and one table per
    /// subcommand (e.g. `[test]`), keyed like the long flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file; standard output when absent.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample a construct network and its observed replicates.
    Generate(GenerateArgs),
    /// Limit minority-share profile, optionally next to a network's profile.
    Profile(ProfileArgs),
    /// Moment estimates of error rates and construct parameters.
    Estimate(NetworkArgs),
    /// Bias test on two undirected replicates or one directed network.
    Test(NetworkArgs),
    /// Re-rank nodes toward a target minority profile.
    Correct(CorrectArgs),
    /// Run a Monte Carlo scenario or a large-signal regime check.
    Simulate(SimulateArgs),
    /// Estimates, one-sided test and corrected in-degree ranking for
    /// directed reports (always JSON).
    AnalyzeDirected(AnalyzeArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Generate(_) => "generate",
            Command::Profile(_) => "profile",
            Command::Estimate(_) => "estimate",
            Command::Test(_) => "test",
            Command::Correct(_) => "correct",
            Command::Simulate(_) => "simulate",
            Command::AnalyzeDirected(_) => "analyze-directed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Sbm,
    Graphon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Block,
    Linear,
    Bilinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    Averaged,
    FirstReplicate,
}

impl From<ModeArg> for DensityMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Averaged => DensityMode::Averaged,
            ModeArg::FirstReplicate => DensityMode::FirstReplicate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlternativeArg {
    /// Minority-to-majority reports are lost less often than the reverse.
    Less,
    TwoSided,
}

impl From<AlternativeArg> for Alternative {
    fn from(a: AlternativeArg) -> Self {
        match a {
            AlternativeArg::Less => Alternative::Beta12Less,
            AlternativeArg::TwoSided => Alternative::TwoSided,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodArg {
    Plugin,
    Proportional,
    Uncorrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseArg {
    Vanishing,
    MajorityDominant,
    MinorityDominant,
}

impl From<PhaseArg> for PhaseKind {
    fn from(p: PhaseArg) -> Self {
        match p {
            PhaseArg::Vanishing => PhaseKind::Vanishing,
            PhaseArg::MajorityDominant => PhaseKind::MajorityDominant,
            PhaseArg::MinorityDominant => PhaseKind::MinorityDominant,
        }
    }
}

/// Construct-model parameters shared by `generate` and `profile`.
#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    /// Graphon family when `--model graphon`.
    #[arg(long, value_enum)]
    pub family: Option<FamilyKind>,
    /// Coefficient of the linear or bilinear graphon.
    #[arg(long, allow_negative_numbers = true)]
    pub coefficient: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub mu1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub mu2: Option<f64>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerateArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Between-group deletion rate.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Within-group rates are `beta - gamma_g / sqrt(n)`.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma2: Option<f64>,
    /// Number of undirected observed replicates (0, 1 or 2).
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Exactly `floor(kappa n)` minority nodes instead of i.i.d. labels.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub fixed_count: Option<bool>,
    /// Emit one directed report network instead of undirected replicates.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub directed: Option<bool>,
    #[arg(long)]
    pub beta11: Option<f64>,
    #[arg(long)]
    pub beta12: Option<f64>,
    #[arg(long)]
    pub beta21: Option<f64>,
    #[arg(long)]
    pub beta22: Option<f64>,
    /// Directory receiving the edge-list and label files.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ProfileArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Evaluation points in (0,1]; defaults to 0.01, 0.02, ..., 1.
    #[arg(long, value_delimiter = ',')]
    pub z: Option<Vec<f64>>,
    /// Network whose empirical profile is reported next to the limit. Model
    /// parameters not given are fitted to it.
    #[arg(long)]
    pub edges: Option<PathBuf>,
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct NetworkArgs {
    /// First observed replicate, or the directed report network.
    #[arg(long)]
    pub edges: Option<PathBuf>,
    /// Second observed replicate (undirected only).
    #[arg(long)]
    pub edges_star: Option<PathBuf>,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub directed: Option<bool>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Error-rate bound of the null hypothesis (undirected test).
    #[arg(long)]
    pub beta_bar: Option<f64>,
    #[arg(long, value_enum)]
    pub alternative: Option<AlternativeArg>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct CorrectArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub network: NetworkArgs,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Number of ranks reported; all when absent.
    #[arg(long)]
    pub top: Option<usize>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulateArgs {
    /// Built-in scenario name.
    #[arg(long)]
    pub preset: Option<String>,
    /// Scenario file (TOML or JSON).
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Large-signal regime check instead of a scenario.
    #[arg(long, value_enum)]
    pub phase: Option<PhaseArg>,
    /// Overrides the scenario's size grid (or the phase-check size).
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    #[arg(long)]
    pub reps: Option<usize>,
    /// Print the built-in scenario names and exit.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub list_presets: Option<bool>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub edges: Option<PathBuf>,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_enum)]
    pub alternative: Option<AlternativeArg>,
    /// Length of the reported top-K tables.
    #[arg(long)]
    pub top: Option<usize>,
}

/// Top-level settings from the config file.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    #[serde(flatten)]
    pub sections: serde_json::Map<String, Value>,
}

pub fn read_config(path: &std::path::Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let table: toml::Table = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    let json = serde_json::to_value(table)?;
    Ok(serde_json::from_value(json)?)
}

fn strip_nulls(v: Value) -> Value {
    match v {
        Value::Object(m) => Value::Object(m.into_iter().filter(|(_, x)| !x.is_null()).map(|(k, x)| (k, strip_nulls(x))).collect()),
        other => other,
    }
}

/// File section overlaid with the flags that were given. Unknown keys in
/// the section are rejected.
pub fn merge<T: Serialize + DeserializeOwned + Default>(flags: &T, section: Option<&Value>) -> Result<T> {
    let mut base = match section {
        Some(Value::Object(m)) => m.clone(),
        Some(_) => bail!("config section must be a table"),
        None => serde_json::Map::new(),
    };
    if let Value::Object(known) = serde_json::to_value(T::default())? {
        if let Some(bad) = base.keys().find(|k| !known.contains_key(*k)) {
            bail!("unknown config key '{bad}'");
        }
    }
    if let Value::Object(m) = strip_nulls(serde_json::to_value(flags)?) {
        base.extend(m);
    }
    serde_json::from_value(Value::Object(base)).context("invalid config section")
}
