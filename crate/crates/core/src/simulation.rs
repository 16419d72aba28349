//! Seeded Monte Carlo harness for detection power, ranking correction,
//! profile estimation error and large-signal regime checks.
//!
//! Replicate `r` of grid point `g` draws from its own ChaCha8 stream seeded by
//! SHA-256 over `("degbias-stream", master_seed, scenario, g, r)`. Replicates run
//! in parallel and are aggregated in replicate order, so results do not depend
//! on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::asymptotics::rho_star_sbm;
use crate::correction::{plugin_corrected_ranking, proportional_ranking, CLAMP_EPS};
use crate::error::{Error, Result};
use crate::estimation::{plugin_mle, DensityMode};
use crate::graph::{
    minority_counts, rank_positions, spearman, top_k_ranking, Group, LabeledNetwork,
};
use crate::models::{
    apply_errors_undirected, check_graphon_feasible, sample_graphon, sample_labels, sample_sbm,
    ErrorRatesUndirected, GraphonFamily, GraphonSpec, SbmParams,
};
use crate::testing::{bias_test, BiasTestConfig, TestOutcome};

/// Independent stream for replicate `replicate` of grid point `point`.
pub fn stream_rng(master_seed: u64, scenario: &str, point: u64, replicate: u64) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(b"degbias-stream");
    h.update(master_seed.to_le_bytes());
    h.update((scenario.len() as u64).to_le_bytes());
    h.update(scenario.as_bytes());
    h.update(point.to_le_bytes());
    h.update(replicate.to_le_bytes());
    let digest = h.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Detection,
    Correction,
    RhoEstimation,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelSpec {
    #[default]
    Sbm,
    /// Graphon construct; the base `kappa` and `q` apply, signals are ignored.
    Graphon { family: GraphonFamily },
}

/// Parameter values shared by every point of a scenario before sweeps and
/// couplings are applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseParams {
    pub kappa: f64,
    pub q: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub beta: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Beta,
    /// Both within-group signals.
    Mu,
    /// Both within-group error offsets.
    Gamma,
    Q,
    Kappa,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Beta => "beta",
            SweepParameter::Mu => "mu",
            SweepParameter::Gamma => "gamma",
            SweepParameter::Q => "q",
            SweepParameter::Kappa => "kappa",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

/// Parameters derived from others at each point, applied in order after the
/// sweep value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Coupling {
    /// `mu1 = mu2 = numerator / (1 - beta)`.
    MuFromBeta { numerator: f64 },
    /// `gamma1 = gamma2 = sqrt(n) / divisor`.
    GammaFromN { divisor: f64 },
    /// `beta = within_rate + gamma1 / sqrt(n)`, fixing the within-group rates.
    BetaFromGamma { within_rate: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub experiment: Experiment,
    #[serde(default)]
    pub model: ModelSpec,
    pub base: BaseParams,
    pub n_grid: Vec<usize>,
    pub replicate_count: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_beta_bar")]
    pub beta_bar: f64,
    #[serde(default)]
    pub mode: DensityMode,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub couplings: Vec<Coupling>,
    #[serde(default)]
    pub fixed_minority_count: bool,
    /// Skip (and report) grid points whose probabilities leave `[0,1]`
    /// instead of failing the run.
    #[serde(default)]
    pub skip_infeasible: bool,
    /// Fractions `z` evaluated at rank `K = max(1, floor(nz))`.
    #[serde(default)]
    pub z_grid: Vec<f64>,
    /// Construct draws used for the Monte Carlo ground-truth profile.
    #[serde(default = "default_truth_draws")]
    pub truth_draws: usize,
}

fn default_alpha() -> f64 {
    0.1
}

fn default_beta_bar() -> f64 {
    0.1
}

fn default_truth_draws() -> usize {
    2000
}

/// Fully resolved parameters at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointParams {
    pub n: usize,
    pub kappa: f64,
    pub q: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub beta: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl PointParams {
    pub fn sbm(&self) -> Result<SbmParams> {
        SbmParams::new(self.kappa, self.q, self.mu1, self.mu2)
    }

    pub fn error_rates(&self) -> ErrorRatesUndirected {
        ErrorRatesUndirected::new(self.beta, self.gamma1, self.gamma2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub label: String,
    pub params: PointParams,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(Error::InfeasibleParameter(format!("{}: empty n grid", self.name)));
        }
        if self.replicate_count == 0 {
            return Err(Error::InfeasibleParameter(format!("{}: zero replicates", self.name)));
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(Error::InfeasibleParameter(format!("{}: empty sweep", self.name)));
            }
        }
        if self.experiment == Experiment::RhoEstimation {
            if self.z_grid.is_empty() || self.z_grid.iter().any(|&z| !(z > 0.0 && z <= 1.0)) {
                return Err(Error::InfeasibleParameter(format!("{}: z grid must be nonempty in (0,1]", self.name)));
            }
            if self.truth_draws == 0 {
                return Err(Error::InfeasibleParameter(format!("{}: zero ground-truth draws", self.name)));
            }
        }
        Ok(())
    }

    /// Grid points in order: `n` outer, sweep value inner.
    pub fn points(&self) -> Vec<GridPoint> {
        let sweep_values: Vec<Option<f64>> = match &self.sweep {
            Some(s) => s.values.iter().map(|&v| Some(v)).collect(),
            None => vec![None],
        };
        let mut out = Vec::new();
        for &n in &self.n_grid {
            for &value in &sweep_values {
                let b = self.base;
                let mut p = PointParams {
                    n,
                    kappa: b.kappa,
                    q: b.q,
                    mu1: b.mu1,
                    mu2: b.mu2,
                    beta: b.beta,
                    gamma1: b.gamma1,
                    gamma2: b.gamma2,
                };
                let mut label = format!("n={n}");
                if let (Some(v), Some(s)) = (value, &self.sweep) {
                    match s.parameter {
                        SweepParameter::Beta => p.beta = v,
                        SweepParameter::Mu => (p.mu1, p.mu2) = (v, v),
                        SweepParameter::Gamma => (p.gamma1, p.gamma2) = (v, v),
                        SweepParameter::Q => p.q = v,
                        SweepParameter::Kappa => p.kappa = v,
                    }
                    label.push_str(&format!(";{}={v}", s.parameter.name()));
                }
                let root_n = (n as f64).sqrt();
                for c in &self.couplings {
                    match *c {
                        Coupling::MuFromBeta { numerator } => {
                            let mu = numerator / (1.0 - p.beta);
                            (p.mu1, p.mu2) = (mu, mu);
                        }
                        Coupling::GammaFromN { divisor } => {
                            let g = root_n / divisor;
                            (p.gamma1, p.gamma2) = (g, g);
                        }
                        Coupling::BetaFromGamma { within_rate } => p.beta = within_rate + p.gamma1 / root_n,
                    }
                }
                out.push(GridPoint { label, params: p });
            }
        }
        out
    }

    fn check_point(&self, point: &GridPoint) -> Result<()> {
        let p = &point.params;
        let wrap = |e: Error| Error::InfeasibleParameter(format!("{} at {}: {e}", self.name, point.label));
        match self.model {
            ModelSpec::Sbm => {
                p.sbm().and_then(|s| s.block_probs(p.n)).map_err(wrap)?;
            }
            ModelSpec::Graphon { family } => {
                GraphonSpec::new(family, p.q, p.kappa).map_err(wrap)?;
                check_graphon_feasible(&family, p.q, p.n).map_err(wrap)?;
            }
        }
        if self.experiment != Experiment::RhoEstimation {
            p.error_rates().block_rates(p.n).map_err(wrap)?;
        }
        let n1 = (p.kappa * p.n as f64).floor() as usize;
        if self.fixed_minority_count && (n1 < 2 || p.n - n1 < 2) {
            return Err(wrap(Error::DegenerateBlock {
                group: if n1 < 2 { 1 } else { 2 },
                count: n1.min(p.n - n1),
                required: 2,
            }));
        }
        Ok(())
    }

    fn sample_construct<R: Rng + ?Sized>(&self, p: &PointParams, rng: &mut R) -> Result<LabeledNetwork> {
        let labels = sample_labels(p.n, p.kappa, self.fixed_minority_count, rng)?;
        match self.model {
            ModelSpec::Sbm => sample_sbm(p.n, &p.sbm()?, &labels, rng),
            ModelSpec::Graphon { family } => sample_graphon(p.n, &GraphonSpec::new(family, p.q, p.kappa)?, &labels, rng),
        }
    }

    fn test_config(&self) -> BiasTestConfig {
        BiasTestConfig {
            alpha: self.alpha,
            beta_bar: self.beta_bar,
            mode: self.mode,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub point: String,
    pub method: String,
    pub metric: String,
    pub mean: f64,
    /// Sample standard deviation over `sqrt(reps)`; absent for summaries
    /// that are not replicate means.
    pub se: Option<f64>,
    pub reps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedPoint {
    pub point: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub scenario: String,
    pub master_seed: u64,
    pub rows: Vec<ResultRow>,
    #[serde(default)]
    pub skipped: Vec<SkippedPoint>,
}

impl ExperimentResult {
    pub fn find(&self, point: &str, method: &str, metric: &str) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.point == point && r.method == method && r.metric == metric)
    }
}

/// Mean and standard error (sample standard deviation over `sqrt(len)`).
pub fn mean_se(values: &[f64]) -> (f64, Option<f64>) {
    let k = values.len();
    if k == 0 {
        return (f64::NAN, None);
    }
    let mean = values.iter().sum::<f64>() / k as f64;
    if k < 2 {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    (mean, Some((var / k as f64).sqrt()))
}

fn row(point: &str, method: &str, metric: &str, values: &[f64]) -> ResultRow {
    let (mean, se) = mean_se(values);
    ResultRow {
        point: point.to_string(),
        method: method.to_string(),
        metric: metric.to_string(),
        mean,
        se,
        reps: values.len(),
    }
}

fn summary_row(point: &str, method: &str, metric: &str, value: f64, reps: usize) -> ResultRow {
    ResultRow {
        point: point.to_string(),
        method: method.to_string(),
        metric: metric.to_string(),
        mean: value,
        se: None,
        reps,
    }
}

/// Runs every feasible point; `body` maps a point to its rows.
fn run_points<F>(spec: &ScenarioSpec, master_seed: u64, mut body: F) -> Result<ExperimentResult>
where
    F: FnMut(u64, &GridPoint) -> Result<Vec<ResultRow>>,
{
    spec.validate()?;
    let mut result = ExperimentResult {
        scenario: spec.name.clone(),
        master_seed,
        rows: Vec::new(),
        skipped: Vec::new(),
    };
    for (g, point) in spec.points().iter().enumerate() {
        if let Err(e) = spec.check_point(point) {
            if spec.skip_infeasible {
                log::warn!("skipping infeasible point {}: {e}", point.label);
                result.skipped.push(SkippedPoint {
                    point: point.label.clone(),
                    reason: e.to_string(),
                });
                continue;
            }
            return Err(e);
        }
        result.rows.extend(body(g as u64, point)?);
    }
    Ok(result)
}

fn replicates<T: Send, F>(spec: &ScenarioSpec, master_seed: u64, stream: &str, g: u64, count: usize, f: F) -> Result<Vec<T>>
where
    F: Fn(&mut ChaCha8Rng) -> Result<T> + Sync,
{
    let _ = spec;
    (0..count as u64)
        .into_par_iter()
        .map(|r| f(&mut stream_rng(master_seed, stream, g, r)))
        .collect()
}

/// Per point: rejection frequency of the bias test, plus the frequencies of
/// identical replicates and of degenerate samples (counted as non-rejections).
pub fn run_detection_power(spec: &ScenarioSpec, master_seed: u64) -> Result<ExperimentResult> {
    let config = spec.test_config();
    run_points(spec, master_seed, |g, point| {
        let p = point.params;
        let outcomes = replicates(spec, master_seed, &spec.name, g, spec.replicate_count, |rng| {
            let truth = spec.sample_construct(&p, rng)?;
            let reps = apply_errors_undirected(&truth, &p.error_rates(), 2, rng)?;
            match bias_test(&reps[0], &reps[1], &config) {
                Ok(r) => Ok((r.reject, r.outcome == TestOutcome::Inconclusive, r.y_equal)),
                Err(e) if e.is_degenerate_statistics() => Ok((false, true, false)),
                Err(e) => Err(e),
            }
        })?;
        let ind = |f: fn(&(bool, bool, bool)) -> bool| -> Vec<f64> {
            outcomes.iter().map(|o| f(o) as u8 as f64).collect()
        };
        Ok(vec![
            row(&point.label, "bias_test", "rejection_rate", &ind(|o| o.0)),
            row(&point.label, "bias_test", "degenerate_rate", &ind(|o| o.1)),
            row(&point.label, "bias_test", "identical_rate", &ind(|o| o.2)),
        ])
    })
}

pub const CORRECTION_METHODS: [&str; 3] = ["uncorrected", "proportional", "plugin"];

struct CorrectionReplicate {
    spearman: [f64; 3],
    /// Mean rank bias per method for (minority, majority).
    bias: [[f64; 2]; 3],
    node_bias: [Vec<(Group, f64)>; 3],
    plugin_failed: bool,
}

fn quartiles(mut v: Vec<f64>) -> [f64; 3] {
    v.sort_by(f64::total_cmp);
    let at = |p: f64| {
        let h = p * (v.len() - 1) as f64;
        let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
        v[lo] + (h - lo as f64) * (v[hi] - v[lo])
    };
    [at(0.25), at(0.5), at(0.75)]
}

/// Per point and method: Spearman correlation with the construct-degree
/// ranking, paired gains of the plug-in correction, and rank bias by group
/// (construct rank minus method rank; positive means ranked too high).
pub fn run_correction_experiment(spec: &ScenarioSpec, master_seed: u64) -> Result<ExperimentResult> {
    run_points(spec, master_seed, |g, point| {
        let p = point.params;
        let reps = replicates(spec, master_seed, &spec.name, g, spec.replicate_count, |rng| {
            let truth = spec.sample_construct(&p, rng)?;
            let obs = apply_errors_undirected(&truth, &p.error_rates(), 2, rng)?;
            let construct = top_k_ranking(&truth.degrees(), rng);
            let uncorrected = top_k_ranking(&obs[0].degrees(), rng);
            let proportional = proportional_ranking(&obs[0], rng)?.order;
            let (plugin, failed) = match plugin_corrected_ranking(&obs[0], &obs[1], spec.mode, rng) {
                Ok(c) => (c.order, false),
                Err(e) if e.is_degenerate_statistics() => (uncorrected.clone(), true),
                Err(e) => return Err(e),
            };
            let truth_pos = rank_positions(&construct);
            let labels = truth.labels();
            let mut out = CorrectionReplicate {
                spearman: [0.0; 3],
                bias: [[0.0; 2]; 3],
                node_bias: Default::default(),
                plugin_failed: failed,
            };
            for (m, order) in [uncorrected, proportional, plugin].iter().enumerate() {
                out.spearman[m] = spearman(&construct, order)?;
                let pos = rank_positions(order);
                let mut sums = [(0.0, 0usize); 2];
                for i in 0..p.n {
                    let b = truth_pos[i] as f64 - pos[i] as f64;
                    let k = usize::from(!labels[i].is_minority());
                    sums[k].0 += b;
                    sums[k].1 += 1;
                    out.node_bias[m].push((labels[i], b));
                }
                out.bias[m] = sums.map(|(s, c)| if c > 0 { s / c as f64 } else { 0.0 });
            }
            Ok(out)
        })?;
        let mut rows = Vec::new();
        let label = &point.label;
        for (m, method) in CORRECTION_METHODS.iter().enumerate() {
            let pick = |f: &dyn Fn(&CorrectionReplicate) -> f64| -> Vec<f64> { reps.iter().map(f).collect() };
            rows.push(row(label, method, "spearman", &pick(&|r| r.spearman[m])));
            for (k, group) in ["minority", "majority"].iter().enumerate() {
                rows.push(row(label, method, &format!("rank_bias_{group}"), &pick(&|r| r.bias[m][k])));
                let pooled: Vec<f64> = reps
                    .iter()
                    .flat_map(|r| r.node_bias[m].iter())
                    .filter(|(grp, _)| usize::from(!grp.is_minority()) == k)
                    .map(|&(_, b)| b)
                    .collect();
                if !pooled.is_empty() {
                    let q = quartiles(pooled);
                    for (name, v) in ["q1", "median", "q3"].iter().zip(q) {
                        rows.push(summary_row(label, method, &format!("rank_bias_{group}_{name}"), v, reps.len()));
                    }
                }
            }
        }
        for (m, other) in [(0, "uncorrected"), (1, "proportional")] {
            let gains: Vec<f64> = reps.iter().map(|r| r.spearman[2] - r.spearman[m]).collect();
            rows.push(row(label, "plugin", &format!("spearman_gain_vs_{other}"), &gains));
        }
        let failures: Vec<f64> = reps.iter().map(|r| r.plugin_failed as u8 as f64).collect();
        rows.push(row(label, "plugin", "failure_rate", &failures));
        Ok(rows)
    })
}

/// Rank evaluated for fraction `z` at size `n`.
pub fn rank_for_fraction(n: usize, z: f64) -> usize {
    ((n as f64 * z).floor() as usize).clamp(1, n)
}

fn profile_at(net: &LabeledNetwork, ks: &[usize], rng: &mut ChaCha8Rng) -> Vec<f64> {
    let order = top_k_ranking(&net.degrees(), rng);
    let counts = minority_counts(net.labels(), &order);
    ks.iter().map(|&k| counts[k - 1] as f64 / k as f64).collect()
}

/// Per point and `z`: RMSE against a Monte Carlo ground truth of the
/// empirical share `R_K` and of the limit profile evaluated at block-density
/// estimates, plus the paired difference of their squared errors.
pub fn run_rho_estimation(spec: &ScenarioSpec, master_seed: u64) -> Result<ExperimentResult> {
    let truth_stream = format!("{}/truth", spec.name);
    run_points(spec, master_seed, |g, point| {
        let p = point.params;
        let ks: Vec<usize> = spec.z_grid.iter().map(|&z| rank_for_fraction(p.n, z)).collect();
        let draws = replicates(spec, master_seed, &truth_stream, g, spec.truth_draws, |rng| {
            Ok(profile_at(&spec.sample_construct(&p, rng)?, &ks, rng))
        })?;
        let truth: Vec<f64> = (0..ks.len())
            .map(|j| draws.iter().map(|d| d[j]).sum::<f64>() / draws.len() as f64)
            .collect();
        let reps = replicates(spec, master_seed, &spec.name, g, spec.replicate_count, |rng| {
            let net = spec.sample_construct(&p, rng)?;
            let empirical = profile_at(&net, &ks, rng);
            let plugin = match plugin_mle(&net) {
                Ok(m) => {
                    let q = m.q.clamp(CLAMP_EPS, 1.0 - CLAMP_EPS);
                    let mu1 = (p.n as f64).sqrt() * (m.p11 - q);
                    let mu2 = (p.n as f64).sqrt() * (m.p22 - q);
                    ks.iter()
                        .map(|&k| rho_star_sbm(k as f64 / p.n as f64, m.kappa, q, mu1, mu2))
                        .collect::<Result<Vec<_>>>()?
                }
                Err(e) if e.is_degenerate_statistics() => vec![f64::NAN; ks.len()],
                Err(e) => return Err(e),
            };
            Ok((empirical, plugin))
        })?;
        let mut rows = Vec::new();
        for (j, &z) in spec.z_grid.iter().enumerate() {
            let label = format!("{};z={z}", point.label);
            let emp: Vec<f64> = reps.iter().map(|r| (r.0[j] - truth[j]).powi(2)).collect();
            let plug: Vec<f64> = reps
                .iter()
                .filter(|r| r.1[j].is_finite())
                .map(|r| (r.1[j] - truth[j]).powi(2))
                .collect();
            rows.push(summary_row(&label, "ground_truth", "rho_k", truth[j], spec.truth_draws));
            for (method, sq) in [("empirical", &emp), ("plugin", &plug)] {
                let (mse, se) = mean_se(sq);
                let rmse = mse.sqrt();
                rows.push(ResultRow {
                    point: label.clone(),
                    method: method.to_string(),
                    metric: "rmse".to_string(),
                    mean: rmse,
                    se: se.map(|s| if rmse > 0.0 { s / (2.0 * rmse) } else { 0.0 }),
                    reps: sq.len(),
                });
            }
            let diffs: Vec<f64> = reps
                .iter()
                .filter(|r| r.1[j].is_finite())
                .map(|r| (r.0[j] - truth[j]).powi(2) - (r.1[j] - truth[j]).powi(2))
                .collect();
            rows.push(row(&label, "paired", "sq_error_empirical_minus_plugin", &diffs));
        }
        Ok(rows)
    })
}

pub fn run_scenario(spec: &ScenarioSpec, master_seed: u64) -> Result<ExperimentResult> {
    match spec.experiment {
        Experiment::Detection => run_detection_power(spec, master_seed),
        Experiment::Correction => run_correction_experiment(spec, master_seed),
        Experiment::RhoEstimation => run_rho_estimation(spec, master_seed),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseKind {
    /// Within-group excess `n^-0.75` in both groups.
    Vanishing,
    /// Majority excess `5 sqrt(log n / n)`, minority `n^-0.75`.
    MajorityDominant,
    /// Minority excess `5 sqrt(log n / n)`, majority `n^-0.75`.
    MinorityDominant,
}

impl PhaseKind {
    pub fn name(self) -> &'static str {
        match self {
            PhaseKind::Vanishing => "vanishing",
            PhaseKind::MajorityDominant => "majority_dominant",
            PhaseKind::MinorityDominant => "minority_dominant",
        }
    }
}

pub const PHASE_KAPPA: f64 = 0.25;
pub const PHASE_Q: f64 = 0.3;
pub const PHASE_Z: [f64; 2] = [0.1, 0.25];

/// SBM parameters for a large-signal regime at size `n`.
pub fn phase_params(kind: PhaseKind, n: usize) -> Result<SbmParams> {
    let nf = n as f64;
    let weak = nf.powf(-0.75);
    let strong = 5.0 * (nf.ln() / nf).sqrt();
    let (d1, d2) = match kind {
        PhaseKind::Vanishing => (weak, weak),
        PhaseKind::MajorityDominant => (weak, strong),
        PhaseKind::MinorityDominant => (strong, weak),
    };
    SbmParams::new(PHASE_KAPPA, PHASE_Q, d1 * nf.sqrt(), d2 * nf.sqrt())
}

/// Mean minority share among the top `floor(nz)` for `z` in `{0.1, 0.25}`.
pub fn run_phase_check(kind: PhaseKind, n: usize, reps: usize, master_seed: u64) -> Result<ExperimentResult> {
    if reps == 0 {
        return Err(Error::InfeasibleParameter("zero replicates".into()));
    }
    let params = phase_params(kind, n)?;
    params.block_probs(n)?;
    let name = format!("phase_{}", kind.name());
    let ks: Vec<usize> = PHASE_Z.iter().map(|&z| rank_for_fraction(n, z)).collect();
    let shares: Vec<Vec<f64>> = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(master_seed, &name, 0, r);
            let labels = sample_labels(n, PHASE_KAPPA, true, &mut rng)?;
            let net = sample_sbm(n, &params, &labels, &mut rng)?;
            Ok(profile_at(&net, &ks, &mut rng))
        })
        .collect::<Result<_>>()?;
    let rows = PHASE_Z
        .iter()
        .enumerate()
        .map(|(j, z)| {
            let v: Vec<f64> = shares.iter().map(|s| s[j]).collect();
            row(&format!("n={n};z={z}"), kind.name(), "mean_r_k", &v)
        })
        .collect();
    Ok(ExperimentResult {
        scenario: name,
        master_seed,
        rows,
        skipped: Vec::new(),
    })
}

fn detection_base(q: f64, mu: f64, beta: f64, gamma: f64) -> BaseParams {
    BaseParams {
        kappa: 0.25,
        q,
        mu1: mu,
        mu2: mu,
        beta,
        gamma1: gamma,
        gamma2: gamma,
    }
}

fn correction_base(mu: f64, beta: f64) -> BaseParams {
    BaseParams {
        kappa: 0.4,
        q: 0.5,
        mu1: mu,
        mu2: mu,
        beta,
        gamma1: 0.0,
        gamma2: 0.0,
    }
}

fn spec(name: &str, experiment: Experiment, base: BaseParams, n_grid: Vec<usize>, reps: usize) -> ScenarioSpec {
    ScenarioSpec {
        name: name.to_string(),
        experiment,
        model: ModelSpec::Sbm,
        base,
        n_grid,
        replicate_count: reps,
        alpha: 0.1,
        beta_bar: 0.1,
        mode: DensityMode::Averaged,
        sweep: None,
        couplings: Vec::new(),
        fixed_minority_count: true,
        skip_infeasible: false,
        z_grid: Vec::new(),
        truth_draws: default_truth_draws(),
    }
}

pub const PRESET_NAMES: [&str; 10] = [
    "detection_a", "detection_b", "detection_c", "detection_d", "correction_a", "correction_b",
    "correction_c", "correction_bias", "correction_gamma", "rho_estimation",
];

/// Built-in scenarios: four detection sweeps, the correction settings and the
/// profile-estimation comparison.
pub fn preset(name: &str) -> Option<ScenarioSpec> {
    let detection_n = vec![20, 50, 100];
    let correction_n = vec![50, 100, 200, 300, 500];
    let sweep = |parameter, values: &[f64]| {
        Some(Sweep {
            parameter,
            values: values.to_vec(),
        })
    };
    let mut s = match name {
        "detection_a" => {
            let mut s = spec(name, Experiment::Detection, detection_base(0.2, 0.5, 0.0, 0.0), detection_n, 400);
            s.sweep = sweep(SweepParameter::Beta, &[0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3]);
            s.couplings = vec![Coupling::MuFromBeta { numerator: 0.5 }];
            s
        }
        "detection_b" => {
            let mut s = spec(name, Experiment::Detection, detection_base(0.25, 0.0, 0.2, 0.0), detection_n, 400);
            s.sweep = sweep(SweepParameter::Mu, &[0.0, 0.5, 1.0, 1.5, 2.0, 2.5]);
            s
        }
        "detection_c" => {
            let mut s = spec(name, Experiment::Detection, detection_base(0.25, 0.0, 0.25, 0.0), detection_n, 400);
            s.sweep = sweep(SweepParameter::Gamma, &[0.0, 0.4, 0.8, 1.2, 1.6, 2.0]);
            s.skip_infeasible = true;
            s
        }
        "detection_d" => {
            let mut s = spec(name, Experiment::Detection, detection_base(0.25, 0.1, 0.2, 0.5), detection_n, 400);
            s.sweep = sweep(SweepParameter::Q, &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6]);
            s
        }
        "correction_a" => {
            let mut s = spec(name, Experiment::Correction, correction_base(-2.0, 0.3), correction_n, 100);
            s.couplings = vec![Coupling::GammaFromN { divisor: 5.0 }];
            s
        }
        "correction_b" => spec(name, Experiment::Correction, correction_base(-2.0, 0.0), correction_n, 100),
        "correction_c" => {
            let mut s = spec(name, Experiment::Correction, correction_base(0.0, 0.3), correction_n, 100);
            s.couplings = vec![Coupling::GammaFromN { divisor: 5.0 }];
            s
        }
        "correction_bias" => {
            let mut s = spec(name, Experiment::Correction, correction_base(-2.0, 0.3), vec![500], 1);
            s.couplings = vec![Coupling::GammaFromN { divisor: 5.0 }];
            s
        }
        "correction_gamma" => {
            let mut s = spec(name, Experiment::Correction, correction_base(-2.0, 0.1), vec![200], 100);
            s.sweep = sweep(SweepParameter::Gamma, &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
            s.couplings = vec![Coupling::BetaFromGamma { within_rate: 0.1 }];
            s
        }
        "rho_estimation" => {
            let base = BaseParams {
                kappa: 0.4,
                q: 0.05,
                mu1: 1.0,
                mu2: 1.0,
                beta: 0.0,
                gamma1: 0.0,
                gamma2: 0.0,
            };
            let mut s = spec(name, Experiment::RhoEstimation, base, vec![200, 1000], 200);
            s.z_grid = vec![0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0];
            s
        }
        _ => return None,
    };
    s.name = name.to_string();
    Some(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_detection() -> ScenarioSpec {
        let mut s = preset("detection_b").unwrap();
        s.n_grid = vec![40];
        s.replicate_count = 24;
        s.sweep = Some(Sweep {
            parameter: SweepParameter::Mu,
            values: vec![0.0, 2.0],
        });
        s
    }

    #[test]
    fn streams_are_distinct_and_reproducible() {
        let mut a = stream_rng(1, "s", 0, 0);
        let mut b = stream_rng(1, "s", 0, 0);
        assert_eq!(a.gen::<u64>(), b.gen::<u64>());
        let firsts: Vec<u64> = [
            stream_rng(1, "s", 0, 1),
            stream_rng(1, "s", 1, 0),
            stream_rng(2, "s", 0, 0),
            stream_rng(1, "t", 0, 0),
        ]
        .iter_mut()
        .map(|r| r.gen())
        .collect();
        let mut uniq = firsts.clone();
        uniq.sort();
        uniq.dedup();
        assert_eq!(uniq.len(), 4);
    }

    #[test]
    fn points_apply_sweep_then_couplings() {
        let s = preset("detection_a").unwrap();
        let pts = s.points();
        assert_eq!(pts.len(), 21);
        let p = pts.iter().find(|p| p.label == "n=20;beta=0.2").unwrap();
        assert!((p.params.mu1 - 0.5 / 0.8).abs() < 1e-15);
        let s = preset("correction_gamma").unwrap();
        let p = &s.points()[2];
        assert_eq!(p.params.gamma1, 2.0);
        assert!((p.params.beta - (0.1 + 2.0 / 200f64.sqrt())).abs() < 1e-15);
        let s = preset("correction_a").unwrap();
        assert!((s.points()[1].params.gamma2 - 10.0 / 5.0).abs() < 1e-15);
    }

    #[test]
    fn presets_exist_and_validate() {
        for name in PRESET_NAMES {
            let s = preset(name).unwrap();
            s.validate().unwrap();
            assert_eq!(s.name, name);
        }
        assert!(preset("nope").is_none());
    }

    #[test]
    fn infeasible_points_error_or_skip() {
        let mut s = preset("detection_c").unwrap();
        s.replicate_count = 2;
        s.n_grid = vec![20];
        s.sweep = Some(Sweep {
            parameter: SweepParameter::Gamma,
            values: vec![0.0, 2.0],
        });
        let r = run_detection_power(&s, 1).unwrap();
        assert_eq!(r.skipped.len(), 1);
        assert_eq!(r.skipped[0].point, "n=20;gamma=2");
        s.skip_infeasible = false;
        assert!(matches!(run_detection_power(&s, 1), Err(Error::InfeasibleParameter(_))));
    }

    #[test]
    fn zero_error_rate_never_rejects() {
        let mut s = preset("detection_a").unwrap();
        s.n_grid = vec![50];
        s.replicate_count = 20;
        s.sweep = Some(Sweep {
            parameter: SweepParameter::Beta,
            values: vec![0.0],
        });
        let r = run_detection_power(&s, 3).unwrap();
        let rej = r.find("n=50;beta=0", "bias_test", "rejection_rate").unwrap();
        assert_eq!(rej.mean, 0.0);
        assert_eq!(r.find("n=50;beta=0", "bias_test", "identical_rate").unwrap().mean, 1.0);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let s = small_detection();
        let a = run_detection_power(&s, 11).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| run_detection_power(&s, 11)).unwrap();
        assert_eq!(a, b);
        let c = run_detection_power(&s, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn standard_error_shrinks_with_replicates() {
        let mut s = preset("correction_c").unwrap();
        s.n_grid = vec![60];
        s.replicate_count = 16;
        let small = run_correction_experiment(&s, 5).unwrap();
        s.replicate_count = 64;
        let large = run_correction_experiment(&s, 5).unwrap();
        let se = |r: &ExperimentResult| r.find("n=60", "uncorrected", "spearman").unwrap().se.unwrap();
        let ratio = se(&small) / se(&large);
        assert!(ratio > 1.3 && ratio < 3.0, "ratio {ratio}");
    }

    #[test]
    fn correction_rows_present() {
        let mut s = preset("correction_bias").unwrap();
        s.n_grid = vec![80];
        let r = run_correction_experiment(&s, 2).unwrap();
        for m in CORRECTION_METHODS {
            let sp = r.find("n=80", m, "spearman").unwrap();
            assert!(sp.mean > -1.0 && sp.mean <= 1.0);
            assert!(sp.se.is_none());
            assert!(r.find("n=80", m, "rank_bias_minority_median").is_some());
        }
        assert!(r.find("n=80", "plugin", "spearman_gain_vs_uncorrected").is_some());
    }

    #[test]
    fn rank_bias_sums_to_zero() {
        // Total displacement over all nodes is zero for any pair of rankings.
        let mut s = preset("correction_a").unwrap();
        s.n_grid = vec![50];
        s.replicate_count = 3;
        let r = run_correction_experiment(&s, 9).unwrap();
        for m in CORRECTION_METHODS {
            let b1 = r.find("n=50", m, "rank_bias_minority").unwrap().mean;
            let b2 = r.find("n=50", m, "rank_bias_majority").unwrap().mean;
            assert!((20.0 * b1 + 30.0 * b2).abs() < 1e-9);
        }
    }

    #[test]
    fn rho_estimation_null_model() {
        let mut s = preset("rho_estimation").unwrap();
        s.base.mu1 = 0.0;
        s.base.mu2 = 0.0;
        s.base.q = 0.2;
        s.n_grid = vec![100];
        s.replicate_count = 30;
        s.truth_draws = 100;
        s.z_grid = vec![0.5, 1.0];
        let r = run_rho_estimation(&s, 4).unwrap();
        let truth = r.find("n=100;z=1", "ground_truth", "rho_k").unwrap().mean;
        assert!((truth - 0.4).abs() < 1e-12);
        assert!(r.find("n=100;z=1", "empirical", "rmse").unwrap().mean < 1e-12);
        assert!(r.find("n=100;z=0.5", "plugin", "rmse").unwrap().mean < 0.1);
    }

    #[test]
    fn phase_parameters() {
        let p = phase_params(PhaseKind::MajorityDominant, 2000).unwrap();
        let probs = p.block_probs(2000).unwrap();
        assert!((probs.within2 - 0.3 - 5.0 * (2000f64.ln() / 2000.0).sqrt()).abs() < 1e-12);
        assert!((probs.within1 - 0.3 - 2000f64.powf(-0.75)).abs() < 1e-12);
        let r = run_phase_check(PhaseKind::Vanishing, 200, 4, 1).unwrap();
        assert_eq!(r.rows.len(), 2);
    }

    #[test]
    fn mean_se_values() {
        assert_eq!(mean_se(&[1.0, 3.0]), (2.0, Some(1.0)));
        assert_eq!(mean_se(&[2.0]).1, None);
        assert!(mean_se(&[]).0.is_nan());
        assert_eq!(quartiles(vec![4.0, 1.0, 3.0, 2.0, 5.0]), [2.0, 3.0, 4.0]);
    }
}
