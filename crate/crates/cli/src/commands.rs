use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use degbias::asymptotics::{default_grid, rank_grid, rho_star_curve, ProfileModel};
use degbias::correction::{
    corrected_ranking_directed, directed_plugin_ranking, plugin_corrected_ranking, proportional_ranking,
    CorrectedRanking,
};
use degbias::estimation::{estimate_directed, estimate_undirected, moment_stats, moment_stats_directed, plugin_mle};
use degbias::graph::{minority_profile_from_labels, top_k_ranking, Group, RepresentationProfile};
use degbias::ingest::{default_ids, load_directed, load_undirected, load_undirected_pair, write_edge_list, write_labels};
use degbias::models::{
    apply_errors_directed, apply_errors_undirected, check_graphon_feasible, sample_graphon, sample_labels, sample_sbm,
    ErrorRatesDirected, ErrorRatesUndirected, GraphonFamily, GraphonSpec, SbmParams,
};
use degbias::simulation::{preset, run_phase_check, run_scenario, ExperimentResult, ScenarioSpec, PRESET_NAMES};
use degbias::testing::{bias_test, directed_bias_test, BiasTestConfig, TestOutcome};

use crate::args::*;
use crate::output::{csv_document, flatten_json, json_document, Cell, Meta};

/// Settings shared by every subcommand after config merging.
pub struct RunContext {
    pub seed: u64,
    pub format: Format,
}

fn need<T: Clone>(v: &Option<T>, name: &str) -> Result<T> {
    v.clone().ok_or_else(|| anyhow!("missing required parameter --{}", name.replace('_', "-")))
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn document<T: Serialize>(ctx: &RunContext, meta: &Meta, result: &T, table: impl FnOnce() -> (Vec<&'static str>, Vec<Vec<Cell>>)) -> Result<String> {
    match ctx.format {
        Format::Json => json_document(meta, result),
        Format::Csv => {
            let (header, rows) = table();
            csv_document(meta, &header, rows)
        }
    }
}

fn key_value<T: Serialize>(result: &T) -> (Vec<&'static str>, Vec<Vec<Cell>>) {
    let mut rows = Vec::new();
    flatten_json("", &serde_json::to_value(result).unwrap_or(Value::Null), &mut rows);
    (vec!["field", "value"], rows)
}

fn config_value<T: Serialize>(args: &T) -> Result<Value> {
    Ok(serde_json::to_value(args)?)
}

impl ModelArgs {
    fn fill_defaults(&mut self) {
        self.model.get_or_insert(ModelKind::Sbm);
        self.mu1.get_or_insert(0.0);
        self.mu2.get_or_insert(0.0);
        if self.model == Some(ModelKind::Graphon) {
            self.family.get_or_insert(FamilyKind::Block);
            if self.family != Some(FamilyKind::Block) {
                self.coefficient.get_or_insert(0.0);
            }
        }
    }

    fn profile_model(&self) -> Result<ProfileModel> {
        let (kappa, q) = (need(&self.kappa, "kappa")?, need(&self.q, "q")?);
        let (mu1, mu2) = (self.mu1.unwrap_or(0.0), self.mu2.unwrap_or(0.0));
        Ok(match self.model.unwrap_or(ModelKind::Sbm) {
            ModelKind::Sbm => ProfileModel::Sbm(SbmParams::new(kappa, q, mu1, mu2)?),
            ModelKind::Graphon => {
                let a = self.coefficient.unwrap_or(0.0);
                let family = match self.family.unwrap_or(FamilyKind::Block) {
                    FamilyKind::Block => GraphonFamily::BlockConstant { kappa, mu1, mu2 },
                    FamilyKind::Linear => GraphonFamily::Linear { a },
                    FamilyKind::Bilinear => GraphonFamily::Bilinear { a },
                };
                ProfileModel::Graphon(GraphonSpec::new(family, q, kappa)?)
            }
        })
    }
}

fn header_comment(meta: &Meta) -> Result<String> {
    Ok(format!(
        "# {} {} seed={} config={}\n",
        meta.tool,
        meta.version,
        meta.seed,
        serde_json::to_string(&meta.config)?
    ))
}

fn write_file(path: &Path, meta: &Meta, body: impl FnOnce(&mut File) -> degbias::Result<()>) -> Result<()> {
    let mut f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    f.write_all(header_comment(meta)?.as_bytes())?;
    body(&mut f)?;
    Ok(())
}

#[derive(Serialize)]
struct GeneratedFile {
    role: &'static str,
    path: PathBuf,
    edges: usize,
}

#[derive(Serialize)]
struct GenerateSummary {
    n: usize,
    minority_count: usize,
    files: Vec<GeneratedFile>,
}

pub fn generate(mut a: GenerateArgs, ctx: &RunContext) -> Result<String> {
    a.model.fill_defaults();
    let n = need(&a.n, "n")?;
    let out_dir = need(&a.out_dir, "out_dir")?;
    let beta = *a.beta.get_or_insert(0.0);
    a.gamma1.get_or_insert(0.0);
    a.gamma2.get_or_insert(0.0);
    let fixed = *a.fixed_count.get_or_insert(true);
    let directed = *a.directed.get_or_insert(false);
    if directed {
        for r in [&mut a.beta11, &mut a.beta12, &mut a.beta21, &mut a.beta22] {
            r.get_or_insert(beta);
        }
        a.replicates = None;
    } else {
        a.replicates.get_or_insert(2);
    }
    let meta = Meta::new("generate", ctx.seed, config_value(&a)?);
    let model = a.model.profile_model()?;
    let kappa = a.model.kappa.unwrap_or_default();
    let mut r = rng(ctx.seed);
    let labels = sample_labels(n, kappa, fixed, &mut r)?;
    let truth = match model {
        ProfileModel::Sbm(p) => sample_sbm(n, &p, &labels, &mut r)?,
        ProfileModel::Graphon(spec) => {
            check_graphon_feasible(&spec.family, spec.q, n)?;
            sample_graphon(n, &spec, &labels, &mut r)?
        }
    };
    std::fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let ids = default_ids(n);
    let mut files = Vec::new();
    let labels_path = out_dir.join("labels.csv");
    write_file(&labels_path, &meta, |f| write_labels(f, &labels, &ids))?;
    files.push(GeneratedFile { role: "labels", path: labels_path, edges: 0 });
    let truth_edges = truth.edges();
    let construct_path = out_dir.join("construct.csv");
    write_file(&construct_path, &meta, |f| write_edge_list(f, &truth_edges, &ids))?;
    files.push(GeneratedFile { role: "construct", path: construct_path, edges: truth_edges.len() });
    if directed {
        let rates = ErrorRatesDirected::new(
            a.beta11.unwrap_or(beta),
            a.beta12.unwrap_or(beta),
            a.beta21.unwrap_or(beta),
            a.beta22.unwrap_or(beta),
        )?;
        let obs = apply_errors_directed(&truth, &rates, &mut r)?;
        let arcs = obs.arcs();
        let path = out_dir.join("observed.csv");
        write_file(&path, &meta, |f| write_edge_list(f, &arcs, &ids))?;
        files.push(GeneratedFile { role: "observed_directed", path, edges: arcs.len() });
    } else {
        let count = a.replicates.unwrap_or(2);
        if count > 2 {
            bail!("--replicates must be 0, 1 or 2");
        }
        if count > 0 {
            let rates = ErrorRatesUndirected::new(beta, a.gamma1.unwrap_or(0.0), a.gamma2.unwrap_or(0.0));
            for (i, obs) in apply_errors_undirected(&truth, &rates, count, &mut r)?.iter().enumerate() {
                let edges = obs.edges();
                let path = out_dir.join(format!("observed_{}.csv", i + 1));
                write_file(&path, &meta, |f| write_edge_list(f, &edges, &ids))?;
                files.push(GeneratedFile { role: "observed", path, edges: edges.len() });
            }
        }
    }
    let summary = GenerateSummary {
        n,
        minority_count: labels.iter().filter(|g| g.is_minority()).count(),
        files,
    };
    document(ctx, &meta, &summary, || {
        let rows = summary
            .files
            .iter()
            .map(|f| vec![f.role.into(), f.path.display().to_string().into(), f.edges.into()])
            .collect();
        (vec!["role", "path", "edges"], rows)
    })
}

#[derive(Serialize)]
struct ProfileRow {
    k: Option<usize>,
    z: f64,
    empirical: Option<f64>,
    rho_star: f64,
}

#[derive(Serialize)]
struct ProfileResult {
    model: ProfileModel,
    rows: Vec<ProfileRow>,
}

pub fn profile(mut a: ProfileArgs, ctx: &RunContext) -> Result<String> {
    let network = match (&a.edges, &a.labels) {
        (Some(e), Some(l)) => Some(load_undirected(e, l)?.network),
        (None, None) => None,
        _ => bail!("--edges and --labels must be given together"),
    };
    if let Some(net) = &network {
        let fit = plugin_mle(net)?;
        a.model.kappa.get_or_insert(fit.kappa);
        a.model.q.get_or_insert(fit.q);
        a.model.mu1.get_or_insert(fit.mu1);
        a.model.mu2.get_or_insert(fit.mu2);
    }
    a.model.fill_defaults();
    let model = a.model.profile_model()?;
    let rows = match &network {
        Some(net) => {
            let n = net.n();
            let order = top_k_ranking(&net.degrees(), &mut rng(ctx.seed));
            let empirical = minority_profile_from_labels(net.labels(), &order);
            let curve = rho_star_curve(&model, &rank_grid(n))?;
            (1..=n)
                .map(|k| ProfileRow {
                    k: Some(k),
                    z: curve.grid[k - 1],
                    empirical: Some(empirical.at(k)),
                    rho_star: curve.values[k - 1],
                })
                .collect()
        }
        None => {
            let grid = a.z.get_or_insert_with(default_grid).clone();
            let curve = rho_star_curve(&model, &grid)?;
            curve
                .grid
                .iter()
                .zip(&curve.values)
                .map(|(&z, &v)| ProfileRow { k: None, z, empirical: None, rho_star: v })
                .collect()
        }
    };
    let meta = Meta::new("profile", ctx.seed, config_value(&a)?);
    let result = ProfileResult { model, rows };
    document(ctx, &meta, &result, || {
        let rows = result
            .rows
            .iter()
            .map(|r| vec![r.k.map_or(Cell::Missing, Cell::Int), r.z.into(), r.empirical.into(), r.rho_star.into()])
            .collect();
        (vec!["k", "z", "empirical", "rho_star"], rows)
    })
}

impl NetworkArgs {
    fn fill_defaults(&mut self) {
        self.directed.get_or_insert(false);
        self.mode.get_or_insert(ModeArg::Averaged);
        self.alpha.get_or_insert(0.05);
        self.beta_bar.get_or_insert(0.1);
        self.alternative.get_or_insert(AlternativeArg::Less);
    }

    fn is_directed(&self) -> bool {
        self.directed == Some(true)
    }
}

pub fn estimate(mut a: NetworkArgs, ctx: &RunContext) -> Result<String> {
    a.fill_defaults();
    let (edges, labels) = (need(&a.edges, "edges")?, need(&a.labels, "labels")?);
    let meta = Meta::new("estimate", ctx.seed, config_value(&a)?);
    if a.is_directed() {
        let net = load_directed(&edges, &labels)?.network;
        let est = estimate_directed(&moment_stats_directed(&net)?)?;
        document(ctx, &meta, &est, || key_value(&est))
    } else {
        let (first, second) = load_undirected_pair(&edges, &need(&a.edges_star, "edges_star")?, &labels)?;
        let stats = moment_stats(&first.network, &second, a.mode.unwrap().into())?;
        let result = json!({"statistics": stats, "estimates": estimate_undirected(&stats)?});
        document(ctx, &meta, &result, || key_value(&result))
    }
}

/// Report text and whether the test was inconclusive.
pub fn test(mut a: NetworkArgs, ctx: &RunContext) -> Result<(String, bool)> {
    a.fill_defaults();
    let (edges, labels) = (need(&a.edges, "edges")?, need(&a.labels, "labels")?);
    let alpha = a.alpha.unwrap();
    let meta = Meta::new("test", ctx.seed, config_value(&a)?);
    if a.is_directed() {
        let net = load_directed(&edges, &labels)?.network;
        let report = directed_bias_test(&net, alpha, a.alternative.unwrap().into())?;
        Ok((document(ctx, &meta, &report, || key_value(&report))?, false))
    } else {
        let (first, second) = load_undirected_pair(&edges, &need(&a.edges_star, "edges_star")?, &labels)?;
        let config = BiasTestConfig {
            alpha,
            beta_bar: a.beta_bar.unwrap(),
            mode: a.mode.unwrap().into(),
        };
        let report = bias_test(&first.network, &second, &config)?;
        let inconclusive = report.outcome == TestOutcome::Inconclusive;
        Ok((document(ctx, &meta, &report, || key_value(&report))?, inconclusive))
    }
}

#[derive(Serialize)]
struct RankRow {
    rank: usize,
    node: String,
    group: Group,
    score: usize,
    minority_share: f64,
    target_share: Option<f64>,
}

fn rank_rows(order: &[usize], ids: &[String], labels: &[Group], scores: &[usize], target: Option<&RepresentationProfile>, top: usize) -> Vec<RankRow> {
    let achieved = minority_profile_from_labels(labels, order);
    order
        .iter()
        .take(top)
        .enumerate()
        .map(|(i, &node)| RankRow {
            rank: i + 1,
            node: ids[node].clone(),
            group: labels[node],
            score: scores[node],
            minority_share: achieved.at(i + 1),
            target_share: target.map(|t| t.at(i + 1)),
        })
        .collect()
}

fn rank_table(rows: &[RankRow]) -> (Vec<&'static str>, Vec<Vec<Cell>>) {
    let body = rows
        .iter()
        .map(|r| {
            vec![
                r.rank.into(),
                r.node.clone().into(),
                (r.group.tag() as usize).into(),
                r.score.into(),
                r.minority_share.into(),
                r.target_share.into(),
            ]
        })
        .collect();
    (vec!["rank", "node", "group", "score", "minority_share", "target_share"], body)
}

#[derive(Serialize)]
struct CorrectionResult {
    method: MethodArg,
    ranking: Vec<RankRow>,
    fitted: Option<degbias::correction::FittedParameters>,
    clamp_events: Vec<degbias::correction::ClampEvent>,
}

pub fn correct(mut a: CorrectArgs, ctx: &RunContext) -> Result<String> {
    a.network.fill_defaults();
    let method = *a.method.get_or_insert(MethodArg::Plugin);
    let net_args = &a.network;
    let (edges, labels) = (need(&net_args.edges, "edges")?, need(&net_args.labels, "labels")?);
    let meta = Meta::new("correct", ctx.seed, config_value(&a)?);
    let mut r = rng(ctx.seed);
    let (ids, labels_vec, scores, outcome): (Vec<String>, Vec<Group>, Vec<usize>, Option<CorrectedRanking>);
    let order: Vec<usize>;
    if net_args.is_directed() {
        let loaded = load_directed(&edges, &labels)?;
        let net = &loaded.network;
        scores = net.in_degrees();
        outcome = match method {
            MethodArg::Plugin => Some(directed_plugin_ranking(net, &mut r)?),
            MethodArg::Proportional => {
                let kappa = net.group_sizes().0 as f64 / net.n() as f64;
                Some(corrected_ranking_directed(net, &RepresentationProfile::constant(kappa, net.n())?, &mut r)?)
            }
            MethodArg::Uncorrected => None,
        };
        order = outcome.as_ref().map_or_else(|| top_k_ranking(&scores, &mut r), |c| c.order.clone());
        ids = loaded.nodes.ids().to_vec();
        labels_vec = net.labels().to_vec();
    } else {
        let (first, second) = match (method, &net_args.edges_star) {
            (MethodArg::Plugin, None) => bail!("the plug-in correction needs --edges-star"),
            (_, Some(star)) => {
                let (f, s) = load_undirected_pair(&edges, star, &labels)?;
                (f, Some(s))
            }
            (_, None) => (load_undirected(&edges, &labels)?, None),
        };
        let net = &first.network;
        scores = net.degrees();
        outcome = match method {
            MethodArg::Plugin => Some(plugin_corrected_ranking(net, second.as_ref().unwrap(), net_args.mode.unwrap().into(), &mut r)?),
            MethodArg::Proportional => Some(proportional_ranking(net, &mut r)?),
            MethodArg::Uncorrected => None,
        };
        order = outcome.as_ref().map_or_else(|| top_k_ranking(&scores, &mut r), |c| c.order.clone());
        ids = first.nodes.ids().to_vec();
        labels_vec = net.labels().to_vec();
    }
    let top = a.top.unwrap_or(order.len());
    let result = CorrectionResult {
        method,
        ranking: rank_rows(&order, &ids, &labels_vec, &scores, outcome.as_ref().map(|c| &c.target_profile), top),
        fitted: outcome.as_ref().and_then(|c| c.fitted),
        clamp_events: outcome.map(|c| c.clamp_events).unwrap_or_default(),
    };
    document(ctx, &meta, &result, || rank_table(&result.ranking))
}

fn read_scenario(path: &Path) -> Result<ScenarioSpec> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if path.extension().is_some_and(|e| e == "json") {
        Ok(serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?)
    } else {
        Ok(toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?)
    }
}

fn experiment_table(r: &ExperimentResult) -> (Vec<&'static str>, Vec<Vec<Cell>>) {
    let rows = r
        .rows
        .iter()
        .map(|x| {
            vec![
                r.scenario.clone().into(),
                x.point.clone().into(),
                x.method.clone().into(),
                x.metric.clone().into(),
                x.mean.into(),
                x.se.into(),
                x.reps.into(),
                r.master_seed.into(),
            ]
        })
        .collect();
    (vec!["scenario", "point", "method", "metric", "mean", "se", "reps", "seed"], rows)
}

pub fn simulate(a: SimulateArgs, ctx: &RunContext) -> Result<String> {
    if a.list_presets == Some(true) {
        return Ok(PRESET_NAMES.join("\n") + "\n");
    }
    let (result, config) = if let Some(phase) = a.phase {
        if a.preset.is_some() || a.scenario.is_some() {
            bail!("--phase cannot be combined with --preset or --scenario");
        }
        let n = a.n.as_ref().and_then(|v| v.first().copied()).unwrap_or(2000);
        let reps = a.reps.unwrap_or(100);
        let result = run_phase_check(phase.into(), n, reps, ctx.seed)?;
        (result, json!({"phase": phase, "n": n, "reps": reps}))
    } else {
        let mut spec = match (&a.preset, &a.scenario) {
            (Some(name), None) => preset(name).ok_or_else(|| anyhow!("unknown preset '{name}' (known: {})", PRESET_NAMES.join(", ")))?,
            (None, Some(path)) => read_scenario(path)?,
            _ => bail!("give exactly one of --preset, --scenario or --phase"),
        };
        if let Some(n) = &a.n {
            spec.n_grid = n.clone();
        }
        if let Some(reps) = a.reps {
            spec.replicate_count = reps;
        }
        let result = run_scenario(&spec, ctx.seed)?;
        (result, json!({"scenario": spec}))
    };
    let meta = Meta::new("simulate", ctx.seed, config);
    document(ctx, &meta, &result, || experiment_table(&result))
}

#[derive(Serialize)]
struct TopRow {
    rank: usize,
    node: String,
    group: Group,
    in_degree: usize,
}

#[derive(Serialize)]
struct Profiles {
    uncorrected: Vec<f64>,
    corrected: Vec<f64>,
    target: Vec<f64>,
}

#[derive(Serialize)]
struct DirectedAnalysis {
    estimates: degbias::estimation::DirectedEstimates,
    test: degbias::testing::DirectedTestReport,
    fitted: Option<degbias::correction::FittedParameters>,
    clamp_events: Vec<degbias::correction::ClampEvent>,
    uncorrected_top: Vec<TopRow>,
    corrected_top: Vec<TopRow>,
    profiles: Profiles,
    warnings: Vec<String>,
}

pub fn analyze_directed(mut a: AnalyzeArgs, ctx: &RunContext) -> Result<String> {
    let alpha = *a.alpha.get_or_insert(0.05);
    let alternative = *a.alternative.get_or_insert(AlternativeArg::Less);
    let top = *a.top.get_or_insert(10);
    let (edges, labels) = (need(&a.edges, "edges")?, need(&a.labels, "labels")?);
    let meta = Meta::new("analyze-directed", ctx.seed, config_value(&a)?);
    let loaded = load_directed(&edges, &labels)?;
    let net = &loaded.network;
    let test = directed_bias_test(net, alpha, alternative.into())?;
    let mut r = rng(ctx.seed);
    let in_deg = net.in_degrees();
    let uncorrected = top_k_ranking(&in_deg, &mut r);
    let corrected = directed_plugin_ranking(net, &mut r)?;
    let table = |order: &[usize]| -> Vec<TopRow> {
        order
            .iter()
            .take(top)
            .enumerate()
            .map(|(i, &v)| TopRow {
                rank: i + 1,
                node: loaded.nodes.ids()[v].clone(),
                group: net.labels()[v],
                in_degree: in_deg[v],
            })
            .collect()
    };
    let result = DirectedAnalysis {
        estimates: test.estimates,
        uncorrected_top: table(&uncorrected),
        corrected_top: table(&corrected.order),
        profiles: Profiles {
            uncorrected: minority_profile_from_labels(net.labels(), &uncorrected).values().to_vec(),
            corrected: corrected.achieved_profile.values().to_vec(),
            target: corrected.target_profile.values().to_vec(),
        },
        fitted: corrected.fitted,
        clamp_events: corrected.clamp_events,
        test,
        warnings: loaded.warnings.clone(),
    };
    json_document(&meta, &result)
}
