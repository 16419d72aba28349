//! Degree rankings re-ordered to follow a target minority profile.
//!
//! The greedy rule fills rank `K` from whichever group brings the running
//! minority share closest to the target at `K`, taking the highest-degree
//! remaining node of that group.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::asymptotics::rho_star_sbm;
use crate::error::{Error, Result};
use crate::estimation::{estimate_directed, moment_stats, moment_stats_directed, DensityMode, MomentStats};
use crate::graph::{
    minority_profile_from_labels, DirectedNetwork, Group, LabeledNetwork, RepresentationProfile,
};

pub const CLAMP_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClampEvent {
    pub parameter: String,
    pub raw: f64,
    pub clamped: f64,
}

/// Construct-model parameters used to build a plug-in target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FittedParameters {
    pub kappa: f64,
    pub q: f64,
    pub mu1: f64,
    pub mu2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectedRanking {
    pub order: Vec<usize>,
    pub achieved_profile: RepresentationProfile,
    pub target_profile: RepresentationProfile,
    pub clamp_events: Vec<ClampEvent>,
    pub fitted: Option<FittedParameters>,
}

/// Node indices of `group`, highest score first, ties in random order.
fn group_queue<R: Rng + ?Sized>(labels: &[Group], scores: &[usize], group: Group, rng: &mut R) -> Vec<usize> {
    let mut nodes: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == group).collect();
    nodes.shuffle(rng);
    nodes.sort_by(|&a, &b| scores[b].cmp(&scores[a]));
    nodes
}

/// Greedy profile matching on arbitrary integer scores.
pub fn corrected_ranking_by_scores<R: Rng + ?Sized>(
    labels: &[Group],
    scores: &[usize],
    target: &RepresentationProfile,
    rng: &mut R,
) -> Result<CorrectedRanking> {
    let n = labels.len();
    if scores.len() != n || target.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n} labels, {} scores, target of length {}",
            scores.len(),
            target.len()
        )));
    }
    let minority = group_queue(labels, scores, Group::Minority, rng);
    let majority = group_queue(labels, scores, Group::Majority, rng);
    let (mut next1, mut next2) = (0, 0);
    let mut order = Vec::with_capacity(n);
    for k in 1..=n {
        let goal = target.at(k);
        let kf = k as f64;
        let cost = |g: usize| ((next1 + g) as f64 / kf - goal).abs();
        let want_minority = cost(1) <= cost(0) + 1e-12;
        let take_minority = if next1 == minority.len() {
            false
        } else if next2 == majority.len() {
            true
        } else {
            want_minority
        };
        if take_minority {
            order.push(minority[next1]);
            next1 += 1;
        } else {
            order.push(majority[next2]);
            next2 += 1;
        }
    }
    Ok(CorrectedRanking {
        achieved_profile: minority_profile_from_labels(labels, &order),
        order,
        target_profile: target.clone(),
        clamp_events: Vec::new(),
        fitted: None,
    })
}

/// Greedy profile matching on undirected degrees.
pub fn corrected_ranking<R: Rng + ?Sized>(
    net: &LabeledNetwork,
    target: &RepresentationProfile,
    rng: &mut R,
) -> Result<CorrectedRanking> {
    corrected_ranking_by_scores(net.labels(), &net.degrees(), target, rng)
}

/// Greedy profile matching on in-degrees (ties nominated to a node).
pub fn corrected_ranking_directed<R: Rng + ?Sized>(
    net: &DirectedNetwork,
    target: &RepresentationProfile,
    rng: &mut R,
) -> Result<CorrectedRanking> {
    corrected_ranking_by_scores(net.labels(), &net.in_degrees(), target, rng)
}

/// Constant target at the observed minority share.
pub fn proportional_ranking<R: Rng + ?Sized>(net: &LabeledNetwork, rng: &mut R) -> Result<CorrectedRanking> {
    let n = net.n();
    let kappa = net.group_sizes().0 as f64 / n as f64;
    corrected_ranking(net, &RepresentationProfile::constant(kappa, n)?, rng)
}

fn clamp_recorded(name: &str, raw: f64, lo: f64, hi: f64, events: &mut Vec<ClampEvent>) -> f64 {
    let v = raw.clamp(lo, hi);
    if v != raw {
        log::info!("clamped {name} from {raw} to {v}");
        events.push(ClampEvent {
            parameter: name.to_string(),
            raw,
            clamped: v,
        });
    }
    v
}

/// Target profile `ρ*(K/n)` for `K = 1..n`.
pub fn rho_star_target(n: usize, p: &FittedParameters) -> Result<RepresentationProfile> {
    let values = (1..=n)
        .map(|k| rho_star_sbm(k as f64 / n as f64, p.kappa, p.q, p.mu1, p.mu2))
        .collect::<Result<Vec<_>>>()?;
    RepresentationProfile::new(values)
}

/// Construct parameters from moment statistics, with error rates and the
/// base density clamped into their valid ranges before the signals are
/// recomputed.
pub fn fit_plugin_parameters(stats: &MomentStats, events: &mut Vec<ClampEvent>) -> Result<FittedParameters> {
    const NAMES: [(&str, &str); 3] = [("beta1", "within-1"), ("beta2", "within-2"), ("beta_between", "between")];
    let mut beta = [0.0; 3];
    for (k, &(density, discord)) in stats.blocks().iter().enumerate() {
        if density <= 0.0 {
            return Err(Error::InsufficientEdges(NAMES[k].1));
        }
        beta[k] = clamp_recorded(NAMES[k].0, discord / density, 0.0, 1.0 - CLAMP_EPS, events);
    }
    let root_n = (stats.n as f64).sqrt();
    let q = clamp_recorded(
        "q",
        stats.density_between / (1.0 - beta[2]),
        CLAMP_EPS,
        1.0 - CLAMP_EPS,
        events,
    );
    Ok(FittedParameters {
        kappa: stats.n1 as f64 / stats.n as f64,
        q,
        mu1: root_n * (stats.density_within1 / (1.0 - beta[0]) - q),
        mu2: root_n * (stats.density_within2 / (1.0 - beta[1]) - q),
    })
}

/// Estimates construct parameters from two replicates, targets the implied
/// limit profile and re-ranks the degrees of `y`.
pub fn plugin_corrected_ranking<R: Rng + ?Sized>(
    y: &LabeledNetwork,
    y_star: &LabeledNetwork,
    mode: DensityMode,
    rng: &mut R,
) -> Result<CorrectedRanking> {
    let stats = moment_stats(y, y_star, mode)?;
    let mut events = Vec::new();
    let fitted = fit_plugin_parameters(&stats, &mut events)?;
    let target = rho_star_target(y.n(), &fitted)?;
    let mut out = corrected_ranking(y, &target, rng)?;
    out.clamp_events = events;
    out.fitted = Some(fitted);
    Ok(out)
}

/// Directed variant: the cross-group density estimate plays the base
/// density and within-group estimates give the signals; ranks in-degrees.
pub fn directed_plugin_ranking<R: Rng + ?Sized>(y: &DirectedNetwork, rng: &mut R) -> Result<CorrectedRanking> {
    let est = estimate_directed(&moment_stats_directed(y)?)?;
    let mut events = Vec::new();
    let n = y.n();
    let root_n = (n as f64).sqrt();
    let q = clamp_recorded("q", est.p12, CLAMP_EPS, 1.0 - CLAMP_EPS, &mut events);
    let fitted = FittedParameters {
        kappa: est.stats.n1 as f64 / n as f64,
        q,
        mu1: root_n * (est.p11 - q),
        mu2: root_n * (est.p22 - q),
    };
    let target = rho_star_target(n, &fitted)?;
    let mut out = corrected_ranking_directed(y, &target, rng)?;
    out.clamp_events = events;
    out.fitted = Some(fitted);
    Ok(out)
}
