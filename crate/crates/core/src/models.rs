//! Construct-model samplers (two-group SBM, labelled graphon) and the
//! group-dependent type II observation channels.
//!
//! Within-group signals `mu_g` and error offsets `gamma_g` are scaled by
//! `1/sqrt(n)`, so feasibility of a parameter set depends on `n` and is checked
//! when sampling.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DirectedNetwork, Group, LabeledNetwork};
use crate::numerics::GaussLegendre;

fn check_open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InfeasibleParameter(format!("{name} = {v} must lie in (0,1)")))
    }
}

fn check_probability(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InfeasibleParameter(format!("{name} = {v} must lie in [0,1]")))
    }
}

/// Edge probabilities of a two-group block model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockProbs {
    pub within1: f64,
    pub within2: f64,
    pub between: f64,
}

impl BlockProbs {
    pub fn new(within1: f64, within2: f64, between: f64) -> Result<Self> {
        check_probability("p11", within1)?;
        check_probability("p22", within2)?;
        check_probability("p12", between)?;
        Ok(Self {
            within1,
            within2,
            between,
        })
    }

    #[inline]
    pub fn get(&self, a: Group, b: Group) -> f64 {
        match (a, b) {
            (Group::Minority, Group::Minority) => self.within1,
            (Group::Majority, Group::Majority) => self.within2,
            _ => self.between,
        }
    }
}

/// Two-group SBM with connection matrix `[[q + mu1/√n, q], [q, q + mu2/√n]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SbmParams {
    pub kappa: f64,
    pub q: f64,
    pub mu1: f64,
    pub mu2: f64,
}

impl SbmParams {
    pub fn new(kappa: f64, q: f64, mu1: f64, mu2: f64) -> Result<Self> {
        let p = Self { kappa, q, mu1, mu2 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_open_unit("kappa", self.kappa)?;
        check_open_unit("q", self.q)?;
        if !self.mu1.is_finite() || !self.mu2.is_finite() {
            return Err(Error::InfeasibleParameter("mu must be finite".into()));
        }
        Ok(())
    }

    /// Concrete block probabilities at size `n`.
    pub fn block_probs(&self, n: usize) -> Result<BlockProbs> {
        self.validate()?;
        let s = (n as f64).sqrt();
        BlockProbs::new(self.q + self.mu1 / s, self.q + self.mu2 / s, self.q)
            .map_err(|e| Error::InfeasibleParameter(format!("{e} (SBM at n = {n})")))
    }
}

/// Labels for `n` nodes. With `fixed_count`, exactly `floor(kappa * n)` nodes
/// are minority, placed uniformly at random; otherwise labels are i.i.d.
pub fn sample_labels<R: Rng + ?Sized>(
    n: usize,
    kappa: f64,
    fixed_count: bool,
    rng: &mut R,
) -> Result<Vec<Group>> {
    check_open_unit("kappa", kappa)?;
    if fixed_count {
        let n1 = (kappa * n as f64).floor() as usize;
        let mut labels: Vec<Group> = (0..n)
            .map(|i| if i < n1 { Group::Minority } else { Group::Majority })
            .collect();
        labels.shuffle(rng);
        Ok(labels)
    } else {
        Ok((0..n)
            .map(|_| {
                if rng.gen::<f64>() < kappa {
                    Group::Minority
                } else {
                    Group::Majority
                }
            })
            .collect())
    }
}

/// Independent Bernoulli edges with block-dependent rates.
pub fn sample_block_model<R: Rng + ?Sized>(
    labels: &[Group],
    probs: &BlockProbs,
    rng: &mut R,
) -> LabeledNetwork {
    let n = labels.len();
    let mut net = LabeledNetwork::empty(labels.to_vec());
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < probs.get(labels[i], labels[j]) {
                net.add_edge(i, j);
            }
        }
    }
    net
}

pub fn sample_sbm<R: Rng + ?Sized>(
    n: usize,
    params: &SbmParams,
    labels: &[Group],
    rng: &mut R,
) -> Result<LabeledNetwork> {
    if labels.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for n = {n}",
            labels.len()
        )));
    }
    let probs = params.block_probs(n)?;
    Ok(sample_block_model(labels, &probs, rng))
}

/// A √n-scaled graphon deviation `θ(u, v)`, giving edge probabilities
/// `ω_n(u, v) = q + θ(u, v)/√n`. Implementations must be symmetric.
pub trait Graphon: Sync {
    fn theta(&self, u: f64, v: f64) -> f64;

    /// Points in `v` where `θ(u, ·)` may jump; integration is split there.
    fn breakpoints(&self, _kappa: f64) -> Vec<f64> {
        Vec::new()
    }
}

impl<F: Fn(f64, f64) -> f64 + Sync> Graphon for F {
    fn theta(&self, u: f64, v: f64) -> f64 {
        self(u, v)
    }
}

/// Built-in graphon families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GraphonFamily {
    /// `mu1` on the minority block `[0,κ)²`, `mu2` on `[κ,1)²`, zero across:
    /// the SBM written as a graphon.
    BlockConstant { kappa: f64, mu1: f64, mu2: f64 },
    /// `θ(u, v) = a (u + v)`.
    Linear { a: f64 },
    /// `θ(u, v) = a u v`.
    Bilinear { a: f64 },
}

impl Graphon for GraphonFamily {
    fn theta(&self, u: f64, v: f64) -> f64 {
        match *self {
            GraphonFamily::BlockConstant { kappa, mu1, mu2 } => match (u < kappa, v < kappa) {
                (true, true) => mu1,
                (false, false) => mu2,
                _ => 0.0,
            },
            GraphonFamily::Linear { a } => a * (u + v),
            GraphonFamily::Bilinear { a } => a * u * v,
        }
    }

    fn breakpoints(&self, kappa: f64) -> Vec<f64> {
        match *self {
            GraphonFamily::BlockConstant { kappa: k, .. } => vec![k],
            _ => vec![kappa],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphonSpec {
    #[serde(flatten)]
    pub family: GraphonFamily,
    /// Base density `p_n`.
    pub q: f64,
    pub kappa: f64,
}

impl GraphonSpec {
    pub fn new(family: GraphonFamily, q: f64, kappa: f64) -> Result<Self> {
        check_open_unit("q", q)?;
        check_open_unit("kappa", kappa)?;
        if let GraphonFamily::BlockConstant { kappa: k, .. } = family {
            if k != kappa {
                return Err(Error::InfeasibleParameter(format!(
                    "block-constant graphon kappa {k} differs from spec kappa {kappa}"
                )));
            }
        }
        Ok(Self { family, q, kappa })
    }

    /// The graphon equivalent of an SBM parameter set.
    pub fn from_sbm(p: &SbmParams) -> Result<Self> {
        Self::new(
            GraphonFamily::BlockConstant {
                kappa: p.kappa,
                mu1: p.mu1,
                mu2: p.mu2,
            },
            p.q,
            p.kappa,
        )
    }

    /// Normalized expected-degree function
    /// `μ(u) = ∫ θ(u, v) dv / sqrt(q(1 - q))`.
    pub fn mean_function(&self) -> impl Fn(f64) -> f64 + '_ {
        normalized_mean_function(&self.family, self.q, self.kappa)
    }
}

/// `μ(u) = ∫₀¹ θ(u, v) dv / sqrt(q(1 - q))`, integrated with 64-node
/// Gauss-Legendre on each piece between the graphon's breakpoints.
pub fn normalized_mean_function<'a, G: Graphon + ?Sized>(
    graphon: &'a G,
    q: f64,
    kappa: f64,
) -> impl Fn(f64) -> f64 + 'a {
    let rule = GaussLegendre::new(64);
    let mut cuts = vec![0.0];
    cuts.extend(
        graphon
            .breakpoints(kappa)
            .into_iter()
            .filter(|b| *b > 0.0 && *b < 1.0),
    );
    cuts.push(1.0);
    cuts.sort_by(f64::total_cmp);
    let scale = 1.0 / (q * (1.0 - q)).sqrt();
    move |u| {
        let total: f64 = cuts
            .windows(2)
            .map(|w| rule.integrate(|v| graphon.theta(u, v), w[0], w[1]))
            .sum();
        total * scale
    }
}

/// Latent positions: uniform on `[0, κ)` for minority nodes and `[κ, 1)` for
/// majority nodes.
pub fn sample_latent_positions<R: Rng + ?Sized>(labels: &[Group], kappa: f64, rng: &mut R) -> Vec<f64> {
    labels
        .iter()
        .map(|g| {
            let u: f64 = rng.gen();
            match g {
                Group::Minority => kappa * u,
                Group::Majority => kappa + (1.0 - kappa) * u,
            }
        })
        .collect()
}

/// Checks `q + θ/√n ∈ [0,1]` on a 101×101 grid.
pub fn check_graphon_feasible<G: Graphon + ?Sized>(graphon: &G, q: f64, n: usize) -> Result<()> {
    let s = (n as f64).sqrt();
    for a in 0..=100 {
        for b in 0..=100 {
            let (u, v) = (a as f64 / 100.0, b as f64 / 100.0);
            let w = q + graphon.theta(u, v) / s;
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::InfeasibleParameter(format!(
                    "graphon value {w} at ({u}, {v}) outside [0,1] for n = {n}"
                )));
            }
        }
    }
    Ok(())
}

/// Samples a labelled graphon network; returns the network and the latent
/// positions.
pub fn sample_graphon_with_positions<G: Graphon + ?Sized, R: Rng + ?Sized>(
    graphon: &G,
    q: f64,
    kappa: f64,
    labels: &[Group],
    rng: &mut R,
) -> Result<(LabeledNetwork, Vec<f64>)> {
    check_open_unit("q", q)?;
    check_open_unit("kappa", kappa)?;
    let n = labels.len();
    check_graphon_feasible(graphon, q, n)?;
    let s = (n as f64).sqrt();
    let pos = sample_latent_positions(labels, kappa, rng);
    let mut net = LabeledNetwork::empty(labels.to_vec());
    for i in 0..n {
        for j in i + 1..n {
            let w = q + graphon.theta(pos[i], pos[j]) / s;
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::InfeasibleParameter(format!(
                    "graphon value {w} outside [0,1] at latent positions ({}, {})",
                    pos[i], pos[j]
                )));
            }
            if rng.gen::<f64>() < w {
                net.add_edge(i, j);
            }
        }
    }
    Ok((net, pos))
}

pub fn sample_graphon<R: Rng + ?Sized>(
    n: usize,
    spec: &GraphonSpec,
    labels: &[Group],
    rng: &mut R,
) -> Result<LabeledNetwork> {
    if labels.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for n = {n}",
            labels.len()
        )));
    }
    sample_graphon_with_positions(&spec.family, spec.q, spec.kappa, labels, rng).map(|(net, _)| net)
}

/// Undirected type II error rates: `β₁₂ = β`, `β_gg = β - γ_g/√n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRatesUndirected {
    pub beta: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl ErrorRatesUndirected {
    pub fn new(beta: f64, gamma1: f64, gamma2: f64) -> Self {
        Self { beta, gamma1, gamma2 }
    }

    pub fn none() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    /// Edge-deletion probabilities at size `n`, as block probabilities.
    pub fn block_rates(&self, n: usize) -> Result<BlockProbs> {
        let s = (n as f64).sqrt();
        BlockProbs::new(self.beta - self.gamma1 / s, self.beta - self.gamma2 / s, self.beta)
            .map_err(|e| Error::InfeasibleParameter(format!("{e} (error rates at n = {n})")))
    }
}

/// Observes `replicates` conditionally independent copies of `truth`, each
/// deleting every edge independently with its block's error rate.
pub fn apply_errors_undirected<R: Rng + ?Sized>(
    truth: &LabeledNetwork,
    rates: &ErrorRatesUndirected,
    replicates: usize,
    rng: &mut R,
) -> Result<Vec<LabeledNetwork>> {
    if !(1..=2).contains(&replicates) {
        return Err(Error::Domain(format!("replicates must be 1 or 2, got {replicates}")));
    }
    let beta = rates.block_rates(truth.n())?;
    let labels = truth.labels();
    let edges = truth.edges();
    Ok((0..replicates)
        .map(|_| {
            let mut obs = LabeledNetwork::empty(labels.to_vec());
            for &(i, j) in &edges {
                if rng.gen::<f64>() >= beta.get(labels[i], labels[j]) {
                    obs.add_edge(i, j);
                }
            }
            obs
        })
        .collect())
}

/// Directed recall-error rates; `beta12` is the probability that a minority
/// node fails to report a tie to a majority node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRatesDirected {
    pub beta11: f64,
    pub beta12: f64,
    pub beta21: f64,
    pub beta22: f64,
}

impl ErrorRatesDirected {
    pub fn new(beta11: f64, beta12: f64, beta21: f64, beta22: f64) -> Result<Self> {
        check_probability("beta11", beta11)?;
        check_probability("beta12", beta12)?;
        check_probability("beta21", beta21)?;
        check_probability("beta22", beta22)?;
        Ok(Self {
            beta11,
            beta12,
            beta21,
            beta22,
        })
    }

    #[inline]
    pub fn get(&self, from: Group, to: Group) -> f64 {
        match (from, to) {
            (Group::Minority, Group::Minority) => self.beta11,
            (Group::Minority, Group::Majority) => self.beta12,
            (Group::Majority, Group::Minority) => self.beta21,
            (Group::Majority, Group::Majority) => self.beta22,
        }
    }
}

/// Each ordered pair `(i, j)` over a true edge is reported independently with
/// probability `1 - β_{c_i c_j}`.
pub fn apply_errors_directed<R: Rng + ?Sized>(
    truth: &LabeledNetwork,
    rates: &ErrorRatesDirected,
    rng: &mut R,
) -> Result<DirectedNetwork> {
    ErrorRatesDirected::new(rates.beta11, rates.beta12, rates.beta21, rates.beta22)?;
    let labels = truth.labels();
    let mut obs = DirectedNetwork::empty(labels.to_vec());
    for (i, j) in truth.edges() {
        if rng.gen::<f64>() >= rates.get(labels[i], labels[j]) {
            obs.add_arc(i, j);
        }
        if rng.gen::<f64>() >= rates.get(labels[j], labels[i]) {
            obs.add_arc(j, i);
        }
    }
    Ok(obs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{degrees, group_sizes, spearman, top_k_ranking};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn complete(labels: Vec<Group>) -> LabeledNetwork {
        let n = labels.len();
        let mut net = LabeledNetwork::empty(labels);
        for i in 0..n {
            for j in i + 1..n {
                net.add_edge(i, j);
            }
        }
        net
    }

    /// Observed edge counts and pair counts per block (11, 22, 12).
    fn block_counts(net: &LabeledNetwork) -> [(usize, usize); 3] {
        let l = net.labels();
        let mut out = [(0, 0); 3];
        for i in 0..net.n() {
            for j in i + 1..net.n() {
                let b = match (l[i], l[j]) {
                    (Group::Minority, Group::Minority) => 0,
                    (Group::Majority, Group::Majority) => 1,
                    _ => 2,
                };
                out[b].1 += 1;
                if net.has_edge(i, j) {
                    out[b].0 += 1;
                }
            }
        }
        out
    }

    fn within_3_sigma(count: usize, trials: usize, p: f64) -> bool {
        let mean = trials as f64 * p;
        let sd = (trials as f64 * p * (1.0 - p)).sqrt();
        (count as f64 - mean).abs() <= 3.0 * sd.max(1e-12)
    }

    #[test]
    fn fixed_count_labels() {
        let labels = sample_labels(20, 0.25, true, &mut rng(3)).unwrap();
        assert_eq!(group_sizes(&labels).0, 5);
        assert_eq!(labels, sample_labels(20, 0.25, true, &mut rng(3)).unwrap());
        assert!(sample_labels(20, 0.0, false, &mut rng(3)).is_err());
    }

    #[test]
    fn iid_label_fraction() {
        let labels = sample_labels(100_000, 0.5, false, &mut rng(5)).unwrap();
        let frac = group_sizes(&labels).0 as f64 / 1e5;
        assert!((frac - 0.5).abs() < 0.01);
    }

    #[test]
    fn sbm_degenerate_cases() {
        let labels = sample_labels(30, 0.4, true, &mut rng(1)).unwrap();
        let full = sample_sbm(30, &SbmParams::new(0.4, 0.999_999, 0.0, 0.0).unwrap(), &labels, &mut rng(1));
        assert!(full.is_ok());
        let probs = BlockProbs::new(1.0, 1.0, 1.0).unwrap();
        assert_eq!(sample_block_model(&labels, &probs, &mut rng(2)).edge_count(), 30 * 29 / 2);
        let probs = BlockProbs::new(0.0, 0.0, 0.0).unwrap();
        assert_eq!(sample_block_model(&labels, &probs, &mut rng(2)).edge_count(), 0);
        // q = 0.9, mu = 1 at n = 30 gives within probability > 1.
        let bad = SbmParams::new(0.4, 0.9, 1.0, 1.0).unwrap();
        assert!(matches!(
            sample_sbm(30, &bad, &labels, &mut rng(1)),
            Err(Error::InfeasibleParameter(_))
        ));
    }

    #[test]
    fn sbm_block_densities() {
        let n = 2000;
        let params = SbmParams::new(0.4, 0.15, 1.0, 1.0).unwrap();
        let labels = sample_labels(n, 0.4, false, &mut rng(11)).unwrap();
        let net = sample_sbm(n, &params, &labels, &mut rng(12)).unwrap();
        let probs = params.block_probs(n).unwrap();
        let counts = block_counts(&net);
        assert!(within_3_sigma(counts[0].0, counts[0].1, probs.within1));
        assert!(within_3_sigma(counts[1].0, counts[1].1, probs.within2));
        assert!(within_3_sigma(counts[2].0, counts[2].1, probs.between));
    }

    #[test]
    fn sbm_null_is_exchangeable() {
        let n = 2000;
        let params = SbmParams::new(0.3, 0.2, 0.0, 0.0).unwrap();
        let labels = sample_labels(n, 0.3, false, &mut rng(21)).unwrap();
        let net = sample_sbm(n, &params, &labels, &mut rng(22)).unwrap();
        let deg = degrees(&net);
        let (n1, n2) = group_sizes(&labels);
        let mean = |g: Group| {
            deg.iter().zip(&labels).filter(|(_, l)| **l == g).map(|(d, _)| *d as f64).sum::<f64>()
        };
        let m1 = mean(Group::Minority) / n1 as f64;
        let m2 = mean(Group::Majority) / n2 as f64;
        let var = (n - 1) as f64 * 0.2 * 0.8;
        let se = (var / n1 as f64 + var / n2 as f64).sqrt();
        assert!((m1 - m2).abs() <= 3.0 * se);
    }

    #[test]
    fn samplers_are_deterministic() {
        let params = SbmParams::new(0.4, 0.3, 1.0, 0.5).unwrap();
        let labels = sample_labels(80, 0.4, false, &mut rng(7)).unwrap();
        let a = sample_sbm(80, &params, &labels, &mut rng(8)).unwrap();
        let b = sample_sbm(80, &params, &labels, &mut rng(8)).unwrap();
        assert_eq!(a, b);
        let ra = apply_errors_undirected(&a, &ErrorRatesUndirected::new(0.3, 0.5, 0.5), 2, &mut rng(9)).unwrap();
        let rb = apply_errors_undirected(&b, &ErrorRatesUndirected::new(0.3, 0.5, 0.5), 2, &mut rng(9)).unwrap();
        assert_eq!(ra, rb);
    }

    #[test]
    fn block_constant_graphon_matches_sbm_densities() {
        let n = 1500;
        let params = SbmParams::new(0.4, 0.15, 1.0, 2.0).unwrap();
        let spec = GraphonSpec::from_sbm(&params).unwrap();
        let labels = sample_labels(n, 0.4, false, &mut rng(31)).unwrap();
        let net = sample_graphon(n, &spec, &labels, &mut rng(32)).unwrap();
        let probs = params.block_probs(n).unwrap();
        let counts = block_counts(&net);
        assert!(within_3_sigma(counts[0].0, counts[0].1, probs.within1));
        assert!(within_3_sigma(counts[1].0, counts[1].1, probs.within2));
        assert!(within_3_sigma(counts[2].0, counts[2].1, probs.between));
    }

    #[test]
    fn zero_graphon_is_erdos_renyi() {
        let n = 1000;
        let spec = GraphonSpec::new(GraphonFamily::Linear { a: 0.0 }, 0.2, 0.3).unwrap();
        let labels = sample_labels(n, 0.3, false, &mut rng(41)).unwrap();
        let net = sample_graphon(n, &spec, &labels, &mut rng(42)).unwrap();
        assert!(within_3_sigma(net.edge_count(), n * (n - 1) / 2, 0.2));
    }

    #[test]
    fn linear_graphon_degree_increases_with_position() {
        let n = 2000;
        let spec = GraphonSpec::new(GraphonFamily::Linear { a: 2.0 }, 0.2, 0.3).unwrap();
        let labels = sample_labels(n, 0.3, false, &mut rng(51)).unwrap();
        let (net, pos) = sample_graphon_with_positions(&spec.family, spec.q, spec.kappa, &labels, &mut rng(52)).unwrap();
        // Rank correlation of latent position against degree.
        let pos_rank = top_k_ranking(
            &pos.iter().map(|p| (p * 1e12) as u64).collect::<Vec<_>>(),
            &mut rng(53),
        );
        let deg_rank = top_k_ranking(&degrees(&net), &mut rng(54));
        assert!(spearman(&pos_rank, &deg_rank).unwrap() > 0.0);
    }

    #[test]
    fn graphon_feasibility_checked() {
        let spec = GraphonSpec::new(GraphonFamily::Linear { a: 50.0 }, 0.5, 0.3).unwrap();
        let labels = vec![Group::Majority; 100];
        assert!(matches!(
            sample_graphon(100, &spec, &labels, &mut rng(1)),
            Err(Error::InfeasibleParameter(_))
        ));
    }

    #[test]
    fn latent_positions_respect_groups() {
        let labels = sample_labels(500, 0.3, false, &mut rng(61)).unwrap();
        let pos = sample_latent_positions(&labels, 0.3, &mut rng(62));
        for (u, g) in pos.iter().zip(&labels) {
            match g {
                Group::Minority => assert!((0.0..0.3).contains(u)),
                Group::Majority => assert!((0.3..1.0).contains(u)),
            }
        }
    }

    #[test]
    fn mean_function_values() {
        let spec = GraphonSpec::from_sbm(&SbmParams::new(0.4, 0.15, 1.0, 2.0).unwrap()).unwrap();
        let mu = spec.mean_function();
        let s = (0.15f64 * 0.85).sqrt();
        assert!((mu(0.1) - 0.4 / s).abs() < 1e-12);
        assert!((mu(0.7) - 0.6 * 2.0 / s).abs() < 1e-12);
        let lin = GraphonSpec::new(GraphonFamily::Linear { a: 1.0 }, 0.5, 0.3).unwrap();
        assert!((lin.mean_function()(0.2) - (0.2 + 0.5) / 0.5).abs() < 1e-12);
    }

    #[test]
    fn undirected_channel_edge_cases() {
        let labels = sample_labels(40, 0.4, true, &mut rng(71)).unwrap();
        let truth = complete(labels);
        let same = apply_errors_undirected(&truth, &ErrorRatesUndirected::none(), 2, &mut rng(1)).unwrap();
        assert_eq!(same[0], truth);
        assert_eq!(same[1], truth);
        let gone = apply_errors_undirected(&truth, &ErrorRatesUndirected::new(1.0, 0.0, 0.0), 1, &mut rng(1)).unwrap();
        assert_eq!(gone[0].edge_count(), 0);
        assert!(apply_errors_undirected(&truth, &ErrorRatesUndirected::none(), 3, &mut rng(1)).is_err());
        assert!(apply_errors_undirected(&truth, &ErrorRatesUndirected::new(0.1, 5.0, 0.0), 1, &mut rng(1)).is_err());
    }

    #[test]
    fn undirected_channel_survival_rate() {
        let n = 2000;
        let truth = complete(vec![Group::Majority; n]);
        let obs = apply_errors_undirected(&truth, &ErrorRatesUndirected::new(0.3, 0.0, 0.0), 1, &mut rng(81)).unwrap();
        assert!(within_3_sigma(obs[0].edge_count(), n * (n - 1) / 2, 0.7));
    }

    #[test]
    fn channels_never_add_edges_and_replicates_agree_off_truth() {
        let params = SbmParams::new(0.4, 0.3, 1.0, 1.0).unwrap();
        let labels = sample_labels(150, 0.4, false, &mut rng(91)).unwrap();
        let truth = sample_sbm(150, &params, &labels, &mut rng(92)).unwrap();
        let reps = apply_errors_undirected(&truth, &ErrorRatesUndirected::new(0.4, 1.0, -1.0), 2, &mut rng(93)).unwrap();
        let dir = apply_errors_directed(&truth, &ErrorRatesDirected::new(0.1, 0.4, 0.5, 0.2).unwrap(), &mut rng(94)).unwrap();
        for i in 0..150 {
            for j in 0..150 {
                if !truth.has_edge(i, j) {
                    assert!(!reps[0].has_edge(i, j) && !reps[1].has_edge(i, j));
                    assert!(!dir.has_arc(i, j));
                }
            }
        }
    }

    #[test]
    fn directed_channel_cases() {
        let labels = sample_labels(60, 0.4, true, &mut rng(101)).unwrap();
        let truth = complete(labels.clone());
        let exact = apply_errors_directed(&truth, &ErrorRatesDirected::new(0.0, 0.0, 0.0, 0.0).unwrap(), &mut rng(1)).unwrap();
        assert!(exact.is_symmetric());
        assert_eq!(exact, DirectedNetwork::from_undirected(&truth));
        let blocked = apply_errors_directed(&truth, &ErrorRatesDirected::new(0.0, 1.0, 0.0, 0.0).unwrap(), &mut rng(1)).unwrap();
        for (i, j) in blocked.arcs() {
            assert!(!(labels[i] == Group::Minority && labels[j] == Group::Majority));
        }
    }

    #[test]
    fn directed_channel_survival_rates() {
        let n = 1200;
        let labels = sample_labels(n, 0.45, true, &mut rng(111)).unwrap();
        let truth = complete(labels.clone());
        let rates = ErrorRatesDirected::new(0.2, 0.39, 0.53, 0.3).unwrap();
        let obs = apply_errors_directed(&truth, &rates, &mut rng(112)).unwrap();
        let mut kept = [[0usize; 2]; 2];
        let mut total = [[0usize; 2]; 2];
        let idx = |g: Group| if g.is_minority() { 0 } else { 1 };
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    total[idx(labels[i])][idx(labels[j])] += 1;
                    if obs.has_arc(i, j) {
                        kept[idx(labels[i])][idx(labels[j])] += 1;
                    }
                }
            }
        }
        let beta = [[0.2, 0.39], [0.53, 0.3]];
        for a in 0..2 {
            for b in 0..2 {
                assert!(within_3_sigma(kept[a][b], total[a][b], 1.0 - beta[a][b]), "block {a}{b}");
            }
        }
    }
}
