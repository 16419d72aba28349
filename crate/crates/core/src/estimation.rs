//! Method-of-moments estimation from two undirected noisy replicates or from a
//! single directed network whose arcs are individual reports.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{group_mask, BitMatrix, DirectedNetwork, Group, LabeledNetwork};

/// How block densities are computed from the two replicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityMode {
    /// Mean of `(Y + Y*)/2`; symmetric in the replicates.
    #[default]
    Averaged,
    /// Mean of `Y` only.
    FirstReplicate,
}

/// Block densities and half-discrepancies of a replicate pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentStats {
    pub n: usize,
    pub n1: usize,
    pub n2: usize,
    pub pairs_within1: usize,
    pub pairs_within2: usize,
    pub pairs_between: usize,
    pub density_within1: f64,
    pub discord_within1: f64,
    pub density_within2: f64,
    pub discord_within2: f64,
    pub density_between: f64,
    pub discord_between: f64,
    pub mode: DensityMode,
}

impl MomentStats {
    /// `(density, discord)` for blocks in the order within-1, within-2, between.
    pub fn blocks(&self) -> [(f64, f64); 3] {
        [
            (self.density_within1, self.discord_within1),
            (self.density_within2, self.discord_within2),
            (self.density_between, self.discord_between),
        ]
    }

    pub fn pair_counts(&self) -> [usize; 3] {
        [self.pairs_within1, self.pairs_within2, self.pairs_between]
    }
}

fn require_two_per_group(n1: usize, n2: usize) -> Result<()> {
    for (group, count) in [(1u8, n1), (2u8, n2)] {
        if count < 2 {
            return Err(Error::DegenerateBlock {
                group,
                count,
                required: 2,
            });
        }
    }
    Ok(())
}

/// Per-block sums over unordered pairs of the bits selected by `count`.
fn block_sums<F: Fn(usize, &[u64]) -> usize>(labels: &[Group], count: F) -> [usize; 3] {
    let m1 = group_mask(labels, Group::Minority);
    let m2 = group_mask(labels, Group::Majority);
    let (mut w1, mut w2, mut b) = (0, 0, 0);
    for (i, g) in labels.iter().enumerate() {
        match g {
            Group::Minority => {
                w1 += count(i, &m1);
                b += count(i, &m2);
            }
            Group::Majority => w2 += count(i, &m2),
        }
    }
    [w1 / 2, w2 / 2, b]
}

pub fn moment_stats(y: &LabeledNetwork, y_star: &LabeledNetwork, mode: DensityMode) -> Result<MomentStats> {
    if y.labels() != y_star.labels() {
        return Err(Error::LabelMismatch);
    }
    let labels = y.labels();
    let (n1, n2) = y.group_sizes();
    require_two_per_group(n1, n2)?;
    let (a, b) = (y.adjacency(), y_star.adjacency());
    let edges_y = block_sums(labels, |i, m| a.row_count_masked(i, m));
    let edges_star = block_sums(labels, |i, m| b.row_count_masked(i, m));
    let discord = block_sums(labels, |i, m| a.row_xor_count_masked(b, i, m));
    let pairs = [n1 * (n1 - 1) / 2, n2 * (n2 - 1) / 2, n1 * n2];
    let density = |k: usize| match mode {
        DensityMode::Averaged => (edges_y[k] + edges_star[k]) as f64 / (2 * pairs[k]) as f64,
        DensityMode::FirstReplicate => edges_y[k] as f64 / pairs[k] as f64,
    };
    let half_discord = |k: usize| discord[k] as f64 / (2 * pairs[k]) as f64;
    Ok(MomentStats {
        n: n1 + n2,
        n1,
        n2,
        pairs_within1: pairs[0],
        pairs_within2: pairs[1],
        pairs_between: pairs[2],
        density_within1: density(0),
        discord_within1: half_discord(0),
        density_within2: density(1),
        discord_within2: half_discord(1),
        density_between: density(2),
        discord_between: half_discord(2),
        mode,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UndirectedEstimates {
    pub kappa: f64,
    pub q: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub beta_between: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

const BLOCK_NAMES: [&str; 3] = ["within-1", "within-2", "between"];

/// Raw (unclamped) estimates from moment statistics.
pub fn estimate_undirected(stats: &MomentStats) -> Result<UndirectedEstimates> {
    let mut beta = [0.0; 3];
    for (k, &(density, discord)) in stats.blocks().iter().enumerate() {
        if density <= 0.0 {
            return Err(Error::InsufficientEdges(BLOCK_NAMES[k]));
        }
        beta[k] = discord / density;
        if beta[k] >= 1.0 {
            return Err(Error::DegenerateRate {
                block: BLOCK_NAMES[k],
                value: beta[k],
            });
        }
    }
    let root_n = (stats.n as f64).sqrt();
    let q = stats.density_between / (1.0 - beta[2]);
    Ok(UndirectedEstimates {
        kappa: stats.n1 as f64 / stats.n as f64,
        q,
        mu1: root_n * (stats.density_within1 / (1.0 - beta[0]) - q),
        mu2: root_n * (stats.density_within2 / (1.0 - beta[1]) - q),
        beta_between: beta[2],
        beta1: beta[0],
        beta2: beta[1],
        gamma1: root_n * (beta[2] - beta[0]),
        gamma2: root_n * (beta[2] - beta[1]),
    })
}

/// Construct-model estimates from one error-free network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PluginEstimates {
    pub kappa: f64,
    pub q: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub p11: f64,
    pub p22: f64,
}

/// Block-density maximum-likelihood estimates under the SBM.
pub fn plugin_mle(net: &LabeledNetwork) -> Result<PluginEstimates> {
    let (n1, n2) = net.group_sizes();
    require_two_per_group(n1, n2)?;
    let a = net.adjacency();
    let edges = block_sums(net.labels(), |i, m| a.row_count_masked(i, m));
    let p11 = edges[0] as f64 / (n1 * (n1 - 1) / 2) as f64;
    let p22 = edges[1] as f64 / (n2 * (n2 - 1) / 2) as f64;
    let q = edges[2] as f64 / (n1 * n2) as f64;
    let n = (n1 + n2) as f64;
    Ok(PluginEstimates {
        kappa: n1 as f64 / n,
        q,
        mu1: n.sqrt() * (p11 - q),
        mu2: n.sqrt() * (p22 - q),
        p11,
        p22,
    })
}

/// Densities and asymmetries of a directed report network. `density_12` is
/// over arcs from minority to majority nodes, `asym_*` over unordered pairs
/// reported by exactly one side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectedMomentStats {
    pub n: usize,
    pub n1: usize,
    pub n2: usize,
    pub density_11: f64,
    pub asym_11: f64,
    pub density_22: f64,
    pub asym_22: f64,
    pub density_12: f64,
    pub density_21: f64,
    pub asym_12: f64,
}

fn transpose(a: &BitMatrix) -> BitMatrix {
    let mut t = BitMatrix::new(a.n());
    for i in 0..a.n() {
        for j in a.iter_row(i) {
            t.set(j, i, true);
        }
    }
    t
}

pub fn moment_stats_directed(y: &DirectedNetwork) -> Result<DirectedMomentStats> {
    let labels = y.labels();
    let (n1, n2) = y.group_sizes();
    require_two_per_group(n1, n2)?;
    let a = y.adjacency();
    let t = transpose(a);
    let m1 = group_mask(labels, Group::Minority);
    let m2 = group_mask(labels, Group::Majority);
    let (mut arcs11, mut arcs22, mut arcs12, mut arcs21) = (0, 0, 0, 0);
    let (mut asym11, mut asym22, mut asym12) = (0, 0, 0);
    for (i, g) in labels.iter().enumerate() {
        match g {
            Group::Minority => {
                arcs11 += a.row_count_masked(i, &m1);
                arcs12 += a.row_count_masked(i, &m2);
                asym11 += a.row_xor_count_masked(&t, i, &m1);
                asym12 += a.row_xor_count_masked(&t, i, &m2);
            }
            Group::Majority => {
                arcs22 += a.row_count_masked(i, &m2);
                arcs21 += a.row_count_masked(i, &m1);
                asym22 += a.row_xor_count_masked(&t, i, &m2);
            }
        }
    }
    let ordered1 = (n1 * (n1 - 1)) as f64;
    let ordered2 = (n2 * (n2 - 1)) as f64;
    let cross = (n1 * n2) as f64;
    // Unordered within-group asymmetries are counted from both endpoints.
    Ok(DirectedMomentStats {
        n: n1 + n2,
        n1,
        n2,
        density_11: arcs11 as f64 / ordered1,
        asym_11: asym11 as f64 / ordered1,
        density_22: arcs22 as f64 / ordered2,
        asym_22: asym22 as f64 / ordered2,
        density_12: arcs12 as f64 / cross,
        density_21: arcs21 as f64 / cross,
        asym_12: asym12 as f64 / cross,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectedEstimates {
    pub stats: DirectedMomentStats,
    pub beta11: f64,
    pub beta22: f64,
    pub beta12: f64,
    pub beta21: f64,
    pub p11: f64,
    pub p22: f64,
    pub p12: f64,
}

fn nonzero(value: f64, what: &str) -> Result<f64> {
    if value == 0.0 || !value.is_finite() {
        Err(Error::ZeroDenominator(what.to_string()))
    } else {
        Ok(value)
    }
}

pub fn estimate_directed(stats: &DirectedMomentStats) -> Result<DirectedEstimates> {
    let s = stats;
    let within = |density: f64, asym: f64, name: &str| -> Result<(f64, f64)> {
        let d = nonzero(2.0 * density, &format!("2 * density_{name}"))?;
        let r = nonzero(2.0 * density - asym, &format!("2 * density_{name} - asym_{name}"))?;
        Ok((asym / d, 2.0 * density * density / r))
    };
    let (beta11, p11) = within(s.density_11, s.asym_11, "11")?;
    let (beta22, p22) = within(s.density_22, s.asym_22, "22")?;
    let d21 = nonzero(2.0 * s.density_21, "2 * density_21")?;
    let d12 = nonzero(2.0 * s.density_12, "2 * density_12")?;
    let dp = nonzero(
        s.density_12 + s.density_21 - s.asym_12,
        "density_12 + density_21 - asym_12",
    )?;
    Ok(DirectedEstimates {
        stats: *stats,
        beta11,
        beta22,
        beta12: (s.density_21 - s.density_12 + s.asym_12) / d21,
        beta21: (s.density_12 - s.density_21 + s.asym_12) / d12,
        p11,
        p22,
        p12: 2.0 * s.density_12 * s.density_21 / dp,
    })
}
