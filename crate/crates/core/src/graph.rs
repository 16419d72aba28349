//! Labelled networks, degree rankings with random tie-breaking, and
//! minority representation profiles.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Group tag. Tag 1 is the minority group by convention, tag 2 the majority.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Group {
    Minority,
    Majority,
}

impl Group {
    pub fn tag(self) -> u8 {
        match self {
            Group::Minority => 1,
            Group::Majority => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            1 => Some(Group::Minority),
            2 => Some(Group::Majority),
            _ => None,
        }
    }

    pub fn is_minority(self) -> bool {
        self == Group::Minority
    }
}

impl From<Group> for u8 {
    fn from(g: Group) -> u8 {
        g.tag()
    }
}

impl TryFrom<u8> for Group {
    type Error = String;

    fn try_from(tag: u8) -> std::result::Result<Self, String> {
        Group::from_tag(tag).ok_or_else(|| format!("group tag must be 1 or 2, got {tag}"))
    }
}

/// `(n1, n2)`: minority and majority counts.
pub fn group_sizes(labels: &[Group]) -> (usize, usize) {
    let n1 = labels.iter().filter(|g| g.is_minority()).count();
    (n1, labels.len() - n1)
}

/// Square bit matrix, one packed row of `u64` words per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        Self {
            n,
            words,
            bits: vec![0; n * words],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        (self.bits[i * self.words + j / 64] >> (j % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        let w = &mut self.bits[i * self.words + j / 64];
        if value {
            *w |= 1 << (j % 64);
        } else {
            *w &= !(1 << (j % 64));
        }
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    pub fn row_count(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of set bits in row `i` that are also set in `mask`.
    pub fn row_count_masked(&self, i: usize, mask: &[u64]) -> usize {
        self.row(i)
            .iter()
            .zip(mask)
            .map(|(w, m)| (w & m).count_ones() as usize)
            .sum()
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Row `i` of `self` XOR row `i` of `other`, masked, counted.
    pub fn row_xor_count_masked(&self, other: &BitMatrix, i: usize, mask: &[u64]) -> usize {
        self.row(i)
            .iter()
            .zip(other.row(i))
            .zip(mask)
            .map(|((a, b), m)| ((a ^ b) & m).count_ones() as usize)
            .sum()
    }

    pub fn iter_row(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(i).iter().enumerate().flat_map(|(wi, &w)| {
            let mut word = w;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let b = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(wi * 64 + b)
            })
        })
    }
}

/// Bitmask over nodes carrying label `group`.
pub fn group_mask(labels: &[Group], group: Group) -> Vec<u64> {
    let mut mask = vec![0u64; labels.len().div_ceil(64).max(1)];
    for (i, g) in labels.iter().enumerate() {
        if *g == group {
            mask[i / 64] |= 1 << (i % 64);
        }
    }
    mask
}

/// Undirected simple graph with group labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledNetwork {
    labels: Vec<Group>,
    adj: BitMatrix,
}

impl LabeledNetwork {
    pub fn empty(labels: Vec<Group>) -> Self {
        let adj = BitMatrix::new(labels.len());
        Self { labels, adj }
    }

    pub fn from_edges(labels: Vec<Group>, edges: &[(usize, usize)]) -> Result<Self> {
        let mut net = Self::empty(labels);
        for &(i, j) in edges {
            net.check_pair(i, j)?;
            net.add_edge(i, j);
        }
        Ok(net)
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        let n = self.n();
        if i >= n || j >= n {
            return Err(Error::Domain(format!("edge ({i},{j}) out of range for n = {n}")));
        }
        if i == j {
            return Err(Error::Domain(format!("self-loop at node {i}")));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[Group] {
        &self.labels
    }

    pub fn adjacency(&self) -> &BitMatrix {
        &self.adj
    }

    pub fn group_sizes(&self) -> (usize, usize) {
        group_sizes(&self.labels)
    }

    /// Panics on a self-loop or an out-of-range index.
    pub fn add_edge(&mut self, i: usize, j: usize) {
        assert!(i != j, "self-loops are not allowed");
        self.adj.set(i, j, true);
        self.adj.set(j, i, true);
    }

    pub fn remove_edge(&mut self, i: usize, j: usize) {
        self.adj.set(i, j, false);
        self.adj.set(j, i, false);
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj.get(i, j)
    }

    pub fn edge_count(&self) -> usize {
        self.adj.count_ones() / 2
    }

    /// Edges `(i, j)` with `i < j`, in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n())
            .flat_map(|i| self.adj.iter_row(i).filter(move |&j| j > i).map(move |j| (i, j)))
            .collect()
    }

    pub fn degrees(&self) -> Vec<usize> {
        degrees(self)
    }
}

/// Directed graph with group labels and no self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedNetwork {
    labels: Vec<Group>,
    adj: BitMatrix,
}

impl DirectedNetwork {
    pub fn empty(labels: Vec<Group>) -> Self {
        let adj = BitMatrix::new(labels.len());
        Self { labels, adj }
    }

    pub fn from_arcs(labels: Vec<Group>, arcs: &[(usize, usize)]) -> Result<Self> {
        let mut net = Self::empty(labels);
        let n = net.n();
        for &(i, j) in arcs {
            if i >= n || j >= n {
                return Err(Error::Domain(format!("arc ({i},{j}) out of range for n = {n}")));
            }
            if i == j {
                return Err(Error::Domain(format!("self-loop at node {i}")));
            }
            net.add_arc(i, j);
        }
        Ok(net)
    }

    /// Both arc directions for every undirected edge.
    pub fn from_undirected(net: &LabeledNetwork) -> Self {
        Self {
            labels: net.labels.clone(),
            adj: net.adj.clone(),
        }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[Group] {
        &self.labels
    }

    pub fn adjacency(&self) -> &BitMatrix {
        &self.adj
    }

    pub fn group_sizes(&self) -> (usize, usize) {
        group_sizes(&self.labels)
    }

    pub fn add_arc(&mut self, i: usize, j: usize) {
        assert!(i != j, "self-loops are not allowed");
        self.adj.set(i, j, true);
    }

    pub fn has_arc(&self, i: usize, j: usize) -> bool {
        self.adj.get(i, j)
    }

    pub fn arc_count(&self) -> usize {
        self.adj.count_ones()
    }

    pub fn arcs(&self) -> Vec<(usize, usize)> {
        (0..self.n())
            .flat_map(|i| self.adj.iter_row(i).map(move |j| (i, j)))
            .collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n()).all(|i| self.adj.iter_row(i).all(|j| self.adj.get(j, i)))
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        (0..self.n()).map(|i| self.adj.row_count(i)).collect()
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        in_degrees(self)
    }
}

pub fn degrees(net: &LabeledNetwork) -> Vec<usize> {
    (0..net.n()).map(|i| net.adj.row_count(i)).collect()
}

/// Column sums of the adjacency matrix.
pub fn in_degrees(net: &DirectedNetwork) -> Vec<usize> {
    let mut deg = vec![0; net.n()];
    for i in 0..net.n() {
        for j in net.adj.iter_row(i) {
            deg[j] += 1;
        }
    }
    deg
}

/// Full ordering by nonincreasing score. Each tie class comes out in a
/// uniformly random order drawn from `rng`.
pub fn top_k_ranking<T: Ord, R: Rng + ?Sized>(scores: &[T], rng: &mut R) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.shuffle(rng);
    // Stable sort keeps the shuffled order inside each tie class.
    order.sort_by(|&a, &b| scores[b].cmp(&scores[a]));
    order
}

pub fn is_permutation(order: &[usize], n: usize) -> bool {
    if order.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &i in order {
        if i >= n || seen[i] {
            return false;
        }
        seen[i] = true;
    }
    true
}

/// Per-`K` minority proportions, `values[K - 1] = R_K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentationProfile {
    values: Vec<f64>,
}

impl RepresentationProfile {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Domain(format!("profile value {v} outside [0,1]")));
        }
        Ok(Self { values })
    }

    pub fn constant(value: f64, n: usize) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at prefix length `k` (1-based).
    pub fn at(&self, k: usize) -> f64 {
        self.values[k - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Running count of minority nodes in each prefix of `ranking`.
pub fn minority_counts(labels: &[Group], ranking: &[usize]) -> Vec<usize> {
    let mut count = 0;
    ranking
        .iter()
        .map(|&i| {
            if labels[i].is_minority() {
                count += 1;
            }
            count
        })
        .collect()
}

pub fn minority_profile_from_labels(labels: &[Group], ranking: &[usize]) -> RepresentationProfile {
    assert!(
        is_permutation(ranking, labels.len()),
        "ranking must be a permutation of 0..n"
    );
    let values = minority_counts(labels, ranking)
        .into_iter()
        .enumerate()
        .map(|(k, c)| c as f64 / (k + 1) as f64)
        .collect();
    RepresentationProfile { values }
}

pub fn minority_profile(net: &LabeledNetwork, ranking: &[usize]) -> RepresentationProfile {
    minority_profile_from_labels(net.labels(), ranking)
}

/// Position of each node in `order`.
pub fn rank_positions(order: &[usize]) -> Vec<usize> {
    let mut pos = vec![0; order.len()];
    for (r, &i) in order.iter().enumerate() {
        pos[i] = r;
    }
    pos
}

/// Spearman correlation `1 - 6 Σd² / (n(n² - 1))` between two rankings given
/// as orderings of node indices.
pub fn spearman(rank_a: &[usize], rank_b: &[usize]) -> Result<f64> {
    if rank_a.len() != rank_b.len() {
        return Err(Error::DimensionMismatch(format!(
            "rankings of length {} and {}",
            rank_a.len(),
            rank_b.len()
        )));
    }
    let n = rank_a.len();
    if !is_permutation(rank_a, n) || !is_permutation(rank_b, n) {
        return Err(Error::Domain("spearman needs two permutations".into()));
    }
    if n < 2 {
        return Err(Error::Domain("spearman needs at least two nodes".into()));
    }
    let pa = rank_positions(rank_a);
    let pb = rank_positions(rank_b);
    let d2: f64 = pa
        .iter()
        .zip(&pb)
        .map(|(&a, &b)| {
            let d = a as f64 - b as f64;
            d * d
        })
        .sum();
    let nf = n as f64;
    Ok(1.0 - 6.0 * d2 / (nf * (nf * nf - 1.0)))
}
