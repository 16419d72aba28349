//! Edge-list and label file reading and writing.
//!
//! Edge lines are `src<sep>dst` and label lines `node_id<sep>group`, where the
//! separator is a comma or whitespace and lines starting with `#` are
//! comments. Node ids are arbitrary strings mapped to dense indices in order
//! of first appearance in the edge list.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{group_sizes, DirectedNetwork, Group, LabeledNetwork};

/// Dense index assignment for string node ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeIndex {
    ids: Vec<String>,
    lookup: HashMap<String, usize>,
}

impl NodeIndex {
    pub fn from_ids(ids: impl IntoIterator<Item = String>) -> Self {
        let mut index = NodeIndex::default();
        for id in ids {
            index.intern(&id);
        }
        index
    }

    pub fn intern(&mut self, id: &str) -> usize {
        if let Some(&i) = self.lookup.get(id) {
            return i;
        }
        let i = self.ids.len();
        self.ids.push(id.to_string());
        self.lookup.insert(id.to_string(), i);
        i
    }

    pub fn get(&self, id: &str) -> Option<usize> {
        self.lookup.get(id).copied()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeList {
    pub nodes: NodeIndex,
    /// Undirected: each pair once as `(min, max)`, sorted. Directed: distinct
    /// arcs in file order.
    pub pairs: Vec<(usize, usize)>,
    pub directed: bool,
    pub dropped_self_loops: usize,
}

fn fields(line: &str) -> Vec<&str> {
    line.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .collect()
}

fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.trim();
        (!line.is_empty() && !line.starts_with('#')).then(|| (i + 1, fields(line)))
    })
}

pub fn parse_edge_list_str(text: &str, directed: bool) -> Result<EdgeList> {
    let mut nodes = NodeIndex::default();
    let mut pairs = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut dropped = 0;
    let mut any = false;
    for (line, f) in records(text) {
        any = true;
        if f.len() != 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected 2 fields, found {}", f.len()),
            });
        }
        let (a, b) = (nodes.intern(f[0]), nodes.intern(f[1]));
        if a == b {
            dropped += 1;
            continue;
        }
        let key = if directed { (a, b) } else { (a.min(b), a.max(b)) };
        if seen.insert(key) {
            pairs.push(key);
        }
    }
    if !any {
        return Err(Error::EmptyInput("edge list".into()));
    }
    if dropped > 0 {
        log::warn!("dropped {dropped} self-loop(s)");
    }
    if !directed {
        pairs.sort_unstable();
    }
    Ok(EdgeList {
        nodes,
        pairs,
        directed,
        dropped_self_loops: dropped,
    })
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn parse_edge_list(path: &Path, directed: bool) -> Result<EdgeList> {
    parse_edge_list_str(&read(path)?, directed)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelAssignment {
    /// Aligned with the node index after any appended isolated nodes.
    pub labels: Vec<Group>,
    /// Labelled ids absent from the edge list, appended as isolated nodes.
    pub isolated_added: usize,
    pub warnings: Vec<String>,
}

/// Labels every node of `nodes`. Ids that only occur in the label file are
/// appended to `nodes` as isolated nodes.
pub fn parse_labels_str(text: &str, nodes: &mut NodeIndex) -> Result<LabelAssignment> {
    let before = nodes.len();
    let mut assigned: Vec<Option<Group>> = vec![None; before];
    let mut any = false;
    for (line, f) in records(text) {
        any = true;
        if f.len() != 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected 2 fields, found {}", f.len()),
            });
        }
        let group = f[1]
            .parse::<u8>()
            .ok()
            .and_then(Group::from_tag)
            .ok_or_else(|| Error::UnknownGroup {
                line,
                tag: f[1].to_string(),
            })?;
        let i = nodes.intern(f[0]);
        if i == assigned.len() {
            assigned.push(None);
        }
        match assigned[i] {
            Some(g) if g != group => {
                return Err(Error::Parse {
                    line,
                    message: format!("node '{}' labelled twice with different groups", f[0]),
                })
            }
            _ => assigned[i] = Some(group),
        }
    }
    if !any {
        return Err(Error::EmptyInput("label file".into()));
    }
    let missing: Vec<String> = assigned
        .iter()
        .enumerate()
        .filter(|(_, g)| g.is_none())
        .map(|(i, _)| nodes.ids()[i].clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingLabels(missing));
    }
    let labels: Vec<Group> = assigned.into_iter().map(Option::unwrap).collect();
    let mut warnings = Vec::new();
    let (n1, n2) = group_sizes(&labels);
    if n1 > n2 {
        warnings.push(format!("group 1 has {n1} nodes and group 2 has {n2}; group 1 is treated as the minority"));
    }
    let isolated_added = labels.len() - before;
    if isolated_added > 0 {
        warnings.push(format!("{isolated_added} labelled node(s) have no edges"));
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(LabelAssignment {
        labels,
        isolated_added,
        warnings,
    })
}

pub fn parse_labels(path: &Path, nodes: &mut NodeIndex) -> Result<LabelAssignment> {
    parse_labels_str(&read(path)?, nodes)
}

impl EdgeList {
    pub fn to_undirected(&self, labels: Vec<Group>) -> Result<LabeledNetwork> {
        LabeledNetwork::from_edges(labels, &self.pairs)
    }

    pub fn to_directed(&self, labels: Vec<Group>) -> Result<DirectedNetwork> {
        DirectedNetwork::from_arcs(labels, &self.pairs)
    }
}

/// Network read from an edge list and label file.
#[derive(Debug, Clone)]
pub struct LoadedNetwork<N> {
    pub network: N,
    pub nodes: NodeIndex,
    pub dropped_self_loops: usize,
    pub warnings: Vec<String>,
}

fn load(edges: &Path, labels: &Path, directed: bool) -> Result<(EdgeList, LabelAssignment)> {
    let mut list = parse_edge_list(edges, directed)?;
    let assignment = parse_labels(labels, &mut list.nodes)?;
    Ok((list, assignment))
}

pub fn load_undirected(edges: &Path, labels: &Path) -> Result<LoadedNetwork<LabeledNetwork>> {
    let (list, a) = load(edges, labels, false)?;
    Ok(LoadedNetwork {
        network: list.to_undirected(a.labels)?,
        nodes: list.nodes,
        dropped_self_loops: list.dropped_self_loops,
        warnings: a.warnings,
    })
}

pub fn load_directed(edges: &Path, labels: &Path) -> Result<LoadedNetwork<DirectedNetwork>> {
    let (list, a) = load(edges, labels, true)?;
    Ok(LoadedNetwork {
        network: list.to_directed(a.labels)?,
        nodes: list.nodes,
        dropped_self_loops: list.dropped_self_loops,
        warnings: a.warnings,
    })
}

/// Pairs of `list` re-indexed into `nodes`; ids unknown to `nodes` are
/// reported as unlabelled.
pub fn reindex(list: &EdgeList, nodes: &NodeIndex) -> Result<Vec<(usize, usize)>> {
    let map: Vec<Option<usize>> = list.nodes.ids().iter().map(|id| nodes.get(id)).collect();
    let unknown: Vec<String> = list
        .nodes
        .ids()
        .iter()
        .zip(&map)
        .filter(|(_, m)| m.is_none())
        .map(|(id, _)| id.clone())
        .collect();
    if !unknown.is_empty() {
        return Err(Error::MissingLabels(unknown));
    }
    let mut pairs: Vec<(usize, usize)> = list
        .pairs
        .iter()
        .map(|&(a, b)| {
            let (a, b) = (map[a].unwrap(), map[b].unwrap());
            if list.directed { (a, b) } else { (a.min(b), a.max(b)) }
        })
        .collect();
    if !list.directed {
        pairs.sort_unstable();
    }
    Ok(pairs)
}

/// Two undirected replicates over one node set. Indices follow the first
/// edge list, then label-only nodes.
pub fn load_undirected_pair(
    edges: &Path,
    edges_star: &Path,
    labels: &Path,
) -> Result<(LoadedNetwork<LabeledNetwork>, LabeledNetwork)> {
    let first = load_undirected(edges, labels)?;
    let second = parse_edge_list(edges_star, false)?;
    let pairs = reindex(&second, &first.nodes)?;
    let net = LabeledNetwork::from_edges(first.network.labels().to_vec(), &pairs)?;
    Ok((first, net))
}

fn io(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

/// Writes `src,dst` lines using `ids[i]` as the name of node `i`.
pub fn write_edge_list<W: Write>(out: &mut W, pairs: &[(usize, usize)], ids: &[String]) -> Result<()> {
    for &(a, b) in pairs {
        writeln!(out, "{},{}", ids[a], ids[b]).map_err(io)?;
    }
    Ok(())
}

pub fn write_labels<W: Write>(out: &mut W, labels: &[Group], ids: &[String]) -> Result<()> {
    for (id, g) in ids.iter().zip(labels) {
        writeln!(out, "{},{}", id, g.tag()).map_err(io)?;
    }
    Ok(())
}

/// Node names `0..n` as strings.
pub fn default_ids(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}
