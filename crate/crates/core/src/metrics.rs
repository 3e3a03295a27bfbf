//! Graph measurements and synthetic generators.
//!
//! Covers the provenance-specific diameter (maximum finite distance to
//! entities), per-level type counts with plateau detection, per-kind
//! compression ratios, thin-edge outlier detection on summaries, and seeded
//! generators for chain, repeated-pattern, and random documents.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::model::{CoreKind, NodeId, ProvDocument, ProvEdge, ProvNode, RelationLabel};
use crate::ptype::{Direction, TypeLimitExceeded, TypeLimits, compute_signatures};
use crate::summary::{Summary, SummaryEdge, summarize};

/// Maximum finite distance: the largest finite shortest-path length from an
/// entity, activity, or agent to an entity, excluding the trivial d(x,x)=0.
pub fn compute_mfd(doc: &ProvDocument) -> Option<usize> {
    let nodes: Vec<&NodeId> = doc.node_ids().collect();
    let index: HashMap<&NodeId, usize> = nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let mut adjacency = vec![Vec::new(); nodes.len()];
    for e in doc.edges() {
        adjacency[index[&e.src]].push(index[&e.dst]);
    }
    let is_entity: Vec<bool> = nodes
        .iter()
        .map(|id| doc.node(id).unwrap().core_types.contains(&CoreKind::Entity))
        .collect();

    let mut best: Option<usize> = None;
    for (start, id) in nodes.iter().enumerate() {
        // Sources must carry some core kind; the three source categories
        // (entity, activity, agent) together cover exactly those nodes.
        if doc.node(id).unwrap().core_types.is_empty() {
            continue;
        }
        let mut dist = vec![usize::MAX; nodes.len()];
        dist[start] = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &v in &adjacency[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        for v in 0..nodes.len() {
            if v != start && is_entity[v] && dist[v] != usize::MAX {
                best = Some(best.unwrap_or(0).max(dist[v]));
            }
        }
    }
    best
}

/// Number of summary types at every level 0..=k_max (forward direction).
///
/// Computed from one signature pass at k_max: the count at level k equals
/// the number of distinct signature prefixes of length k+1.
pub fn type_counts_over_k(
    doc: &ProvDocument,
    k_max: usize,
    limits: &TypeLimits,
) -> Result<BTreeMap<usize, usize>, TypeLimitExceeded> {
    let table = compute_signatures(doc, k_max, Direction::Forward, limits)?;
    let mut counts = BTreeMap::new();
    for k in 0..=k_max {
        let distinct: BTreeSet<String> = table
            .iter()
            .map(|(_, sig)| sig.prefix_key(table.interner(), k))
            .collect();
        counts.insert(k, distinct.len());
    }
    Ok(counts)
}

/// Where the type count stops growing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlateauResult {
    Reached(usize),
    NotReached,
}

impl Serialize for PlateauResult {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            PlateauResult::Reached(k) => serializer.serialize_u64(*k as u64),
            PlateauResult::NotReached => serializer.serialize_str("not-reached"),
        }
    }
}

/// Smallest k from which the count stays constant through k_max.
///
/// Only reported once the probe is conclusive: for a graph with edges the
/// probed range must reach the MFD (no distinct type can propagate on longer
/// chains); an edgeless graph can never refine, so its plateau is level 0.
/// Everything else is `NotReached`.
pub fn detect_plateau(
    counts: &BTreeMap<usize, usize>,
    mfd: Option<usize>,
    has_edges: bool,
) -> PlateauResult {
    let Some((&k_max, &last)) = counts.iter().next_back() else {
        return PlateauResult::NotReached;
    };
    let mut plateau = k_max;
    for (&k, &count) in counts.iter().rev().skip(1) {
        if count == last {
            plateau = k;
        } else {
            break;
        }
    }
    match mfd {
        Some(d) if k_max >= d => PlateauResult::Reached(plateau),
        Some(_) => PlateauResult::NotReached,
        None if !has_edges => PlateauResult::Reached(plateau),
        None => PlateauResult::NotReached,
    }
}

/// Per-kind ratio `summary types containing the kind : nodes of the kind`.
/// Kinds absent from the document are omitted.
pub fn compression_ratios(
    doc: &ProvDocument,
    k: usize,
    limits: &TypeLimits,
) -> Result<BTreeMap<CoreKind, f64>, TypeLimitExceeded> {
    let summary = summarize(doc, k, Direction::Forward, limits)?;
    let assignment = summary.assignment.as_ref().expect("generated summary");
    let mut ratios = BTreeMap::new();
    for kind in CoreKind::ALL {
        let mut node_count = 0usize;
        let mut types: BTreeSet<&String> = BTreeSet::new();
        for node in doc.nodes() {
            if node.core_types.contains(&kind) {
                node_count += 1;
                types.insert(&assignment[&node.id]);
            }
        }
        if node_count > 0 {
            ratios.insert(kind, types.len() as f64 / node_count as f64);
        }
    }
    Ok(ratios)
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("outlier threshold must lie in (0, 1), got {0}")]
pub struct InvalidThreshold(pub f64);

/// A summary edge whose count is thin relative to its neighborhood.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutlierEdge {
    pub edge: SummaryEdge,
    pub sibling_max_count: u64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutlierReport {
    pub threshold: f64,
    pub flagged: Vec<OutlierEdge>,
}

impl OutlierReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Flags summary edges whose count falls below `threshold` times the largest
/// count among edges touching either of their endpoints.
pub fn outlier_edges(s: &Summary, threshold: f64) -> Result<OutlierReport, InvalidThreshold> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(InvalidThreshold(threshold));
    }
    let mut flagged = Vec::new();
    for e in &s.edges {
        let sibling_max = s
            .edges
            .iter()
            .filter(|other| {
                other.src == e.src
                    || other.dst == e.src
                    || other.src == e.dst
                    || other.dst == e.dst
            })
            .map(|other| other.count)
            .max()
            .unwrap_or(e.count);
        let ratio = e.count as f64 / sibling_max as f64;
        if ratio < threshold {
            flagged.push(OutlierEdge {
                edge: e.clone(),
                sibling_max_count: sibling_max,
                ratio,
            });
        }
    }
    Ok(OutlierReport { threshold, flagged })
}

/// (type id, node weight) pairs in id order.
pub fn scatter_data(s: &Summary) -> Vec<(String, u64)> {
    s.types
        .iter()
        .map(|t| (t.id.clone(), t.node_weight))
        .collect()
}

fn ser_mfd<S: Serializer>(mfd: &Option<usize>, serializer: S) -> Result<S::Ok, S::Error> {
    match mfd {
        Some(d) => serializer.serialize_u64(*d as u64),
        None => serializer.serialize_str("none"),
    }
}

/// Whole-document measurement bundle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub n_nodes: usize,
    pub n_edges: usize,
    pub max_in_degree: usize,
    #[serde(serialize_with = "ser_mfd")]
    pub mfd: Option<usize>,
    pub type_counts: BTreeMap<usize, usize>,
    pub plateau_k: PlateauResult,
    pub compression: BTreeMap<usize, BTreeMap<CoreKind, f64>>,
}

impl MetricsReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Computes the full report; heavier than a single summary because it probes
/// every level up to k_max and runs all-pairs BFS for the MFD.
pub fn metrics_report(
    doc: &ProvDocument,
    k_max: usize,
    limits: &TypeLimits,
) -> Result<MetricsReport, TypeLimitExceeded> {
    let mut in_degree: BTreeMap<&NodeId, usize> = BTreeMap::new();
    for e in doc.edges() {
        *in_degree.entry(&e.dst).or_insert(0) += 1;
    }
    let mfd = compute_mfd(doc);
    let type_counts = type_counts_over_k(doc, k_max, limits)?;
    let plateau_k = detect_plateau(&type_counts, mfd, doc.edge_count() > 0);
    let mut compression = BTreeMap::new();
    for k in 0..=k_max {
        compression.insert(k, compression_ratios(doc, k, limits)?);
    }
    Ok(MetricsReport {
        n_nodes: doc.node_count(),
        n_edges: doc.edge_count(),
        max_in_degree: in_degree.values().copied().max().unwrap_or(0),
        mfd,
        type_counts,
        plateau_k,
        compression,
    })
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeneratorError {
    #[error("generator size must be at least {min}, got {got}")]
    InvalidSize { min: usize, got: usize },
    #[error("edge density must be a finite non-negative number, got {0}")]
    InvalidDensity(f64),
}

/// A derivation chain `e_{n-1} -wdf-> ... -wdf-> e_0`, all entities.
pub fn generate_chain(n: usize) -> Result<ProvDocument, GeneratorError> {
    if n < 1 {
        return Err(GeneratorError::InvalidSize { min: 1, got: n });
    }
    let mut doc = ProvDocument::new();
    for i in 0..n {
        doc.add_node(ProvNode::entity(format!("e{i}"))).unwrap();
    }
    for i in 0..n - 1 {
        doc.add_edge(
            format!("e{}", i + 1),
            RelationLabel::WasDerivedFrom,
            format!("e{i}"),
        )
        .unwrap();
    }
    Ok(doc)
}

/// Disjoint copies of a fixed motif sharing one global agent.
///
/// Each copy holds a generated entity, an activity, and a source entity:
/// `gen -wgb-> act`, `act -used-> src`, `act -waw-> agent`,
/// `gen -wat-> agent`. The seed only decorates node identifiers, so
/// summaries are equivalent across seeds.
pub fn generate_pattern_graph(repeats: usize, seed: u64) -> Result<ProvDocument, GeneratorError> {
    if repeats < 1 {
        return Err(GeneratorError::InvalidSize {
            min: 1,
            got: repeats,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tag: u32 = rng.random();
    let mut doc = ProvDocument::new();
    let agent = format!("agent_{tag:08x}");
    doc.add_node(ProvNode::agent(agent.as_str())).unwrap();
    for i in 0..repeats {
        let generated = format!("gen{i}_{tag:08x}");
        let activity = format!("act{i}_{tag:08x}");
        let source = format!("src{i}_{tag:08x}");
        doc.add_node(ProvNode::entity(generated.as_str())).unwrap();
        doc.add_node(ProvNode::activity(activity.as_str())).unwrap();
        doc.add_node(ProvNode::entity(source.as_str())).unwrap();
        doc.add_edge(generated.as_str(), RelationLabel::WasGeneratedBy, activity.as_str())
            .unwrap();
        doc.add_edge(activity.as_str(), RelationLabel::Used, source.as_str())
            .unwrap();
        doc.add_edge(activity.as_str(), RelationLabel::WasAssociatedWith, agent.as_str())
            .unwrap();
        doc.add_edge(generated.as_str(), RelationLabel::WasAttributedTo, agent.as_str())
            .unwrap();
    }
    Ok(doc)
}

/// Pattern graph with one cross-copy `used` edge injected.
///
/// The extra edge reuses a (label, target kind) combination already present
/// on its source, so no signature changes at k=1; it only materializes as a
/// new thin summary edge. Returns the injected instance edge.
pub fn generate_pattern_graph_with_anomaly(
    repeats: usize,
    seed: u64,
) -> Result<(ProvDocument, ProvEdge), GeneratorError> {
    if repeats < 2 {
        return Err(GeneratorError::InvalidSize {
            min: 2,
            got: repeats,
        });
    }
    let mut doc = generate_pattern_graph(repeats, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tag: u32 = rng.random();
    let src = format!("act0_{tag:08x}");
    let dst = format!("gen{}_{tag:08x}", repeats - 1);
    doc.add_edge(src.as_str(), RelationLabel::Used, dst.as_str())
        .unwrap();
    Ok((doc, ProvEdge::new(src, RelationLabel::Used, dst)))
}

/// Seeded random document with label-signature-respecting edges.
///
/// Roughly half the nodes are entities, a third activities, the rest agents;
/// a quarter of the entities carry an application type. The edge budget is
/// `floor(n * edge_density)`; self-loops and duplicates are skipped.
pub fn generate_random(
    n: usize,
    edge_density: f64,
    seed: u64,
) -> Result<ProvDocument, GeneratorError> {
    if n < 1 {
        return Err(GeneratorError::InvalidSize { min: 1, got: n });
    }
    if !edge_density.is_finite() || edge_density < 0.0 {
        return Err(GeneratorError::InvalidDensity(edge_density));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut doc = ProvDocument::new();
    let mut pools: BTreeMap<CoreKind, Vec<String>> = BTreeMap::new();
    for i in 0..n {
        let id = format!("n{i}");
        let kind = match rng.random_range(0..10) {
            0..5 => CoreKind::Entity,
            5..8 => CoreKind::Activity,
            _ => CoreKind::Agent,
        };
        let mut node = ProvNode::of_kind(id.as_str(), kind);
        if kind == CoreKind::Entity && rng.random_range(0..4) == 0 {
            let app = ["Plan", "Document", "Collection"][rng.random_range(0..3)];
            node = node.with_app_type(app);
        }
        doc.add_node(node).unwrap();
        pools.entry(kind).or_default().push(id);
    }

    let target = (n as f64 * edge_density).floor() as usize;
    let mut added = 0usize;
    let mut attempts = 0usize;
    let budget = 20 * target + 100;
    let mut seen = BTreeSet::new();
    while added < target && attempts < budget {
        attempts += 1;
        let label = RelationLabel::ALL[rng.random_range(0..RelationLabel::ALL.len())];
        let Some(sources) = pools.get(&label.source_kind()) else {
            continue;
        };
        let Some(targets) = pools.get(&label.target_kind()) else {
            continue;
        };
        let src = &sources[rng.random_range(0..sources.len())];
        let dst = &targets[rng.random_range(0..targets.len())];
        if src == dst {
            continue;
        }
        if seen.insert((src.clone(), dst.clone(), label)) {
            doc.add_edge(src.as_str(), label, dst.as_str()).unwrap();
            added += 1;
        }
    }
    Ok(doc)
}
