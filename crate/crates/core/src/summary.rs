//! Weighted summaries: node aggregation by signature, edge aggregation with
//! counts, and summary equivalence up to type naming.
//!
//! [`summarize`] groups nodes with equal signatures into summary types,
//! counts the merged nodes and edges, and records which summary types the
//! document's roots map to. Output is deterministic: type ids `t_0, t_1, ...`
//! are assigned in lexicographic order of signature keys, and serialized
//! arrays are sorted.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{NodeId, ProvDocument, RelationLabel};
use crate::ptype::{Direction, SignatureTable, TypeLimitExceeded, TypeLimits, compute_signatures};

/// One aggregated node class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryType {
    pub id: String,
    /// Canonical type strings per level, dense from 0 to k.
    pub signature: BTreeMap<usize, Vec<String>>,
    /// Number of instance nodes merged into this type.
    #[serde(rename = "nodes")]
    pub node_weight: u64,
}

impl SummaryType {
    /// Canonical signature key; equal iff the signatures are equal.
    pub fn signature_key(&self) -> String {
        let dense: Vec<Vec<&str>> = self
            .signature
            .values()
            .map(|level| level.iter().map(String::as_str).collect())
            .collect();
        crate::ptype::render_signature_key(&dense)
    }

    /// Level-0 base-type strings.
    pub fn base_types(&self) -> &[String] {
        self.signature
            .get(&0)
            .map(|v| v.as_slice())
            .unwrap_or_default()
    }
}

/// One aggregated edge class with its instance count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryEdge {
    pub src: String,
    pub dst: String,
    pub label: RelationLabel,
    pub count: u64,
}

/// The output of aggregation by provenance types.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub k: usize,
    pub direction: Direction,
    pub types: Vec<SummaryType>,
    pub edges: Vec<SummaryEdge>,
    pub roots: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignment: Option<BTreeMap<NodeId, String>>,
}

/// Validation failures for summaries built by hand or loaded from JSON.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SummaryError {
    #[error("duplicate or empty type id `{0}`")]
    BadTypeId(String),
    #[error("types `{0}` and `{1}` share one signature")]
    DuplicateSignature(String, String),
    #[error("type `{0}` has signature levels that are not dense 0..=k")]
    SparseSignature(String),
    #[error("type `{0}` has zero weight")]
    ZeroWeight(String),
    #[error("edge references unknown type `{0}`")]
    UnknownType(String),
    #[error("duplicate edge ({src}, {dst}, {label})")]
    DuplicateEdge {
        src: String,
        dst: String,
        label: RelationLabel,
    },
    #[error("edge ({src}, {dst}, {label}) has zero count")]
    ZeroCount {
        src: String,
        dst: String,
        label: RelationLabel,
    },
    #[error("root references unknown type `{0}`")]
    UnknownRoot(String),
    #[error("assignment references unknown type `{0}`")]
    UnknownAssignmentType(String),
}

/// Errors raised while loading a summary from JSON.
#[derive(Debug, Error)]
pub enum SummaryParseError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid summary: {0}")]
    Invalid(#[from] SummaryError),
}

impl Summary {
    pub fn type_by_id(&self, id: &str) -> Option<&SummaryType> {
        self.types.iter().find(|t| t.id == id)
    }

    pub fn node_weight_total(&self) -> u64 {
        self.types.iter().map(|t| t.node_weight).sum()
    }

    pub fn edge_count_total(&self) -> u64 {
        self.edges.iter().map(|e| e.count).sum()
    }

    pub fn validate(&self) -> Result<(), SummaryError> {
        let mut ids = BTreeMap::new();
        for t in &self.types {
            if t.id.is_empty() || ids.insert(t.id.clone(), t.signature_key()).is_some() {
                return Err(SummaryError::BadTypeId(t.id.clone()));
            }
            if t.node_weight == 0 {
                return Err(SummaryError::ZeroWeight(t.id.clone()));
            }
            let dense = (0..t.signature.len()).all(|i| t.signature.contains_key(&i));
            if t.signature.is_empty() || !dense || t.signature.len() != self.k + 1 {
                return Err(SummaryError::SparseSignature(t.id.clone()));
            }
        }
        let mut by_key: BTreeMap<&String, &String> = BTreeMap::new();
        for (id, key) in &ids {
            if let Some(other) = by_key.insert(key, id) {
                return Err(SummaryError::DuplicateSignature(other.clone(), id.clone()));
            }
        }
        let mut seen = BTreeMap::new();
        for e in &self.edges {
            for endpoint in [&e.src, &e.dst] {
                if !ids.contains_key(endpoint) {
                    return Err(SummaryError::UnknownType(endpoint.clone()));
                }
            }
            if e.count == 0 {
                return Err(SummaryError::ZeroCount {
                    src: e.src.clone(),
                    dst: e.dst.clone(),
                    label: e.label,
                });
            }
            if seen
                .insert((e.src.clone(), e.dst.clone(), e.label), ())
                .is_some()
            {
                return Err(SummaryError::DuplicateEdge {
                    src: e.src.clone(),
                    dst: e.dst.clone(),
                    label: e.label,
                });
            }
        }
        for r in &self.roots {
            if !ids.contains_key(r) {
                return Err(SummaryError::UnknownRoot(r.clone()));
            }
        }
        if let Some(assignment) = &self.assignment {
            for t in assignment.values() {
                if !ids.contains_key(t) {
                    return Err(SummaryError::UnknownAssignmentType(t.clone()));
                }
            }
        }
        Ok(())
    }

    pub fn from_json_bytes(input: &[u8]) -> Result<Summary, SummaryParseError> {
        let mut summary: Summary = serde_json::from_slice(input)?;
        summary.sort();
        summary.validate()?;
        Ok(summary)
    }

    pub fn from_json_str(input: &str) -> Result<Summary, SummaryParseError> {
        Self::from_json_bytes(input.as_bytes())
    }

    /// Deterministic JSON rendering; byte-identical across runs.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }

    /// Restores the canonical array ordering (types by id, edges by
    /// (src, dst, label), roots ascending).
    fn sort(&mut self) {
        self.types.sort_by(|a, b| type_id_order(&a.id, &b.id));
        self.edges.sort_by(|a, b| {
            type_id_order(&a.src, &b.src)
                .then_with(|| type_id_order(&a.dst, &b.dst))
                .then_with(|| a.label.short_name().cmp(b.label.short_name()))
        });
        self.roots.sort_by(|a, b| type_id_order(a, b));
        self.roots.dedup();
    }
}

/// Orders generated ids `t_<n>` numerically, anything else as plain strings.
fn type_id_order(a: &str, b: &str) -> std::cmp::Ordering {
    fn numeric(id: &str) -> Option<u64> {
        id.strip_prefix("t_")?.parse().ok()
    }
    match (numeric(a), numeric(b)) {
        (Some(x), Some(y)) => x.cmp(&y),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.cmp(b),
    }
}

/// Groups nodes by signature key into summary types.
///
/// Ids `t_0, t_1, ...` follow the lexicographic order of signature keys, so
/// the naming is a pure function of the signatures.
pub fn aggregate_nodes(table: &SignatureTable) -> (Vec<SummaryType>, BTreeMap<NodeId, String>) {
    type Class<'a> = (Vec<&'a NodeId>, BTreeMap<usize, Vec<String>>);
    let mut classes: BTreeMap<String, Class> = BTreeMap::new();
    for (id, sig) in table.iter() {
        let key = sig.key(table.interner());
        classes
            .entry(key)
            .or_insert_with(|| (Vec::new(), sig.export(table.interner())))
            .0
            .push(id);
    }

    let mut types = Vec::with_capacity(classes.len());
    let mut assignment = BTreeMap::new();
    for (index, (_, (members, signature))) in classes.into_iter().enumerate() {
        let id = format!("t_{index}");
        for node in &members {
            assignment.insert((*node).clone(), id.clone());
        }
        types.push(SummaryType {
            id,
            signature,
            node_weight: members.len() as u64,
        });
    }
    (types, assignment)
}

/// Counts instance edges per (source type, target type, label) cell.
/// Zero-count cells are omitted.
pub fn aggregate_edges(
    doc: &ProvDocument,
    assignment: &BTreeMap<NodeId, String>,
) -> Vec<SummaryEdge> {
    let mut counts: BTreeMap<(&String, &String, RelationLabel), u64> = BTreeMap::new();
    for edge in doc.edges() {
        let src = assignment
            .get(&edge.src)
            .expect("assignment total on document nodes");
        let dst = assignment
            .get(&edge.dst)
            .expect("assignment total on document nodes");
        *counts.entry((src, dst, edge.label)).or_insert(0) += 1;
    }
    let mut edges: Vec<SummaryEdge> = counts
        .into_iter()
        .map(|((src, dst, label), count)| SummaryEdge {
            src: src.clone(),
            dst: dst.clone(),
            label,
            count,
        })
        .collect();
    edges.sort_by(|a, b| {
        type_id_order(&a.src, &b.src)
            .then_with(|| type_id_order(&a.dst, &b.dst))
            .then_with(|| a.label.short_name().cmp(b.label.short_name()))
    });
    edges
}

/// Aggregation by provenance types: the level-k summary of a document.
pub fn summarize(
    doc: &ProvDocument,
    k: usize,
    direction: Direction,
    limits: &TypeLimits,
) -> Result<Summary, TypeLimitExceeded> {
    let table = compute_signatures(doc, k, direction, limits)?;
    Ok(summarize_from_signatures(doc, &table))
}

/// Builds the summary from precomputed signatures.
pub fn summarize_from_signatures(doc: &ProvDocument, table: &SignatureTable) -> Summary {
    let (types, assignment) = aggregate_nodes(table);
    let edges = aggregate_edges(doc, &assignment);
    let mut roots: Vec<String> = doc
        .root_ids()
        .iter()
        .map(|id| assignment[id].clone())
        .collect();
    roots.sort_by(|a, b| type_id_order(a, b));
    roots.dedup();
    Summary {
        k: table.k(),
        direction: table.direction(),
        types,
        edges,
        roots,
        assignment: Some(assignment),
    }
}

/// A summary stripped of its generated type names, for comparison.
#[derive(Debug, PartialEq, Eq)]
struct CanonicalView {
    types: BTreeMap<String, u64>,
    edges: BTreeMap<(String, String, RelationLabel), u64>,
    roots: Vec<String>,
}

fn canonical_view(s: &Summary, with_weights: bool) -> CanonicalView {
    let key_of: BTreeMap<&String, String> = s
        .types
        .iter()
        .map(|t| (&t.id, t.signature_key()))
        .collect();
    let types = s
        .types
        .iter()
        .map(|t| {
            (
                t.signature_key(),
                if with_weights { t.node_weight } else { 0 },
            )
        })
        .collect();
    let edges = s
        .edges
        .iter()
        .map(|e| {
            (
                (key_of[&e.src].clone(), key_of[&e.dst].clone(), e.label),
                if with_weights { e.count } else { 0 },
            )
        })
        .collect();
    let mut roots: Vec<String> = s.roots.iter().map(|r| key_of[r].clone()).collect();
    roots.sort();
    roots.dedup();
    CanonicalView {
        types,
        edges,
        roots,
    }
}

/// True iff the two summaries are identical after replacing each type id by
/// its signature key: signatures, weights, edges, counts, and roots match.
pub fn summaries_equivalent(a: &Summary, b: &Summary) -> bool {
    canonical_view(a, true) == canonical_view(b, true)
}

/// Like [`summaries_equivalent`] but ignoring node weights and edge counts.
pub fn summaries_equivalent_ignoring_weights(a: &Summary, b: &Summary) -> bool {
    canonical_view(a, false) == canonical_view(b, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ProvNode;
    use crate::ptype::Direction;

    fn chain(n: usize) -> ProvDocument {
        let mut doc = ProvDocument::new();
        for i in 0..n {
            doc.add_node(ProvNode::entity(format!("e{i}"))).unwrap();
        }
        for i in 0..n.saturating_sub(1) {
            doc.add_edge(
                format!("e{}", i + 1),
                RelationLabel::WasDerivedFrom,
                format!("e{i}"),
            )
            .unwrap();
        }
        doc
    }

    fn cycle_doc() -> ProvDocument {
        let mut doc = ProvDocument::new();
        doc.add_node(ProvNode::entity("e1")).unwrap();
        doc.add_node(ProvNode::entity("e2")).unwrap();
        doc.add_node(ProvNode::activity("a")).unwrap();
        doc.add_node(ProvNode::agent("ag")).unwrap();
        doc.add_edge("e1", RelationLabel::WasGeneratedBy, "a").unwrap();
        doc.add_edge("e2", RelationLabel::WasGeneratedBy, "a").unwrap();
        doc.add_edge("a", RelationLabel::Used, "e1").unwrap();
        doc.add_edge("a", RelationLabel::Used, "e2").unwrap();
        doc.add_edge("e1", RelationLabel::WasAttributedTo, "ag").unwrap();
        doc.add_edge("e2", RelationLabel::WasDerivedFrom, "e1").unwrap();
        doc
    }

    #[test]
    fn chain_k1_aggregates_to_two_types() {
        let s = summarize(&chain(4), 1, Direction::Forward, &TypeLimits::default()).unwrap();
        assert_eq!(s.types.len(), 2);
        // t_0 is the end of the chain ({Entity}/{}), t_1 the other three.
        assert_eq!(s.types[0].id, "t_0");
        assert_eq!(s.types[0].node_weight, 1);
        assert!(s.types[0].signature[&1].is_empty());
        assert_eq!(s.types[1].node_weight, 3);
        assert_eq!(s.types[1].signature[&1], vec!["wdf(Entity)".to_string()]);

        assert_eq!(
            s.edges,
            vec![
                SummaryEdge {
                    src: "t_1".into(),
                    dst: "t_0".into(),
                    label: RelationLabel::WasDerivedFrom,
                    count: 1,
                },
                SummaryEdge {
                    src: "t_1".into(),
                    dst: "t_1".into(),
                    label: RelationLabel::WasDerivedFrom,
                    count: 2,
                },
            ]
        );
        assert_eq!(s.roots, vec!["t_1".to_string()]);
    }

    #[test]
    fn k0_all_plain_entities_collapse_to_one_type() {
        let mut doc = ProvDocument::new();
        for i in 0..7 {
            doc.add_node(ProvNode::entity(format!("n{i}"))).unwrap();
        }
        let s = summarize(&doc, 0, Direction::Forward, &TypeLimits::default()).unwrap();
        assert_eq!(s.types.len(), 1);
        assert_eq!(s.types[0].node_weight, 7);
    }

    #[test]
    fn empty_document_yields_empty_summary() {
        let s = summarize(
            &ProvDocument::new(),
            2,
            Direction::Forward,
            &TypeLimits::default(),
        )
        .unwrap();
        assert!(s.types.is_empty());
        assert!(s.edges.is_empty());
        assert!(s.roots.is_empty());
    }

    #[test]
    fn cycle_k0_edge_aggregation() {
        let s = summarize(&cycle_doc(), 0, Direction::Forward, &TypeLimits::default()).unwrap();
        assert_eq!(s.types.len(), 3);
        let weight_of = |base: &str| {
            s.types
                .iter()
                .find(|t| t.base_types() == [base.to_string()])
                .unwrap()
                .node_weight
        };
        assert_eq!(weight_of("Entity"), 2);
        assert_eq!(weight_of("Activity"), 1);
        assert_eq!(weight_of("Agent"), 1);

        let id_of = |base: &str| {
            s.types
                .iter()
                .find(|t| t.base_types() == [base.to_string()])
                .unwrap()
                .id
                .clone()
        };
        let (e, a, g) = (id_of("Entity"), id_of("Activity"), id_of("Agent"));
        let count = |src: &str, dst: &str, label: RelationLabel| {
            s.edges
                .iter()
                .find(|x| x.src == src && x.dst == dst && x.label == label)
                .map(|x| x.count)
        };
        assert_eq!(count(&e, &a, RelationLabel::WasGeneratedBy), Some(2));
        assert_eq!(count(&a, &e, RelationLabel::Used), Some(2));
        assert_eq!(count(&e, &g, RelationLabel::WasAttributedTo), Some(1));
        assert_eq!(count(&e, &e, RelationLabel::WasDerivedFrom), Some(1));
        assert_eq!(s.edges.len(), 4);
    }

    #[test]
    fn single_entity_any_k() {
        let mut doc = ProvDocument::new();
        doc.add_node(ProvNode::entity("e")).unwrap();
        for k in [0, 1, 5] {
            let s = summarize(&doc, k, Direction::Forward, &TypeLimits::default()).unwrap();
            assert_eq!(s.types.len(), 1);
            assert_eq!(s.types[0].node_weight, 1);
            assert!(s.edges.is_empty());
        }
    }

    #[test]
    fn chain_k3_summary_isomorphic_to_chain() {
        let s = summarize(&chain(4), 3, Direction::Forward, &TypeLimits::default()).unwrap();
        assert_eq!(s.types.len(), 4);
        assert!(s.types.iter().all(|t| t.node_weight == 1));
        assert_eq!(s.edges.len(), 3);
        assert!(s.edges.iter().all(|e| e.count == 1));
    }

    #[test]
    fn weight_and_count_conservation() {
        for (doc, k) in [(cycle_doc(), 2), (chain(6), 1), (chain(6), 4)] {
            let s = summarize(&doc, k, Direction::Forward, &TypeLimits::default()).unwrap();
            assert_eq!(s.node_weight_total(), doc.node_count() as u64);
            assert_eq!(s.edge_count_total(), doc.edge_count() as u64);
        }
    }

    #[test]
    fn equivalence_is_invariant_under_id_permutation() {
        let s = summarize(&chain(4), 1, Direction::Forward, &TypeLimits::default()).unwrap();
        let mut renamed = s.clone();
        for t in &mut renamed.types {
            t.id = if t.id == "t_0" { "t_1".into() } else { "t_0".into() };
        }
        for e in &mut renamed.edges {
            for end in [&mut e.src, &mut e.dst] {
                *end = if *end == "t_0" { "t_1".into() } else { "t_0".into() };
            }
        }
        for r in &mut renamed.roots {
            *r = if *r == "t_0" { "t_1".into() } else { "t_0".into() };
        }
        renamed.assignment = None;
        assert!(summaries_equivalent(&s, &renamed));
    }

    #[test]
    fn equivalence_is_invariant_under_node_renaming() {
        let doc = cycle_doc();
        let mut renamed = ProvDocument::new();
        let rename = |id: &str| format!("urn:{id}");
        for node in doc.nodes() {
            let mut copy = ProvNode::new(rename(node.id.as_str()));
            copy.core_types = node.core_types.clone();
            copy.app_types = node.app_types.clone();
            renamed.add_node(copy).unwrap();
        }
        for edge in doc.edges() {
            renamed
                .add_edge(rename(edge.src.as_str()), edge.label, rename(edge.dst.as_str()))
                .unwrap();
        }
        let a = summarize(&doc, 1, Direction::Forward, &TypeLimits::default()).unwrap();
        let b = summarize(&renamed, 1, Direction::Forward, &TypeLimits::default()).unwrap();
        assert!(summaries_equivalent(&a, &b));
    }

    #[test]
    fn different_k_summaries_are_not_equivalent() {
        let doc = chain(4);
        let k1 = summarize(&doc, 1, Direction::Forward, &TypeLimits::default()).unwrap();
        let k3 = summarize(&doc, 3, Direction::Forward, &TypeLimits::default()).unwrap();
        assert!(!summaries_equivalent(&k1, &k3));
    }

    #[test]
    fn json_round_trip_and_shape() {
        let s = summarize(&cycle_doc(), 1, Direction::Forward, &TypeLimits::default()).unwrap();
        let json = s.to_json_string();
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["k"], 1);
        assert_eq!(value["direction"], "forward");
        assert!(value["types"][0]["nodes"].is_u64());
        assert!(value["types"][0]["signature"]["0"].is_array());
        let loaded = Summary::from_json_str(&json).unwrap();
        assert_eq!(s, loaded);
    }

    #[test]
    fn loading_rejects_unknown_edge_type() {
        let s = summarize(&chain(2), 0, Direction::Forward, &TypeLimits::default()).unwrap();
        let mut bad = s.clone();
        bad.edges.push(SummaryEdge {
            src: "t_9".into(),
            dst: "t_0".into(),
            label: RelationLabel::Used,
            count: 1,
        });
        let err = Summary::from_json_str(&bad.to_json_string()).unwrap_err();
        assert!(matches!(
            err,
            SummaryParseError::Invalid(SummaryError::UnknownType(t)) if t == "t_9"
        ));
    }

    #[test]
    fn serialized_output_is_deterministic() {
        let a = summarize(&cycle_doc(), 3, Direction::Forward, &TypeLimits::default()).unwrap();
        let b = summarize(&cycle_doc(), 3, Direction::Forward, &TypeLimits::default()).unwrap();
        assert_eq!(a.to_json_string(), b.to_json_string());
    }
}
