//! Independent oracles shared by the integration suites.
//!
//! These deliberately avoid the library's fixed-point machinery: types are
//! recovered by brute-force walk enumeration and distances by
//! Floyd–Warshall, so agreement with the implementation is meaningful.

// Compiled into every integration test target; not all of them use every item.
#![allow(dead_code)]

use std::collections::BTreeSet;

use provsum::model::{CoreKind, NodeId, ProvDocument};

/// Level-i provenance types of a node by enumerating every directed walk of
/// exactly `level` edges and rendering its label nesting over each base type
/// of the endpoint.
pub fn oracle_types(doc: &ProvDocument, node: &NodeId, level: usize) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut prefix = Vec::new();
    let mut steps = 0usize;
    walk(doc, node, level, &mut prefix, &mut out, &mut steps);
    out
}

fn walk(
    doc: &ProvDocument,
    current: &NodeId,
    remaining: usize,
    prefix: &mut Vec<&'static str>,
    out: &mut BTreeSet<String>,
    steps: &mut usize,
) {
    *steps += 1;
    assert!(*steps < 20_000_000, "walk enumeration budget exceeded");
    if remaining == 0 {
        let node = doc.node(current).expect("walk stays inside the document");
        let bases = node
            .core_types
            .iter()
            .map(|k| k.name().to_string())
            .chain(node.app_types.iter().cloned());
        for base in bases {
            let mut term = base;
            for label in prefix.iter().rev() {
                term = format!("{label}({term})");
            }
            out.insert(term);
        }
        return;
    }
    for edge in doc.edges().filter(|e| &e.src == current) {
        prefix.push(edge.label.short_name());
        walk(doc, &edge.dst, remaining - 1, prefix, out, steps);
        prefix.pop();
    }
}

/// Maximum finite distance by all-pairs Floyd–Warshall: the largest finite
/// shortest-path length from a node carrying a core kind to an entity,
/// excluding d(x,x).
pub fn oracle_mfd(doc: &ProvDocument) -> Option<usize> {
    let nodes: Vec<&NodeId> = doc.node_ids().collect();
    let n = nodes.len();
    let index = |id: &NodeId| nodes.iter().position(|x| *x == id).unwrap();
    const INF: usize = usize::MAX / 4;
    let mut dist = vec![vec![INF; n]; n];
    for (i, row) in dist.iter_mut().enumerate() {
        row[i] = 0;
    }
    for e in doc.edges() {
        let (i, j) = (index(&e.src), index(&e.dst));
        dist[i][j] = dist[i][j].min(1);
    }
    for mid in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = dist[i][mid] + dist[mid][j];
                if via < dist[i][j] {
                    dist[i][j] = via;
                }
            }
        }
    }
    let mut best = None;
    for (i, src) in nodes.iter().enumerate() {
        if doc.node(src).unwrap().core_types.is_empty() {
            continue;
        }
        for (j, dst) in nodes.iter().enumerate() {
            if i == j || dist[i][j] >= INF {
                continue;
            }
            if doc.node(dst).unwrap().core_types.contains(&CoreKind::Entity) {
                best = Some(dist[i][j].max(best.unwrap_or(0)));
            }
        }
    }
    best
}

/// Rendered strings of one signature level, for oracle comparison.
pub fn rendered_level(
    table: &provsum::SignatureTable,
    node: &NodeId,
    level: usize,
) -> BTreeSet<String> {
    table
        .signature(node)
        .expect("node has a signature")
        .level(level)
        .iter()
        .map(|t| table.interner().canonical(*t).to_string())
        .collect()
}

/// The cyclic four-node document used across suites.
pub fn cycle_doc() -> ProvDocument {
    ProvDocument::from_json_str(CYCLE_JSON).expect("fixture parses")
}

pub const CYCLE_JSON: &str = r#"{
    "entity": {"e1": {}, "e2": {}},
    "activity": {"a": {}},
    "agent": {"ag": {}},
    "wasGeneratedBy": {
        "_:g1": {"prov:entity": "e1", "prov:activity": "a"},
        "_:g2": {"prov:entity": "e2", "prov:activity": "a"}
    },
    "used": {
        "_:u1": {"prov:activity": "a", "prov:entity": "e1"},
        "_:u2": {"prov:activity": "a", "prov:entity": "e2"}
    },
    "wasAttributedTo": {"_:at1": {"prov:entity": "e1", "prov:agent": "ag"}},
    "wasDerivedFrom": {"_:d1": {"prov:generatedEntity": "e2", "prov:usedEntity": "e1"}}
}"#;
