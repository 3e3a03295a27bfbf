//! Conformance of an instance graph to a summary via simulation.
//!
//! An instance node u is simulated by a summary type u' when every edge
//! `u -a-> v` is matched by a summary edge `Edges(u', v', a) > 0` with v
//! simulated by v'. The greatest simulation is computed by iterative
//! refinement from the full candidate relation; a graph conforms when every
//! node survives (structural mode) and, in rooted mode, when every instance
//! root is paired with a summary root.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::model::{NodeId, ProvDocument, ProvEdge, RelationLabel};
use crate::summary::Summary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConformanceMode {
    Structural,
    Rooted,
}

/// A simulation from instance nodes to summary types.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationRelation {
    pub pairs: BTreeSet<(NodeId, String)>,
    pub mode: ConformanceMode,
}

impl SimulationRelation {
    pub fn contains(&self, node: &NodeId, type_id: &str) -> bool {
        self.pairs
            .contains(&(node.clone(), type_id.to_string()))
    }

    pub fn types_of(&self, node: &NodeId) -> impl Iterator<Item = &str> {
        self.pairs
            .iter()
            .filter(move |(n, _)| n == node)
            .map(|(_, t)| t.as_str())
    }
}

/// Why a graph failed to conform.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub node: NodeId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge: Option<ProvEdge>,
    pub reason: String,
    /// Last candidate type the node was eliminated from (not serialized;
    /// the wire format carries node, edge, and reason only).
    #[serde(skip)]
    pub eliminated_type: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConformanceVerdict {
    pub conforms: bool,
    pub mode: ConformanceMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
    #[serde(skip)]
    pub witness: Option<SimulationRelation>,
}

impl ConformanceVerdict {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("verdict serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConformanceError {
    #[error("rooted conformance requires identifiable roots (declared or zero in-degree)")]
    NoRoots,
}

struct Refinement {
    nodes: Vec<NodeId>,
    types: Vec<String>,
    /// sim[u][t]: u is still a candidate for type index t.
    sim: Vec<Vec<bool>>,
    /// Per node, the pair and edge whose clause-(2) failure removed it last.
    last_elimination: Vec<Option<(usize, ProvEdge)>>,
}

fn refine(g: &ProvDocument, s: &Summary, strict_types: bool) -> Refinement {
    let nodes: Vec<NodeId> = g.node_ids().cloned().collect();
    let node_index: HashMap<&NodeId, usize> =
        nodes.iter().enumerate().map(|(i, n)| (n, i)).collect();
    let types: Vec<String> = s.types.iter().map(|t| t.id.clone()).collect();

    // Candidate initialization: unrestricted by default; the strict flag
    // additionally requires the node's base types to be a subset of the
    // type's level-0 signature.
    let mut sim: Vec<Vec<bool>> = if strict_types {
        nodes
            .iter()
            .map(|id| {
                let node = g.node(id).expect("node listed");
                let mut base: BTreeSet<&str> =
                    node.core_types.iter().map(|k| k.name()).collect();
                base.extend(node.app_types.iter().map(String::as_str));
                s.types
                    .iter()
                    .map(|t| {
                        let level0: BTreeSet<&str> =
                            t.base_types().iter().map(String::as_str).collect();
                        base.is_subset(&level0)
                    })
                    .collect()
            })
            .collect()
    } else {
        vec![vec![true; types.len()]; nodes.len()]
    };

    let type_index: HashMap<&str, usize> = types
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();
    let mut summary_adj: HashMap<(usize, RelationLabel), Vec<usize>> = HashMap::new();
    for e in &s.edges {
        if e.count == 0 {
            continue;
        }
        summary_adj
            .entry((type_index[e.src.as_str()], e.label))
            .or_default()
            .push(type_index[e.dst.as_str()]);
    }

    let mut out_edges: Vec<Vec<(RelationLabel, usize)>> = vec![Vec::new(); nodes.len()];
    for e in g.edges() {
        out_edges[node_index[&e.src]].push((e.label, node_index[&e.dst]));
    }

    let mut last_elimination: Vec<Option<(usize, ProvEdge)>> = vec![None; nodes.len()];

    // Delete pairs violating clause (2) until a fixed point. The greatest
    // simulation is unique, so the scan order does not affect the result.
    let mut changed = true;
    while changed {
        changed = false;
        for u in 0..nodes.len() {
            for t in 0..types.len() {
                if !sim[u][t] {
                    continue;
                }
                let violating = out_edges[u].iter().find(|(label, v)| {
                    !summary_adj
                        .get(&(t, *label))
                        .is_some_and(|succ| succ.iter().any(|t2| sim[*v][*t2]))
                });
                if let Some((label, v)) = violating {
                    sim[u][t] = false;
                    last_elimination[u] = Some((
                        t,
                        ProvEdge {
                            src: nodes[u].clone(),
                            dst: nodes[*v].clone(),
                            label: *label,
                        },
                    ));
                    changed = true;
                }
            }
        }
    }

    Refinement {
        nodes,
        types,
        sim,
        last_elimination,
    }
}

/// Largest relation in which every instance edge is matched by a summary
/// edge with the same label.
pub fn greatest_simulation(g: &ProvDocument, s: &Summary, strict_types: bool) -> SimulationRelation {
    let r = refine(g, s, strict_types);
    let mut pairs = BTreeSet::new();
    for (u, node) in r.nodes.iter().enumerate() {
        for (t, type_id) in r.types.iter().enumerate() {
            if r.sim[u][t] {
                pairs.insert((node.clone(), type_id.clone()));
            }
        }
    }
    SimulationRelation {
        pairs,
        mode: ConformanceMode::Structural,
    }
}

/// Decides conformance of `g` to `s`.
///
/// Structural mode: every node of `g` must appear in the greatest
/// simulation. Rooted mode additionally pairs every root of `g` with some
/// root of `s`, and errors when `g` has no identifiable roots.
pub fn check_conformance(
    g: &ProvDocument,
    s: &Summary,
    mode: ConformanceMode,
    strict_types: bool,
) -> Result<ConformanceVerdict, ConformanceError> {
    let roots: BTreeSet<NodeId> = match mode {
        ConformanceMode::Rooted => {
            let roots = g.root_ids();
            if roots.is_empty() {
                return Err(ConformanceError::NoRoots);
            }
            roots
        }
        ConformanceMode::Structural => BTreeSet::new(),
    };

    let r = refine(g, s, strict_types);

    for (u, node) in r.nodes.iter().enumerate() {
        if r.sim[u].iter().any(|&kept| kept) {
            continue;
        }
        let counterexample = match &r.last_elimination[u] {
            Some((t, edge)) => Counterexample {
                node: node.clone(),
                edge: Some(edge.clone()),
                reason: format!(
                    "edge `{} -{}-> {}` has no matching summary edge from candidate type `{}`",
                    edge.src,
                    edge.label,
                    edge.dst,
                    r.types[*t]
                ),
                eliminated_type: Some(r.types[*t].clone()),
            },
            None => Counterexample {
                node: node.clone(),
                edge: None,
                reason: format!("no candidate summary type admits node `{node}`"),
                eliminated_type: None,
            },
        };
        return Ok(ConformanceVerdict {
            conforms: false,
            mode,
            counterexample: Some(counterexample),
            witness: None,
        });
    }

    let mut pairs = BTreeSet::new();
    for (u, node) in r.nodes.iter().enumerate() {
        for (t, type_id) in r.types.iter().enumerate() {
            if r.sim[u][t] {
                pairs.insert((node.clone(), type_id.clone()));
            }
        }
    }

    if mode == ConformanceMode::Rooted {
        let summary_roots: BTreeSet<&String> = s.roots.iter().collect();
        for root in &roots {
            let paired = pairs
                .iter()
                .any(|(n, t)| n == root && summary_roots.contains(t));
            if !paired {
                return Ok(ConformanceVerdict {
                    conforms: false,
                    mode,
                    counterexample: Some(Counterexample {
                        node: root.clone(),
                        edge: None,
                        reason: format!(
                            "root `{root}` is not simulated by any summary root"
                        ),
                        eliminated_type: None,
                    }),
                    witness: None,
                });
            }
        }
    }

    Ok(ConformanceVerdict {
        conforms: true,
        mode,
        counterexample: None,
        witness: Some(SimulationRelation { pairs, mode }),
    })
}
