//! Graphviz DOT rendering of summaries.
//!
//! Node area scales with node weight, edge pen width with edge count
//! (`1 + 4 * count / max_count`). Node labels show the type id and its
//! level-0 base types; the full signature rides along as a tooltip. Output
//! is byte-deterministic.

use std::fmt::Write;

use crate::summary::Summary;

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

pub fn export_dot(s: &Summary) -> String {
    let mut out = String::from("digraph summary {\n");
    if s.types.is_empty() {
        out.push_str("}\n");
        return out;
    }
    out.push_str("  node [shape=ellipse];\n");

    let max_weight = s.types.iter().map(|t| t.node_weight).max().unwrap_or(1);
    for t in &s.types {
        let mut label = t.id.clone();
        if !t.base_types().is_empty() {
            label.push_str("\\n");
            label.push_str(&escape(&t.base_types().join(", ")));
        }
        write!(label, "\\n{} node(s)", t.node_weight).unwrap();
        // Side length for an area proportional to weight / max weight.
        let side = (0.25 + 3.75 * (t.node_weight as f64 / max_weight as f64)).sqrt();
        let peripheries = if s.roots.contains(&t.id) { 2 } else { 1 };
        writeln!(
            out,
            "  \"{}\" [label=\"{}\", width={:.2}, height={:.2}, peripheries={}, tooltip=\"{}\"];",
            escape(&t.id),
            label,
            side,
            side,
            peripheries,
            escape(&t.signature_key()),
        )
        .unwrap();
    }

    let max_count = s.edges.iter().map(|e| e.count).max().unwrap_or(1);
    for e in &s.edges {
        let penwidth = 1.0 + 4.0 * e.count as f64 / max_count as f64;
        writeln!(
            out,
            "  \"{}\" -> \"{}\" [label=\"{} ({})\", penwidth={:.2}];",
            escape(&e.src),
            escape(&e.dst),
            e.label,
            e.count,
            penwidth,
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}
