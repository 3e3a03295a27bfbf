//! PROV instance-graph model and a PROV-JSON subset parser.
//!
//! A [`ProvDocument`] holds typed nodes and a set of directed edges labeled
//! with one of the 13 forward PROV relations. Documents are immutable once
//! built (all mutation goes through checked methods) and safe to share
//! read-only across concurrent analyses.
//!
//! The ingestion format is a PROV-JSON subset: the three node sections
//! `entity` / `activity` / `agent` (with `prov:type` attributes) and the 13
//! relation sections. All other statement attributes are ignored; duplicate
//! statements collapse to set semantics.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

/// The three core PROV kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CoreKind {
    Entity,
    Activity,
    Agent,
}

impl CoreKind {
    pub const ALL: [CoreKind; 3] = [CoreKind::Entity, CoreKind::Activity, CoreKind::Agent];

    /// Canonical name, as it appears in level-0 provenance types.
    pub fn name(self) -> &'static str {
        match self {
            CoreKind::Entity => "Entity",
            CoreKind::Activity => "Activity",
            CoreKind::Agent => "Agent",
        }
    }

    fn section_name(self) -> &'static str {
        match self {
            CoreKind::Entity => "entity",
            CoreKind::Activity => "activity",
            CoreKind::Agent => "agent",
        }
    }

    fn from_section_name(name: &str) -> Option<CoreKind> {
        Self::ALL.iter().copied().find(|k| k.section_name() == name)
    }
}

impl fmt::Display for CoreKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The closed set of 13 forward PROV relations.
///
/// Each label carries a fixed (source kind, target kind) signature, used
/// both by the parser (field names) and by core-type inference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelationLabel {
    Used,
    WasGeneratedBy,
    WasDerivedFrom,
    WasAssociatedWith,
    WasAttributedTo,
    ActedOnBehalfOf,
    WasInvalidatedBy,
    WasStartedBy,
    WasEndedBy,
    WasInformedBy,
    HadMember,
    SpecializationOf,
    AlternateOf,
}

use RelationLabel::*;

/// Label metadata: short name, section name, endpoint field names, and the
/// (source kind, target kind) signature.
struct LabelInfo {
    short: &'static str,
    section: &'static str,
    src_field: &'static str,
    dst_field: &'static str,
    src_kind: CoreKind,
    dst_kind: CoreKind,
}

impl RelationLabel {
    pub const ALL: [RelationLabel; 13] = [
        Used,
        WasGeneratedBy,
        WasDerivedFrom,
        WasAssociatedWith,
        WasAttributedTo,
        ActedOnBehalfOf,
        WasInvalidatedBy,
        WasStartedBy,
        WasEndedBy,
        WasInformedBy,
        HadMember,
        SpecializationOf,
        AlternateOf,
    ];

    fn info(self) -> &'static LabelInfo {
        use CoreKind::*;
        match self {
            Used => &LabelInfo {
                short: "used",
                section: "used",
                src_field: "prov:activity",
                dst_field: "prov:entity",
                src_kind: Activity,
                dst_kind: Entity,
            },
            WasGeneratedBy => &LabelInfo {
                short: "wgb",
                section: "wasGeneratedBy",
                src_field: "prov:entity",
                dst_field: "prov:activity",
                src_kind: Entity,
                dst_kind: Activity,
            },
            WasDerivedFrom => &LabelInfo {
                short: "wdf",
                section: "wasDerivedFrom",
                src_field: "prov:generatedEntity",
                dst_field: "prov:usedEntity",
                src_kind: Entity,
                dst_kind: Entity,
            },
            WasAssociatedWith => &LabelInfo {
                short: "waw",
                section: "wasAssociatedWith",
                src_field: "prov:activity",
                dst_field: "prov:agent",
                src_kind: Activity,
                dst_kind: Agent,
            },
            WasAttributedTo => &LabelInfo {
                short: "wat",
                section: "wasAttributedTo",
                src_field: "prov:entity",
                dst_field: "prov:agent",
                src_kind: Entity,
                dst_kind: Agent,
            },
            ActedOnBehalfOf => &LabelInfo {
                short: "aobo",
                section: "actedOnBehalfOf",
                src_field: "prov:delegate",
                dst_field: "prov:responsible",
                src_kind: Agent,
                dst_kind: Agent,
            },
            WasInvalidatedBy => &LabelInfo {
                short: "wib",
                section: "wasInvalidatedBy",
                src_field: "prov:entity",
                dst_field: "prov:activity",
                src_kind: Entity,
                dst_kind: Activity,
            },
            WasStartedBy => &LabelInfo {
                short: "wsb",
                section: "wasStartedBy",
                src_field: "prov:activity",
                dst_field: "prov:trigger",
                src_kind: Activity,
                dst_kind: Entity,
            },
            WasEndedBy => &LabelInfo {
                short: "web",
                section: "wasEndedBy",
                src_field: "prov:activity",
                dst_field: "prov:trigger",
                src_kind: Activity,
                dst_kind: Entity,
            },
            WasInformedBy => &LabelInfo {
                short: "wifb",
                section: "wasInformedBy",
                src_field: "prov:informed",
                dst_field: "prov:informant",
                src_kind: Activity,
                dst_kind: Activity,
            },
            HadMember => &LabelInfo {
                short: "mem",
                section: "hadMember",
                src_field: "prov:collection",
                dst_field: "prov:entity",
                src_kind: Entity,
                dst_kind: Entity,
            },
            SpecializationOf => &LabelInfo {
                short: "spec",
                section: "specializationOf",
                src_field: "prov:specificEntity",
                dst_field: "prov:generalEntity",
                src_kind: Entity,
                dst_kind: Entity,
            },
            AlternateOf => &LabelInfo {
                short: "alt",
                section: "alternateOf",
                src_field: "prov:alternate1",
                dst_field: "prov:alternate2",
                src_kind: Entity,
                dst_kind: Entity,
            },
        }
    }

    /// Short label as used in provenance-type terms and summary edges.
    pub fn short_name(self) -> &'static str {
        self.info().short
    }

    /// PROV-JSON section name for this relation.
    pub fn section_name(self) -> &'static str {
        self.info().section
    }

    /// Kind required of the edge source.
    pub fn source_kind(self) -> CoreKind {
        self.info().src_kind
    }

    /// Kind required of the edge target.
    pub fn target_kind(self) -> CoreKind {
        self.info().dst_kind
    }

    /// PROV-JSON field holding the edge source.
    pub fn source_field(self) -> &'static str {
        self.info().src_field
    }

    /// PROV-JSON field holding the edge target.
    pub fn target_field(self) -> &'static str {
        self.info().dst_field
    }

    pub fn from_short_name(name: &str) -> Option<RelationLabel> {
        Self::ALL.iter().copied().find(|l| l.short_name() == name)
    }

    pub fn from_section_name(name: &str) -> Option<RelationLabel> {
        Self::ALL.iter().copied().find(|l| l.section_name() == name)
    }
}

impl fmt::Display for RelationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl Serialize for RelationLabel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.short_name())
    }
}

impl<'de> Deserialize<'de> for RelationLabel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        RelationLabel::from_short_name(&s)
            .ok_or_else(|| serde::de::Error::custom(format!("unknown relation label `{s}`")))
    }
}

/// Identifier of a node within a document.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> NodeId {
        NodeId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> NodeId {
        NodeId(s.to_string())
    }
}

impl From<String> for NodeId {
    fn from(s: String) -> NodeId {
        NodeId(s)
    }
}

/// A node of the instance graph: core PROV kinds plus user-defined types.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProvNode {
    pub id: NodeId,
    pub core_types: BTreeSet<CoreKind>,
    pub app_types: BTreeSet<String>,
}

impl ProvNode {
    pub fn new(id: impl Into<NodeId>) -> ProvNode {
        ProvNode {
            id: id.into(),
            core_types: BTreeSet::new(),
            app_types: BTreeSet::new(),
        }
    }

    pub fn entity(id: impl Into<NodeId>) -> ProvNode {
        Self::of_kind(id, CoreKind::Entity)
    }

    pub fn activity(id: impl Into<NodeId>) -> ProvNode {
        Self::of_kind(id, CoreKind::Activity)
    }

    pub fn agent(id: impl Into<NodeId>) -> ProvNode {
        Self::of_kind(id, CoreKind::Agent)
    }

    pub fn of_kind(id: impl Into<NodeId>, kind: CoreKind) -> ProvNode {
        let mut node = ProvNode::new(id);
        node.core_types.insert(kind);
        node
    }

    pub fn with_app_type(mut self, name: impl Into<String>) -> ProvNode {
        self.app_types.insert(name.into());
        self
    }

    /// True if the node carries no base type at all (level-0 set is empty).
    pub fn is_untyped(&self) -> bool {
        self.core_types.is_empty() && self.app_types.is_empty()
    }
}

/// A directed labeled edge. Edges form a set: no duplicate (src, dst, label).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ProvEdge {
    pub src: NodeId,
    pub dst: NodeId,
    pub label: RelationLabel,
}

impl ProvEdge {
    pub fn new(src: impl Into<NodeId>, label: RelationLabel, dst: impl Into<NodeId>) -> ProvEdge {
        ProvEdge {
            src: src.into(),
            dst: dst.into(),
            label,
        }
    }
}

/// Errors on programmatic document construction.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DocumentError {
    #[error("node id must be non-empty")]
    EmptyNodeId,
    #[error("unknown node id `{0}`")]
    UnknownNode(NodeId),
}

/// A PROV instance graph.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProvDocument {
    nodes: BTreeMap<NodeId, ProvNode>,
    edges: BTreeSet<ProvEdge>,
    declared_roots: Option<BTreeSet<NodeId>>,
}

impl ProvDocument {
    pub fn new() -> ProvDocument {
        ProvDocument::default()
    }

    /// Adds a node; a node with the same id merges its type sets.
    pub fn add_node(&mut self, node: ProvNode) -> Result<(), DocumentError> {
        if node.id.as_str().is_empty() {
            return Err(DocumentError::EmptyNodeId);
        }
        match self.nodes.get_mut(&node.id) {
            Some(existing) => {
                existing.core_types.extend(node.core_types);
                existing.app_types.extend(node.app_types);
            }
            None => {
                self.nodes.insert(node.id.clone(), node);
            }
        }
        Ok(())
    }

    /// Adds an edge between existing nodes. Duplicates are merged.
    pub fn add_edge(
        &mut self,
        src: impl Into<NodeId>,
        label: RelationLabel,
        dst: impl Into<NodeId>,
    ) -> Result<(), DocumentError> {
        let edge = ProvEdge::new(src, label, dst);
        if !self.nodes.contains_key(&edge.src) {
            return Err(DocumentError::UnknownNode(edge.src));
        }
        if !self.nodes.contains_key(&edge.dst) {
            return Err(DocumentError::UnknownNode(edge.dst));
        }
        self.edges.insert(edge);
        Ok(())
    }

    /// Declares root nodes explicitly; they must exist.
    pub fn set_declared_roots<I>(&mut self, roots: I) -> Result<(), DocumentError>
    where
        I: IntoIterator,
        I::Item: Into<NodeId>,
    {
        let roots: BTreeSet<NodeId> = roots.into_iter().map(Into::into).collect();
        for r in &roots {
            if !self.nodes.contains_key(r) {
                return Err(DocumentError::UnknownNode(r.clone()));
            }
        }
        self.declared_roots = Some(roots);
        Ok(())
    }

    pub fn node(&self, id: &NodeId) -> Option<&ProvNode> {
        self.nodes.get(id)
    }

    pub fn contains_node(&self, id: &NodeId) -> bool {
        self.nodes.contains_key(id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &ProvNode> {
        self.nodes.values()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = &NodeId> {
        self.nodes.keys()
    }

    pub fn edges(&self) -> impl Iterator<Item = &ProvEdge> {
        self.edges.iter()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn declared_roots(&self) -> Option<&BTreeSet<NodeId>> {
        self.declared_roots.as_ref()
    }

    /// Root nodes: the declared set if present, otherwise all nodes with
    /// zero in-degree under forward edges.
    pub fn root_ids(&self) -> BTreeSet<NodeId> {
        if let Some(declared) = &self.declared_roots {
            return declared.clone();
        }
        let targets: BTreeSet<&NodeId> = self.edges.iter().map(|e| &e.dst).collect();
        self.nodes
            .keys()
            .filter(|id| !targets.contains(id))
            .cloned()
            .collect()
    }
}

/// Errors raised while parsing the PROV-JSON subset.
#[derive(Debug, Error)]
pub enum ParseError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("top-level value must be a JSON object")]
    NotAnObject,
    #[error("unknown section `{0}`")]
    UnknownSection(String),
    #[error("section `{0}` must be a JSON object")]
    SectionNotObject(String),
    #[error("empty identifier in section `{0}`")]
    EmptyId(String),
    #[error("record `{id}` in section `{section}` must be a JSON object")]
    RecordNotObject { section: String, id: String },
    #[error("invalid prov:type on `{id}`: expected a string or a list of strings")]
    BadTypeAttribute { id: String },
    #[error("relation `{id}` in section `{section}` is missing required endpoint field `{field}`")]
    MissingEndpoint {
        section: String,
        id: String,
        field: &'static str,
    },
    #[error("relation `{id}` in section `{section}` references undeclared node `{node}`")]
    DanglingReference {
        section: String,
        id: String,
        node: String,
    },
}

/// Errors raised while serializing a document back to the subset.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SerializeError {
    #[error("node `{0}` has no core kind and cannot be placed in a PROV-JSON section")]
    UntypedNode(NodeId),
}

impl ProvDocument {
    /// Parses a PROV-JSON subset document.
    pub fn from_json_bytes(input: &[u8]) -> Result<ProvDocument, ParseError> {
        let value: Value = serde_json::from_slice(input)?;
        Self::from_json_value(&value)
    }

    pub fn from_json_str(input: &str) -> Result<ProvDocument, ParseError> {
        Self::from_json_bytes(input.as_bytes())
    }

    pub fn from_json_value(value: &Value) -> Result<ProvDocument, ParseError> {
        let root = value.as_object().ok_or(ParseError::NotAnObject)?;

        // Validate section names up front so the error does not depend on
        // which pass encounters the key first.
        for key in root.keys() {
            if CoreKind::from_section_name(key).is_none()
                && RelationLabel::from_section_name(key).is_none()
            {
                return Err(ParseError::UnknownSection(key.clone()));
            }
        }

        let mut doc = ProvDocument::new();

        // First pass: node sections.
        for kind in CoreKind::ALL {
            let Some(section) = root.get(kind.section_name()) else {
                continue;
            };
            let section = section
                .as_object()
                .ok_or_else(|| ParseError::SectionNotObject(kind.section_name().to_string()))?;
            for (id, attrs) in section {
                if id.is_empty() {
                    return Err(ParseError::EmptyId(kind.section_name().to_string()));
                }
                let attrs = attrs.as_object().ok_or_else(|| ParseError::RecordNotObject {
                    section: kind.section_name().to_string(),
                    id: id.clone(),
                })?;
                let mut node = ProvNode::of_kind(id.as_str(), kind);
                if let Some(type_attr) = attrs.get("prov:type") {
                    for name in parse_type_attribute(id, type_attr)? {
                        node.app_types.insert(name);
                    }
                }
                doc.add_node(node).expect("non-empty id checked above");
            }
        }

        // Second pass: relation sections.
        for label in RelationLabel::ALL {
            let Some(section) = root.get(label.section_name()) else {
                continue;
            };
            let section = section
                .as_object()
                .ok_or_else(|| ParseError::SectionNotObject(label.section_name().to_string()))?;
            for (id, attrs) in section {
                let attrs = attrs.as_object().ok_or_else(|| ParseError::RecordNotObject {
                    section: label.section_name().to_string(),
                    id: id.clone(),
                })?;
                let src = require_endpoint(label, label.source_field(), id, attrs)?;
                let dst = require_endpoint(label, label.target_field(), id, attrs)?;
                for endpoint in [&src, &dst] {
                    if !doc.contains_node(&NodeId::from(endpoint.as_str())) {
                        return Err(ParseError::DanglingReference {
                            section: label.section_name().to_string(),
                            id: id.clone(),
                            node: endpoint.clone(),
                        });
                    }
                }
                doc.add_edge(src.as_str(), label, dst.as_str())
                    .expect("endpoints checked above");
            }
        }

        Ok(doc)
    }

    /// Serializes to the PROV-JSON subset, deterministically.
    ///
    /// Every node must carry at least one core kind; declared roots are an
    /// API-level attribute and are not part of the interchange format.
    pub fn to_json_value(&self) -> Result<Value, SerializeError> {
        let mut root = Map::new();

        for kind in CoreKind::ALL {
            let mut section = Map::new();
            for node in self.nodes.values() {
                if !node.core_types.contains(&kind) {
                    continue;
                }
                let mut attrs = Map::new();
                match node.app_types.len() {
                    0 => {}
                    1 => {
                        let name = node.app_types.iter().next().unwrap();
                        attrs.insert("prov:type".to_string(), Value::String(name.clone()));
                    }
                    _ => {
                        let names: Vec<Value> = node
                            .app_types
                            .iter()
                            .map(|n| Value::String(n.clone()))
                            .collect();
                        attrs.insert("prov:type".to_string(), Value::Array(names));
                    }
                }
                section.insert(node.id.as_str().to_string(), Value::Object(attrs));
            }
            if !section.is_empty() {
                root.insert(kind.section_name().to_string(), Value::Object(section));
            }
        }

        for node in self.nodes.values() {
            if node.core_types.is_empty() {
                return Err(SerializeError::UntypedNode(node.id.clone()));
            }
        }

        for label in RelationLabel::ALL {
            let mut section = Map::new();
            for (i, edge) in self.edges.iter().filter(|e| e.label == label).enumerate() {
                let mut attrs = Map::new();
                attrs.insert(
                    label.source_field().to_string(),
                    Value::String(edge.src.as_str().to_string()),
                );
                attrs.insert(
                    label.target_field().to_string(),
                    Value::String(edge.dst.as_str().to_string()),
                );
                section.insert(
                    format!("_:{}{}", label.short_name(), i + 1),
                    Value::Object(attrs),
                );
            }
            if !section.is_empty() {
                root.insert(label.section_name().to_string(), Value::Object(section));
            }
        }

        Ok(Value::Object(root))
    }

    pub fn to_json_string(&self) -> Result<String, SerializeError> {
        let value = self.to_json_value()?;
        Ok(serde_json::to_string_pretty(&value).expect("JSON value serializes"))
    }
}

fn parse_type_attribute(id: &str, value: &Value) -> Result<Vec<String>, ParseError> {
    match value {
        Value::String(s) => Ok(vec![s.clone()]),
        Value::Array(items) => items
            .iter()
            .map(|item| match item {
                Value::String(s) => Ok(s.clone()),
                _ => Err(ParseError::BadTypeAttribute { id: id.to_string() }),
            })
            .collect(),
        _ => Err(ParseError::BadTypeAttribute { id: id.to_string() }),
    }
}

fn require_endpoint(
    label: RelationLabel,
    field: &'static str,
    id: &str,
    attrs: &Map<String, Value>,
) -> Result<String, ParseError> {
    match attrs.get(field) {
        Some(Value::String(s)) => Ok(s.clone()),
        _ => Err(ParseError::MissingEndpoint {
            section: label.section_name().to_string(),
            id: id.to_string(),
            field,
        }),
    }
}

/// Warnings emitted by [`infer_core_types`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InferenceWarning {
    /// Node with no edges and no declared type: nothing to infer from.
    UntypedIsolatedNode { node: NodeId },
    /// Edges imply two or more distinct kinds and no declaration picks one.
    /// All implied kinds are kept.
    KindContradiction {
        node: NodeId,
        inferred: BTreeSet<CoreKind>,
    },
}

impl fmt::Display for InferenceWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InferenceWarning::UntypedIsolatedNode { node } => {
                write!(f, "node `{node}` has no edges and no declared type")
            }
            InferenceWarning::KindContradiction { node, inferred } => {
                let kinds: Vec<&str> = inferred.iter().map(|k| k.name()).collect();
                write!(
                    f,
                    "node `{node}` is used in contradictory positions; edges imply {{{}}}",
                    kinds.join(", ")
                )
            }
        }
    }
}

/// Infers missing core kinds from edge positions.
///
/// Every endpoint of an edge gains the kind dictated by the label's
/// signature; declared kinds are kept. The operation is idempotent.
pub fn infer_core_types(doc: &ProvDocument) -> (ProvDocument, Vec<InferenceWarning>) {
    let mut implied: BTreeMap<&NodeId, BTreeSet<CoreKind>> = BTreeMap::new();
    for edge in doc.edges() {
        implied
            .entry(&edge.src)
            .or_default()
            .insert(edge.label.source_kind());
        implied
            .entry(&edge.dst)
            .or_default()
            .insert(edge.label.target_kind());
    }

    let mut out = doc.clone();
    let mut warnings = Vec::new();
    for node in doc.nodes() {
        let inferred = implied.remove(&node.id).unwrap_or_default();
        if inferred.len() >= 2 && node.core_types.intersection(&inferred).next().is_none() {
            warnings.push(InferenceWarning::KindContradiction {
                node: node.id.clone(),
                inferred: inferred.clone(),
            });
        }
        if inferred.is_empty() && node.is_untyped() {
            warnings.push(InferenceWarning::UntypedIsolatedNode {
                node: node.id.clone(),
            });
        }
        if !inferred.is_empty() {
            out.nodes
                .get_mut(&node.id)
                .expect("node exists in clone")
                .core_types
                .extend(inferred);
        }
    }
    (out, warnings)
}
