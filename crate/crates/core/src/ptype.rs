//! Provenance-type terms, hash-consed interning, and per-node signatures.
//!
//! A provenance type of level 0 is a base type (a core PROV kind or a
//! user-defined type name); a type of level k+1 wraps a level-k type in a
//! relation label, e.g. `used(wat(Agent))`. Terms are interned so that
//! structurally equal terms share one [`TypeId`]; within a level, two terms
//! are identical iff their canonical strings are equal.
//!
//! [`compute_signatures`] runs the level-by-level fixed point: level 0 comes
//! from declared base types, and level i+1 of a node collects `label(t)` for
//! every outgoing edge `node -label-> other` and every level-i type `t` of
//! `other`. The computation is single-threaded and deterministic.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::model::{DocumentError, NodeId, ProvDocument, RelationLabel};

/// Edge orientation used when building types.
///
/// `Forward` follows edges as stored; `Inverse` reverses every edge and
/// renders labels with an `inv-` prefix (`inv-used(...)`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Inverse,
}

impl Direction {
    /// Rendered label name under this direction.
    pub fn label_name(self, label: RelationLabel) -> &'static str {
        match self {
            Direction::Forward => label.short_name(),
            Direction::Inverse => inverse_label_name(label),
        }
    }
}

fn inverse_label_name(label: RelationLabel) -> &'static str {
    use RelationLabel::*;
    match label {
        Used => "inv-used",
        WasGeneratedBy => "inv-wgb",
        WasDerivedFrom => "inv-wdf",
        WasAssociatedWith => "inv-waw",
        WasAttributedTo => "inv-wat",
        ActedOnBehalfOf => "inv-aobo",
        WasInvalidatedBy => "inv-wib",
        WasStartedBy => "inv-wsb",
        WasEndedBy => "inv-web",
        WasInformedBy => "inv-wifb",
        HadMember => "inv-mem",
        SpecializationOf => "inv-spec",
        AlternateOf => "inv-alt",
    }
}

/// Handle of an interned provenance-type term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypeId(u32);

/// The interned-term table grew past its configured cap.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("interned provenance-type table exceeded the cap of {max_terms} terms")]
pub struct TypeLimitExceeded {
    pub max_terms: usize,
}

/// Resource limits for signature computation.
///
/// The number of distinct terms is linear in the graph for a fixed level but
/// can grow exponentially with k on cyclic graphs, so the table is capped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TypeLimits {
    pub max_terms: usize,
}

impl Default for TypeLimits {
    fn default() -> Self {
        TypeLimits {
            max_terms: 10_000_000,
        }
    }
}

#[derive(Debug)]
struct Term {
    level: u32,
    canonical: Box<str>,
}

/// Hash-consing table for provenance-type terms.
#[derive(Debug)]
pub struct TypeInterner {
    terms: Vec<Term>,
    base_index: HashMap<Box<str>, TypeId>,
    app_index: HashMap<(&'static str, TypeId), TypeId>,
    max_terms: usize,
}

impl TypeInterner {
    pub fn new() -> TypeInterner {
        Self::with_limit(TypeLimits::default().max_terms)
    }

    pub fn with_limit(max_terms: usize) -> TypeInterner {
        TypeInterner {
            terms: Vec::new(),
            base_index: HashMap::new(),
            app_index: HashMap::new(),
            max_terms,
        }
    }

    /// Interns a level-0 base type.
    pub fn base(&mut self, name: &str) -> Result<TypeId, TypeLimitExceeded> {
        if let Some(&id) = self.base_index.get(name) {
            return Ok(id);
        }
        let id = self.push(Term {
            level: 0,
            canonical: name.into(),
        })?;
        self.base_index.insert(name.into(), id);
        Ok(id)
    }

    /// Interns `label(inner)` under the given direction.
    pub fn app(
        &mut self,
        label: RelationLabel,
        direction: Direction,
        inner: TypeId,
    ) -> Result<TypeId, TypeLimitExceeded> {
        let name = direction.label_name(label);
        if let Some(&id) = self.app_index.get(&(name, inner)) {
            return Ok(id);
        }
        let canonical = format!("{}({})", name, self.canonical(inner));
        let level = self.level(inner) as u32 + 1;
        let id = self.push(Term {
            level,
            canonical: canonical.into_boxed_str(),
        })?;
        self.app_index.insert((name, inner), id);
        Ok(id)
    }

    fn push(&mut self, term: Term) -> Result<TypeId, TypeLimitExceeded> {
        if self.terms.len() >= self.max_terms {
            return Err(TypeLimitExceeded {
                max_terms: self.max_terms,
            });
        }
        let id = TypeId(self.terms.len() as u32);
        self.terms.push(term);
        Ok(id)
    }

    /// Canonical rendering, e.g. `used(wat(Agent))`.
    pub fn canonical(&self, id: TypeId) -> &str {
        &self.terms[id.0 as usize].canonical
    }

    /// Number of nested labels in the term.
    pub fn level(&self, id: TypeId) -> usize {
        self.terms[id.0 as usize].level as usize
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Sorts a term list by canonical string and drops duplicates.
    fn sort_level(&self, terms: &mut Vec<TypeId>) {
        terms.sort_by(|a, b| self.canonical(*a).cmp(self.canonical(*b)));
        terms.dedup();
    }
}

impl Default for TypeInterner {
    fn default() -> Self {
        Self::new()
    }
}

/// Per-node signature: the type sets of every level 0..=k.
///
/// A level with no types is recorded as an empty set so that signatures for
/// the same k are directly comparable by their canonical keys.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    levels: Vec<Vec<TypeId>>,
}

impl Signature {
    /// Type set at one level, sorted by canonical string.
    pub fn level(&self, i: usize) -> &[TypeId] {
        &self.levels[i]
    }

    pub fn levels(&self) -> &[Vec<TypeId>] {
        &self.levels
    }

    pub fn max_level(&self) -> usize {
        self.levels.len() - 1
    }

    /// Canonical key; two signatures are equal iff their keys are equal.
    pub fn key(&self, interner: &TypeInterner) -> String {
        self.prefix_key(interner, self.max_level())
    }

    /// Canonical key of the prefix restricted to levels 0..=j.
    pub fn prefix_key(&self, interner: &TypeInterner, j: usize) -> String {
        let rendered: Vec<Vec<&str>> = self.levels[..=j]
            .iter()
            .map(|level| level.iter().map(|t| interner.canonical(*t)).collect())
            .collect();
        render_signature_key(&rendered)
    }

    /// Levels rendered as canonical strings, keyed by level index.
    pub fn export(&self, interner: &TypeInterner) -> BTreeMap<usize, Vec<String>> {
        self.levels
            .iter()
            .enumerate()
            .map(|(i, level)| {
                (
                    i,
                    level.iter().map(|t| interner.canonical(*t).to_string()).collect(),
                )
            })
            .collect()
    }
}

/// Renders per-level canonical strings into a signature key.
///
/// Each level is encoded as `[count, [terms...]]` in JSON: the escaping makes
/// the key unambiguous for any base-type name, and the count prefix makes a
/// level with no types sort before any non-empty level.
pub(crate) fn render_signature_key<S: AsRef<str>>(levels: &[Vec<S>]) -> String {
    let encoded: Vec<(usize, Vec<&str>)> = levels
        .iter()
        .map(|level| (level.len(), level.iter().map(AsRef::as_ref).collect()))
        .collect();
    serde_json::to_string(&encoded).expect("strings serialize")
}

/// Signatures for every node of one document at one (k, direction).
#[derive(Debug)]
pub struct SignatureTable {
    k: usize,
    direction: Direction,
    interner: TypeInterner,
    signatures: BTreeMap<NodeId, Signature>,
}

impl SignatureTable {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn interner(&self) -> &TypeInterner {
        &self.interner
    }

    pub fn signature(&self, id: &NodeId) -> Option<&Signature> {
        self.signatures.get(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&NodeId, &Signature)> {
        self.signatures.iter()
    }

    pub fn len(&self) -> usize {
        self.signatures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signatures.is_empty()
    }

    /// Canonical key of one node's signature.
    pub fn key_of(&self, id: &NodeId) -> Option<String> {
        self.signatures.get(id).map(|s| s.key(&self.interner))
    }
}

/// Errors from single-node type queries.
#[derive(Debug, Error)]
pub enum TypeError {
    #[error(transparent)]
    Document(#[from] DocumentError),
    #[error(transparent)]
    Limit(#[from] TypeLimitExceeded),
}

/// Level-0 types of one node: one base term per core kind and app type.
pub fn level0_types(
    doc: &ProvDocument,
    node: &NodeId,
    interner: &mut TypeInterner,
) -> Result<Vec<TypeId>, TypeError> {
    let node = doc
        .node(node)
        .ok_or_else(|| DocumentError::UnknownNode(node.clone()))?;
    let mut terms = Vec::with_capacity(node.core_types.len() + node.app_types.len());
    for kind in &node.core_types {
        terms.push(interner.base(kind.name())?);
    }
    for app in &node.app_types {
        terms.push(interner.base(app)?);
    }
    interner.sort_level(&mut terms);
    Ok(terms)
}

/// One step of the fixed point: level-(i+1) types from level-i types.
///
/// For each node x, the result collects `label(t)` for every edge
/// `x -label-> y` (after direction adjustment) and every `t` in `prev[y]`.
/// Nodes with no qualifying edge map to the empty set.
pub fn next_level(
    doc: &ProvDocument,
    prev: &BTreeMap<NodeId, Vec<TypeId>>,
    direction: Direction,
    interner: &mut TypeInterner,
) -> Result<BTreeMap<NodeId, Vec<TypeId>>, TypeLimitExceeded> {
    let mut next: BTreeMap<NodeId, Vec<TypeId>> = doc
        .node_ids()
        .map(|id| (id.clone(), Vec::new()))
        .collect();
    for edge in doc.edges() {
        let (from, to) = match direction {
            Direction::Forward => (&edge.src, &edge.dst),
            Direction::Inverse => (&edge.dst, &edge.src),
        };
        let Some(inner_terms) = prev.get(to) else {
            continue;
        };
        let out = next.get_mut(from).expect("all nodes seeded");
        for &inner in inner_terms {
            out.push(interner.app(edge.label, direction, inner)?);
        }
    }
    for terms in next.values_mut() {
        interner.sort_level(terms);
    }
    Ok(next)
}

/// Computes the signature of every node for levels 0..=k.
///
/// Pure function of (document, k, direction); two runs produce identical
/// tables, including term numbering.
pub fn compute_signatures(
    doc: &ProvDocument,
    k: usize,
    direction: Direction,
    limits: &TypeLimits,
) -> Result<SignatureTable, TypeLimitExceeded> {
    let mut interner = TypeInterner::with_limit(limits.max_terms);

    let mut current: BTreeMap<NodeId, Vec<TypeId>> = BTreeMap::new();
    for id in doc.node_ids() {
        let terms = match level0_types(doc, id, &mut interner) {
            Ok(terms) => terms,
            Err(TypeError::Limit(e)) => return Err(e),
            Err(TypeError::Document(_)) => unreachable!("node ids come from the document"),
        };
        current.insert(id.clone(), terms);
    }

    let mut per_node: BTreeMap<NodeId, Vec<Vec<TypeId>>> = doc
        .node_ids()
        .map(|id| (id.clone(), Vec::with_capacity(k + 1)))
        .collect();
    record_level(&mut per_node, &current);

    for _ in 1..=k {
        current = next_level(doc, &current, direction, &mut interner)?;
        record_level(&mut per_node, &current);
    }

    let signatures = per_node
        .into_iter()
        .map(|(id, levels)| (id, Signature { levels }))
        .collect();
    Ok(SignatureTable {
        k,
        direction,
        interner,
        signatures,
    })
}

fn record_level(
    per_node: &mut BTreeMap<NodeId, Vec<Vec<TypeId>>>,
    level: &BTreeMap<NodeId, Vec<TypeId>>,
) {
    for (id, terms) in level {
        per_node.get_mut(id).expect("same node set").push(terms.clone());
    }
}
