//! In-memory representation of a TM document.
//!
//! A [`Document`] is an ordered tree of [`Item`]s mirroring declaration order.
//! Element identity is the dotted containment path (`System.session.c1`);
//! flows and triggers, which carry no name, are numbered in declaration order
//! (`flow#0`, `trigger#3`). Documents are immutable once built.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::dynamics::BehaviorExpr;
use crate::span::SourceSpan;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementId(Arc<str>);

impl ElementId {
    pub fn new(path: impl AsRef<str>) -> Self {
        Self(Arc::from(path.as_ref()))
    }

    pub fn child(&self, name: &str) -> Self {
        Self::new(format!("{}.{}", self.0, name))
    }

    pub fn flow(index: usize) -> Self {
        Self::new(format!("flow#{index}"))
    }

    pub fn trigger(index: usize) -> Self {
        Self::new(format!("trigger#{index}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Last path segment.
    pub fn name(&self) -> &str {
        self.0.rsplit('.').next().unwrap_or(&self.0)
    }

    /// Numeric suffix of an edge id (`flow#12` gives 12).
    pub fn edge_index(&self) -> Option<usize> {
        self.0.split_once('#').and_then(|(_, n)| n.parse().ok())
    }
}

impl fmt::Debug for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EventId(String);

impl EventId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// The five generic actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActionKind {
    Create,
    Process,
    Release,
    Transfer,
    Receive,
}

impl ActionKind {
    pub const ALL: [ActionKind; 5] = [
        ActionKind::Create,
        ActionKind::Process,
        ActionKind::Release,
        ActionKind::Transfer,
        ActionKind::Receive,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            ActionKind::Create => "create",
            ActionKind::Process => "process",
            ActionKind::Release => "release",
            ActionKind::Transfer => "transfer",
            ActionKind::Receive => "receive",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.keyword() == word)
    }

    /// Release, transfer and receive: the actions removed by level-1 simplification.
    pub fn is_elidable(self) -> bool {
        matches!(
            self,
            ActionKind::Release | ActionKind::Transfer | ActionKind::Receive
        )
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Thimac {
    pub id: ElementId,
    pub name: String,
    pub label: Option<u32>,
    pub items: Vec<Item>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionNode {
    pub id: ElementId,
    pub name: String,
    pub kind: ActionKind,
    pub label: Option<u32>,
    pub owner: ElementId,
    /// Render hint set by level-2 marking; drawn as a bare box when true.
    pub implicit: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StorageNode {
    pub id: ElementId,
    pub name: String,
    pub label: Option<u32>,
    pub owner: ElementId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowEdge {
    pub id: ElementId,
    pub from: ElementId,
    pub to: ElementId,
    /// Nodes collapsed into this edge by simplification, in chain order.
    pub elided_provenance: Vec<ElementId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriggerEdge {
    pub id: ElementId,
    pub from: ElementId,
    pub to: ElementId,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Region {
    pub elements: BTreeSet<ElementId>,
}

impl Region {
    pub fn contains(&self, id: &ElementId) -> bool {
        self.elements.contains(id)
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub id: EventId,
    pub description: String,
    /// Covered element paths as declared. Unresolved paths are kept for validation.
    pub covers: Vec<ElementId>,
    /// Containment- and edge-closed region of the resolvable `covers`. Filled by [`Document::new`].
    pub region: Region,
    pub time: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ByteRange {
    pub start: usize,
    pub end: usize,
}

impl ByteRange {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    pub event: EventId,
    pub spans: Vec<ByteRange>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Item {
    Thimac(Thimac),
    Action(ActionNode),
    Store(StorageNode),
    Flow(FlowEdge),
    Trigger(TriggerEdge),
    Event(Event),
    Chronology(BehaviorExpr),
    Source(String),
    Annotate(Annotation),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementKind {
    Thimac,
    Action(ActionKind),
    Storage,
    Flow,
    Trigger,
}

/// Kind of a flow endpoint: an action or a storage cylinder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Action(ActionKind),
    Storage,
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeKind::Action(k) => k.fmt(f),
            NodeKind::Storage => f.write_str("store"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct ElementEntry {
    kind: ElementKind,
    owner: Option<ElementId>,
}

/// Source positions of declarations, kept apart from the items so that
/// structural equality ignores layout.
#[derive(Debug, Clone, Default)]
pub struct SpanTable {
    pub elements: BTreeMap<ElementId, SourceSpan>,
    pub events: BTreeMap<EventId, SourceSpan>,
    pub chronology: Option<SourceSpan>,
    pub source: Option<SourceSpan>,
    pub annotations: Vec<SourceSpan>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown reference `{0}`")]
    UnknownRef(String),
    #[error("duplicate name `{0}` among siblings")]
    DuplicateName(String),
    #[error("`{0}` must be declared inside a thimac")]
    OrphanNode(String),
    #[error("element id `{found}` does not match its containment path `{expected}`")]
    IdMismatch { expected: String, found: String },
    #[error("duplicate element id `{0}`")]
    DuplicateId(String),
    #[error("duplicate event `{0}`")]
    DuplicateEvent(String),
    #[error("more than one chronology declared")]
    DuplicateChronology,
    #[error("more than one source declared")]
    DuplicateSource,
}

#[derive(Debug, Clone)]
pub struct Document {
    name: String,
    items: Vec<Item>,
    index: BTreeMap<ElementId, ElementEntry>,
    spans: SpanTable,
}

impl PartialEq for Document {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.items == other.items
    }
}

impl Eq for Document {}

impl Document {
    /// Builds a document, checking containment invariants and computing event regions.
    ///
    /// Dangling flow, trigger, event and chronology references are accepted here
    /// and reported by the validator instead.
    pub fn new(
        name: impl Into<String>,
        mut items: Vec<Item>,
        spans: SpanTable,
    ) -> Result<Self, ModelError> {
        let mut index = BTreeMap::new();
        let mut state = IndexState::default();
        index_items(&items, None, &mut index, &mut state)?;
        let mut doc = Document {
            name: name.into(),
            items: Vec::new(),
            index,
            spans,
        };
        doc.items = items.clone();
        fill_regions(&doc, &mut items);
        doc.items = items;
        Ok(doc)
    }

    pub fn empty(name: impl Into<String>) -> Self {
        Self::new(name, Vec::new(), SpanTable::default()).expect("empty document is valid")
    }

    pub fn into_parts(self) -> (String, Vec<Item>, SpanTable) {
        (self.name, self.items, self.spans)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn spans(&self) -> &SpanTable {
        &self.spans
    }

    pub fn span_of(&self, id: &ElementId) -> SourceSpan {
        self.spans.elements.get(id).copied().unwrap_or_default()
    }

    pub fn event_span(&self, id: &EventId) -> SourceSpan {
        self.spans.events.get(id).copied().unwrap_or_default()
    }

    /// All items in pre-order (declaration order).
    pub fn walk(&self) -> Vec<&Item> {
        fn go<'a>(items: &'a [Item], out: &mut Vec<&'a Item>) {
            for item in items {
                out.push(item);
                if let Item::Thimac(t) = item {
                    go(&t.items, out);
                }
            }
        }
        let mut out = Vec::new();
        go(&self.items, &mut out);
        out
    }

    pub fn thimacs(&self) -> Vec<&Thimac> {
        self.walk()
            .into_iter()
            .filter_map(|i| match i {
                Item::Thimac(t) => Some(t),
                _ => None,
            })
            .collect()
    }

    pub fn actions(&self) -> Vec<&ActionNode> {
        self.walk()
            .into_iter()
            .filter_map(|i| match i {
                Item::Action(a) => Some(a),
                _ => None,
            })
            .collect()
    }

    pub fn storages(&self) -> Vec<&StorageNode> {
        self.walk()
            .into_iter()
            .filter_map(|i| match i {
                Item::Store(s) => Some(s),
                _ => None,
            })
            .collect()
    }

    pub fn flows(&self) -> Vec<&FlowEdge> {
        self.walk()
            .into_iter()
            .filter_map(|i| match i {
                Item::Flow(f) => Some(f),
                _ => None,
            })
            .collect()
    }

    pub fn triggers(&self) -> Vec<&TriggerEdge> {
        self.walk()
            .into_iter()
            .filter_map(|i| match i {
                Item::Trigger(t) => Some(t),
                _ => None,
            })
            .collect()
    }

    pub fn events(&self) -> Vec<&Event> {
        self.walk()
            .into_iter()
            .filter_map(|i| match i {
                Item::Event(e) => Some(e),
                _ => None,
            })
            .collect()
    }

    pub fn event(&self, id: &EventId) -> Option<&Event> {
        self.events().into_iter().find(|e| &e.id == id)
    }

    pub fn chronology(&self) -> Option<&BehaviorExpr> {
        self.walk().into_iter().find_map(|i| match i {
            Item::Chronology(c) => Some(c),
            _ => None,
        })
    }

    pub fn source(&self) -> Option<&str> {
        self.walk().into_iter().find_map(|i| match i {
            Item::Source(s) => Some(s.as_str()),
            _ => None,
        })
    }

    pub fn annotations(&self) -> Vec<&Annotation> {
        self.walk()
            .into_iter()
            .filter_map(|i| match i {
                Item::Annotate(a) => Some(a),
                _ => None,
            })
            .collect()
    }

    pub fn contains(&self, id: &ElementId) -> bool {
        self.index.contains_key(id)
    }

    pub fn kind_of(&self, id: &ElementId) -> Option<ElementKind> {
        self.index.get(id).map(|e| e.kind)
    }

    /// Kind of a flow endpoint, or `None` when `id` is not an action or storage.
    pub fn node_kind(&self, id: &ElementId) -> Option<NodeKind> {
        match self.kind_of(id)? {
            ElementKind::Action(k) => Some(NodeKind::Action(k)),
            ElementKind::Storage => Some(NodeKind::Storage),
            _ => None,
        }
    }

    /// Enclosing thimac; `None` for top-level thimacs and for edges.
    pub fn owner_of(&self, id: &ElementId) -> Option<&ElementId> {
        self.index.get(id).and_then(|e| e.owner.as_ref())
    }

    /// Strict ancestors of `id`, innermost first.
    pub fn ancestors(&self, id: &ElementId) -> Vec<ElementId> {
        let mut out = Vec::new();
        let mut cur = self.owner_of(id);
        while let Some(owner) = cur {
            out.push(owner.clone());
            cur = self.owner_of(owner);
        }
        out
    }

    /// Element ids in index order (thimacs, actions, storages, flows, triggers).
    pub fn element_ids(&self) -> impl Iterator<Item = &ElementId> {
        self.index.keys()
    }

    pub fn action(&self, id: &ElementId) -> Option<&ActionNode> {
        self.actions().into_iter().find(|a| &a.id == id)
    }

    /// Resolves a dotted path, absolute from the model root, to a named element.
    pub fn resolve_ref(&self, path: &str) -> Result<ElementId, ModelError> {
        let id = ElementId::new(path);
        match self.index.get(&id) {
            Some(entry) if !matches!(entry.kind, ElementKind::Flow | ElementKind::Trigger) => {
                Ok(id)
            }
            _ => Err(ModelError::UnknownRef(path.to_string())),
        }
    }

    /// Smallest containment-closed region holding `seeds`; an edge is included
    /// iff both of its endpoints are.
    pub fn region_of<'a, I>(&self, seeds: I) -> Result<Region, ModelError>
    where
        I: IntoIterator<Item = &'a ElementId>,
    {
        let mut elements = BTreeSet::new();
        for seed in seeds {
            if !self.index.contains_key(seed) {
                return Err(ModelError::UnknownRef(seed.to_string()));
            }
            if elements.insert(seed.clone()) {
                elements.extend(self.ancestors(seed));
            }
        }
        self.close_edges(&mut elements);
        Ok(Region { elements })
    }

    fn close_edges(&self, elements: &mut BTreeSet<ElementId>) {
        for f in self.flows() {
            if elements.contains(&f.from) && elements.contains(&f.to) {
                elements.insert(f.id.clone());
            }
        }
        for t in self.triggers() {
            if elements.contains(&t.from) && elements.contains(&t.to) {
                elements.insert(t.id.clone());
            }
        }
    }

    pub fn stats(&self) -> Stats {
        let mut stats = Stats::default();
        for item in self.walk() {
            match item {
                Item::Thimac(_) => stats.thimacs += 1,
                Item::Action(a) => *stats.action_count_mut(a.kind) += 1,
                Item::Store(_) => stats.storages += 1,
                Item::Flow(_) => stats.flows += 1,
                Item::Trigger(_) => stats.triggers += 1,
                Item::Event(_) => stats.events += 1,
                Item::Chronology(_) | Item::Source(_) | Item::Annotate(_) => {}
            }
        }
        stats
    }
}

#[derive(Default)]
struct IndexState {
    events: BTreeSet<EventId>,
    chronology: bool,
    source: bool,
}

fn index_items(
    items: &[Item],
    owner: Option<&ElementId>,
    index: &mut BTreeMap<ElementId, ElementEntry>,
    state: &mut IndexState,
) -> Result<(), ModelError> {
    let mut siblings = BTreeSet::new();
    for item in items {
        let named = match item {
            Item::Thimac(t) => Some((&t.id, &t.name, ElementKind::Thimac)),
            Item::Action(a) => Some((&a.id, &a.name, ElementKind::Action(a.kind))),
            Item::Store(s) => Some((&s.id, &s.name, ElementKind::Storage)),
            _ => None,
        };
        if let Some((id, name, kind)) = named {
            if !siblings.insert(name.as_str()) {
                return Err(ModelError::DuplicateName(id.to_string()));
            }
            let expected = match owner {
                Some(o) => o.child(name),
                None => ElementId::new(name),
            };
            if &expected != id {
                return Err(ModelError::IdMismatch {
                    expected: expected.to_string(),
                    found: id.to_string(),
                });
            }
            if kind != ElementKind::Thimac && owner.is_none() {
                return Err(ModelError::OrphanNode(id.to_string()));
            }
            let declared_owner = match item {
                Item::Action(a) => Some(&a.owner),
                Item::Store(s) => Some(&s.owner),
                _ => None,
            };
            if let Some(declared) = declared_owner {
                if Some(declared) != owner {
                    return Err(ModelError::IdMismatch {
                        expected: owner.map(|o| o.to_string()).unwrap_or_default(),
                        found: declared.to_string(),
                    });
                }
            }
            insert_unique(index, id, kind, owner.cloned())?;
        }
        match item {
            Item::Thimac(t) => index_items(&t.items, Some(&t.id), index, state)?,
            Item::Flow(f) => insert_unique(index, &f.id, ElementKind::Flow, None)?,
            Item::Trigger(t) => insert_unique(index, &t.id, ElementKind::Trigger, None)?,
            Item::Event(e) => {
                if !state.events.insert(e.id.clone()) {
                    return Err(ModelError::DuplicateEvent(e.id.to_string()));
                }
            }
            Item::Chronology(_) if std::mem::replace(&mut state.chronology, true) => {
                return Err(ModelError::DuplicateChronology);
            }
            Item::Source(_) if std::mem::replace(&mut state.source, true) => {
                return Err(ModelError::DuplicateSource);
            }
            _ => {}
        }
    }
    Ok(())
}

fn insert_unique(
    index: &mut BTreeMap<ElementId, ElementEntry>,
    id: &ElementId,
    kind: ElementKind,
    owner: Option<ElementId>,
) -> Result<(), ModelError> {
    if index.contains_key(id) {
        return Err(ModelError::DuplicateId(id.to_string()));
    }
    index.insert(id.clone(), ElementEntry { kind, owner });
    Ok(())
}

fn fill_regions(doc: &Document, items: &mut [Item]) {
    for item in items {
        match item {
            Item::Thimac(t) => fill_regions(doc, &mut t.items),
            Item::Event(e) => {
                let resolved: Vec<&ElementId> = e
                    .covers
                    .iter()
                    .filter(|c| doc.resolve_ref(c.as_str()).is_ok())
                    .collect();
                e.region = doc
                    .region_of(resolved)
                    .expect("resolved covers are present in the index");
            }
            _ => {}
        }
    }
}

/// Declaration counts of a document.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub thimacs: usize,
    pub create: usize,
    pub process: usize,
    pub release: usize,
    pub transfer: usize,
    pub receive: usize,
    pub storages: usize,
    pub flows: usize,
    pub triggers: usize,
    pub events: usize,
}

impl Stats {
    pub fn actions(&self) -> usize {
        self.create + self.process + self.release + self.transfer + self.receive
    }

    pub fn action_count(&self, kind: ActionKind) -> usize {
        match kind {
            ActionKind::Create => self.create,
            ActionKind::Process => self.process,
            ActionKind::Release => self.release,
            ActionKind::Transfer => self.transfer,
            ActionKind::Receive => self.receive,
        }
    }

    fn action_count_mut(&mut self, kind: ActionKind) -> &mut usize {
        match kind {
            ActionKind::Create => &mut self.create,
            ActionKind::Process => &mut self.process,
            ActionKind::Release => &mut self.release,
            ActionKind::Transfer => &mut self.transfer,
            ActionKind::Receive => &mut self.receive,
        }
    }
}

impl fmt::Display for Stats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "thimacs: {}", self.thimacs)?;
        writeln!(
            f,
            "actions: {} (create {}, process {}, release {}, transfer {}, receive {})",
            self.actions(),
            self.create,
            self.process,
            self.release,
            self.transfer,
            self.receive
        )?;
        writeln!(f, "storages: {}", self.storages)?;
        writeln!(f, "flows: {}", self.flows)?;
        writeln!(f, "triggers: {}", self.triggers)?;
        writeln!(f, "events: {}", self.events)
    }
}
