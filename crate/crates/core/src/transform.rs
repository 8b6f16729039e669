//! Model-to-model reductions.
//!
//! Level 1 removes every release, transfer and receive action. Each maximal
//! path `a -> r1 -> ... -> rk -> b` whose interior nodes are all elidable and
//! whose ends are create, process or store becomes a single flow `a -> b`
//! carrying `[r1, ..., rk]` as provenance. A node where the chain branches
//! yields one replacement per branch; the shared prefix appears in each.
//!
//! Level 2 only sets a render hint on create and process actions.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::model::{Document, ElementId, FlowEdge, Item, TriggerEdge};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("chain ends without a create, process or store endpoint: {}", join(.chain))]
    DanglingChain { chain: Vec<ElementId> },
    #[error("chain from `{node}` returns to itself through {}", join(.chain))]
    SelfLoopChain {
        node: ElementId,
        chain: Vec<ElementId>,
    },
    #[error("document contains {0} actions; simplify it first")]
    ModeError(String),
}

fn join(ids: &[ElementId]) -> String {
    ids.iter()
        .map(|i| i.as_str())
        .collect::<Vec<_>>()
        .join(" -> ")
}

/// Replacement edge id to the elided nodes it stands for, in creation order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SimplificationMap {
    entries: Vec<(ElementId, Vec<ElementId>)>,
}

impl SimplificationMap {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, edge: &ElementId) -> Option<&[ElementId]> {
        self.entries
            .iter()
            .find(|(e, _)| e == edge)
            .map(|(_, chain)| chain.as_slice())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ElementId, &[ElementId])> {
        self.entries.iter().map(|(e, c)| (e, c.as_slice()))
    }

    /// Union of all provenance lists.
    pub fn elided(&self) -> BTreeSet<ElementId> {
        self.entries
            .iter()
            .flat_map(|(_, c)| c.iter().cloned())
            .collect()
    }
}

#[derive(Debug, Clone)]
struct Chain {
    start_flow: ElementId,
    from: ElementId,
    to: ElementId,
    nodes: Vec<ElementId>,
}

/// Removes release/transfer/receive chains. The input should be valid in strict mode.
pub fn simplify_level1(doc: &Document) -> Result<(Document, SimplificationMap), TransformError> {
    let elidable: BTreeSet<ElementId> = doc
        .actions()
        .into_iter()
        .filter(|a| a.kind.is_elidable())
        .map(|a| a.id.clone())
        .collect();
    if elidable.is_empty() {
        return Ok((doc.clone(), SimplificationMap::default()));
    }

    let flows = doc.flows();
    let mut outgoing: BTreeMap<&ElementId, Vec<&FlowEdge>> = BTreeMap::new();
    for f in &flows {
        outgoing.entry(&f.from).or_default().push(f);
    }

    let mut chains = Vec::new();
    for f in &flows {
        if elidable.contains(&f.from) || !elidable.contains(&f.to) {
            continue;
        }
        let mut path = vec![f.to.clone()];
        extend_chain(f, &f.to, &mut path, &outgoing, &elidable, &mut chains)?;
    }

    let covered: BTreeSet<&ElementId> = chains.iter().flat_map(|c| c.nodes.iter()).collect();
    if let Some(orphan) = elidable.iter().find(|n| !covered.contains(n)) {
        return Err(TransformError::DanglingChain {
            chain: downstream(orphan, &outgoing, &elidable),
        });
    }
    if let Some(c) = chains.iter().find(|c| c.from == c.to) {
        return Err(TransformError::SelfLoopChain {
            node: c.from.clone(),
            chain: c.nodes.clone(),
        });
    }

    let next_index = flows
        .iter()
        .filter_map(|f| f.id.edge_index())
        .max()
        .map_or(0, |m| m + 1);
    let mut replacements: BTreeMap<ElementId, Vec<FlowEdge>> = BTreeMap::new();
    let mut map = SimplificationMap::default();
    let mut replaced_chains = Vec::with_capacity(chains.len());
    for (i, c) in chains.iter().enumerate() {
        let edge = FlowEdge {
            id: ElementId::flow(next_index + i),
            from: c.from.clone(),
            to: c.to.clone(),
            elided_provenance: c.nodes.clone(),
        };
        map.entries.push((edge.id.clone(), c.nodes.clone()));
        replaced_chains.push((edge.id.clone(), c));
        replacements
            .entry(c.start_flow.clone())
            .or_default()
            .push(edge);
    }

    let ctx = Rewrite {
        doc,
        elidable: &elidable,
        chains: &chains,
        replacements: &replacements,
    };
    let (name, items, mut spans) = doc.clone().into_parts();
    let items = ctx.items(items);

    for (edge, c) in &replaced_chains {
        let span = spans
            .elements
            .get(&c.start_flow)
            .copied()
            .unwrap_or_default();
        spans.elements.insert((*edge).clone(), span);
    }
    let dropped: BTreeSet<&ElementId> = flows
        .iter()
        .filter(|f| elidable.contains(&f.from) || elidable.contains(&f.to))
        .map(|f| &f.id)
        .chain(&elidable)
        .collect();
    spans.elements.retain(|id, _| !dropped.contains(id));

    let out =
        Document::new(name, items, spans).expect("simplification keeps containment invariants");
    Ok((out, map))
}

fn extend_chain(
    start: &FlowEdge,
    node: &ElementId,
    path: &mut Vec<ElementId>,
    outgoing: &BTreeMap<&ElementId, Vec<&FlowEdge>>,
    elidable: &BTreeSet<ElementId>,
    chains: &mut Vec<Chain>,
) -> Result<(), TransformError> {
    let mut emitted = false;
    for g in outgoing.get(node).map(Vec::as_slice).unwrap_or(&[]) {
        if elidable.contains(&g.to) {
            if path.contains(&g.to) {
                continue;
            }
            path.push(g.to.clone());
            extend_chain(start, &g.to, path, outgoing, elidable, chains)?;
            path.pop();
        } else {
            chains.push(Chain {
                start_flow: start.id.clone(),
                from: start.from.clone(),
                to: g.to.clone(),
                nodes: path.clone(),
            });
        }
        emitted = true;
    }
    if emitted {
        Ok(())
    } else {
        let mut chain = vec![start.from.clone()];
        chain.extend(path.iter().cloned());
        Err(TransformError::DanglingChain { chain })
    }
}

fn downstream(
    node: &ElementId,
    outgoing: &BTreeMap<&ElementId, Vec<&FlowEdge>>,
    elidable: &BTreeSet<ElementId>,
) -> Vec<ElementId> {
    let mut out = vec![node.clone()];
    let mut i = 0;
    while i < out.len() {
        let cur = out[i].clone();
        for g in outgoing.get(&cur).map(Vec::as_slice).unwrap_or(&[]) {
            if elidable.contains(&g.to) && !out.contains(&g.to) {
                out.push(g.to.clone());
            }
        }
        i += 1;
    }
    out
}

struct Rewrite<'a> {
    doc: &'a Document,
    elidable: &'a BTreeSet<ElementId>,
    chains: &'a [Chain],
    replacements: &'a BTreeMap<ElementId, Vec<FlowEdge>>,
}

impl Rewrite<'_> {
    fn items(&self, items: Vec<Item>) -> Vec<Item> {
        let mut out = Vec::with_capacity(items.len());
        for item in items {
            match item {
                Item::Thimac(mut t) => {
                    t.items = self.items(t.items);
                    out.push(Item::Thimac(t));
                }
                Item::Action(a) if self.elidable.contains(&a.id) => {}
                Item::Flow(f) => {
                    if let Some(reps) = self.replacements.get(&f.id) {
                        out.extend(reps.iter().cloned().map(Item::Flow));
                    } else if !self.elidable.contains(&f.from) && !self.elidable.contains(&f.to) {
                        out.push(Item::Flow(f));
                    }
                }
                Item::Trigger(t) => {
                    if let Some(t) = self.trigger(t) {
                        out.push(Item::Trigger(t));
                    }
                }
                Item::Event(mut e) => {
                    e.covers = self.covers(&e.covers);
                    out.push(Item::Event(e));
                }
                other => out.push(other),
            }
        }
        out
    }

    /// Moves an elided trigger endpoint to the surviving end of its chain that
    /// shares the node's thimac, else downstream for a source and upstream for a target.
    fn remap(&self, node: &ElementId, is_source: bool) -> ElementId {
        if !self.elidable.contains(node) {
            return node.clone();
        }
        let chain = self
            .chains
            .iter()
            .find(|c| c.nodes.contains(node))
            .expect("every elidable node lies on a chain");
        let owner = self.doc.owner_of(node);
        let (near, far) = if is_source {
            (&chain.to, &chain.from)
        } else {
            (&chain.from, &chain.to)
        };
        if self.doc.owner_of(near) == owner || self.doc.owner_of(far) != owner {
            near.clone()
        } else {
            far.clone()
        }
    }

    fn trigger(&self, t: TriggerEdge) -> Option<TriggerEdge> {
        let from = self.remap(&t.from, true);
        let to = self.remap(&t.to, false);
        (from != to).then_some(TriggerEdge { id: t.id, from, to })
    }

    /// Drops elided covers and adds both ends of the chains they belonged to.
    /// When a covered node is shared by several branches, the branches that
    /// own a covered node exclusively are preferred.
    fn covers(&self, covers: &[ElementId]) -> Vec<ElementId> {
        let hit: BTreeSet<&ElementId> = covers
            .iter()
            .filter(|c| self.elidable.contains(*c))
            .collect();
        if hit.is_empty() {
            return covers.to_vec();
        }
        let candidates: Vec<&Chain> = self
            .chains
            .iter()
            .filter(|c| c.nodes.iter().any(|n| hit.contains(n)))
            .collect();
        let exclusive: Vec<&Chain> = candidates
            .iter()
            .copied()
            .filter(|c| {
                c.nodes.iter().any(|n| {
                    hit.contains(n)
                        && candidates.iter().filter(|o| o.nodes.contains(n)).count() == 1
                })
            })
            .collect();
        let chosen = if exclusive.is_empty() {
            candidates
        } else {
            exclusive
        };
        let mut out: Vec<ElementId> = Vec::new();
        let mut push = |id: &ElementId| {
            if !out.contains(id) {
                out.push(id.clone());
            }
        };
        for c in covers.iter().filter(|c| !self.elidable.contains(*c)) {
            push(c);
        }
        for c in chosen {
            push(&c.from);
            push(&c.to);
        }
        out
    }
}

/// Sets the implicit-notation hint on every create and process action.
pub fn mark_implicit(doc: &Document) -> Result<Document, TransformError> {
    let elidable: BTreeSet<&str> = doc
        .actions()
        .into_iter()
        .filter(|a| a.kind.is_elidable())
        .map(|a| a.kind.keyword())
        .collect();
    if !elidable.is_empty() {
        return Err(TransformError::ModeError(
            elidable.into_iter().collect::<Vec<_>>().join("/"),
        ));
    }
    Ok(set_implicit(doc, true))
}

/// Removes the implicit-notation hint.
pub fn clear_implicit(doc: &Document) -> Document {
    set_implicit(doc, false)
}

fn set_implicit(doc: &Document, on: bool) -> Document {
    fn go(items: &mut [Item], on: bool) {
        for item in items {
            match item {
                Item::Thimac(t) => go(&mut t.items, on),
                Item::Action(a) => a.implicit = on && !a.kind.is_elidable(),
                _ => {}
            }
        }
    }
    let (name, mut items, spans) = doc.clone().into_parts();
    go(&mut items, on);
    Document::new(name, items, spans).expect("hint does not change structure")
}
