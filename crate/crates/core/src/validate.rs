//! Static and dynamic well-formedness rules.
//!
//! Strict-mode flow adjacency (source → allowed targets, within one thimac):
//!
//! ```text
//! create   → process, release, store
//! receive  → process, release, store
//! process  → release, store
//! release  → transfer
//! transfer → transfer, receive
//! store    → process, release
//! ```
//!
//! A flow between different thimacs is legal only as transfer → transfer.
//! Create must pass through release before it can be transferred.

use std::collections::{BTreeMap, BTreeSet};

use crate::diagnostic::{sort_diagnostics, Diagnostic, Severity};
use crate::model::{ActionKind, Document, ElementId, ElementKind, EventId, NodeKind, Region};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Full five-action form.
    Strict,
    /// After release, transfer and receive have been removed.
    Simplified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidationRule {
    pub code: &'static str,
    pub severity: Severity,
    pub description: &'static str,
}

pub const RULES: &[ValidationRule] = &[
    ValidationRule {
        code: "V1",
        severity: Severity::Error,
        description: "flow or trigger endpoint does not resolve",
    },
    ValidationRule {
        code: "V2",
        severity: Severity::Error,
        description: "flow endpoint is not an action or store, trigger endpoint is not an action, or a flow loops on itself",
    },
    ValidationRule {
        code: "V3",
        severity: Severity::Error,
        description: "flow between these action kinds is not in the adjacency table",
    },
    ValidationRule {
        code: "V4",
        severity: Severity::Error,
        description: "flow crosses a thimac boundary without being transfer to transfer",
    },
    ValidationRule {
        code: "V5",
        severity: Severity::Error,
        description: "trigger target is not a create or process action",
    },
    ValidationRule {
        code: "V6",
        severity: Severity::Error,
        description: "release, transfer or receive present in simplified mode",
    },
    ValidationRule {
        code: "V7",
        severity: Severity::Error,
        description: "event covers an unknown element or its region is not closed",
    },
    ValidationRule {
        code: "V8",
        severity: Severity::Error,
        description: "chronology names an undeclared event or is malformed",
    },
    ValidationRule {
        code: "V9",
        severity: Severity::Warning,
        description: "event region is not connected",
    },
    ValidationRule {
        code: "V10",
        severity: Severity::Warning,
        description: "two events carve the identical region",
    },
    ValidationRule {
        code: "V11",
        severity: Severity::Error,
        description: "annotation names an undeclared event",
    },
];

pub fn rule(code: &str) -> Option<&'static ValidationRule> {
    RULES.iter().find(|r| r.code == code)
}

/// Strict-mode adjacency for a flow inside one thimac.
pub fn strict_flow_allowed(from: NodeKind, to: NodeKind) -> bool {
    use ActionKind::*;
    use NodeKind::{Action as A, Storage as S};
    matches!(
        (from, to),
        (A(Create) | A(Receive), A(Process) | A(Release) | S)
            | (A(Process), A(Release) | S)
            | (A(Release), A(Transfer))
            | (A(Transfer), A(Transfer) | A(Receive))
            | (S, A(Process) | A(Release))
    )
}

/// Checks flows, triggers and node kinds. Diagnostics are sorted by source position.
pub fn check_static(doc: &Document, mode: Mode) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    if mode == Mode::Simplified {
        for a in doc.actions() {
            if a.kind.is_elidable() {
                out.push(Diagnostic::error(
                    "V6",
                    format!(
                        "{} action `{}` is not allowed in simplified mode",
                        a.kind, a.id
                    ),
                    doc.span_of(&a.id),
                ));
            }
        }
    }

    for f in doc.flows() {
        let span = doc.span_of(&f.id);
        let mut endpoint = |id: &ElementId| -> Option<NodeKind> {
            match doc.kind_of(id) {
                None => {
                    out.push(Diagnostic::error(
                        "V1",
                        format!("flow endpoint `{id}` does not resolve"),
                        span,
                    ));
                    None
                }
                Some(ElementKind::Action(k)) => Some(NodeKind::Action(k)),
                Some(ElementKind::Storage) => Some(NodeKind::Storage),
                Some(_) => {
                    out.push(Diagnostic::error(
                        "V2",
                        format!("flow endpoint `{id}` is not an action or store"),
                        span,
                    ));
                    None
                }
            }
        };
        let (from, to) = (endpoint(&f.from), endpoint(&f.to));
        let (Some(from), Some(to)) = (from, to) else {
            continue;
        };
        if f.from == f.to {
            out.push(Diagnostic::error(
                "V2",
                format!("flow from `{}` to itself", f.from),
                span,
            ));
            continue;
        }
        match mode {
            Mode::Strict => {
                let crosses = doc.owner_of(&f.from) != doc.owner_of(&f.to);
                if crosses {
                    let both_transfer = from == NodeKind::Action(ActionKind::Transfer)
                        && to == NodeKind::Action(ActionKind::Transfer);
                    if !both_transfer {
                        out.push(Diagnostic::error(
                            "V4",
                            format!(
                                "flow from {from} `{}` to {to} `{}` crosses a thimac boundary; only transfer to transfer may",
                                f.from, f.to
                            ),
                            span,
                        ));
                    }
                } else if !strict_flow_allowed(from, to) {
                    out.push(Diagnostic::error(
                        "V3",
                        format!(
                            "flow from {from} `{}` to {to} `{}` is not allowed",
                            f.from, f.to
                        ),
                        span,
                    ));
                }
            }
            // create, process and store connect freely; elidable endpoints are V6
            Mode::Simplified => {}
        }
    }

    for t in doc.triggers() {
        let span = doc.span_of(&t.id);
        let mut resolved = true;
        for id in [&t.from, &t.to] {
            match doc.kind_of(id) {
                None => {
                    resolved = false;
                    out.push(Diagnostic::error(
                        "V1",
                        format!("trigger endpoint `{id}` does not resolve"),
                        span,
                    ));
                }
                Some(ElementKind::Action(_)) => {}
                Some(_) => {
                    resolved = false;
                    out.push(Diagnostic::error(
                        "V2",
                        format!("trigger endpoint `{id}` is not an action"),
                        span,
                    ));
                }
            }
        }
        if !resolved {
            continue;
        }
        if let Some(ElementKind::Action(k)) = doc.kind_of(&t.to) {
            if !matches!(k, ActionKind::Create | ActionKind::Process) {
                out.push(Diagnostic::error(
                    "V5",
                    format!(
                        "trigger target `{}` is a {k} action; it must be create or process",
                        t.to
                    ),
                    span,
                ));
            }
        }
    }

    sort_diagnostics(&mut out);
    out
}

/// Static and dynamic checks together, in source order.
pub fn check_document(doc: &Document, mode: Mode) -> Vec<Diagnostic> {
    let mut out = check_static(doc, mode);
    out.extend(check_dynamic(doc));
    sort_diagnostics(&mut out);
    out
}

/// Strict when any release, transfer or receive is present, simplified otherwise.
pub fn infer_mode(doc: &Document) -> Mode {
    if doc.actions().iter().any(|a| a.kind.is_elidable()) {
        Mode::Strict
    } else {
        Mode::Simplified
    }
}

/// Checks events, chronology references and annotations.
pub fn check_dynamic(doc: &Document) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let events = doc.events();
    let declared: BTreeSet<&EventId> = events.iter().map(|e| &e.id).collect();

    for e in &events {
        let span = doc.event_span(&e.id);
        for c in &e.covers {
            if doc.resolve_ref(c.as_str()).is_err() {
                out.push(Diagnostic::error(
                    "V7",
                    format!("event {} covers unknown element `{c}`", e.id),
                    span,
                ));
            }
        }
        if let Some(problem) = region_problem(doc, &e.region) {
            out.push(Diagnostic::error(
                "V7",
                format!("event {} region is not closed: {problem}", e.id),
                span,
            ));
        }
        if !e.region.is_empty() && !is_connected(doc, &e.region) {
            out.push(Diagnostic::warning(
                "V9",
                format!("event {} region is not connected", e.id),
                span,
            ));
        }
    }

    let mut seen: BTreeMap<&BTreeSet<ElementId>, &EventId> = BTreeMap::new();
    for e in &events {
        if e.region.is_empty() {
            continue;
        }
        if let Some(first) = seen.get(&e.region.elements) {
            out.push(Diagnostic::warning(
                "V10",
                format!("event {} carves the same region as {first}", e.id),
                doc.event_span(&e.id),
            ));
        } else {
            seen.insert(&e.region.elements, &e.id);
        }
    }

    if let Some(chron) = doc.chronology() {
        let span = doc.spans().chronology.unwrap_or_default();
        if let Err(err) = chron.check_shape() {
            out.push(Diagnostic::error("V8", err.to_string(), span));
        }
        let mut reported = BTreeSet::new();
        for id in chron.event_refs() {
            if !declared.contains(id) && reported.insert(id) {
                out.push(Diagnostic::error(
                    "V8",
                    format!("chronology names undeclared event `{id}`"),
                    span,
                ));
            }
        }
    }

    for (i, a) in doc.annotations().into_iter().enumerate() {
        if !declared.contains(&a.event) {
            let span = doc.spans().annotations.get(i).copied().unwrap_or_default();
            out.push(Diagnostic::error(
                "V11",
                format!("annotation names undeclared event `{}`", a.event),
                span,
            ));
        }
    }

    sort_diagnostics(&mut out);
    out
}

/// First violated region invariant, if any.
pub fn region_problem(doc: &Document, region: &Region) -> Option<String> {
    for id in &region.elements {
        if !doc.contains(id) {
            return Some(format!("`{id}` is not in the model"));
        }
        if let Some(owner) = doc.owner_of(id) {
            if !region.contains(owner) {
                return Some(format!("`{id}` is included without its owner `{owner}`"));
            }
        }
    }
    let edges = doc
        .flows()
        .into_iter()
        .map(|f| (&f.id, &f.from, &f.to))
        .chain(doc.triggers().into_iter().map(|t| (&t.id, &t.from, &t.to)));
    for (id, from, to) in edges {
        if region.contains(id) && !(region.contains(from) && region.contains(to)) {
            return Some(format!("edge `{id}` is included without both endpoints"));
        }
    }
    None
}

fn is_connected(doc: &Document, region: &Region) -> bool {
    let ids: Vec<&ElementId> = region.elements.iter().collect();
    let pos: BTreeMap<&ElementId, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let mut parent: Vec<usize> = (0..ids.len()).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut root = x;
        while parent[root] != root {
            root = parent[root];
        }
        let mut cur = x;
        while parent[cur] != root {
            let next = parent[cur];
            parent[cur] = root;
            cur = next;
        }
        root
    }
    let mut union = |a: &ElementId, b: &ElementId| {
        if let (Some(&x), Some(&y)) = (pos.get(a), pos.get(b)) {
            let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
            parent[rx] = ry;
        }
    };
    for id in &ids {
        if let Some(owner) = doc.owner_of(id) {
            union(id, owner);
        }
    }
    for f in doc.flows() {
        if region.contains(&f.id) {
            union(&f.id, &f.from);
            union(&f.id, &f.to);
        }
    }
    for t in doc.triggers() {
        if region.contains(&t.id) {
            union(&t.id, &t.from);
            union(&t.id, &t.to);
        }
    }
    let roots: BTreeSet<usize> = (0..ids.len()).map(|i| find(&mut parent, i)).collect();
    roots.len() <= 1
}
