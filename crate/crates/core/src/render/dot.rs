use std::collections::BTreeMap;
use std::fmt::Write;

use super::chrono::{ChronoGraph, ChronoNode};
use super::{label_hidden, selected_events, RenderOptions, View, ViewError};
use crate::model::{Document, ElementId, Item};

/// Graphviz text for the selected view.
pub fn to_dot(doc: &Document, opts: &RenderOptions) -> Result<String, ViewError> {
    match opts.view {
        View::Static => Ok(static_dot(doc, opts)),
        View::Dynamic => dynamic_dot(doc, opts),
        View::Chronology => chronology_dot(doc),
    }
}

fn q(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

fn header(doc: &Document, out: &mut String) {
    let _ = writeln!(out, "digraph {} {{", q(doc.name()));
    out.push_str("  rankdir=LR;\n");
    out.push_str("  compound=true;\n");
    out.push_str("  node [shape=box, fontname=\"Helvetica\"];\n");
}

fn node_line(item: &Item, opts: &RenderOptions, pad: &str, out: &mut String) {
    match item {
        Item::Action(a) => {
            let label = if label_hidden(a, opts) {
                ""
            } else {
                a.kind.keyword()
            };
            let _ = write!(out, "{pad}{} [label={}", q(a.id.as_str()), q(label));
            if let Some(n) = a.label {
                let _ = write!(out, ", xlabel={}", q(&n.to_string()));
            }
            out.push_str("];\n");
        }
        Item::Store(s) => {
            let _ = write!(
                out,
                "{pad}{} [shape=cylinder, label={}",
                q(s.id.as_str()),
                q(&s.name)
            );
            if let Some(n) = s.label {
                let _ = write!(out, ", xlabel={}", q(&n.to_string()));
            }
            out.push_str("];\n");
        }
        _ => {}
    }
}

fn static_items(items: &[Item], opts: &RenderOptions, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    for item in items {
        match item {
            Item::Thimac(t) => {
                let _ = writeln!(out, "{pad}subgraph {} {{", q(&format!("cluster_{}", t.id)));
                let title = match t.label {
                    Some(n) => format!("{} ({n})", t.name),
                    None => t.name.clone(),
                };
                let _ = writeln!(out, "{pad}  label={};", q(&title));
                static_items(&t.items, opts, depth + 1, out);
                let _ = writeln!(out, "{pad}}}");
            }
            Item::Action(_) | Item::Store(_) => node_line(item, opts, &pad, out),
            _ => {}
        }
    }
}

fn edges(doc: &Document, out: &mut String) {
    for f in doc.flows() {
        if doc.node_kind(&f.from).is_some() && doc.node_kind(&f.to).is_some() {
            let _ = writeln!(out, "  {} -> {};", q(f.from.as_str()), q(f.to.as_str()));
        }
    }
    for t in doc.triggers() {
        if doc.node_kind(&t.from).is_some() && doc.node_kind(&t.to).is_some() {
            let _ = writeln!(
                out,
                "  {} -> {} [style=dashed];",
                q(t.from.as_str()),
                q(t.to.as_str())
            );
        }
    }
}

fn static_dot(doc: &Document, opts: &RenderOptions) -> String {
    let mut out = String::new();
    header(doc, &mut out);
    static_items(doc.items(), opts, 1, &mut out);
    edges(doc, &mut out);
    out.push_str("}\n");
    out
}

// DOT clusters must nest, while event regions overlap. Each node is drawn in
// the first selected event whose region holds it; the rest stay outside.
fn dynamic_dot(doc: &Document, opts: &RenderOptions) -> Result<String, ViewError> {
    let events = selected_events(doc, opts)?;
    let nodes: Vec<&Item> = doc
        .walk()
        .into_iter()
        .filter(|i| matches!(i, Item::Action(_) | Item::Store(_)))
        .collect();
    let id_of = |i: &Item| -> ElementId {
        match i {
            Item::Action(a) => a.id.clone(),
            Item::Store(s) => s.id.clone(),
            _ => unreachable!("filtered to nodes"),
        }
    };
    let mut home: BTreeMap<ElementId, usize> = BTreeMap::new();
    for (k, e) in events.iter().enumerate() {
        for n in &nodes {
            let id = id_of(n);
            if e.region.contains(&id) {
                home.entry(id).or_insert(k);
            }
        }
    }

    let mut out = String::new();
    header(doc, &mut out);
    for (k, e) in events.iter().enumerate() {
        let _ = writeln!(
            out,
            "  subgraph {} {{",
            q(&format!("cluster_event_{}", e.id))
        );
        let _ = writeln!(out, "    label={};", q(&e.id.to_string()));
        let _ = writeln!(out, "    tooltip={};", q(&e.description));
        let mut any = false;
        for n in &nodes {
            if home.get(&id_of(n)) == Some(&k) {
                node_line(n, opts, "    ", &mut out);
                any = true;
            }
        }
        if !any {
            let _ = writeln!(
                out,
                "    {} [shape=point, style=invis, label=\"\"];",
                q(&format!("event:{}", e.id))
            );
        }
        out.push_str("  }\n");
    }
    for n in &nodes {
        if !home.contains_key(&id_of(n)) {
            node_line(n, opts, "  ", &mut out);
        }
    }
    edges(doc, &mut out);
    out.push_str("}\n");
    Ok(out)
}

fn chronology_dot(doc: &Document) -> Result<String, ViewError> {
    let expr = doc.chronology().ok_or(ViewError::NoChronology)?;
    let g = ChronoGraph::build(expr);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "digraph {} {{",
        q(&format!("{} chronology", doc.name()))
    );
    out.push_str("  rankdir=LR;\n");
    out.push_str("  node [fontname=\"Helvetica\"];\n");
    for (i, n) in g.nodes.iter().enumerate() {
        let attrs = match n {
            ChronoNode::Start => "shape=circle, label=\"start\"".to_string(),
            ChronoNode::End => "shape=doublecircle, label=\"end\"".to_string(),
            ChronoNode::Event(id) => {
                let tip = doc
                    .event(&crate::model::EventId::new(id.clone()))
                    .map(|e| e.description.clone())
                    .unwrap_or_default();
                format!("shape=box, label={}, tooltip={}", q(id), q(&tip))
            }
            ChronoNode::AltSplit | ChronoNode::AltJoin => "shape=diamond, label=\"\"".to_string(),
            ChronoNode::ParSplit | ChronoNode::ParJoin => {
                "shape=box, style=filled, fillcolor=black, label=\"\", width=0.08, height=0.6"
                    .to_string()
            }
            ChronoNode::Skip => "shape=point, label=\"\"".to_string(),
        };
        let _ = writeln!(out, "  n{i} [{attrs}];");
    }
    for e in &g.edges {
        match &e.back {
            None => {
                let _ = writeln!(out, "  n{} -> n{};", e.from, e.to);
            }
            Some(guard) => {
                let _ = write!(
                    out,
                    "  n{} -> n{} [style=bold, constraint=false",
                    e.from, e.to
                );
                if let Some(g) = guard {
                    let _ = write!(out, ", label={}", q(g));
                }
                out.push_str("];\n");
            }
        }
    }
    out.push_str("}\n");
    Ok(out)
}
