use std::fmt::Write;

use crate::dynamics::BehaviorExpr;
use crate::model::{Document, Item};

/// Canonical text for `doc`: two-space indentation, one declaration per line,
/// declaration order preserved.
pub fn print_canonical(doc: &Document) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "model {} {{", quote(doc.name()));
    print_items(doc.items(), 1, &mut out);
    out.push_str("}\n");
    out
}

fn print_items(items: &[Item], depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    for item in items {
        out.push_str(&pad);
        match item {
            Item::Thimac(t) => {
                let _ = writeln!(out, "thimac {}{} {{", t.name, label(t.label));
                print_items(&t.items, depth + 1, out);
                out.push_str(&pad);
                out.push('}');
            }
            Item::Action(a) => {
                let _ = write!(out, "action {}: {}{}", a.name, a.kind, label(a.label));
            }
            Item::Store(s) => {
                let _ = write!(out, "store {}{}", s.name, label(s.label));
            }
            Item::Flow(f) => {
                let _ = write!(out, "flow {} -> {}", f.from, f.to);
            }
            Item::Trigger(t) => {
                let _ = write!(out, "trigger {} --> {}", t.from, t.to);
            }
            Item::Event(e) => {
                let covers: Vec<&str> = e.covers.iter().map(|c| c.as_str()).collect();
                let _ = write!(
                    out,
                    "event {} {} covers {{ {} }}",
                    e.id,
                    quote(&e.description),
                    covers.join(", ")
                );
                if let Some(t) = &e.time {
                    let _ = write!(out, " time {}", quote(t));
                }
            }
            Item::Chronology(c) => {
                let _ = write!(out, "chronology {{ {} }}", behavior(c));
            }
            Item::Source(s) => {
                let _ = write!(out, "source {}", quote(s));
            }
            Item::Annotate(a) => {
                let spans: Vec<String> = a
                    .spans
                    .iter()
                    .map(|r| format!("{}..{}", r.start, r.end))
                    .collect();
                let _ = write!(out, "annotate {} spans {}", a.event, spans.join(", "));
            }
        }
        out.push('\n');
    }
}

fn label(label: Option<u32>) -> String {
    label.map(|n| format!(" @{n}")).unwrap_or_default()
}

fn quote(s: &str) -> String {
    let mut q = String::with_capacity(s.len() + 2);
    q.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            q.push('\\');
        }
        q.push(c);
    }
    q.push('"');
    q
}

/// Behavior expression in DSL syntax.
pub fn behavior(e: &BehaviorExpr) -> String {
    match e {
        BehaviorExpr::Event(id) => id.to_string(),
        BehaviorExpr::Seq(xs) => xs.iter().map(term).collect::<Vec<_>>().join("; "),
        BehaviorExpr::Alt(_) | BehaviorExpr::Par(_) | BehaviorExpr::Loop { .. } => term(e),
    }
}

// A nested Seq cannot be a term, so it is flattened into the enclosing sequence
// by the parser; printing it inline keeps the same language.
fn term(e: &BehaviorExpr) -> String {
    match e {
        BehaviorExpr::Event(id) => id.to_string(),
        BehaviorExpr::Seq(_) => behavior(e),
        BehaviorExpr::Alt(xs) => format!("alt {{ {} }}", branches(xs)),
        BehaviorExpr::Par(xs) => format!("par {{ {} }}", branches(xs)),
        BehaviorExpr::Loop { body, guard } => match guard {
            Some(g) => format!("loop ({}) {{ {} }}", quote(g), behavior(body)),
            None => format!("loop {{ {} }}", behavior(body)),
        },
    }
}

fn branches(xs: &[BehaviorExpr]) -> String {
    xs.iter().map(behavior).collect::<Vec<_>>().join(" | ")
}
