//! Independent oracles and generators shared by the integration tests.
//!
//! Nothing here calls into the library's own semantics: languages are built
//! by set operations, reachability by Warshall's algorithm, coverage by a
//! byte bitmap and adjacency from a literal table.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;

use proptest::prelude::*;
use tm_core::{parse, ActionKind, BehaviorExpr, Document};

pub const CASES: [&str; 3] = ["sales", "h2s", "milk"];

pub fn corpus_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn case_text(name: &str) -> String {
    let path = corpus_root().join(name).join("model.tm");
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn case_source(name: &str) -> Option<String> {
    fs::read_to_string(corpus_root().join(name).join("source.txt")).ok()
}

pub fn case_doc(name: &str) -> Document {
    parse(&case_text(name)).unwrap_or_else(|d| panic!("{name}: {d:?}"))
}

/// Strict adjacency inside one thimac, rows and columns in the order
/// create, process, release, transfer, receive.
pub const ADJACENCY: [[bool; 5]; 5] = [
    // to:  create process release transfer receive
    [false, true, true, false, false],  // create
    [false, false, true, false, false], // process
    [false, false, false, true, false], // release
    [false, false, false, true, true],  // transfer
    [false, true, true, false, false],  // receive
];

pub const KINDS: [&str; 5] = ["create", "process", "release", "transfer", "receive"];

pub fn kind_index(kind: ActionKind) -> usize {
    KINDS.iter().position(|k| *k == kind.keyword()).unwrap()
}

/// A model with two actions in one thimac joined by one flow.
pub fn two_node_model(from: &str, to: &str) -> String {
    format!(
        "model \"pair\" {{\n  thimac T {{\n    action a: {from}\n    action b: {to}\n  }}\n  flow T.a -> T.b\n}}\n"
    )
}

/// Transitive closure of `edges` over `nodes` (pairs `(i, j)` with a nonempty path).
pub fn closure(nodes: &[String], edges: &[(String, String)]) -> BTreeSet<(String, String)> {
    let n = nodes.len();
    let index = |s: &str| nodes.iter().position(|x| x == s);
    let mut reach = vec![vec![false; n]; n];
    for (a, b) in edges {
        if let (Some(i), Some(j)) = (index(a), index(b)) {
            reach[i][j] = true;
        }
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                let via = reach[k].clone();
                for (to, r) in reach[i].iter_mut().enumerate() {
                    *r |= via[to];
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    for i in 0..n {
        for j in 0..n {
            if reach[i][j] {
                out.insert((nodes[i].clone(), nodes[j].clone()));
            }
        }
    }
    out
}

/// Flow closure over a document's actions and stores.
pub fn flow_closure(doc: &Document) -> BTreeSet<(String, String)> {
    let mut nodes: Vec<String> = doc.actions().iter().map(|a| a.id.to_string()).collect();
    nodes.extend(doc.storages().iter().map(|s| s.id.to_string()));
    let edges: Vec<(String, String)> = doc
        .flows()
        .iter()
        .map(|f| (f.from.to_string(), f.to.to_string()))
        .collect();
    closure(&nodes, &edges)
}

pub type Lang = BTreeSet<Vec<String>>;

fn concat(a: &Lang, b: &Lang) -> Lang {
    let mut out = Lang::new();
    for x in a {
        for y in b {
            let mut w = x.clone();
            w.extend(y.iter().cloned());
            out.insert(w);
        }
    }
    out
}

fn interleave(x: &[String], y: &[String], acc: &mut Vec<String>, out: &mut Lang) {
    if x.is_empty() && y.is_empty() {
        out.insert(acc.clone());
        return;
    }
    if let Some((h, t)) = x.split_first() {
        acc.push(h.clone());
        interleave(t, y, acc, out);
        acc.pop();
    }
    if let Some((h, t)) = y.split_first() {
        acc.push(h.clone());
        interleave(x, t, acc, out);
        acc.pop();
    }
}

fn shuffle(a: &Lang, b: &Lang) -> Lang {
    let mut out = Lang::new();
    for x in a {
        for y in b {
            interleave(x, y, &mut Vec::new(), &mut out);
        }
    }
    out
}

/// Words of `e` with every loop iterated between 1 and `k` times.
pub fn language(e: &BehaviorExpr, k: usize) -> Lang {
    match e {
        BehaviorExpr::Event(id) => [vec![id.to_string()]].into_iter().collect(),
        BehaviorExpr::Seq(xs) => xs
            .iter()
            .fold([Vec::new()].into_iter().collect(), |acc, x| {
                concat(&acc, &language(x, k))
            }),
        BehaviorExpr::Alt(xs) => xs.iter().flat_map(|x| language(x, k)).collect(),
        BehaviorExpr::Par(xs) => xs
            .iter()
            .fold([Vec::new()].into_iter().collect(), |acc, x| {
                shuffle(&acc, &language(x, k))
            }),
        BehaviorExpr::Loop { body, .. } => {
            let once = language(body, k);
            let mut power = once.clone();
            let mut out = once.clone();
            for _ in 1..k {
                power = concat(&power, &once);
                out.extend(power.iter().cloned());
            }
            out
        }
    }
}

/// Number of distinct bytes of `0..len` covered by the ranges, after clipping.
pub fn covered_bytes(len: usize, ranges: &[(usize, usize)]) -> usize {
    let mut bits = vec![false; len];
    for &(s, e) in ranges {
        for b in bits.iter_mut().take(e.min(len)).skip(s) {
            *b = true;
        }
    }
    bits.iter().filter(|b| **b).count()
}

/// Behavior expressions over a small alphabet.
pub fn arb_behavior(alphabet: usize) -> impl Strategy<Value = BehaviorExpr> {
    let leaf = (1..=alphabet).prop_map(|i| BehaviorExpr::event(&format!("E{i}")));
    leaf.prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..=3).prop_map(BehaviorExpr::Seq),
            prop::collection::vec(inner.clone(), 2..=3).prop_map(BehaviorExpr::Alt),
            prop::collection::vec(inner.clone(), 2..=2).prop_map(BehaviorExpr::Par),
            (inner, prop::option::of("[a-z]{1,6}( [a-z]{1,6})?")).prop_map(|(b, g)| {
                BehaviorExpr::Loop {
                    body: Box::new(b),
                    guard: g,
                }
            }),
        ]
    })
}

/// One release/transfer/receive pipe from thimac `from` to thimac `to`,
/// optionally branching at the outbound transfer to a third thimac.
#[derive(Debug, Clone)]
pub struct Pipe {
    pub from: usize,
    pub to: usize,
    pub from_create: bool,
    pub into_store: bool,
    pub branch: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct PipelineModel {
    pub thimacs: usize,
    pub pipes: Vec<Pipe>,
    pub triggers: Vec<(usize, usize)>,
    pub events: usize,
    pub chronology: Option<BehaviorExpr>,
}

impl PipelineModel {
    pub fn text(&self) -> String {
        let mut body = vec![String::new(); self.thimacs];
        let mut flows = Vec::new();
        for (k, p) in self.pipes.iter().enumerate() {
            let (src, dst) = (format!("T{}", p.from), format!("T{}", p.to));
            body[p.from].push_str(&format!(
                "    action r{k}: release\n    action t{k}: transfer\n"
            ));
            body[p.to].push_str(&format!(
                "    action u{k}: transfer\n    action v{k}: receive\n"
            ));
            let start = if p.from_create { "c" } else { "p" };
            let end = if p.into_store { "s" } else { "p" };
            flows.push(format!("{src}.{start} -> {src}.r{k}"));
            flows.push(format!("{src}.r{k} -> {src}.t{k}"));
            flows.push(format!("{src}.t{k} -> {dst}.u{k}"));
            flows.push(format!("{dst}.u{k} -> {dst}.v{k}"));
            flows.push(format!("{dst}.v{k} -> {dst}.{end}"));
            if let Some(b) = p.branch {
                let third = format!("T{b}");
                body[b].push_str(&format!(
                    "    action w{k}: transfer\n    action x{k}: receive\n"
                ));
                flows.push(format!("{src}.t{k} -> {third}.w{k}"));
                flows.push(format!("{third}.w{k} -> {third}.x{k}"));
                flows.push(format!("{third}.x{k} -> {third}.p"));
            }
        }
        let mut out = String::from("model \"gen\" {\n");
        for (i, b) in body.iter().enumerate() {
            out.push_str(&format!(
                "  thimac T{i} @{} {{\n    action c: create\n    action p: process\n    store s\n{b}  }}\n",
                i + 1
            ));
        }
        for i in 0..self.thimacs {
            out.push_str(&format!("  flow T{i}.c -> T{i}.p\n"));
        }
        for f in &flows {
            out.push_str(&format!("  flow {f}\n"));
        }
        for (a, b) in &self.triggers {
            out.push_str(&format!("  trigger T{a}.p --> T{b}.c\n"));
        }
        for e in 1..=self.events {
            let t = (e - 1) % self.thimacs;
            out.push_str(&format!(
                "  event E{e} \"Step {e} happens\" covers {{ T{t}.c, T{t}.p }}\n"
            ));
        }
        if let Some(c) = &self.chronology {
            out.push_str(&format!(
                "  chronology {{ {} }}\n",
                tm_core::dsl::print_behavior(c)
            ));
        }
        out.push_str("}\n");
        out
    }
}

/// Strict-valid models made of thimacs joined by release/transfer/receive pipes.
pub fn arb_pipeline_model() -> impl Strategy<Value = PipelineModel> {
    (2usize..=4).prop_flat_map(|n| {
        let pipe = (
            0..n,
            1..n,
            any::<bool>(),
            any::<bool>(),
            prop::option::of(1..n),
        )
            .prop_map(move |(from, off, from_create, into_store, branch)| {
                let to = (from + off) % n;
                let branch = branch.map(|o| (from + o) % n).filter(|b| *b != to);
                Pipe {
                    from,
                    to,
                    from_create,
                    into_store,
                    branch,
                }
            });
        let trigger = (0..n, 1..n).prop_map(move |(a, off)| (a, (a + off) % n));
        (
            prop::collection::vec(pipe, 0..5),
            prop::collection::vec(trigger, 0..3),
            prop::option::of(arb_behavior(4)),
        )
            .prop_map(move |(pipes, triggers, chronology)| PipelineModel {
                thimacs: n,
                pipes,
                triggers,
                events: 4,
                chronology,
            })
    })
}
