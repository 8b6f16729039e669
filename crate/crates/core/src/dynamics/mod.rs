//! Chronology of events: trace acceptance, next-event queries and bounded
//! trace enumeration.
//!
//! The language of a [`BehaviorExpr`] is
//!
//! * `E`: the single trace `[E]`;
//! * `a; b; ...`: concatenation in order;
//! * `alt { a | b }`: union;
//! * `loop { a }`: one or more repetitions of `a`;
//! * `par { a | b }`: every interleaving of one trace per branch.
//!
//! Recognition steps language derivatives, so loops are unbounded there.
//! Enumeration unrolls each loop between 1 and `max_loop` times.

mod deriv;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::model::{Document, EventId};
use deriv::{cat, or, shuffle, star, Re, Sym};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BehaviorExpr {
    Event(EventId),
    Seq(Vec<BehaviorExpr>),
    Alt(Vec<BehaviorExpr>),
    Loop {
        body: Box<BehaviorExpr>,
        guard: Option<String>,
    },
    Par(Vec<BehaviorExpr>),
}

impl BehaviorExpr {
    pub fn event(id: &str) -> Self {
        BehaviorExpr::Event(EventId::new(id))
    }

    pub fn seq<I: IntoIterator<Item = &'static str>>(ids: I) -> Self {
        BehaviorExpr::Seq(ids.into_iter().map(BehaviorExpr::event).collect())
    }

    /// Event references in left-to-right order, with repeats.
    pub fn event_refs(&self) -> Vec<&EventId> {
        fn go<'a>(e: &'a BehaviorExpr, out: &mut Vec<&'a EventId>) {
            match e {
                BehaviorExpr::Event(id) => out.push(id),
                BehaviorExpr::Seq(xs) | BehaviorExpr::Alt(xs) | BehaviorExpr::Par(xs) => {
                    xs.iter().for_each(|x| go(x, out))
                }
                BehaviorExpr::Loop { body, .. } => go(body, out),
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    /// Checks the arity invariants: nonempty `Seq`, at least two `Alt`/`Par` branches.
    pub fn check_shape(&self) -> Result<(), DynamicsError> {
        match self {
            BehaviorExpr::Event(_) => Ok(()),
            BehaviorExpr::Seq(xs) if xs.is_empty() => {
                Err(DynamicsError::Malformed("empty sequence".into()))
            }
            BehaviorExpr::Alt(xs) if xs.len() < 2 => Err(DynamicsError::Malformed(
                "alt needs at least two branches".into(),
            )),
            BehaviorExpr::Par(xs) if xs.len() < 2 => Err(DynamicsError::Malformed(
                "par needs at least two branches".into(),
            )),
            BehaviorExpr::Seq(xs) | BehaviorExpr::Alt(xs) | BehaviorExpr::Par(xs) => {
                xs.iter().try_for_each(BehaviorExpr::check_shape)
            }
            BehaviorExpr::Loop { body, .. } => body.check_shape(),
        }
    }

    /// Counts of (alt, loop, par) nodes.
    pub fn operator_counts(&self) -> (usize, usize, usize) {
        match self {
            BehaviorExpr::Event(_) => (0, 0, 0),
            BehaviorExpr::Seq(xs) | BehaviorExpr::Alt(xs) | BehaviorExpr::Par(xs) => {
                let own = match self {
                    BehaviorExpr::Alt(_) => (1, 0, 0),
                    BehaviorExpr::Par(_) => (0, 0, 1),
                    _ => (0, 0, 0),
                };
                xs.iter()
                    .map(BehaviorExpr::operator_counts)
                    .fold(own, |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2))
            }
            BehaviorExpr::Loop { body, .. } => {
                let (a, l, p) = body.operator_counts();
                (a, l + 1, p)
            }
        }
    }
}

/// A sequence of event ids. Text form is comma separated: `E1,E2,E3`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Trace(pub Vec<EventId>);

impl Trace {
    pub fn new<I, S>(ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Trace(ids.into_iter().map(|s| EventId::new(s)).collect())
    }

    /// Parses the comma-separated form; blank text is the empty trace.
    pub fn parse(text: &str) -> Self {
        if text.trim().is_empty() {
            return Trace::default();
        }
        Trace(text.split(',').map(|s| EventId::new(s.trim())).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(e.as_str())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DynamicsError {
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("malformed chronology: {0}")]
    Malformed(String),
    #[error("document declares no chronology")]
    NoChronology,
    #[error("enumeration bounds must be at least 1")]
    InvalidBound,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    pub traces: Vec<Trace>,
    /// More traces exist beyond `max_traces`.
    pub truncated: bool,
}

/// A behavior expression checked against the set of declared events.
#[derive(Debug, Clone)]
pub struct Chronology {
    expr: BehaviorExpr,
    symbols: BTreeMap<EventId, Sym>,
    names: Vec<EventId>,
}

impl Chronology {
    pub fn new<I>(expr: BehaviorExpr, declared: I) -> Result<Self, DynamicsError>
    where
        I: IntoIterator<Item = EventId>,
    {
        expr.check_shape()?;
        // symbols are numbered in id order so that symbol order is trace order
        let names: Vec<EventId> = declared
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let symbols = names
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i as Sym))
            .collect::<BTreeMap<_, _>>();
        if let Some(missing) = expr
            .event_refs()
            .into_iter()
            .find(|e| !symbols.contains_key(e))
        {
            return Err(DynamicsError::UnknownEvent(missing.to_string()));
        }
        Ok(Self {
            expr,
            symbols,
            names,
        })
    }

    pub fn from_document(doc: &Document) -> Result<Self, DynamicsError> {
        let expr = doc.chronology().ok_or(DynamicsError::NoChronology)?.clone();
        Self::new(expr, doc.events().into_iter().map(|e| e.id.clone()))
    }

    pub fn expr(&self) -> &BehaviorExpr {
        &self.expr
    }

    fn to_re(&self, e: &BehaviorExpr, max_loop: Option<usize>) -> Re {
        match e {
            BehaviorExpr::Event(id) => Re::Sym(self.symbols[id]),
            BehaviorExpr::Seq(xs) => xs
                .iter()
                .fold(Re::Eps, |acc, x| cat(acc, self.to_re(x, max_loop))),
            BehaviorExpr::Alt(xs) => or(xs.iter().map(|x| self.to_re(x, max_loop))),
            BehaviorExpr::Par(xs) => xs
                .iter()
                .fold(Re::Eps, |acc, x| shuffle(acc, self.to_re(x, max_loop))),
            BehaviorExpr::Loop { body, .. } => {
                let body = self.to_re(body, max_loop);
                match max_loop {
                    None => cat(body.clone(), star(body)),
                    Some(k) => {
                        let mut reps = Vec::with_capacity(k);
                        let mut acc = body.clone();
                        reps.push(acc.clone());
                        for _ in 1..k {
                            acc = cat(acc, body.clone());
                            reps.push(acc.clone());
                        }
                        or(reps)
                    }
                }
            }
        }
    }

    fn symbols_of(&self, trace: &Trace) -> Result<Vec<Sym>, DynamicsError> {
        trace
            .0
            .iter()
            .map(|e| {
                self.symbols
                    .get(e)
                    .copied()
                    .ok_or_else(|| DynamicsError::UnknownEvent(e.to_string()))
            })
            .collect()
    }

    fn residual(&self, syms: &[Sym]) -> (Re, usize) {
        let mut re = self.to_re(&self.expr, None);
        for (i, &s) in syms.iter().enumerate() {
            let next = re.derive(s);
            if next == Re::Nul {
                return (Re::Nul, i);
            }
            re = next;
        }
        (re, syms.len())
    }

    /// Whether `trace` belongs to the chronology's language.
    pub fn accepts(&self, trace: &Trace) -> Result<bool, DynamicsError> {
        let syms = self.symbols_of(trace)?;
        let (re, consumed) = self.residual(&syms);
        Ok(consumed == syms.len() && re.nullable())
    }

    /// Length of the longest prefix of `trace` that some accepted trace extends.
    pub fn accepted_prefix_len(&self, trace: &Trace) -> Result<usize, DynamicsError> {
        let syms = self.symbols_of(trace)?;
        Ok(self.residual(&syms).1)
    }

    /// Events that extend `prefix` towards some accepted trace.
    pub fn next_events(&self, prefix: &Trace) -> Result<BTreeSet<EventId>, DynamicsError> {
        let syms = self.symbols_of(prefix)?;
        let (re, consumed) = self.residual(&syms);
        if consumed < syms.len() {
            return Ok(BTreeSet::new());
        }
        let mut firsts = BTreeSet::new();
        re.first_symbols(&mut firsts);
        Ok(firsts
            .into_iter()
            .map(|s| self.names[s as usize].clone())
            .collect())
    }

    /// All traces with every loop unrolled 1..=`max_loop` times, in
    /// lexicographic order of event-id sequences, cut at `max_traces`.
    pub fn enumerate(
        &self,
        max_loop: usize,
        max_traces: usize,
    ) -> Result<Enumeration, DynamicsError> {
        if max_loop == 0 || max_traces == 0 {
            return Err(DynamicsError::InvalidBound);
        }
        let re = self.to_re(&self.expr, Some(max_loop));
        let mut out = Vec::new();
        let mut prefix = Vec::new();
        // one extra trace tells us whether the cut dropped anything
        self.walk(&re, &mut prefix, &mut out, max_traces + 1);
        let truncated = out.len() > max_traces;
        out.truncate(max_traces);
        Ok(Enumeration {
            traces: out,
            truncated,
        })
    }

    // Pre-order walk visits words in lexicographic order because symbols are
    // numbered in id order and a prefix sorts before its extensions.
    fn walk(&self, re: &Re, prefix: &mut Vec<Sym>, out: &mut Vec<Trace>, limit: usize) {
        if out.len() >= limit {
            return;
        }
        if re.nullable() {
            out.push(Trace(
                prefix
                    .iter()
                    .map(|&s| self.names[s as usize].clone())
                    .collect(),
            ));
        }
        let mut firsts = BTreeSet::new();
        re.first_symbols(&mut firsts);
        for s in firsts {
            if out.len() >= limit {
                return;
            }
            prefix.push(s);
            self.walk(&re.derive(s), prefix, out, limit);
            prefix.pop();
        }
    }
}
