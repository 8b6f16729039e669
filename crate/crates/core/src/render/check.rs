//! Structural readers for emitted artifacts.
//!
//! [`read_dot`] accepts the Graphviz statement grammar (graphs, subgraphs,
//! node, edge and attribute statements) without HTML labels or ports.
//! [`scan_xml`] checks well-formedness of a UTF-8 XML document without a DTD.

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DotError {
    #[error("byte {0}: unexpected {1}")]
    Unexpected(usize, String),
    #[error("unterminated string starting at byte {0}")]
    Unterminated(usize),
    #[error("trailing input at byte {0}")]
    Trailing(usize),
}

pub type Attrs = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DotEdge {
    pub from: String,
    pub to: String,
    pub attrs: Attrs,
}

/// What a DOT text declares.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DotGraph {
    pub name: Option<String>,
    pub directed: bool,
    /// Nodes with their own node statement.
    pub nodes: BTreeMap<String, Attrs>,
    pub edges: Vec<DotEdge>,
    /// Subgraph names, in order of appearance.
    pub subgraphs: Vec<String>,
}

impl DotGraph {
    pub fn clusters(&self) -> usize {
        self.subgraphs
            .iter()
            .filter(|s| s.starts_with("cluster"))
            .count()
    }

    pub fn dashed_edges(&self) -> usize {
        self.edges
            .iter()
            .filter(|e| e.attrs.get("style").is_some_and(|s| s.contains("dashed")))
            .count()
    }

    pub fn nodes_with(&self, key: &str, value: &str) -> usize {
        self.nodes
            .values()
            .filter(|a| a.get(key).is_some_and(|v| v == value))
            .count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Id(String),
    Sym(char),
    EdgeOp,
}

fn lex_dot(src: &str) -> Result<Vec<(usize, Tok)>, DotError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'/' if bytes.get(i + 1) == Some(&b'/') => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'/' if bytes.get(i + 1) == Some(&b'*') => {
                let end = src[i + 2..].find("*/").ok_or(DotError::Unterminated(i))?;
                i += end + 4;
            }
            b'#' if i == 0 || bytes[i - 1] == b'\n' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'{' | b'}' | b'[' | b']' | b';' | b',' | b'=' | b':' => {
                out.push((i, Tok::Sym(c as char)));
                i += 1;
            }
            b'-' if matches!(bytes.get(i + 1), Some(b'>') | Some(b'-')) => {
                out.push((i, Tok::EdgeOp));
                i += 2;
            }
            b'"' => {
                let start = i;
                let mut s = String::new();
                i += 1;
                loop {
                    match bytes.get(i) {
                        None => return Err(DotError::Unterminated(start)),
                        Some(b'"') => break,
                        Some(b'\\') if i + 1 < bytes.len() => {
                            let ch = src[i + 1..].chars().next().expect("in bounds");
                            if ch != '"' {
                                s.push('\\');
                            }
                            s.push(ch);
                            i += 1 + ch.len_utf8();
                        }
                        Some(_) => {
                            let ch = src[i..].chars().next().expect("in bounds");
                            s.push(ch);
                            i += ch.len_utf8();
                        }
                    }
                }
                i += 1;
                out.push((start, Tok::Id(s)));
            }
            _ if c.is_ascii_alphanumeric() || c == b'_' || c == b'.' || c == b'-' || c >= 0x80 => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric()
                        || bytes[i] == b'_'
                        || bytes[i] == b'.'
                        || bytes[i] >= 0x80
                        || (bytes[i] == b'-' && i == start))
                {
                    i += 1;
                }
                out.push((start, Tok::Id(src[start..i].to_string())));
            }
            _ => return Err(DotError::Unexpected(i, format!("`{}`", c as char))),
        }
    }
    Ok(out)
}

struct DotParser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    graph: DotGraph,
    anon: usize,
}

impl DotParser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn fail<T>(&self) -> Result<T, DotError> {
        let what = match self.peek() {
            Some(Tok::Id(s)) => format!("`{s}`"),
            Some(Tok::Sym(c)) => format!("`{c}`"),
            Some(Tok::EdgeOp) => "edge operator".into(),
            None => "end of input".into(),
        };
        Err(DotError::Unexpected(self.offset(), what))
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), DotError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.fail()
        }
    }

    fn id(&mut self) -> Result<String, DotError> {
        match self.peek() {
            Some(Tok::Id(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.fail(),
        }
    }

    fn keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Id(s)) if s.eq_ignore_ascii_case(kw))
    }

    fn graph(&mut self) -> Result<(), DotError> {
        if self.keyword("strict") {
            self.pos += 1;
        }
        if self.keyword("digraph") {
            self.graph.directed = true;
        } else if !self.keyword("graph") {
            return self.fail();
        }
        self.pos += 1;
        if let Some(Tok::Id(_)) = self.peek() {
            self.graph.name = Some(self.id()?);
        }
        self.expect('{')?;
        self.stmts()?;
        self.expect('}')?;
        if self.pos != self.toks.len() {
            return Err(DotError::Trailing(self.offset()));
        }
        Ok(())
    }

    fn stmts(&mut self) -> Result<(), DotError> {
        while !matches!(self.peek(), Some(Tok::Sym('}')) | None) {
            self.stmt()?;
            self.eat(';');
        }
        Ok(())
    }

    fn attr_list(&mut self) -> Result<Attrs, DotError> {
        let mut attrs = Attrs::new();
        while self.eat('[') {
            while !self.eat(']') {
                let k = self.id()?;
                self.expect('=')?;
                let v = self.id()?;
                attrs.insert(k, v);
                if !self.eat(',') {
                    self.eat(';');
                }
            }
        }
        Ok(attrs)
    }

    /// Node ids mentioned by an edge operand.
    fn operand(&mut self) -> Result<Vec<String>, DotError> {
        if self.keyword("subgraph") || self.peek() == Some(&Tok::Sym('{')) {
            self.subgraph()
        } else {
            let id = self.id()?;
            if self.eat(':') {
                self.id()?;
                if self.eat(':') {
                    self.id()?;
                }
            }
            Ok(vec![id])
        }
    }

    fn subgraph(&mut self) -> Result<Vec<String>, DotError> {
        let name = if self.keyword("subgraph") {
            self.pos += 1;
            match self.peek() {
                Some(Tok::Id(_)) => self.id()?,
                _ => self.anon_name(),
            }
        } else {
            self.anon_name()
        };
        self.graph.subgraphs.push(name);
        let nodes_before: Vec<String> = self.graph.nodes.keys().cloned().collect();
        let edges_before = self.graph.edges.len();
        self.expect('{')?;
        self.stmts()?;
        self.expect('}')?;
        let mut mentioned: Vec<String> = self
            .graph
            .nodes
            .keys()
            .filter(|k| !nodes_before.contains(k))
            .cloned()
            .collect();
        for e in &self.graph.edges[edges_before..] {
            for n in [&e.from, &e.to] {
                if !mentioned.contains(n) {
                    mentioned.push(n.clone());
                }
            }
        }
        Ok(mentioned)
    }

    fn anon_name(&mut self) -> String {
        self.anon += 1;
        format!("%anon{}", self.anon)
    }

    fn stmt(&mut self) -> Result<(), DotError> {
        if self.keyword("graph") || self.keyword("node") || self.keyword("edge") {
            if let Some((_, Tok::Sym('['))) = self.toks.get(self.pos + 1) {
                self.pos += 1;
                self.attr_list()?;
                return Ok(());
            }
        }
        if let (Some(Tok::Id(_)), Some((_, Tok::Sym('=')))) =
            (self.peek(), self.toks.get(self.pos + 1))
        {
            self.pos += 2;
            self.id()?;
            return Ok(());
        }
        let is_sub = self.keyword("subgraph") || self.peek() == Some(&Tok::Sym('{'));
        let first = self.operand()?;
        if self.peek() != Some(&Tok::EdgeOp) {
            if !is_sub {
                let attrs = self.attr_list()?;
                let node = first.into_iter().next().expect("single id");
                self.graph.nodes.entry(node).or_default().extend(attrs);
            }
            return Ok(());
        }
        let mut chain = vec![first];
        while self.peek() == Some(&Tok::EdgeOp) {
            self.pos += 1;
            chain.push(self.operand()?);
        }
        let attrs = self.attr_list()?;
        for pair in chain.windows(2) {
            for from in &pair[0] {
                for to in &pair[1] {
                    self.graph.edges.push(DotEdge {
                        from: from.clone(),
                        to: to.clone(),
                        attrs: attrs.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Parses a DOT text into its declared nodes, edges and subgraphs.
pub fn read_dot(src: &str) -> Result<DotGraph, DotError> {
    let toks = lex_dot(src)?;
    let mut p = DotParser {
        toks,
        pos: 0,
        end: src.len(),
        graph: DotGraph::default(),
        anon: 0,
    };
    p.graph()?;
    Ok(p.graph)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum XmlError {
    #[error("byte {0}: {1}")]
    Malformed(usize, &'static str),
    #[error("byte {0}: closing `{1}` does not match `{2}`")]
    Mismatch(usize, String, String),
    #[error("unclosed element `{0}`")]
    Unclosed(String),
    #[error("no root element")]
    NoRoot,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XmlElement {
    pub name: String,
    pub attrs: Attrs,
    pub depth: usize,
}

/// Elements of a well-formed document in document order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct XmlDoc {
    pub elements: Vec<XmlElement>,
}

impl XmlDoc {
    pub fn count(&self, name: &str) -> usize {
        self.elements.iter().filter(|e| e.name == name).count()
    }

    pub fn count_with(&self, name: &str, key: &str, value: &str) -> usize {
        self.elements
            .iter()
            .filter(|e| e.name == name && e.attrs.get(key).is_some_and(|v| v == value))
            .count()
    }

    pub fn root(&self) -> Option<&XmlElement> {
        self.elements.first()
    }
}

fn is_name_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == ':'
}

fn is_name_char(c: char) -> bool {
    is_name_start(c) || c.is_ascii_digit() || c == '-' || c == '.'
}

struct Scanner<'a> {
    src: &'a str,
    i: usize,
}

impl Scanner<'_> {
    fn rest(&self) -> &str {
        &self.src[self.i..]
    }

    fn skip_ws(&mut self) {
        let n = self.rest().len() - self.rest().trim_start().len();
        self.i += n;
    }

    fn bad<T>(&self, what: &'static str) -> Result<T, XmlError> {
        Err(XmlError::Malformed(self.i, what))
    }

    fn name(&mut self) -> Result<String, XmlError> {
        let mut chars = self.rest().char_indices();
        match chars.next() {
            Some((_, c)) if is_name_start(c) => {}
            _ => return self.bad("expected a name"),
        }
        let len = chars
            .find(|(_, c)| !is_name_char(*c))
            .map_or(self.rest().len(), |(i, _)| i);
        let name = self.rest()[..len].to_string();
        self.i += len;
        Ok(name)
    }

    fn skip_until(&mut self, end: &str, what: &'static str) -> Result<(), XmlError> {
        match self.rest().find(end) {
            Some(n) => {
                self.i += n + end.len();
                Ok(())
            }
            None => self.bad(what),
        }
    }

    fn text(&mut self, stop: char) -> Result<(), XmlError> {
        while let Some(c) = self.rest().chars().next() {
            if c == stop || c == '<' {
                return Ok(());
            }
            if c == '&' {
                self.entity()?;
            } else {
                self.i += c.len_utf8();
            }
        }
        Ok(())
    }

    fn entity(&mut self) -> Result<(), XmlError> {
        let Some(end) = self.rest().find(';') else {
            return self.bad("unterminated entity");
        };
        let body = &self.rest()[1..end];
        let ok = matches!(body, "amp" | "lt" | "gt" | "quot" | "apos")
            || body
                .strip_prefix("#x")
                .is_some_and(|h| !h.is_empty() && h.chars().all(|c| c.is_ascii_hexdigit()))
            || body
                .strip_prefix('#')
                .is_some_and(|d| !d.is_empty() && d.chars().all(|c| c.is_ascii_digit()));
        if !ok {
            return self.bad("unknown entity");
        }
        self.i += end + 1;
        Ok(())
    }

    fn misc(&mut self) -> Result<(), XmlError> {
        loop {
            self.skip_ws();
            if self.rest().starts_with("<!--") {
                self.skip_until("-->", "unterminated comment")?;
            } else if self.rest().starts_with("<?") {
                self.skip_until("?>", "unterminated processing instruction")?;
            } else {
                return Ok(());
            }
        }
    }
}

/// Checks that `src` is a well-formed XML document.
pub fn scan_xml(src: &str) -> Result<XmlDoc, XmlError> {
    let mut s = Scanner { src, i: 0 };
    let mut doc = XmlDoc::default();
    let mut stack: Vec<String> = Vec::new();
    s.misc()?;
    if !s.rest().starts_with('<') {
        return Err(XmlError::NoRoot);
    }
    loop {
        if stack.is_empty() && !doc.elements.is_empty() {
            s.misc()?;
            if !s.rest().is_empty() {
                return s.bad("content after the root element");
            }
            return Ok(doc);
        }
        if s.rest().is_empty() {
            return match stack.pop() {
                Some(open) => Err(XmlError::Unclosed(open)),
                None => Err(XmlError::NoRoot),
            };
        }
        if s.rest().starts_with("<!--") {
            s.skip_until("-->", "unterminated comment")?;
        } else if s.rest().starts_with("<![CDATA[") {
            s.skip_until("]]>", "unterminated CDATA section")?;
        } else if s.rest().starts_with("<?") {
            s.skip_until("?>", "unterminated processing instruction")?;
        } else if s.rest().starts_with("</") {
            let at = s.i;
            s.i += 2;
            let name = s.name()?;
            s.skip_ws();
            if !s.rest().starts_with('>') {
                return s.bad("expected `>`");
            }
            s.i += 1;
            match stack.pop() {
                Some(open) if open == name => {}
                Some(open) => return Err(XmlError::Mismatch(at, name, open)),
                None => return s.bad("closing tag without an open element"),
            }
        } else if s.rest().starts_with('<') {
            s.i += 1;
            let name = s.name()?;
            let mut attrs = Attrs::new();
            loop {
                let before = s.i;
                s.skip_ws();
                if s.rest().starts_with("/>") {
                    s.i += 2;
                    doc.elements.push(XmlElement {
                        name,
                        attrs,
                        depth: stack.len(),
                    });
                    break;
                }
                if s.rest().starts_with('>') {
                    s.i += 1;
                    doc.elements.push(XmlElement {
                        name: name.clone(),
                        attrs,
                        depth: stack.len(),
                    });
                    stack.push(name);
                    break;
                }
                if s.i == before {
                    return s.bad("expected whitespace before attribute");
                }
                let key = s.name()?;
                s.skip_ws();
                if !s.rest().starts_with('=') {
                    return s.bad("expected `=`");
                }
                s.i += 1;
                s.skip_ws();
                let quote = match s.rest().chars().next() {
                    Some(q @ ('"' | '\'')) => q,
                    _ => return s.bad("attribute value must be quoted"),
                };
                s.i += 1;
                let start = s.i;
                s.text(quote)?;
                if !s.rest().starts_with(quote) {
                    return s.bad("`<` in attribute value");
                }
                let value = s.src[start..s.i].to_string();
                s.i += 1;
                if attrs.insert(key, value).is_some() {
                    return s.bad("duplicate attribute");
                }
            }
        } else {
            s.text('<')?;
        }
    }
}
