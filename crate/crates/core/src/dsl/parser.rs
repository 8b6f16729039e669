use std::collections::BTreeSet;

use super::lexer::{tokenize, Token, TokenKind};
use crate::diagnostic::{sort_diagnostics, Diagnostic};
use crate::dynamics::BehaviorExpr;
use crate::model::{
    ActionKind, ActionNode, Annotation, ByteRange, Document, ElementId, Event, EventId, FlowEdge,
    Item, Region, SpanTable, StorageNode, Thimac, TriggerEdge,
};
use crate::span::SourceSpan;

const ITEM_KEYWORDS: [&str; 9] = [
    "thimac",
    "action",
    "store",
    "flow",
    "trigger",
    "event",
    "chronology",
    "source",
    "annotate",
];

type PResult<T> = Result<T, Diagnostic>;

/// Parses a `.tm` document. On failure returns every diagnostic found, errors first by position.
pub fn parse(src: &str) -> Result<Document, Vec<Diagnostic>> {
    let (tokens, lex_diags) = tokenize(src);
    let mut p = Parser {
        tokens,
        pos: 0,
        diags: lex_diags,
        flows: 0,
        triggers: 0,
        spans: SpanTable::default(),
        events: BTreeSet::new(),
        has_chronology: false,
        has_source: false,
    };
    let result = p.document();
    let mut diags = p.diags;
    match result {
        Ok((name, items)) if !diags.iter().any(Diagnostic::is_error) => {
            Document::new(name, items, p.spans).map_err(|e| {
                vec![Diagnostic::error(
                    "SYN006",
                    e.to_string(),
                    SourceSpan::default(),
                )]
            })
        }
        Ok(_) => {
            sort_diagnostics(&mut diags);
            Err(diags)
        }
        Err(d) => {
            diags.push(d);
            sort_diagnostics(&mut diags);
            Err(diags)
        }
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    diags: Vec<Diagnostic>,
    flows: usize,
    triggers: usize,
    spans: SpanTable,
    events: BTreeSet<EventId>,
    has_chronology: bool,
    has_source: bool,
}

impl Parser {
    fn peek(&self) -> &TokenKind {
        &self.tokens[self.pos].kind
    }

    fn peek_at(&self, n: usize) -> &TokenKind {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i].kind
    }

    fn span(&self) -> SourceSpan {
        self.tokens[self.pos].span
    }

    fn prev_span(&self) -> SourceSpan {
        self.tokens[self.pos.saturating_sub(1)].span
    }

    fn advance(&mut self) -> &Token {
        let t = &self.tokens[self.pos];
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> Diagnostic {
        Diagnostic::error(
            "SYN001",
            format!("expected {expected}, found {}", self.peek().describe()),
            self.span(),
        )
    }

    fn expect(&mut self, kind: TokenKind, expected: &str) -> PResult<SourceSpan> {
        if *self.peek() == kind {
            Ok(self.advance().span)
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), TokenKind::Ident(s) if s == kw)
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<SourceSpan> {
        if self.at_keyword(kw) {
            Ok(self.advance().span)
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    fn ident(&mut self) -> PResult<(String, SourceSpan)> {
        match self.peek().clone() {
            TokenKind::Ident(s) => Ok((s, self.advance().span)),
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn string(&mut self) -> PResult<String> {
        match self.peek().clone() {
            TokenKind::Str(s) => {
                self.advance();
                Ok(s)
            }
            _ => Err(self.unexpected("string")),
        }
    }

    fn int<T: std::str::FromStr>(&mut self) -> PResult<T> {
        match self.peek().clone() {
            TokenKind::Int(s) => {
                let span = self.advance().span;
                s.parse().map_err(|_| {
                    Diagnostic::error("SYN007", format!("integer `{s}` is out of range"), span)
                })
            }
            _ => Err(self.unexpected("integer")),
        }
    }

    fn label(&mut self) -> PResult<Option<u32>> {
        if *self.peek() == TokenKind::At {
            self.advance();
            Ok(Some(self.int()?))
        } else {
            Ok(None)
        }
    }

    /// Skips to the next item keyword or closing brace at the depth where the
    /// failed item began, given as the token index `from`.
    fn recover_item(&mut self, from: usize) {
        let mut open = 0usize;
        for t in &self.tokens[from..self.pos] {
            match t.kind {
                TokenKind::LBrace => open += 1,
                TokenKind::RBrace => open = open.saturating_sub(1),
                _ => {}
            }
        }
        self.skip(open);
    }

    /// Skips to the next item keyword or closing brace at the current nesting depth.
    fn recover(&mut self, consume_first: bool) {
        let mut depth = 0usize;
        if consume_first {
            match self.peek() {
                TokenKind::Eof | TokenKind::RBrace => return,
                TokenKind::LBrace => depth = 1,
                _ => {}
            }
            self.advance();
        }
        self.skip(depth);
    }

    fn skip(&mut self, mut depth: usize) {
        loop {
            match self.peek() {
                TokenKind::Eof => return,
                TokenKind::RBrace if depth == 0 => return,
                TokenKind::RBrace => depth -= 1,
                TokenKind::LBrace => depth += 1,
                TokenKind::Ident(s) if depth == 0 && ITEM_KEYWORDS.contains(&s.as_str()) => return,
                _ => {}
            }
            self.advance();
        }
    }

    fn document(&mut self) -> PResult<(String, Vec<Item>)> {
        self.expect_keyword("model")?;
        let name = self.string()?;
        self.expect(TokenKind::LBrace, "`{`")?;
        let items = self.items(None);
        self.expect(TokenKind::RBrace, "`}`")?;
        self.expect(TokenKind::Eof, "end of input")?;
        Ok((name, items))
    }

    fn items(&mut self, owner: Option<&ElementId>) -> Vec<Item> {
        let mut items = Vec::new();
        let mut siblings = BTreeSet::new();
        loop {
            match self.peek().clone() {
                TokenKind::RBrace | TokenKind::Eof => break,
                TokenKind::Ident(kw) if ITEM_KEYWORDS.contains(&kw.as_str()) => {
                    let from = self.pos;
                    match self.item(&kw, owner, &mut siblings) {
                        Ok(Some(item)) => items.push(item),
                        Ok(None) => {}
                        Err(d) => {
                            self.diags.push(d);
                            self.recover_item(from);
                        }
                    }
                }
                _ => {
                    let d = self.unexpected("a declaration");
                    self.diags.push(d);
                    self.recover(true);
                }
            }
        }
        items
    }

    /// Parses one item. `Ok(None)` means a semantic error was recorded and the item dropped.
    fn item(
        &mut self,
        kw: &str,
        owner: Option<&ElementId>,
        siblings: &mut BTreeSet<String>,
    ) -> PResult<Option<Item>> {
        let start = self.advance().span;
        match kw {
            "thimac" | "action" | "store" => {
                let (name, name_span) = self.ident()?;
                let id = match owner {
                    Some(o) => o.child(&name),
                    None => ElementId::new(&name),
                };
                let item = match kw {
                    "thimac" => {
                        let label = self.label()?;
                        self.expect(TokenKind::LBrace, "`{`")?;
                        let children = self.items(Some(&id));
                        self.expect(TokenKind::RBrace, "`}`")?;
                        Item::Thimac(Thimac {
                            id: id.clone(),
                            name: name.clone(),
                            label,
                            items: children,
                        })
                    }
                    "action" => {
                        self.expect(TokenKind::Colon, "`:`")?;
                        let kind = self.kind()?;
                        let label = self.label()?;
                        Item::Action(ActionNode {
                            id: id.clone(),
                            name: name.clone(),
                            kind,
                            label,
                            owner: owner.cloned().unwrap_or_else(|| ElementId::new("")),
                            implicit: false,
                        })
                    }
                    _ => {
                        let label = self.label()?;
                        Item::Store(StorageNode {
                            id: id.clone(),
                            name: name.clone(),
                            label,
                            owner: owner.cloned().unwrap_or_else(|| ElementId::new("")),
                        })
                    }
                };
                if !siblings.insert(name.clone()) {
                    self.diags.push(Diagnostic::error(
                        "SYN003",
                        format!("duplicate name `{name}` among siblings"),
                        name_span,
                    ));
                    return Ok(None);
                }
                if kw != "thimac" && owner.is_none() {
                    self.diags.push(Diagnostic::error(
                        "SYN005",
                        format!("{kw} `{name}` must be declared inside a thimac"),
                        start.to(self.prev_span()),
                    ));
                    return Ok(None);
                }
                self.spans.elements.insert(id, start.to(self.prev_span()));
                Ok(Some(item))
            }
            "flow" | "trigger" => {
                let (from, _) = self.path()?;
                if kw == "flow" {
                    self.expect(TokenKind::Arrow, "`->`")?;
                } else {
                    self.expect(TokenKind::DashArrow, "`-->`")?;
                }
                let (to, _) = self.path()?;
                let span = start.to(self.prev_span());
                let item = if kw == "flow" {
                    let id = ElementId::flow(self.flows);
                    self.flows += 1;
                    self.spans.elements.insert(id.clone(), span);
                    Item::Flow(FlowEdge {
                        id,
                        from,
                        to,
                        elided_provenance: Vec::new(),
                    })
                } else {
                    let id = ElementId::trigger(self.triggers);
                    self.triggers += 1;
                    self.spans.elements.insert(id.clone(), span);
                    Item::Trigger(TriggerEdge { id, from, to })
                };
                Ok(Some(item))
            }
            "event" => {
                let (name, name_span) = self.ident()?;
                let description = self.string()?;
                self.expect_keyword("covers")?;
                self.expect(TokenKind::LBrace, "`{`")?;
                let mut covers = vec![self.path()?.0];
                while *self.peek() == TokenKind::Comma {
                    self.advance();
                    covers.push(self.path()?.0);
                }
                self.expect(TokenKind::RBrace, "`}`")?;
                let time =
                    if self.at_keyword("time") && matches!(self.peek_at(1), TokenKind::Str(_)) {
                        self.advance();
                        Some(self.string()?)
                    } else {
                        None
                    };
                let id = EventId::new(name);
                if !self.events.insert(id.clone()) {
                    self.diags.push(Diagnostic::error(
                        "SYN006",
                        format!("duplicate event `{id}`"),
                        name_span,
                    ));
                    return Ok(None);
                }
                self.spans
                    .events
                    .insert(id.clone(), start.to(self.prev_span()));
                Ok(Some(Item::Event(Event {
                    id,
                    description,
                    covers,
                    region: Region::default(),
                    time,
                })))
            }
            "chronology" => {
                self.expect(TokenKind::LBrace, "`{`")?;
                let expr = self.behavior()?;
                self.expect(TokenKind::RBrace, "`}`")?;
                if std::mem::replace(&mut self.has_chronology, true) {
                    self.diags.push(Diagnostic::error(
                        "SYN006",
                        "more than one chronology declared",
                        start,
                    ));
                    return Ok(None);
                }
                self.spans.chronology = Some(start.to(self.prev_span()));
                Ok(Some(Item::Chronology(expr)))
            }
            "source" => {
                let path = self.string()?;
                if std::mem::replace(&mut self.has_source, true) {
                    self.diags.push(Diagnostic::error(
                        "SYN006",
                        "more than one source declared",
                        start,
                    ));
                    return Ok(None);
                }
                self.spans.source = Some(start.to(self.prev_span()));
                Ok(Some(Item::Source(path)))
            }
            "annotate" => {
                let (event, _) = self.ident()?;
                self.expect_keyword("spans")?;
                let mut spans = vec![self.byte_range()?];
                while *self.peek() == TokenKind::Comma {
                    self.advance();
                    spans.push(self.byte_range()?);
                }
                self.spans.annotations.push(start.to(self.prev_span()));
                Ok(Some(Item::Annotate(Annotation {
                    event: EventId::new(event),
                    spans,
                })))
            }
            _ => unreachable!("caller checks item keywords"),
        }
    }

    fn kind(&mut self) -> PResult<ActionKind> {
        match self.peek().clone() {
            TokenKind::Ident(s) => match ActionKind::from_keyword(&s) {
                Some(k) => {
                    self.advance();
                    Ok(k)
                }
                None => Err(self.unexpected("an action kind")),
            },
            _ => Err(self.unexpected("an action kind")),
        }
    }

    fn path(&mut self) -> PResult<(ElementId, SourceSpan)> {
        let (mut text, start) = self.ident()?;
        while *self.peek() == TokenKind::Dot {
            self.advance();
            let (seg, _) = self.ident()?;
            text.push('.');
            text.push_str(&seg);
        }
        Ok((ElementId::new(text), start.to(self.prev_span())))
    }

    fn byte_range(&mut self) -> PResult<ByteRange> {
        let start_span = self.span();
        let start: usize = self.int()?;
        self.expect(TokenKind::DotDot, "`..`")?;
        let end: usize = self.int()?;
        if start > end {
            return Err(Diagnostic::error(
                "SYN007",
                format!("span {start}..{end} ends before it starts"),
                start_span.to(self.prev_span()),
            ));
        }
        Ok(ByteRange::new(start, end))
    }

    fn behavior(&mut self) -> PResult<BehaviorExpr> {
        let mut terms = vec![self.term()?];
        while *self.peek() == TokenKind::Semi {
            self.advance();
            terms.push(self.term()?);
        }
        Ok(if terms.len() == 1 {
            terms.pop().expect("one term")
        } else {
            BehaviorExpr::Seq(terms)
        })
    }

    fn branches(&mut self) -> PResult<Vec<BehaviorExpr>> {
        self.expect(TokenKind::LBrace, "`{`")?;
        let mut branches = vec![self.behavior()?];
        if *self.peek() != TokenKind::Pipe {
            return Err(self.unexpected("`|`"));
        }
        while *self.peek() == TokenKind::Pipe {
            self.advance();
            branches.push(self.behavior()?);
        }
        self.expect(TokenKind::RBrace, "`}`")?;
        Ok(branches)
    }

    fn term(&mut self) -> PResult<BehaviorExpr> {
        let (word, _) = self.ident()?;
        let next = self.peek().clone();
        match (word.as_str(), next) {
            ("alt", TokenKind::LBrace) => Ok(BehaviorExpr::Alt(self.branches()?)),
            ("par", TokenKind::LBrace) => Ok(BehaviorExpr::Par(self.branches()?)),
            ("loop", TokenKind::LBrace | TokenKind::LParen) => {
                let guard = if *self.peek() == TokenKind::LParen {
                    self.advance();
                    let g = self.string()?;
                    self.expect(TokenKind::RParen, "`)`")?;
                    Some(g)
                } else {
                    None
                };
                self.expect(TokenKind::LBrace, "`{`")?;
                let body = self.behavior()?;
                self.expect(TokenKind::RBrace, "`}`")?;
                Ok(BehaviorExpr::Loop {
                    body: Box::new(body),
                    guard,
                })
            }
            _ => Ok(BehaviorExpr::Event(EventId::new(word))),
        }
    }
}
