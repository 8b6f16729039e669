use crate::diagnostic::Diagnostic;
use crate::span::SourceSpan;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum TokenKind {
    Ident(String),
    Str(String),
    Int(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Colon,
    Comma,
    Semi,
    Pipe,
    At,
    Dot,
    DotDot,
    Arrow,
    DashArrow,
    Eof,
}

impl TokenKind {
    pub(crate) fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("`{s}`"),
            TokenKind::Str(_) => "string".into(),
            TokenKind::Int(s) => format!("integer `{s}`"),
            TokenKind::LBrace => "`{`".into(),
            TokenKind::RBrace => "`}`".into(),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
            TokenKind::Colon => "`:`".into(),
            TokenKind::Comma => "`,`".into(),
            TokenKind::Semi => "`;`".into(),
            TokenKind::Pipe => "`|`".into(),
            TokenKind::At => "`@`".into(),
            TokenKind::Dot => "`.`".into(),
            TokenKind::DotDot => "`..`".into(),
            TokenKind::Arrow => "`->`".into(),
            TokenKind::DashArrow => "`-->`".into(),
            TokenKind::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

/// Tokenizes `src`. Lexical errors are collected; the offending characters are skipped.
pub(crate) fn tokenize(src: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut lx = Lexer {
        src,
        pos: 0,
        line: 1,
        col: 1,
        tokens: Vec::new(),
        diags: Vec::new(),
    };
    lx.run();
    (lx.tokens, lx.diags)
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    col: u32,
    tokens: Vec<Token>,
    diags: Vec<Diagnostic>,
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn span_from(&self, start: usize, line: u32, col: u32) -> SourceSpan {
        SourceSpan::new(start, self.pos, line, col)
    }

    fn push(&mut self, kind: TokenKind, start: usize, line: u32, col: u32) {
        let span = self.span_from(start, line, col);
        self.tokens.push(Token { kind, span });
    }

    fn run(&mut self) {
        loop {
            self.skip_trivia();
            let (start, line, col) = (self.pos, self.line, self.col);
            let Some(c) = self.peek() else {
                self.push(TokenKind::Eof, start, line, col);
                return;
            };
            match c {
                '{' | '}' | '(' | ')' | ':' | ',' | ';' | '|' | '@' => {
                    self.bump();
                    let kind = match c {
                        '{' => TokenKind::LBrace,
                        '}' => TokenKind::RBrace,
                        '(' => TokenKind::LParen,
                        ')' => TokenKind::RParen,
                        ':' => TokenKind::Colon,
                        ',' => TokenKind::Comma,
                        ';' => TokenKind::Semi,
                        '|' => TokenKind::Pipe,
                        _ => TokenKind::At,
                    };
                    self.push(kind, start, line, col);
                }
                '.' => {
                    self.bump();
                    if self.peek() == Some('.') {
                        self.bump();
                        self.push(TokenKind::DotDot, start, line, col);
                    } else {
                        self.push(TokenKind::Dot, start, line, col);
                    }
                }
                '-' if self.peek_at(1) == Some('>') => {
                    self.bump();
                    self.bump();
                    self.push(TokenKind::Arrow, start, line, col);
                }
                '-' if self.peek_at(1) == Some('-') && self.peek_at(2) == Some('>') => {
                    self.bump();
                    self.bump();
                    self.bump();
                    self.push(TokenKind::DashArrow, start, line, col);
                }
                '"' => self.string(start, line, col),
                c if c.is_ascii_digit() => {
                    while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                        self.bump();
                    }
                    let text = self.src[start..self.pos].to_string();
                    self.push(TokenKind::Int(text), start, line, col);
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    while self
                        .peek()
                        .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_')
                    {
                        self.bump();
                    }
                    let text = self.src[start..self.pos].to_string();
                    self.push(TokenKind::Ident(text), start, line, col);
                }
                other => {
                    self.bump();
                    self.diags.push(Diagnostic::error(
                        "SYN004",
                        format!("unexpected character {other:?}"),
                        self.span_from(start, line, col),
                    ));
                }
            }
        }
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('/') if self.peek_at(1) == Some('/') => {
                    while self.peek().is_some_and(|c| c != '\n') {
                        self.bump();
                    }
                }
                _ => return,
            }
        }
    }

    fn string(&mut self, start: usize, line: u32, col: u32) {
        self.bump();
        let mut value = String::new();
        loop {
            match self.bump() {
                None => {
                    self.diags.push(Diagnostic::error(
                        "SYN002",
                        "unterminated string",
                        self.span_from(start, line, col),
                    ));
                    // still emit the token so the parser does not cascade
                    self.push(TokenKind::Str(value), start, line, col);
                    return;
                }
                Some('"') => break,
                Some('\\') => {
                    let (esc_start, esc_line, esc_col) = (self.pos - 1, self.line, self.col - 1);
                    match self.bump() {
                        Some('"') => value.push('"'),
                        Some('\\') => value.push('\\'),
                        Some(other) => {
                            self.diags.push(Diagnostic::error(
                                "SYN004",
                                format!("invalid escape `\\{other}`"),
                                self.span_from(esc_start, esc_line, esc_col),
                            ));
                        }
                        None => {}
                    }
                }
                Some(c) => value.push(c),
            }
        }
        self.push(TokenKind::Str(value), start, line, col);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).0.into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn arrows_and_ranges() {
        assert_eq!(
            kinds("a -> b --> c 1..2"),
            vec![
                TokenKind::Ident("a".into()),
                TokenKind::Arrow,
                TokenKind::Ident("b".into()),
                TokenKind::DashArrow,
                TokenKind::Ident("c".into()),
                TokenKind::Int("1".into()),
                TokenKind::DotDot,
                TokenKind::Int("2".into()),
                TokenKind::Eof,
            ]
        );
    }

    #[test]
    fn strings_comments_and_positions() {
        let (toks, diags) = tokenize("// note\n  \"a\\\"b\\\\\" x");
        assert!(diags.is_empty());
        assert_eq!(toks[0].kind, TokenKind::Str("a\"b\\".into()));
        assert_eq!((toks[0].span.line, toks[0].span.column), (2, 3));
        assert_eq!(toks[1].span.column, 12);
    }

    #[test]
    fn unterminated_string_and_bad_escape() {
        let (_, diags) = tokenize("\"abc");
        assert_eq!(diags[0].code, "SYN002");
        let (_, diags) = tokenize("\"a\\nb\"");
        assert_eq!(diags[0].code, "SYN004");
    }
}
