//! Tokenizer for description files.
//!
//! Whitespace and comments are kept as trivia tokens, so the lexemes of
//! [`tokenize`]'s output concatenate back to the input byte for byte.

use crate::diagnostic::{Diagnostic, Span};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Whitespace,
    Comment,
    Keyword,
    Identifier,
    /// All-caps words joined by underscores, e.g. `SERVER_URL`.
    EnvName,
    Number,
    /// `$name`
    Variable,
    /// Any other run of non-delimiter characters, e.g. a URL.
    Word,
    String,
    LBrace,
    RBrace,
    Colon,
}

impl TokenKind {
    pub fn is_trivia(self) -> bool {
        matches!(self, TokenKind::Whitespace | TokenKind::Comment)
    }

    /// Kinds that may stand as an unquoted literal.
    pub fn is_bare(self) -> bool {
        matches!(
            self,
            TokenKind::Keyword
                | TokenKind::Identifier
                | TokenKind::EnvName
                | TokenKind::Number
                | TokenKind::Word
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token<'a> {
    pub kind: TokenKind,
    pub lexeme: &'a str,
    pub span: Span,
}

impl Token<'_> {
    /// The text a literal token stands for: string contents with escapes
    /// removed, or the lexeme itself for bare tokens.
    pub fn text(&self) -> String {
        if self.kind == TokenKind::String {
            unescape(self.lexeme)
        } else {
            self.lexeme.to_string()
        }
    }
}

pub const KEYWORDS: &[&str] = &[
    "http",
    "name",
    "url",
    "server",
    "path",
    "type",
    "param",
    "header",
    "body",
    "contentType",
    "entityType",
    "payload",
    "returns",
    "expect",
    "as",
    "customize",
    "proxy",
    "host",
    "port",
    "basicauth",
    "user",
    "password",
    "timeout",
    "input",
    "environment",
];

pub fn tokenize(source: &str) -> (Vec<Token<'_>>, Vec<Diagnostic>) {
    let mut lexer = Lexer {
        src: source,
        pos: 0,
        line: 1,
        column: 1,
        tokens: Vec::new(),
        diagnostics: Vec::new(),
    };
    lexer.run();
    (lexer.tokens, lexer.diagnostics)
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    column: u32,
    tokens: Vec<Token<'a>>,
    diagnostics: Vec<Diagnostic>,
}

fn is_delimiter(c: char) -> bool {
    c.is_whitespace() || matches!(c, '{' | '}' | '"')
}

impl<'a> Lexer<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn span_here(&self, len: usize) -> Span {
        Span::new(self.pos, len, self.line, self.column)
    }

    fn run(&mut self) {
        while let Some(c) = self.peek() {
            let rest = self.rest();
            let len = if c.is_whitespace() {
                self.scan_while(TokenKind::Whitespace, |c| c.is_whitespace())
            } else if rest.starts_with("//") {
                self.scan_while(TokenKind::Comment, |c| c != '\n')
            } else {
                match c {
                    '{' => self.single(TokenKind::LBrace),
                    '}' => self.single(TokenKind::RBrace),
                    ':' => self.single(TokenKind::Colon),
                    '"' => self.string(),
                    _ => self.word(),
                }
            };
            debug_assert!(len > 0);
        }
    }

    fn push(&mut self, kind: TokenKind, len: usize) -> usize {
        let lexeme = &self.src[self.pos..self.pos + len];
        let span = self.span_here(len);
        self.tokens.push(Token { kind, lexeme, span });
        for c in lexeme.chars() {
            if c == '\n' {
                self.line += 1;
                self.column = 1;
            } else {
                self.column += 1;
            }
        }
        self.pos += len;
        len
    }

    fn single(&mut self, kind: TokenKind) -> usize {
        self.push(kind, 1)
    }

    fn scan_while(&mut self, kind: TokenKind, pred: impl Fn(char) -> bool) -> usize {
        let len = self
            .rest()
            .char_indices()
            .find(|&(_, c)| !pred(c))
            .map_or(self.rest().len(), |(i, _)| i);
        self.push(kind, len)
    }

    fn string(&mut self) -> usize {
        let rest = self.rest();
        let mut chars = rest.char_indices().skip(1);
        let mut end = None;
        while let Some((i, c)) = chars.next() {
            match c {
                '"' => {
                    end = Some(i + 1);
                    break;
                }
                '\\' => match chars.next() {
                    Some((_, '"' | '\\')) => {}
                    Some((j, other)) => {
                        let span = self.span_at(i, j + other.len_utf8() - i);
                        self.diagnostics.push(Diagnostic::error(
                            span,
                            format!("invalid escape `\\{other}`; only `\\\"` and `\\\\` are allowed"),
                        ));
                    }
                    None => {}
                },
                _ => {}
            }
        }
        match end {
            Some(len) => self.push(TokenKind::String, len),
            None => {
                self.diagnostics.push(Diagnostic::error(
                    self.span_here(1),
                    "unterminated string literal",
                ));
                self.push(TokenKind::String, rest.len())
            }
        }
    }

    /// Span of `len` bytes at byte `delta` from the current position.
    fn span_at(&self, delta: usize, len: usize) -> Span {
        let mut line = self.line;
        let mut column = self.column;
        for c in self.rest()[..delta].chars() {
            if c == '\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
        }
        Span::new(self.pos + delta, len, line, column)
    }

    fn word(&mut self) -> usize {
        let rest = self.rest();
        let mut end = rest.len();
        let mut iter = rest.char_indices().peekable();
        while let Some((i, c)) = iter.next() {
            if is_delimiter(c) {
                end = i;
                break;
            }
            if c == ':' {
                let next = iter.peek().map(|&(_, n)| n);
                if next.is_none_or(is_delimiter) {
                    end = i;
                    break;
                }
            }
        }
        let lexeme = &rest[..end];
        let kind = classify(lexeme);
        self.push(kind, end)
    }
}

fn classify(word: &str) -> TokenKind {
    if KEYWORDS.contains(&word) {
        TokenKind::Keyword
    } else if word.bytes().all(|b| b.is_ascii_digit()) {
        TokenKind::Number
    } else if crate::model::is_environment_name(word) {
        TokenKind::EnvName
    } else if crate::model::is_identifier(word) {
        TokenKind::Identifier
    } else if word.starts_with('$') {
        TokenKind::Variable
    } else {
        TokenKind::Word
    }
}

/// Contents of a (possibly unterminated) string lexeme with escapes removed.
pub fn unescape(lexeme: &str) -> String {
    let inner = lexeme.strip_prefix('"').unwrap_or(lexeme);
    let inner = if inner.ends_with('"') && !ends_with_escaped_quote(inner) {
        &inner[..inner.len() - 1]
    } else {
        inner
    };
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            if let Some(n) = chars.next() {
                out.push(n);
            }
        } else {
            out.push(c);
        }
    }
    out
}

fn ends_with_escaped_quote(inner: &str) -> bool {
    let body = &inner[..inner.len() - 1];
    body.bytes().rev().take_while(|&b| b == b'\\').count() % 2 == 1
}

/// Quotes `s` as a string literal.
pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if matches!(c, '"' | '\\') {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}
