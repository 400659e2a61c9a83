//! Recursive-descent parser for `.http` description files.
//!
//! ```text
//! http {
//!     name WeatherLocation
//!     url server http://www.dataservice.accuweather.com
//!         path locations/v1/cities/search
//!     type GET
//!     param apikey: input $apiKeyParam
//!     param q: input $city
//!     param language: "en-US"
//! }
//! ```
//!
//! Syntax errors inside one message do not stop the parse: the parser skips
//! to that message's closing brace and carries on, so a single run reports
//! problems in every message.

mod format;
pub mod lexer;

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

pub use format::{format_document, format_message, format_source};
pub use lexer::{tokenize, Token, TokenKind};

use crate::diagnostic::{has_errors, Diagnostic, Span};
use crate::model::*;

pub fn parse_document(source: &str, source_name: &str) -> Result<RequestDocument, Vec<Diagnostic>> {
    let (tokens, mut diagnostics) = tokenize(source);
    let eof = eof_span(source);
    let mut parser = Parser {
        tokens: tokens.into_iter().filter(|t| !t.kind.is_trivia()).collect(),
        pos: 0,
        eof,
        diagnostics: Vec::new(),
    };
    let messages = parser.document();
    diagnostics.append(&mut parser.diagnostics);

    if messages.is_empty() && diagnostics.is_empty() {
        diagnostics.push(Diagnostic::error(
            eof,
            "document must contain at least one http message",
        ));
    }
    let mut seen: HashMap<&str, Span> = HashMap::new();
    for m in &messages {
        if let Some(first) = seen.insert(&m.name, m.spans.name) {
            diagnostics.push(Diagnostic::error(
                m.spans.name,
                format!(
                    "duplicate message name `{}` (first defined on line {})",
                    m.name, first.line
                ),
            ));
        }
    }

    diagnostics.sort_by_key(|d| d.span.offset);
    if has_errors(&diagnostics) {
        Err(diagnostics)
    } else {
        Ok(RequestDocument {
            source_name: source_name.to_string(),
            messages,
        })
    }
}

fn eof_span(source: &str) -> Span {
    let line = source.matches('\n').count() as u32 + 1;
    let column = source.rsplit('\n').next().map_or(0, |l| l.chars().count()) as u32 + 1;
    Span::new(source.len(), 0, line, column)
}

/// Outcome of [`parse_directory`].
#[derive(Debug, Default)]
pub struct DirectoryParse {
    pub documents: Vec<RequestDocument>,
    /// Files that failed to read or parse, with their diagnostics.
    pub failures: Vec<(PathBuf, Vec<Diagnostic>)>,
}

impl DirectoryParse {
    pub fn is_clean(&self) -> bool {
        self.failures.is_empty()
    }

    /// Diagnostics of all failures, rendered one per line.
    pub fn render_failures(&self) -> Vec<String> {
        self.failures
            .iter()
            .flat_map(|(path, diags)| {
                let file = path.display().to_string();
                diags.iter().map(move |d| d.render(&file))
            })
            .collect()
    }
}

/// Parses every `.http` file under `root`, recursively, in lexicographic
/// path order. Failures are collected rather than aborting the walk.
pub fn parse_directory(root: &Path) -> std::io::Result<DirectoryParse> {
    Ok(parse_files(&http_files(root)?))
}

/// Every `.http` file under `root`, recursively, sorted.
pub fn http_files(root: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    collect_http_files(root, &mut files)?;
    files.sort();
    Ok(files)
}

/// Parses the given files in order.
pub fn parse_files(files: &[PathBuf]) -> DirectoryParse {
    let mut out = DirectoryParse::default();
    for path in files {
        let name = path.display().to_string();
        match fs::read_to_string(path) {
            Ok(text) => match parse_document(&text, &name) {
                Ok(doc) => out.documents.push(doc),
                Err(diags) => out.failures.push((path.clone(), diags)),
            },
            Err(e) => out.failures.push((
                path.clone(),
                vec![Diagnostic::error(Span::default(), format!("cannot read file: {e}"))],
            )),
        }
    }
    out
}

fn collect_http_files(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        let path = entry.path();
        let ty = entry.file_type()?;
        if ty.is_dir() {
            collect_http_files(&path, out)?;
        } else if ty.is_file() && path.extension().is_some_and(|e| e == "http") {
            out.push(path);
        }
    }
    Ok(())
}

/// Raised after a diagnostic has been recorded; unwinds to the enclosing
/// message, which resynchronizes.
struct Fail;

type PResult<T> = Result<T, Fail>;

struct Parser<'a> {
    tokens: Vec<Token<'a>>,
    pos: usize,
    eof: Span,
    diagnostics: Vec<Diagnostic>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token<'a>> {
        self.tokens.get(self.pos)
    }

    fn peek_span(&self) -> Span {
        self.peek().map_or(self.eof, |t| t.span)
    }

    fn bump(&mut self) -> Option<Token<'a>> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn at_keyword(&self, kw: &str) -> bool {
        self.peek()
            .is_some_and(|t| t.kind == TokenKind::Keyword && t.lexeme == kw)
    }

    fn at(&self, kind: TokenKind) -> bool {
        self.peek().is_some_and(|t| t.kind == kind)
    }

    fn error<T>(&mut self, span: Span, message: impl Into<String>) -> PResult<T> {
        self.diagnostics.push(Diagnostic::error(span, message));
        Err(Fail)
    }

    fn found(&self) -> String {
        match self.peek() {
            Some(t) => format!("`{}`", t.lexeme),
            None => "end of file".to_string(),
        }
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> PResult<Token<'a>> {
        if self.at(kind) {
            Ok(self.bump().unwrap())
        } else {
            let found = self.found();
            self.error(self.peek_span(), format!("expected {what}, found {found}"))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<Token<'a>> {
        if self.at_keyword(kw) {
            Ok(self.bump().unwrap())
        } else {
            let found = self.found();
            self.error(self.peek_span(), format!("expected `{kw}`, found {found}"))
        }
    }

    fn document(&mut self) -> Vec<HttpMessage> {
        let mut messages = Vec::new();
        while let Some(tok) = self.peek() {
            if tok.kind == TokenKind::Keyword && tok.lexeme == "http" {
                let start = self.pos;
                match self.message() {
                    Ok(m) => messages.push(m),
                    Err(Fail) => self.recover_message(start),
                }
            } else {
                let span = tok.span;
                let msg = format!("unknown keyword `{}`; expected `http`", tok.lexeme);
                self.diagnostics.push(Diagnostic::error(span, msg));
                // Skip ahead to the next message.
                self.bump();
                while self.peek().is_some() && !self.at_keyword("http") {
                    self.bump();
                }
            }
        }
        messages
    }

    /// Skips past the closing brace matching the message that starts at
    /// token index `start`.
    fn recover_message(&mut self, start: usize) {
        self.pos = start + 1;
        if !self.at(TokenKind::LBrace) {
            while self.peek().is_some() && !self.at_keyword("http") {
                self.bump();
            }
            return;
        }
        let mut depth = 0usize;
        while let Some(tok) = self.bump() {
            match tok.kind {
                TokenKind::LBrace => depth += 1,
                TokenKind::RBrace => {
                    depth -= 1;
                    if depth == 0 {
                        return;
                    }
                }
                _ => {}
            }
        }
    }

    /// Parses `{ field* }`, handing each field keyword to `field`.
    fn block(
        &mut self,
        what: &str,
        mut field: impl FnMut(&mut Self, Token<'a>) -> PResult<()>,
    ) -> PResult<Span> {
        let open = self.expect(TokenKind::LBrace, &format!("`{{` to open {what}"))?;
        loop {
            match self.peek() {
                None => {
                    return self.error(open.span, format!("unterminated `{{` in {what}: expected `}}`"));
                }
                Some(t) if t.kind == TokenKind::RBrace => {
                    let close = self.bump().unwrap();
                    return Ok(open.span.to(close.span));
                }
                Some(t) if t.kind == TokenKind::Keyword => {
                    let t = self.bump().unwrap();
                    field(self, t)?;
                }
                Some(t) => {
                    let (span, lexeme) = (t.span, t.lexeme);
                    return self.error(span, format!("unknown keyword `{lexeme}` in {what}"));
                }
            }
        }
    }

    fn duplicate<T>(&mut self, seen: &Option<T>, kw: &Token<'_>) -> PResult<()> {
        if seen.is_some() {
            self.error(kw.span, format!("duplicate `{}` field", kw.lexeme))
        } else {
            Ok(())
        }
    }

    fn message(&mut self) -> PResult<HttpMessage> {
        let http = self.expect_keyword("http")?;
        let mut spans = MessageSpans {
            message: http.span,
            ..MessageSpans::default()
        };
        let mut name = None;
        let mut url = None;
        let mut method = None;
        let mut query = Vec::new();
        let mut headers = Vec::new();
        let mut body = None;
        let mut return_value = None;
        let mut customization = None;

        let block_span = self.block("http message", |p, kw| {
            match kw.lexeme {
                "name" => {
                    p.duplicate(&name, &kw)?;
                    let tok = p.bump_bare("message name")?;
                    if !is_identifier(tok.lexeme) {
                        return p.error(
                            tok.span,
                            format!("invalid message name `{}`: expected an identifier", tok.lexeme),
                        );
                    }
                    spans.name = tok.span;
                    name = Some(tok.lexeme.to_string());
                }
                "url" => {
                    p.duplicate(&url, &kw)?;
                    p.expect_keyword("server")?;
                    spans.server = p.peek_span();
                    let server = p.value("server")?;
                    let path = if p.at_keyword("path") {
                        p.bump();
                        spans.path = p.peek_span();
                        p.value("path")?
                    } else {
                        spans.path = spans.server;
                        Value::literal("")
                    };
                    url = Some(AbstractUrl { server, path });
                }
                "type" => {
                    p.duplicate(&method, &kw)?;
                    let tok = p.bump_bare("request method")?;
                    match RequestMethod::from_keyword(tok.lexeme) {
                        Some(m) => {
                            spans.method = tok.span;
                            method = Some(m);
                        }
                        None => {
                            return p.error(
                                tok.span,
                                format!(
                                    "unknown request method `{}`: expected GET, POST, PUT or DELETE",
                                    tok.lexeme
                                ),
                            )
                        }
                    }
                }
                "param" => {
                    let key = p.value("parameter key")?;
                    p.expect(TokenKind::Colon, "`:` after parameter key")?;
                    let value = p.value("parameter value")?;
                    spans.params.push(kw.span.to(p.prev_span()));
                    query.push(Parameter { key, value });
                }
                "header" => {
                    let key = p.header_key()?;
                    p.expect(TokenKind::Colon, "`:` after header key")?;
                    let value = p.value("header value")?;
                    spans.headers.push(kw.span.to(p.prev_span()));
                    headers.push(Header { key, value });
                }
                "body" => {
                    p.duplicate(&body, &kw)?;
                    let (b, ct_span, span) = p.body(kw.span)?;
                    spans.body = span;
                    spans.body_content_type = ct_span;
                    body = Some(b);
                }
                "returns" => {
                    p.duplicate(&return_value, &kw)?;
                    let (r, span) = p.returns(kw.span)?;
                    spans.return_value = span;
                    return_value = Some(r);
                }
                "customize" => {
                    p.duplicate(&customization, &kw)?;
                    let c = p.customize(&mut spans)?;
                    spans.customization = kw.span.to(p.prev_span());
                    customization = Some(c);
                }
                other => {
                    return p.error(kw.span, format!("unknown keyword `{other}` in http message"));
                }
            }
            Ok(())
        })?;
        spans.message = http.span.to(block_span);

        let mut missing = Vec::new();
        if name.is_none() {
            missing.push("name");
        }
        if url.is_none() {
            missing.push("url");
        }
        if method.is_none() {
            missing.push("type");
        }
        if !missing.is_empty() {
            for field in missing {
                self.diagnostics.push(Diagnostic::error(
                    http.span,
                    format!("missing mandatory field `{field}`"),
                ));
            }
            return Err(Fail);
        }

        Ok(HttpMessage {
            name: name.unwrap(),
            url: url.unwrap(),
            method: method.unwrap(),
            query,
            headers,
            body,
            return_value,
            customization,
            spans,
        })
    }

    fn prev_span(&self) -> Span {
        self.pos
            .checked_sub(1)
            .and_then(|i| self.tokens.get(i))
            .map_or(self.eof, |t| t.span)
    }

    fn bump_bare(&mut self, what: &str) -> PResult<Token<'a>> {
        match self.peek() {
            Some(t) if t.kind.is_bare() => Ok(self.bump().unwrap()),
            _ => {
                let found = self.found();
                self.error(self.peek_span(), format!("expected {what}, found {found}"))
            }
        }
    }

    /// `input $name`, `environment NAME`, a string literal or a bare word.
    fn value(&mut self, what: &str) -> PResult<Value> {
        if let Some(v) = self.variable()? {
            return Ok(Value::Variable(v));
        }
        match self.peek() {
            Some(t) if t.kind == TokenKind::String => Ok(Value::Literal(self.bump().unwrap().text())),
            Some(t) if t.kind.is_bare() => Ok(Value::Literal(self.bump().unwrap().text())),
            Some(t) if t.kind == TokenKind::Variable => {
                let (span, lexeme) = (t.span, t.lexeme);
                self.error(
                    span,
                    format!("malformed variable syntax: write `input {lexeme}` to reference an input variable"),
                )
            }
            _ => {
                let found = self.found();
                self.error(self.peek_span(), format!("expected {what}, found {found}"))
            }
        }
    }

    fn variable(&mut self) -> PResult<Option<VariableRef>> {
        if self.at_keyword("input") {
            let kw = self.bump().unwrap();
            return match self.peek() {
                Some(t) if t.kind == TokenKind::Variable && is_identifier(&t.lexeme[1..]) => {
                    let t = self.bump().unwrap();
                    Ok(Some(VariableRef::input(&t.lexeme[1..])))
                }
                _ => {
                    let span = self.peek_span();
                    let found = self.found();
                    self.diagnostics.push(Diagnostic::error(
                        kw.span.to(span),
                        format!(
                            "malformed variable syntax: expected `$name` after `input`, found {found}"
                        ),
                    ));
                    Err(Fail)
                }
            };
        }
        if self.at_keyword("environment") {
            let kw = self.bump().unwrap();
            return match self.peek() {
                Some(t) if t.kind.is_bare() && is_environment_name(t.lexeme) => {
                    let t = self.bump().unwrap();
                    Ok(Some(VariableRef::environment(t.lexeme)))
                }
                _ => {
                    let span = self.peek_span();
                    let found = self.found();
                    self.diagnostics.push(Diagnostic::error(
                        kw.span.to(span),
                        format!(
                            "malformed variable syntax: environment names are capitalized words joined by `_`, found {found}"
                        ),
                    ));
                    Err(Fail)
                }
            };
        }
        Ok(None)
    }

    fn header_key(&mut self) -> PResult<HeaderKey> {
        if let Some(v) = self.variable()? {
            return Ok(HeaderKey::Variable(v));
        }
        match self.peek() {
            Some(t) if t.kind == TokenKind::String => Ok(HeaderKey::Custom(self.bump().unwrap().text())),
            Some(t) if t.kind.is_bare() => {
                let t = self.bump().unwrap();
                match WellKnownHeader::from_name(t.lexeme) {
                    Some(h) => Ok(HeaderKey::WellKnown(h)),
                    None => {
                        let hint = match WellKnownHeader::from_name_ignore_case(t.lexeme) {
                            Some(h) => format!("; did you mean `{h}`?"),
                            None => format!("; write \"{}\" for a custom header", t.lexeme),
                        };
                        self.error(t.span, format!("unknown header `{}`{hint}", t.lexeme))
                    }
                }
            }
            _ => {
                let found = self.found();
                self.error(self.peek_span(), format!("expected header key, found {found}"))
            }
        }
    }

    fn content_type(&mut self) -> PResult<ContentTypeSpec> {
        if let Some(v) = self.variable()? {
            return Ok(ContentTypeSpec::Variable(v));
        }
        match self.peek() {
            Some(t) if t.kind == TokenKind::String => {
                Ok(ContentTypeSpec::Custom(self.bump().unwrap().text()))
            }
            Some(t) if t.kind.is_bare() => {
                let t = self.bump().unwrap();
                match MediaType::from_name(t.lexeme) {
                    Some(m) => Ok(ContentTypeSpec::WellKnown(m)),
                    None => self.error(
                        t.span,
                        format!(
                            "unknown media type `{}`; write \"{}\" for a custom content type",
                            t.lexeme, t.lexeme
                        ),
                    ),
                }
            }
            _ => {
                let found = self.found();
                self.error(self.peek_span(), format!("expected content type, found {found}"))
            }
        }
    }

    fn body(&mut self, kw: Span) -> PResult<(Body, Span, Span)> {
        let mut content_type = None;
        let mut ct_span = Span::default();
        let mut entity_type = None;
        let mut payload = None;
        let span = self.block("body", |p, field| {
            match field.lexeme {
                "contentType" => {
                    p.duplicate(&content_type, &field)?;
                    ct_span = p.peek_span();
                    content_type = Some(p.content_type()?);
                }
                "entityType" => {
                    p.duplicate(&entity_type, &field)?;
                    let tok = p.bump_bare("entity type")?;
                    match EntityKind::from_keyword(tok.lexeme) {
                        Some(k) => entity_type = Some(k),
                        None => {
                            return p.error(
                                tok.span,
                                format!(
                                    "unknown entity type `{}`: expected TEXT, FILE, STREAM or BYTES",
                                    tok.lexeme
                                ),
                            )
                        }
                    }
                }
                "payload" => {
                    p.duplicate(&payload, &field)?;
                    payload = Some(p.value("payload")?);
                }
                other => return p.error(field.span, format!("unknown keyword `{other}` in body")),
            }
            Ok(())
        })?;
        let span = kw.to(span);
        let mut missing = false;
        for (present, field) in [
            (content_type.is_some(), "contentType"),
            (entity_type.is_some(), "entityType"),
            (payload.is_some(), "payload"),
        ] {
            if !present {
                missing = true;
                self.diagnostics
                    .push(Diagnostic::error(kw, format!("body is missing `{field}`")));
            }
        }
        if missing {
            return Err(Fail);
        }
        Ok((
            Body {
                content_type: content_type.unwrap(),
                entity_type: entity_type.unwrap(),
                payload: payload.unwrap(),
            },
            ct_span,
            span,
        ))
    }

    fn returns(&mut self, kw: Span) -> PResult<(ReturnValue, Span)> {
        let mut expected = None;
        let mut form = None;
        let span = self.block("returns", |p, field| {
            match field.lexeme {
                "expect" => {
                    p.duplicate(&expected, &field)?;
                    expected = Some(p.content_type()?);
                }
                "as" => {
                    p.duplicate(&form, &field)?;
                    let tok = p.bump_bare("return form")?;
                    match ReturnForm::from_keyword(tok.lexeme) {
                        Some(f) => form = Some(f),
                        None => {
                            return p.error(
                                tok.span,
                                format!(
                                    "unknown return form `{}`: expected FULL_RESPONSE or PAYLOAD_TEXT",
                                    tok.lexeme
                                ),
                            )
                        }
                    }
                }
                other => return p.error(field.span, format!("unknown keyword `{other}` in returns")),
            }
            Ok(())
        })?;
        let (Some(expected_type), Some(return_form)) = (expected, form) else {
            return self.error(kw, "returns needs both `expect` and `as`");
        };
        Ok((
            ReturnValue {
                expected_type,
                return_form,
            },
            kw.to(span),
        ))
    }

    fn customize(&mut self, spans: &mut MessageSpans) -> PResult<Customization> {
        let mut c = Customization::default();
        self.block("customize", |p, field| {
            match field.lexeme {
                "proxy" => {
                    p.duplicate(&c.proxy, &field)?;
                    p.expect_keyword("host")?;
                    let host = p.value("proxy host")?;
                    p.expect_keyword("port")?;
                    spans.proxy_port = p.peek_span();
                    let port = p.value("proxy port")?;
                    c.proxy = Some(ProxySpec { host, port });
                }
                "basicauth" => {
                    p.duplicate(&c.basic_auth, &field)?;
                    p.expect_keyword("user")?;
                    let username = p.value("user name")?;
                    p.expect_keyword("password")?;
                    let password = p.value("password")?;
                    c.basic_auth = Some(BasicAuthSpec { username, password });
                }
                "timeout" => {
                    p.duplicate(&c.timeout_ms, &field)?;
                    let tok = p.expect(TokenKind::Number, "timeout in milliseconds")?;
                    match tok.lexeme.parse::<u64>() {
                        Ok(ms) => {
                            spans.timeout = tok.span;
                            c.timeout_ms = Some(ms);
                        }
                        Err(_) => return p.error(tok.span, "timeout is out of range"),
                    }
                }
                other => {
                    return p.error(field.span, format!("unknown keyword `{other}` in customize"))
                }
            }
            Ok(())
        })?;
        Ok(c)
    }
}
