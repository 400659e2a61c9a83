use std::fmt::Write;

use super::lexer::{escape, tokenize, TokenKind};
use super::parse_document;
use crate::diagnostic::Diagnostic;
use crate::model::*;

const INDENT: &str = "    ";

/// Canonical text for a document. Messages are separated by a blank line.
pub fn format_document(doc: &RequestDocument) -> String {
    let mut out = String::new();
    for (i, m) in doc.messages.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&format_message(m));
    }
    out
}

/// Canonical text for a source file, keeping its comments.
///
/// Comments between messages stay in front of the message that follows them
/// (or at the end). Comments inside a message have no place in the canonical
/// layout, so such files are refused rather than silently stripped.
pub fn format_source(source: &str, source_name: &str) -> Result<String, Vec<Diagnostic>> {
    let doc = parse_document(source, source_name)?;
    let (tokens, _) = tokenize(source);
    let mut leading: Vec<Vec<&str>> = vec![Vec::new(); doc.messages.len()];
    let mut trailing = Vec::new();
    let mut inside = Vec::new();
    for t in tokens.iter().filter(|t| t.kind == TokenKind::Comment) {
        let at = t.span.offset;
        let text = t.lexeme.trim_end();
        match doc.messages.iter().position(|m| at < m.spans.message.end()) {
            Some(i) if at >= doc.messages[i].spans.message.offset => inside.push(Diagnostic::error(
                t.span,
                format!(
                    "comment inside message `{}` cannot be kept by the formatter; move it above the message",
                    doc.messages[i].name
                ),
            )),
            Some(i) => leading[i].push(text),
            None => trailing.push(text),
        }
    }
    if !inside.is_empty() {
        return Err(inside);
    }

    let mut out = String::new();
    for (i, m) in doc.messages.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for c in &leading[i] {
            out.push_str(c);
            out.push('\n');
        }
        out.push_str(&format_message(m));
    }
    if !trailing.is_empty() {
        out.push('\n');
        for c in trailing {
            out.push_str(c);
            out.push('\n');
        }
    }
    Ok(out)
}

pub fn format_message(m: &HttpMessage) -> String {
    let mut out = String::new();
    let w = &mut out;
    line(w, 0, "http {");
    line(w, 1, &format!("name {}", m.name));
    line(w, 1, &format!("url server {}", bare_or_quoted(&m.url.server)));
    if m.url.path != Value::literal("") {
        line(w, 2, &format!("path {}", bare_or_quoted(&m.url.path)));
    }
    line(w, 1, &format!("type {}", m.method));
    for p in &m.query {
        line(
            w,
            1,
            &format!("param {}: {}", bare_or_quoted(&p.key), quoted(&p.value)),
        );
    }
    for h in &m.headers {
        line(
            w,
            1,
            &format!("header {}: {}", header_key(&h.key), quoted(&h.value)),
        );
    }
    if let Some(b) = &m.body {
        line(w, 1, "body {");
        line(w, 2, &format!("contentType {}", content_type(&b.content_type)));
        line(w, 2, &format!("entityType {}", b.entity_type.as_str()));
        line(w, 2, &format!("payload {}", quoted(&b.payload)));
        line(w, 1, "}");
    }
    if let Some(r) = &m.return_value {
        line(w, 1, "returns {");
        line(w, 2, &format!("expect {}", content_type(&r.expected_type)));
        line(w, 2, &format!("as {}", r.return_form.as_str()));
        line(w, 1, "}");
    }
    if let Some(c) = &m.customization {
        line(w, 1, "customize {");
        if let Some(p) = &c.proxy {
            let port = match &p.port {
                Value::Literal(s) if !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) => {
                    s.clone()
                }
                other => quoted(other),
            };
            line(w, 2, &format!("proxy host {} port {}", quoted(&p.host), port));
        }
        if let Some(a) = &c.basic_auth {
            line(
                w,
                2,
                &format!(
                    "basicauth user {} password {}",
                    quoted(&a.username),
                    quoted(&a.password)
                ),
            );
        }
        if let Some(t) = c.timeout_ms {
            line(w, 2, &format!("timeout {t}"));
        }
        line(w, 1, "}");
    }
    line(w, 0, "}");
    out
}

fn line(out: &mut String, depth: usize, text: &str) {
    for _ in 0..depth {
        out.push_str(INDENT);
    }
    let _ = writeln!(out, "{text}");
}

fn quoted(v: &Value) -> String {
    match v {
        Value::Literal(s) => escape(s),
        Value::Variable(var) => var.to_string(),
    }
}

fn bare_or_quoted(v: &Value) -> String {
    match v {
        Value::Literal(s) if is_safe_bare(s) => s.clone(),
        other => quoted(other),
    }
}

/// Whether `s` re-lexes as one bare token that the parser reads as a literal.
fn is_safe_bare(s: &str) -> bool {
    !s.is_empty()
        && !s.chars().any(|c| c.is_whitespace() || matches!(c, '{' | '}' | '"'))
        && !s.starts_with("//")
        && !s.starts_with('$')
        && !s.starts_with(':')
        && !s.ends_with(':')
        && s != "input"
        && s != "environment"
}

fn header_key(k: &HeaderKey) -> String {
    match k {
        HeaderKey::WellKnown(h) => h.as_str().to_string(),
        HeaderKey::Custom(s) => escape(s),
        HeaderKey::Variable(v) => v.to_string(),
    }
}

fn content_type(c: &ContentTypeSpec) -> String {
    match c {
        ContentTypeSpec::WellKnown(m) => m.as_str().to_string(),
        ContentTypeSpec::Custom(s) => escape(s),
        ContentTypeSpec::Variable(v) => v.to_string(),
    }
}
