//! Static checks on parsed messages.
//!
//! Everything that can be decided without variable bindings is checked here:
//! literal URLs against the URL grammar, method/body compatibility, header
//! conflicts with derived headers, header token syntax and numeric ranges.

use std::collections::HashMap;

use crate::diagnostic::{Diagnostic, Span};
use crate::model::*;
use crate::url;

pub fn validate_message(m: &HttpMessage) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let spans = &m.spans;

    for v in m.variables() {
        if !v.is_well_formed() {
            out.push(Diagnostic::error(
                spans.message,
                format!("malformed variable name in `{v}`"),
            ));
        }
    }

    if let Value::Literal(server) = &m.url.server {
        if let Err(e) = url::parse_server(server) {
            out.push(Diagnostic::error(
                literal_span(spans.server, server, e.offset, e.len),
                format!("invalid server: {e}"),
            ));
        }
    }
    if let Value::Literal(path) = &m.url.path {
        if let Err(e) = url::parse_path(path) {
            out.push(Diagnostic::error(
                literal_span(spans.path, path, e.offset, e.len),
                format!("invalid path: {e}"),
            ));
        }
    }

    if m.body.is_some() && !m.method.allows_body() {
        out.push(Diagnostic::error(
            spans.body,
            format!("body not allowed for {}", m.method),
        ));
    }

    for (i, h) in m.headers.iter().enumerate() {
        if let HeaderKey::Custom(k) = &h.key {
            if !is_token(k) {
                out.push(Diagnostic::error(
                    spans.header(i),
                    format!("invalid header name `{k}`"),
                ));
            }
        }
        if let Value::Literal(v) = &h.value {
            if !is_header_value(v) {
                out.push(Diagnostic::error(
                    spans.header(i),
                    "header value must not contain line breaks or control characters",
                ));
            }
        }
        if m.body.is_some() && h.key.names(WellKnownHeader::ContentType) {
            out.push(Diagnostic::error(
                spans.header(i),
                "Content-Type header conflicts with body contentType, which sets it",
            ));
        }
        let has_auth = m
            .customization
            .as_ref()
            .is_some_and(|c| c.basic_auth.is_some());
        if has_auth && h.key.names(WellKnownHeader::Authorization) {
            out.push(Diagnostic::error(
                spans.header(i),
                "Authorization header conflicts with basicauth, which sets it",
            ));
        }
    }

    if let Some(body) = &m.body {
        if let ContentTypeSpec::Custom(ct) = &body.content_type {
            if !is_media_type(ct) {
                out.push(Diagnostic::error(
                    spans.body_content_type,
                    format!("invalid content type `{ct}`: expected `type/subtype`"),
                ));
            }
        }
    }

    if let Some(c) = &m.customization {
        if c.timeout_ms == Some(0) {
            out.push(Diagnostic::error(spans.timeout, "timeout must be positive"));
        }
        if let Some(ProxySpec {
            port: Value::Literal(port),
            ..
        }) = &c.proxy
        {
            if parse_port(port).is_none() {
                out.push(Diagnostic::error(
                    spans.proxy_port,
                    format!("invalid proxy port `{port}`: expected a number from 1 to 65535"),
                ));
            }
        }
    }
    out
}

/// Per-message checks plus message-name uniqueness.
pub fn validate_document(doc: &RequestDocument) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut seen: HashMap<&str, ()> = HashMap::new();
    for m in &doc.messages {
        if seen.insert(&m.name, ()).is_some() {
            out.push(Diagnostic::error(
                m.spans.name,
                format!("duplicate message name `{}`", m.name),
            ));
        }
        out.extend(validate_message(m));
    }
    out
}

/// Maps a byte range inside a literal onto the source. Quoted literals with
/// escapes map approximately, to the token start.
fn literal_span(token: Span, literal: &str, offset: usize, len: usize) -> Span {
    if token.len == literal.len() {
        token.narrow(offset, len)
    } else if token.len == literal.len() + 2 {
        token.narrow(offset + 1, len)
    } else {
        token
    }
}

pub fn parse_port(s: &str) -> Option<u16> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse::<u16>().ok().filter(|&p| p != 0)
}

/// An HTTP `token`: one or more `tchar`.
pub fn is_token(s: &str) -> bool {
    !s.is_empty()
        && s.bytes()
            .all(|b| b.is_ascii_alphanumeric() || b"!#$%&'*+-.^_`|~".contains(&b))
}

pub fn is_header_value(s: &str) -> bool {
    !s.chars().any(|c| (c.is_control() && c != '\t') || c == '\u{7f}')
}

/// `type/subtype` tokens, optionally followed by `;` parameters.
pub fn is_media_type(s: &str) -> bool {
    let essence = s.split(';').next().unwrap_or("").trim();
    match essence.split_once('/') {
        Some((t, sub)) => is_token(t) && is_token(sub) && is_header_value(s),
        None => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_document;

    fn diags(src: &str) -> Vec<Diagnostic> {
        let doc = parse_document(src, "t").unwrap();
        validate_document(&doc)
    }

    #[test]
    fn weather_location_is_clean() {
        let src = "http {\n name WeatherLocation\n url server http://www.dataservice.accuweather.com\n path locations/v1/cities/search\n type GET\n param apikey: input $apiKeyParam\n param q: input $city\n param language: \"en-US\"\n}";
        assert!(diags(src).is_empty());
    }

    #[test]
    fn body_on_get() {
        let d = diags(
            "http { name A url server a.example type GET body { contentType text/plain entityType TEXT payload \"x\" } }",
        );
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].message, "body not allowed for GET");
        assert!(d[0].is_error());
        assert_eq!(d[0].span.offset, 44);
    }

    #[test]
    fn content_type_header_conflicts_with_body() {
        let keys = ["Content-Type", "\"Content-Type\"", "\"content-type\"", "\"CONTENT-TYPE\""];
        let body_types = ["text/plain", "\"application/vnd.x+json\"", "input $ct"];
        for key in keys {
            for ct in body_types {
                let src = format!(
                    "http {{ name A url server a.example type POST header {key}: \"x\" body {{ contentType {ct} entityType TEXT payload \"p\" }} }}"
                );
                let d = diags(&src);
                assert_eq!(d.len(), 1, "{src}: {d:?}");
                assert!(d[0].message.starts_with("Content-Type header conflicts"));
            }
        }
        // A variable header key is only known after binding.
        let src = "http { name A url server a.example type POST header input $k: \"x\" body { contentType text/plain entityType TEXT payload \"p\" } }";
        assert!(diags(src).is_empty());
    }

    #[test]
    fn authorization_header_conflicts_with_basic_auth() {
        let d = diags(
            "http { name A url server a.example type GET header Authorization: \"x\" customize { basicauth user \"u\" password \"p\" } }",
        );
        assert_eq!(d.len(), 1);
        assert!(d[0].message.starts_with("Authorization header conflicts"));
    }

    #[test]
    fn literal_url_errors_point_into_the_literal() {
        let src = "http { name A url server http://host.x type GET }";
        let d = diags(src);
        assert_eq!(d.len(), 1);
        assert_eq!(&src[d[0].span.offset..d[0].span.end()], "x");
        let src = "http { name A url server a.example path \"a b\" type GET }";
        let d = diags(src);
        assert_eq!(&src[d[0].span.offset..d[0].span.end()], " ");
    }

    #[test]
    fn numeric_ranges_and_tokens() {
        let d = diags(
            "http { name A url server a.example type GET header \"Bad Name\": \"v\" customize { proxy host \"p.example\" port 70000 timeout 0 } }",
        );
        let msgs: Vec<_> = d.iter().map(|d| d.message.as_str()).collect();
        assert_eq!(msgs.len(), 3, "{msgs:?}");
        assert!(msgs[0].starts_with("invalid header name"));
        assert!(msgs[1].starts_with("timeout must be positive"));
        assert!(msgs[2].starts_with("invalid proxy port"));
    }

    #[test]
    fn programmatic_bad_variable_names() {
        let m = HttpMessage::new(
            "A",
            AbstractUrl::new(Value::environment("lower"), Value::input("1x")),
            RequestMethod::Get,
        );
        assert_eq!(validate_message(&m).len(), 2);
    }
}
