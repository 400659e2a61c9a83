//! URL grammar for the `server` and `path` fields.
//!
//! This follows the HTTP URL rules of RFC 1738 section 5 with two changes:
//! the top-level domain label must be 2 to 63 characters long, and hosts may
//! be bracketed IPv6 literals. A server carries the scheme (`http` when
//! omitted), optional userinfo, host and optional port; everything after the
//! authority belongs to the path.

use std::fmt;
use std::net::{Ipv4Addr, Ipv6Addr};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    Http,
    Https,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Http => "http",
            Scheme::Https => "https",
        }
    }

    pub fn default_port(self) -> u16 {
        match self {
            Scheme::Http => 80,
            Scheme::Https => 443,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Host {
    Domain(String),
    Ipv4(Ipv4Addr),
    Ipv6(Ipv6Addr),
}

impl fmt::Display for Host {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Host::Domain(d) => f.write_str(d),
            Host::Ipv4(a) => write!(f, "{a}"),
            Host::Ipv6(a) => write!(f, "[{a}]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ServerUrl {
    pub scheme: Scheme,
    pub userinfo: Option<String>,
    pub host: Host,
    /// Absent unless written; never filled in from the scheme.
    pub port: Option<u16>,
}

impl ServerUrl {
    pub fn effective_port(&self) -> u16 {
        self.port.unwrap_or(self.scheme.default_port())
    }

    /// `host[:port]`, as sent in the `Host` header.
    pub fn authority(&self) -> String {
        match self.port {
            Some(p) => format!("{}:{p}", self.host),
            None => self.host.to_string(),
        }
    }

    /// Host name for connecting; IPv6 without brackets.
    pub fn connect_host(&self) -> String {
        match &self.host {
            Host::Domain(d) => d.clone(),
            Host::Ipv4(a) => a.to_string(),
            Host::Ipv6(a) => a.to_string(),
        }
    }
}

impl fmt::Display for ServerUrl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}://", self.scheme.as_str())?;
        if let Some(u) = &self.userinfo {
            write!(f, "{u}@")?;
        }
        write!(f, "{}", self.authority())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PathText {
    pub segments: Vec<String>,
}

impl fmt::Display for PathText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.segments.join("/"))
    }
}

/// A grammar violation, located by byte range within the checked text.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{message}")]
pub struct UrlError {
    pub offset: usize,
    pub len: usize,
    pub message: String,
}

impl UrlError {
    fn new(offset: usize, len: usize, message: impl Into<String>) -> Self {
        UrlError {
            offset,
            len,
            message: message.into(),
        }
    }
}

type Result<T> = std::result::Result<T, UrlError>;

pub const MIN_TLD_LEN: usize = 2;
pub const MAX_TLD_LEN: usize = 63;

pub fn parse_server(text: &str) -> Result<ServerUrl> {
    if text.is_empty() {
        return Err(UrlError::new(0, 0, "server must not be empty"));
    }
    let (scheme, mut offset) = match text.find("://") {
        Some(i) => {
            let name = &text[..i];
            let scheme = if name.eq_ignore_ascii_case("http") {
                Scheme::Http
            } else if name.eq_ignore_ascii_case("https") {
                Scheme::Https
            } else {
                return Err(UrlError::new(
                    0,
                    i,
                    format!("unsupported scheme `{name}`: expected http or https"),
                ));
            };
            (scheme, i + 3)
        }
        None => (Scheme::Http, 0),
    };

    let mut rest = &text[offset..];
    if let Some(stripped) = rest.strip_suffix('/') {
        rest = stripped;
    }

    let userinfo = match rest.find('@') {
        Some(i) => {
            check_userinfo(&rest[..i], offset)?;
            let u = rest[..i].to_string();
            offset += i + 1;
            rest = &rest[i + 1..];
            Some(u)
        }
        None => None,
    };

    if let Some(i) = rest.find(['/', '?', '#']) {
        let c = &rest[i..i + 1];
        return Err(UrlError::new(
            offset + i,
            1,
            format!("unexpected `{c}` in server: the server holds only scheme, userinfo, host and port"),
        ));
    }

    let (host, port) = if rest.starts_with('[') {
        let close = rest
            .find(']')
            .ok_or_else(|| UrlError::new(offset, rest.len(), "unterminated IPv6 literal: missing `]`"))?;
        let addr = parse_ipv6(&rest[1..close]).map_err(|e| e.shift(offset + 1))?;
        let after = &rest[close + 1..];
        let port = match after.strip_prefix(':') {
            Some(p) => Some(parse_port(p, offset + close + 2)?),
            None if after.is_empty() => None,
            None => {
                return Err(UrlError::new(
                    offset + close + 1,
                    after.len(),
                    "unexpected text after IPv6 literal",
                ))
            }
        };
        (Host::Ipv6(addr), port)
    } else {
        let (host_text, port) = match rest.rfind(':') {
            Some(i) => (&rest[..i], Some(parse_port(&rest[i + 1..], offset + i + 1)?)),
            None => (rest, None),
        };
        (parse_host(host_text, offset)?, port)
    };

    Ok(ServerUrl {
        scheme,
        userinfo,
        host,
        port,
    })
}

impl UrlError {
    fn shift(mut self, by: usize) -> Self {
        self.offset += by;
        self
    }
}

/// RFC 1738 `uchar`: unreserved characters and `%` escapes.
fn is_unreserved(c: char) -> bool {
    c.is_ascii_alphanumeric() || "$-_.+!*'(),".contains(c)
}

/// Checks that every `%` starts a two-digit hex escape and every other
/// character satisfies `allowed`.
fn check_chars(text: &str, offset: usize, what: &str, allowed: impl Fn(char) -> bool) -> Result<()> {
    let bytes = text.as_bytes();
    let mut iter = text.char_indices();
    while let Some((i, c)) = iter.next() {
        if c == '%' {
            let ok = bytes.len() >= i + 3
                && bytes[i + 1].is_ascii_hexdigit()
                && bytes[i + 2].is_ascii_hexdigit();
            if !ok {
                return Err(UrlError::new(
                    offset + i,
                    1,
                    format!("malformed escape in {what}: `%` must be followed by two hex digits"),
                ));
            }
            iter.next();
            iter.next();
        } else if !allowed(c) {
            return Err(UrlError::new(
                offset + i,
                c.len_utf8(),
                format!("illegal character `{c}` in {what}"),
            ));
        }
    }
    Ok(())
}

fn check_userinfo(text: &str, offset: usize) -> Result<()> {
    let (user, password) = match text.find(':') {
        Some(i) => (&text[..i], Some((&text[i + 1..], i + 1))),
        None => (text, None),
    };
    let allowed = |c: char| is_unreserved(c) || ";?&=".contains(c);
    check_chars(user, offset, "user name", allowed)?;
    if let Some((pw, at)) = password {
        check_chars(pw, offset + at, "password", allowed)?;
    }
    Ok(())
}

fn parse_port(text: &str, offset: usize) -> Result<u16> {
    let bad = || {
        UrlError::new(
            offset,
            text.len(),
            format!("invalid port `{text}`: expected a number from 1 to 65535"),
        )
    };
    if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    match text.parse::<u32>() {
        Ok(p) if (1..=65535).contains(&p) => Ok(p as u16),
        _ => Err(bad()),
    }
}

fn parse_host(text: &str, offset: usize) -> Result<Host> {
    if text.is_empty() {
        return Err(UrlError::new(offset, 0, "missing host"));
    }
    let groups: Vec<&str> = text.split('.').collect();
    if groups.len() == 4 && groups.iter().all(|g| !g.is_empty() && g.bytes().all(|b| b.is_ascii_digit())) {
        let mut octets = [0u8; 4];
        let mut at = offset;
        for (slot, g) in octets.iter_mut().zip(&groups) {
            let value = g.trim_start_matches('0');
            match value.parse::<u8>() {
                Ok(v) => *slot = v,
                Err(_) if value.is_empty() => *slot = 0,
                Err(_) => {
                    return Err(UrlError::new(
                        at,
                        g.len(),
                        format!("IPv4 octet `{g}` is out of range 0-255"),
                    ))
                }
            }
            at += g.len() + 1;
        }
        return Ok(Host::Ipv4(Ipv4Addr::from(octets)));
    }

    let mut at = offset;
    let last = groups.len() - 1;
    for (i, label) in groups.iter().enumerate() {
        if label.is_empty() {
            return Err(UrlError::new(at, 0, "empty label in host name"));
        }
        if let Some((j, c)) = label
            .char_indices()
            .find(|&(_, c)| !(c.is_ascii_alphanumeric() || c == '-'))
        {
            return Err(UrlError::new(
                at + j,
                c.len_utf8(),
                format!("illegal character `{c}` in host name"),
            ));
        }
        if label.starts_with('-') || label.ends_with('-') {
            return Err(UrlError::new(
                at,
                label.len(),
                format!("host label `{label}` must not start or end with `-`"),
            ));
        }
        if i == last {
            if !label.starts_with(|c: char| c.is_ascii_alphabetic()) {
                return Err(UrlError::new(
                    at,
                    label.len(),
                    format!("top-level domain `{label}` must start with a letter"),
                ));
            }
            if !(MIN_TLD_LEN..=MAX_TLD_LEN).contains(&label.len()) {
                return Err(UrlError::new(
                    at,
                    label.len(),
                    format!(
                        "top-level domain `{label}` has {} characters; it must have {MIN_TLD_LEN} to {MAX_TLD_LEN}",
                        label.len()
                    ),
                ));
            }
        }
        at += label.len() + 1;
    }
    Ok(Host::Domain(text.to_string()))
}

/// Textual IPv6: eight hex groups of one to four digits, at most one `::`
/// standing for one or more zero groups, and optionally a dotted IPv4 tail.
pub fn parse_ipv6(text: &str) -> Result<Ipv6Addr> {
    let err = |msg: &str| UrlError::new(0, text.len(), format!("invalid IPv6 address `{text}`: {msg}"));
    let (head, tail, elided) = match text.find("::") {
        Some(i) => {
            if text[i + 2..].contains("::") {
                return Err(err("`::` may appear only once"));
            }
            (&text[..i], &text[i + 2..], true)
        }
        None => (text, "", false),
    };

    let split = |part: &str| -> Vec<String> {
        if part.is_empty() {
            Vec::new()
        } else {
            part.split(':').map(str::to_string).collect()
        }
    };
    let head_groups = split(head);
    let tail_groups = split(tail);

    let mut head_words = Vec::new();
    let mut tail_words = Vec::new();
    let total_parts = head_groups.len() + tail_groups.len();
    for (idx, g) in head_groups.iter().chain(&tail_groups).enumerate() {
        let target = if idx < head_groups.len() {
            &mut head_words
        } else {
            &mut tail_words
        };
        // The `::` itself follows any head group.
        let is_last = idx + 1 == total_parts && !(elided && idx < head_groups.len());
        if g.contains('.') {
            if !is_last {
                return Err(err("an IPv4 part may only end the address"));
            }
            let v4 = parse_embedded_ipv4(g).ok_or_else(|| err("malformed IPv4 part"))?;
            let o = v4.octets();
            target.push(u16::from_be_bytes([o[0], o[1]]));
            target.push(u16::from_be_bytes([o[2], o[3]]));
        } else {
            if g.is_empty() || g.len() > 4 || !g.bytes().all(|b| b.is_ascii_hexdigit()) {
                return Err(err("groups are one to four hex digits"));
            }
            target.push(u16::from_str_radix(g, 16).unwrap());
        }
    }

    let count = head_words.len() + tail_words.len();
    let mut words = [0u16; 8];
    if elided {
        if count > 7 {
            return Err(err("too many groups"));
        }
        words[..head_words.len()].copy_from_slice(&head_words);
        words[8 - tail_words.len()..].copy_from_slice(&tail_words);
    } else {
        if count != 8 {
            return Err(err("expected eight groups"));
        }
        words.copy_from_slice(&head_words);
    }
    Ok(Ipv6Addr::from(words))
}

/// Dotted quad with no leading zeros, as used inside IPv6 text.
fn parse_embedded_ipv4(text: &str) -> Option<Ipv4Addr> {
    let parts: Vec<&str> = text.split('.').collect();
    if parts.len() != 4 {
        return None;
    }
    let mut octets = [0u8; 4];
    for (slot, p) in octets.iter_mut().zip(parts) {
        if p.is_empty() || p.len() > 3 || !p.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        if p.len() > 1 && p.starts_with('0') {
            return None;
        }
        *slot = p.parse().ok()?;
    }
    Some(Ipv4Addr::from(octets))
}

/// Splits a path into segments. One leading `/` is dropped; characters must
/// be legal in an HTTP path segment.
pub fn parse_path(text: &str) -> Result<PathText> {
    let (body, offset) = match text.strip_prefix('/') {
        Some(rest) => (rest, 1),
        None => (text, 0),
    };
    if body.is_empty() {
        return Ok(PathText::default());
    }
    let mut segments = Vec::new();
    let mut at = offset;
    for seg in body.split('/') {
        check_chars(seg, at, "path", |c| is_unreserved(c) || ";:@&=".contains(c))?;
        segments.push(seg.to_string());
        at += seg.len() + 1;
    }
    Ok(PathText { segments })
}

/// Percent-encodes everything outside the unreserved set
/// `ALPHA / DIGIT / - . _ ~`.
pub fn encode_component(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for b in s.bytes() {
        if b.is_ascii_alphanumeric() || matches!(b, b'-' | b'.' | b'_' | b'~') {
            out.push(b as char);
        } else {
            out.push('%');
            out.push(char::from(b"0123456789ABCDEF"[(b >> 4) as usize]));
            out.push(char::from(b"0123456789ABCDEF"[(b & 0xf) as usize]));
        }
    }
    out
}

/// `path[?query]` as sent on the request line.
pub fn request_target(path: &PathText, query: &[(String, String)]) -> String {
    let mut out = format!("/{path}");
    for (i, (k, v)) in query.iter().enumerate() {
        out.push(if i == 0 { '?' } else { '&' });
        out.push_str(&encode_component(k));
        out.push('=');
        out.push_str(&encode_component(v));
    }
    out
}

/// Absolute URL; query pairs keep their order.
pub fn render_url(server: &ServerUrl, path: &PathText, query: &[(String, String)]) -> String {
    format!("{server}{}", request_target(path, query))
}
