//! The request model produced by the parser and consumed by every other stage.
//!
//! A [`RequestDocument`] is one `.http` description file. It holds one or more
//! [`HttpMessage`]s, each of which names a request, its URL, method and the
//! optional query, headers, body, return value and client customization.
//! Values almost everywhere may be literals or variable references; see
//! [`Value`].
//!
//! Model values are immutable once built. Equality is structural and ignores
//! source positions, so a message parsed from differently formatted sources
//! compares equal.

use std::fmt;

use crate::diagnostic::Span;

/// Timeout applied when a message carries no `timeout` customization.
pub const DEFAULT_TIMEOUT_MS: u64 = 5000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RequestDocument {
    pub source_name: String,
    pub messages: Vec<HttpMessage>,
}

impl RequestDocument {
    pub fn message(&self, name: &str) -> Option<&HttpMessage> {
        self.messages.iter().find(|m| m.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HttpMessage {
    pub name: String,
    pub url: AbstractUrl,
    pub method: RequestMethod,
    pub query: Vec<Parameter>,
    pub headers: Vec<Header>,
    pub body: Option<Body>,
    pub return_value: Option<ReturnValue>,
    pub customization: Option<Customization>,
    pub spans: MessageSpans,
}

impl HttpMessage {
    /// A message with only the three mandatory fields set.
    pub fn new(name: impl Into<String>, url: AbstractUrl, method: RequestMethod) -> Self {
        HttpMessage {
            name: name.into(),
            url,
            method,
            query: Vec::new(),
            headers: Vec::new(),
            body: None,
            return_value: None,
            customization: None,
            spans: MessageSpans::default(),
        }
    }

    /// The return value in effect: the declared one, or payload-as-text.
    pub fn effective_return_value(&self) -> ReturnValue {
        self.return_value.clone().unwrap_or_default()
    }

    pub fn return_form(&self) -> ReturnForm {
        self.return_value
            .as_ref()
            .map(|r| r.return_form)
            .unwrap_or(ReturnForm::PayloadText)
    }

    /// Visits every value slot in traversal order: server, path, query,
    /// headers, body, return value, customization.
    pub fn for_each_slot<'a>(&'a self, mut visit: impl FnMut(Slot<'a>)) {
        visit(Slot::Value(&self.url.server));
        visit(Slot::Value(&self.url.path));
        for p in &self.query {
            visit(Slot::Value(&p.key));
            visit(Slot::Value(&p.value));
        }
        for h in &self.headers {
            visit(Slot::HeaderKey(&h.key));
            visit(Slot::Value(&h.value));
        }
        if let Some(body) = &self.body {
            visit(Slot::ContentType(&body.content_type));
            visit(Slot::Value(&body.payload));
        }
        if let Some(ret) = &self.return_value {
            visit(Slot::ContentType(&ret.expected_type));
        }
        if let Some(c) = &self.customization {
            if let Some(proxy) = &c.proxy {
                visit(Slot::Value(&proxy.host));
                visit(Slot::Value(&proxy.port));
            }
            if let Some(auth) = &c.basic_auth {
                visit(Slot::Value(&auth.username));
                visit(Slot::Value(&auth.password));
            }
        }
    }

    /// Every variable reference in the message, in traversal order, with
    /// repeats.
    pub fn variables(&self) -> Vec<&VariableRef> {
        let mut out = Vec::new();
        self.for_each_slot(|slot| {
            if let Some(v) = slot.variable() {
                out.push(v);
            }
        });
        out
    }
}

/// One value position inside a message.
#[derive(Clone, Copy, Debug)]
pub enum Slot<'a> {
    Value(&'a Value),
    HeaderKey(&'a HeaderKey),
    ContentType(&'a ContentTypeSpec),
}

impl<'a> Slot<'a> {
    pub fn variable(self) -> Option<&'a VariableRef> {
        match self {
            Slot::Value(Value::Variable(v)) => Some(v),
            Slot::HeaderKey(HeaderKey::Variable(v)) => Some(v),
            Slot::ContentType(ContentTypeSpec::Variable(v)) => Some(v),
            _ => None,
        }
    }
}

/// Source positions of a message's fields.
///
/// Positions are metadata: two `MessageSpans` always compare equal, which
/// keeps message equality structural.
#[derive(Clone, Debug, Default)]
pub struct MessageSpans {
    pub message: Span,
    pub name: Span,
    pub server: Span,
    pub path: Span,
    pub method: Span,
    pub params: Vec<Span>,
    pub headers: Vec<Span>,
    pub body: Span,
    pub body_content_type: Span,
    pub return_value: Span,
    pub customization: Span,
    pub proxy_port: Span,
    pub timeout: Span,
}

impl PartialEq for MessageSpans {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for MessageSpans {}

impl MessageSpans {
    pub fn param(&self, index: usize) -> Span {
        self.params.get(index).copied().unwrap_or(self.message)
    }

    pub fn header(&self, index: usize) -> Span {
        self.headers.get(index).copied().unwrap_or(self.message)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub enum RequestMethod {
    #[serde(rename = "GET")]
    Get,
    #[serde(rename = "POST")]
    Post,
    #[serde(rename = "PUT")]
    Put,
    #[serde(rename = "DELETE")]
    Delete,
}

impl RequestMethod {
    pub const ALL: [RequestMethod; 4] = [
        RequestMethod::Get,
        RequestMethod::Post,
        RequestMethod::Put,
        RequestMethod::Delete,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RequestMethod::Get => "GET",
            RequestMethod::Post => "POST",
            RequestMethod::Put => "PUT",
            RequestMethod::Delete => "DELETE",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.as_str() == s)
    }

    pub fn allows_body(self) -> bool {
        matches!(self, RequestMethod::Post | RequestMethod::Put)
    }
}

impl fmt::Display for RequestMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbstractUrl {
    /// Scheme, userinfo, host and port.
    pub server: Value,
    /// Path text; the empty literal when the source has no `path` clause.
    pub path: Value,
}

impl AbstractUrl {
    pub fn new(server: Value, path: Value) -> Self {
        AbstractUrl { server, path }
    }

    pub fn literal(server: &str, path: &str) -> Self {
        AbstractUrl::new(Value::literal(server), Value::literal(path))
    }
}

/// A literal text or a variable reference.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Literal(String),
    Variable(VariableRef),
}

impl Value {
    pub fn literal(s: impl Into<String>) -> Self {
        Value::Literal(s.into())
    }

    pub fn input(name: impl Into<String>) -> Self {
        Value::Variable(VariableRef::input(name))
    }

    pub fn environment(name: impl Into<String>) -> Self {
        Value::Variable(VariableRef::environment(name))
    }

    pub fn as_literal(&self) -> Option<&str> {
        match self {
            Value::Literal(s) => Some(s),
            Value::Variable(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VariableKind {
    Input,
    Environment,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VariableRef {
    pub kind: VariableKind,
    pub name: String,
}

impl VariableRef {
    pub fn input(name: impl Into<String>) -> Self {
        VariableRef {
            kind: VariableKind::Input,
            name: name.into(),
        }
    }

    pub fn environment(name: impl Into<String>) -> Self {
        VariableRef {
            kind: VariableKind::Environment,
            name: name.into(),
        }
    }

    /// Whether the name fits the syntax of its kind.
    pub fn is_well_formed(&self) -> bool {
        match self.kind {
            VariableKind::Input => is_identifier(&self.name),
            VariableKind::Environment => is_environment_name(&self.name),
        }
    }
}

impl fmt::Display for VariableRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            VariableKind::Input => write!(f, "input ${}", self.name),
            VariableKind::Environment => write!(f, "environment {}", self.name),
        }
    }
}

/// A letter followed by letters, digits or underscores.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Capitalized words joined by single underscores: `[A-Z]+(_[A-Z]+)*`.
pub fn is_environment_name(s: &str) -> bool {
    !s.is_empty()
        && s.split('_')
            .all(|word| !word.is_empty() && word.bytes().all(|b| b.is_ascii_uppercase()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Parameter {
    pub key: Value,
    pub value: Value,
}

impl Parameter {
    pub fn new(key: Value, value: Value) -> Self {
        Parameter { key, value }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Header {
    pub key: HeaderKey,
    pub value: Value,
}

impl Header {
    pub fn new(key: HeaderKey, value: Value) -> Self {
        Header { key, value }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HeaderKey {
    WellKnown(WellKnownHeader),
    Custom(String),
    Variable(VariableRef),
}

impl HeaderKey {
    /// Whether this key literally names `header` (case-insensitive).
    /// Variable keys are unknown until bound and never match.
    pub fn names(&self, header: WellKnownHeader) -> bool {
        match self {
            HeaderKey::WellKnown(h) => *h == header,
            HeaderKey::Custom(s) => s.eq_ignore_ascii_case(header.as_str()),
            HeaderKey::Variable(_) => false,
        }
    }
}

macro_rules! well_known_headers {
    ($($variant:ident => $name:literal,)*) => {
        /// The curated set of conventional request header names.
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum WellKnownHeader {
            $($variant,)*
        }

        impl WellKnownHeader {
            pub const ALL: &'static [WellKnownHeader] = &[$(WellKnownHeader::$variant,)*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(WellKnownHeader::$variant => $name,)*
                }
            }
        }
    };
}

well_known_headers! {
    Accept => "Accept",
    AcceptCharset => "Accept-Charset",
    AcceptEncoding => "Accept-Encoding",
    AcceptLanguage => "Accept-Language",
    Authorization => "Authorization",
    CacheControl => "Cache-Control",
    Connection => "Connection",
    ContentEncoding => "Content-Encoding",
    ContentLanguage => "Content-Language",
    ContentLength => "Content-Length",
    ContentType => "Content-Type",
    Cookie => "Cookie",
    Date => "Date",
    Expect => "Expect",
    Forwarded => "Forwarded",
    From => "From",
    Host => "Host",
    IfMatch => "If-Match",
    IfModifiedSince => "If-Modified-Since",
    IfNoneMatch => "If-None-Match",
    IfRange => "If-Range",
    IfUnmodifiedSince => "If-Unmodified-Since",
    MaxForwards => "Max-Forwards",
    Origin => "Origin",
    Pragma => "Pragma",
    ProxyAuthorization => "Proxy-Authorization",
    Range => "Range",
    Referer => "Referer",
    Te => "TE",
    UserAgent => "User-Agent",
}

impl WellKnownHeader {
    /// Exact, case-sensitive lookup of the canonical name.
    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|h| h.as_str() == s)
    }

    pub fn from_name_ignore_case(s: &str) -> Option<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|h| h.as_str().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for WellKnownHeader {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Body {
    pub content_type: ContentTypeSpec,
    pub entity_type: EntityKind,
    pub payload: Value,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ContentTypeSpec {
    WellKnown(MediaType),
    Custom(String),
    Variable(VariableRef),
}

impl Default for ContentTypeSpec {
    fn default() -> Self {
        ContentTypeSpec::WellKnown(MediaType::TextPlain)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MediaType {
    TextPlain,
    ApplicationJson,
    ApplicationXml,
    ImageJpeg,
    ImagePng,
    ApplicationOctetStream,
    MultipartFormData,
    FormUrlEncoded,
}

impl MediaType {
    pub const ALL: [MediaType; 8] = [
        MediaType::TextPlain,
        MediaType::ApplicationJson,
        MediaType::ApplicationXml,
        MediaType::ImageJpeg,
        MediaType::ImagePng,
        MediaType::ApplicationOctetStream,
        MediaType::MultipartFormData,
        MediaType::FormUrlEncoded,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MediaType::TextPlain => "text/plain",
            MediaType::ApplicationJson => "application/json",
            MediaType::ApplicationXml => "application/xml",
            MediaType::ImageJpeg => "image/jpeg",
            MediaType::ImagePng => "image/png",
            MediaType::ApplicationOctetStream => "application/octet-stream",
            MediaType::MultipartFormData => "multipart/form-data",
            MediaType::FormUrlEncoded => "application/x-www-form-urlencoded",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.as_str() == s)
    }
}

impl fmt::Display for MediaType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How a body payload is materialized on the wire.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EntityKind {
    /// The payload text itself, UTF-8 encoded.
    Text,
    /// The contents of the file named by the payload.
    File,
    /// The file named by the payload, opened and streamed at send time.
    Stream,
    /// The payload read as base64.
    Bytes,
}

impl EntityKind {
    pub const ALL: [EntityKind; 4] = [
        EntityKind::Text,
        EntityKind::File,
        EntityKind::Stream,
        EntityKind::Bytes,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::Text => "TEXT",
            EntityKind::File => "FILE",
            EntityKind::Stream => "STREAM",
            EntityKind::Bytes => "BYTES",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ReturnValue {
    pub expected_type: ContentTypeSpec,
    pub return_form: ReturnForm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum ReturnForm {
    FullResponse,
    #[default]
    PayloadText,
}

impl ReturnForm {
    pub fn as_str(self) -> &'static str {
        match self {
            ReturnForm::FullResponse => "FULL_RESPONSE",
            ReturnForm::PayloadText => "PAYLOAD_TEXT",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "FULL_RESPONSE" => Some(ReturnForm::FullResponse),
            "PAYLOAD_TEXT" => Some(ReturnForm::PayloadText),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Customization {
    pub proxy: Option<ProxySpec>,
    pub basic_auth: Option<BasicAuthSpec>,
    pub timeout_ms: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProxySpec {
    pub host: Value,
    pub port: Value,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasicAuthSpec {
    pub username: Value,
    pub password: Value,
}
