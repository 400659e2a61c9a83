//! Variable collection and resolution.
//!
//! Input variables are bound by the caller (block ports, `--input` flags);
//! environment variables are looked up through an injected provider so that
//! resolution never reads process state on its own.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::model::*;
use crate::url::{self, PathText, ServerUrl};
use crate::validate::{is_header_value, is_media_type, is_token, parse_port};

/// Input-variable names in first-occurrence order, without repeats.
pub fn collect_input_variables(message: &HttpMessage) -> Vec<String> {
    collect(message, VariableKind::Input)
}

/// Environment-variable names in first-occurrence order, without repeats.
pub fn collect_environment_variables(message: &HttpMessage) -> Vec<String> {
    collect(message, VariableKind::Environment)
}

fn collect(message: &HttpMessage, kind: VariableKind) -> Vec<String> {
    let mut seen = HashSet::new();
    message
        .variables()
        .into_iter()
        .filter(|v| v.kind == kind && seen.insert(v.name.as_str()))
        .map(|v| v.name.clone())
        .collect()
}

type EnvLookup = dyn Fn(&str) -> Option<String> + Send + Sync;

/// Values for a message's variables.
#[derive(Clone)]
pub struct BindingSet {
    pub inputs: BTreeMap<String, String>,
    environment: Arc<EnvLookup>,
    /// Timeout used when the message does not customize one.
    pub default_timeout_ms: u64,
}

impl Default for BindingSet {
    fn default() -> Self {
        BindingSet {
            inputs: BTreeMap::new(),
            environment: Arc::new(|_| None),
            default_timeout_ms: DEFAULT_TIMEOUT_MS,
        }
    }
}

impl fmt::Debug for BindingSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BindingSet")
            .field("inputs", &self.inputs)
            .field("default_timeout_ms", &self.default_timeout_ms)
            .finish_non_exhaustive()
    }
}

impl BindingSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_input(mut self, name: impl Into<String>, value: impl Into<String>) -> Self {
        self.inputs.insert(name.into(), value.into());
        self
    }

    pub fn with_environment(
        mut self,
        lookup: impl Fn(&str) -> Option<String> + Send + Sync + 'static,
    ) -> Self {
        self.environment = Arc::new(lookup);
        self
    }

    /// Environment lookups served from a fixed map.
    pub fn with_environment_map(self, map: BTreeMap<String, String>) -> Self {
        self.with_environment(move |name| map.get(name).cloned())
    }

    pub fn with_default_timeout(mut self, ms: u64) -> Self {
        self.default_timeout_ms = ms;
        self
    }

    pub fn environment(&self, name: &str) -> Option<String> {
        (self.environment)(name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResolvedBody {
    pub content_type: String,
    pub entity: EntityKind,
    pub payload: String,
}

/// A message with every variable replaced by its value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResolvedRequest {
    pub name: String,
    pub method: RequestMethod,
    pub server: ServerUrl,
    pub path: PathText,
    pub query: Vec<(String, String)>,
    /// Author-written headers only; derived headers are added by the plan.
    pub headers: Vec<(String, String)>,
    pub body: Option<ResolvedBody>,
    pub expected_type: Option<String>,
    pub return_form: ReturnForm,
    pub timeout_ms: u64,
    pub proxy: Option<(String, u16)>,
    pub basic_auth: Option<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ResolveError {
    #[error("missing value for input variable `{0}`")]
    MissingInput(String),
    #[error("environment variable `{0}` is not set")]
    MissingEnvironment(String),
    #[error("invalid value for {field}: {reason}")]
    InvalidResolvedValue { field: String, reason: String },
}

fn invalid(field: &str, reason: impl Into<String>) -> ResolveError {
    ResolveError::InvalidResolvedValue {
        field: field.to_string(),
        reason: reason.into(),
    }
}

struct Resolver<'a> {
    bindings: &'a BindingSet,
}

impl Resolver<'_> {
    fn var(&self, v: &VariableRef) -> Result<String, ResolveError> {
        match v.kind {
            VariableKind::Input => self
                .bindings
                .inputs
                .get(&v.name)
                .cloned()
                .ok_or_else(|| ResolveError::MissingInput(v.name.clone())),
            VariableKind::Environment => self
                .bindings
                .environment(&v.name)
                .ok_or_else(|| ResolveError::MissingEnvironment(v.name.clone())),
        }
    }

    fn value(&self, v: &Value) -> Result<String, ResolveError> {
        match v {
            Value::Literal(s) => Ok(s.clone()),
            Value::Variable(var) => self.var(var),
        }
    }

    fn content_type(&self, c: &ContentTypeSpec, field: &str) -> Result<String, ResolveError> {
        let text = match c {
            ContentTypeSpec::WellKnown(m) => return Ok(m.as_str().to_string()),
            ContentTypeSpec::Custom(s) => s.clone(),
            ContentTypeSpec::Variable(v) => self.var(v)?,
        };
        if !is_media_type(&text) {
            return Err(invalid(field, format!("`{text}` is not a `type/subtype` media type")));
        }
        Ok(text)
    }

    fn header_key(&self, k: &HeaderKey) -> Result<String, ResolveError> {
        let text = match k {
            HeaderKey::WellKnown(h) => return Ok(h.as_str().to_string()),
            HeaderKey::Custom(s) => s.clone(),
            HeaderKey::Variable(v) => self.var(v)?,
        };
        if !is_token(&text) {
            return Err(invalid("header name", format!("`{text}` is not a valid header name")));
        }
        Ok(text)
    }
}

/// Binds every variable of `message`. Variable-held URLs, header names and
/// content types are checked here, since they could not be checked
/// statically.
pub fn resolve(message: &HttpMessage, bindings: &BindingSet) -> Result<ResolvedRequest, ResolveError> {
    let r = Resolver { bindings };

    let server_text = r.value(&message.url.server)?;
    let server = url::parse_server(&server_text)
        .map_err(|e| invalid("server", format!("`{server_text}`: {e}")))?;
    let path_text = r.value(&message.url.path)?;
    let path =
        url::parse_path(&path_text).map_err(|e| invalid("path", format!("`{path_text}`: {e}")))?;

    let query = message
        .query
        .iter()
        .map(|p| Ok((r.value(&p.key)?, r.value(&p.value)?)))
        .collect::<Result<Vec<_>, ResolveError>>()?;

    let mut headers = Vec::with_capacity(message.headers.len());
    for h in &message.headers {
        let key = r.header_key(&h.key)?;
        let value = r.value(&h.value)?;
        if !is_header_value(&value) {
            return Err(invalid(&key, "header value contains line breaks or control characters"));
        }
        headers.push((key, value));
    }

    let body = match &message.body {
        Some(b) => {
            let content_type = r.content_type(&b.content_type, "body contentType")?;
            let payload = r.value(&b.payload)?;
            Some(ResolvedBody {
                content_type,
                entity: b.entity_type,
                payload,
            })
        }
        None => None,
    };

    let expected_type = match &message.return_value {
        Some(rv) => Some(r.content_type(&rv.expected_type, "returns expect")?),
        None => None,
    };

    let custom = message.customization.clone().unwrap_or_default();
    let proxy = match &custom.proxy {
        Some(p) => {
            let host_text = r.value(&p.host)?;
            let port_text = r.value(&p.port)?;
            let port = parse_port(&port_text).ok_or_else(|| {
                invalid("proxy port", format!("`{port_text}` is not a number from 1 to 65535"))
            })?;
            Some((proxy_host(&host_text)?, port))
        }
        None => None,
    };
    let basic_auth = match &custom.basic_auth {
        Some(a) => Some((r.value(&a.username)?, r.value(&a.password)?)),
        None => None,
    };
    let timeout_ms = custom.timeout_ms.unwrap_or(bindings.default_timeout_ms);
    if timeout_ms == 0 {
        return Err(invalid("timeout", "must be positive"));
    }

    if body.is_some() && !message.method.allows_body() {
        return Err(invalid("body", format!("not allowed for {}", message.method)));
    }
    let named = |name: &str| headers.iter().any(|(k, _)| k.eq_ignore_ascii_case(name));
    if body.is_some() && named("Content-Type") {
        return Err(invalid("Content-Type", "conflicts with body contentType"));
    }
    if basic_auth.is_some() && named("Authorization") {
        return Err(invalid("Authorization", "conflicts with basicauth"));
    }

    Ok(ResolvedRequest {
        name: message.name.clone(),
        method: message.method,
        server,
        path,
        query,
        headers,
        body,
        expected_type,
        return_form: message.return_form(),
        timeout_ms,
        proxy,
        basic_auth,
    })
}

/// A proxy host: a host name or address, optionally written with an
/// `http://` prefix.
fn proxy_host(text: &str) -> Result<String, ResolveError> {
    let parsed = url::parse_server(text).map_err(|e| invalid("proxy host", format!("`{text}`: {e}")))?;
    if parsed.port.is_some() || parsed.userinfo.is_some() || parsed.scheme != url::Scheme::Http {
        return Err(invalid(
            "proxy host",
            format!("`{text}` must be a bare host; give the port separately"),
        ));
    }
    Ok(parsed.connect_host())
}
