//! Turning resolved requests into wire requests and responses into
//! [`ResponseObject`]s.
//!
//! `execute` sends exactly once. Redirects and retries are never followed
//! here: the response object carries `nextUri` and `tryAgain` so that the
//! calling workflow decides.

pub(crate) mod http1;
mod transport;

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use base64::Engine;
use serde::Serialize;

pub use transport::{RawResponse, TcpTransport, Transport, TransportError};

use crate::binder::{resolve, BindingSet, ResolveError, ResolvedRequest};
use crate::model::{EntityKind, HttpMessage, RequestMethod, ReturnForm};
use crate::url::{self, ServerUrl};

/// Default cap on materialized body size.
pub const DEFAULT_MAX_BODY_BYTES: u64 = 16 * 1024 * 1024;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlanBody {
    Empty,
    Bytes(Vec<u8>),
    /// A file opened and streamed when the request is sent.
    Stream(PathBuf),
}

/// A request ready for a [`Transport`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RequestPlan {
    pub name: String,
    pub method: RequestMethod,
    pub absolute_url: String,
    pub server: ServerUrl,
    /// Origin-form target: path and query.
    pub request_target: String,
    /// Author headers followed by the derived `Content-Type` and
    /// `Authorization`.
    pub headers: Vec<(String, String)>,
    pub body: PlanBody,
    pub entity: Option<EntityKind>,
    pub timeout_ms: u64,
    pub proxy: Option<(String, u16)>,
    pub expected_type: Option<String>,
    pub return_form: ReturnForm,
}

impl RequestPlan {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }

    /// Absolute-form target for proxies: the URL without userinfo.
    pub fn absolute_form(&self) -> String {
        format!(
            "{}://{}{}",
            self.server.scheme.as_str(),
            self.server.authority(),
            self.request_target
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error("cannot read payload file `{path}`: {reason}")]
    FileNotReadable { path: String, reason: String },
    #[error("payload of {size} bytes exceeds the {limit}-byte limit")]
    PayloadTooLarge { size: u64, limit: u64 },
    #[error("BYTES payload is not valid base64: {0}")]
    InvalidBase64(String),
}

#[derive(Clone, Copy, Debug)]
pub struct PlanOptions {
    pub max_body_bytes: u64,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions {
            max_body_bytes: DEFAULT_MAX_BODY_BYTES,
        }
    }
}

pub fn build_plan(resolved: &ResolvedRequest) -> Result<RequestPlan, PlanError> {
    build_plan_with(resolved, PlanOptions::default())
}

pub fn build_plan_with(resolved: &ResolvedRequest, options: PlanOptions) -> Result<RequestPlan, PlanError> {
    let limit = options.max_body_bytes;
    let check_size = |size: u64| {
        if size > limit {
            Err(PlanError::PayloadTooLarge { size, limit })
        } else {
            Ok(())
        }
    };

    let mut headers = resolved.headers.clone();
    let (body, entity) = match &resolved.body {
        None => (PlanBody::Empty, None),
        Some(b) => {
            headers.push(("Content-Type".to_string(), b.content_type.clone()));
            let body = match b.entity {
                EntityKind::Text => {
                    check_size(b.payload.len() as u64)?;
                    PlanBody::Bytes(b.payload.clone().into_bytes())
                }
                EntityKind::Bytes => {
                    let bytes = base64::engine::general_purpose::STANDARD
                        .decode(b.payload.trim())
                        .map_err(|e| PlanError::InvalidBase64(e.to_string()))?;
                    check_size(bytes.len() as u64)?;
                    PlanBody::Bytes(bytes)
                }
                EntityKind::File => {
                    let bytes = fs::read(&b.payload).map_err(|e| PlanError::FileNotReadable {
                        path: b.payload.clone(),
                        reason: e.to_string(),
                    })?;
                    check_size(bytes.len() as u64)?;
                    PlanBody::Bytes(bytes)
                }
                EntityKind::Stream => {
                    let meta = fs::File::open(&b.payload)
                        .and_then(|f| f.metadata())
                        .map_err(|e| PlanError::FileNotReadable {
                            path: b.payload.clone(),
                            reason: e.to_string(),
                        })?;
                    check_size(meta.len())?;
                    PlanBody::Stream(PathBuf::from(&b.payload))
                }
            };
            (body, Some(b.entity))
        }
    };
    if let Some((user, pass)) = &resolved.basic_auth {
        headers.push(("Authorization".to_string(), basic_auth_header(user, pass)));
    }

    Ok(RequestPlan {
        name: resolved.name.clone(),
        method: resolved.method,
        absolute_url: url::render_url(&resolved.server, &resolved.path, &resolved.query),
        server: resolved.server.clone(),
        request_target: url::request_target(&resolved.path, &resolved.query),
        headers,
        body,
        entity,
        timeout_ms: resolved.timeout_ms,
        proxy: resolved.proxy.clone(),
        expected_type: resolved.expected_type.clone(),
        return_form: resolved.return_form,
    })
}

/// `Basic base64(user:pass)`
pub fn basic_auth_header(user: &str, pass: &str) -> String {
    let token = base64::engine::general_purpose::STANDARD.encode(format!("{user}:{pass}"));
    format!("Basic {token}")
}

/// The post-processed response handed to callers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ResponseObject {
    pub payload: String,
    pub statuscode: u16,
    pub succeeded: bool,
    pub try_again: bool,
    pub next_uri: Option<String>,
    pub request_type: RequestMethod,
}

/// Classifies a raw response.
///
/// | field       | rule                                                |
/// |-------------|-----------------------------------------------------|
/// | `succeeded` | status in 200..=299                                 |
/// | `tryAgain`  | status is 408 or 429, or in 500..=599               |
/// | `nextUri`   | `Location` header value, for status in 300..=399    |
/// | `payload`   | body decoded as UTF-8, invalid sequences replaced   |
pub fn handle_response(
    status: u16,
    headers: &[(String, String)],
    body: &[u8],
    method: RequestMethod,
) -> ResponseObject {
    let next_uri = if (300..=399).contains(&status) {
        headers
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case("location"))
            .map(|(_, v)| v.clone())
    } else {
        None
    };
    ResponseObject {
        payload: String::from_utf8_lossy(body).into_owned(),
        statuscode: status,
        succeeded: (200..=299).contains(&status),
        try_again: matches!(status, 408 | 429 | 500..=599),
        next_uri,
        request_type: method,
    }
}

/// Sends `plan` once and post-processes the response.
pub fn execute(plan: &RequestPlan, transport: &dyn Transport) -> Result<ResponseObject, TransportError> {
    let started = Instant::now();
    let raw = transport.send(plan)?;
    log::debug!(
        "{} {} -> {} in {:?}",
        plan.method,
        plan.absolute_url,
        raw.status,
        started.elapsed()
    );
    if let Some(expected) = &plan.expected_type {
        check_expected_type(plan, expected, &raw.headers);
    }
    Ok(handle_response(raw.status, &raw.headers, &raw.body, plan.method))
}

fn check_expected_type(plan: &RequestPlan, expected: &str, headers: &[(String, String)]) {
    let essence = |s: &str| s.split(';').next().unwrap_or("").trim().to_ascii_lowercase();
    let actual = headers
        .iter()
        .find(|(k, _)| k.eq_ignore_ascii_case("content-type"))
        .map(|(_, v)| v.as_str());
    match actual {
        Some(a) if essence(a) == essence(expected) => {}
        Some(a) => log::warn!(
            "{}: expected response type `{expected}`, received `{a}`",
            plan.name
        ),
        None => log::warn!(
            "{}: expected response type `{expected}`, response has no Content-Type",
            plan.name
        ),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Branch {
    Success,
    Failure,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BranchOutput {
    Payload(String),
    Full(ResponseObject),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchResult {
    pub branch: Branch,
    pub output: BranchOutput,
}

pub fn classify(response: ResponseObject, form: ReturnForm) -> BranchResult {
    let branch = if response.succeeded {
        Branch::Success
    } else {
        Branch::Failure
    };
    let output = match form {
        ReturnForm::PayloadText => BranchOutput::Payload(response.payload),
        ReturnForm::FullResponse => BranchOutput::Full(response),
    };
    BranchResult { branch, output }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Resolve(#[from] ResolveError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Transport(#[from] TransportError),
}

/// Resolve, plan, send and classify in one step.
pub fn run_message(
    message: &HttpMessage,
    bindings: &BindingSet,
    transport: &dyn Transport,
) -> Result<BranchResult, RunError> {
    let resolved = resolve(message, bindings)?;
    let plan = build_plan(&resolved)?;
    let response = execute(&plan, transport)?;
    Ok(classify(response, plan.return_form))
}
