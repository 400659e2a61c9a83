//! Scripted HTTP endpoints for tests and offline runs.
//!
//! A [`MockScript`] is a list of routes. [`ScriptedTransport`] answers plans
//! from the script in-process; [`MockServer`] serves the same script over a
//! real socket on `127.0.0.1`, and also acts as a forward proxy.
//!
//! Script JSON:
//!
//! ```json
//! { "routes": [
//!     { "method": "GET", "path": "/users", "status": 200,
//!       "headers": [["Content-Type", "application/json"]],
//!       "body": "[]", "delay_ms": 0 }
//! ] }
//! ```
//!
//! `path` is matched against the request path without its query, unless the
//! route path itself contains `?`. `*` matches anything and a trailing `*`
//! matches a prefix. Unmatched requests get an empty 404.

use std::io::{self, BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::executor::http1;
use crate::executor::{PlanBody, RawResponse, RequestPlan, Transport, TransportError};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockScript {
    #[serde(default)]
    pub routes: Vec<MockRoute>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockRoute {
    /// Any method when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    pub path: String,
    pub status: u16,
    #[serde(default)]
    pub headers: Vec<(String, String)>,
    #[serde(default)]
    pub body: String,
    #[serde(default)]
    pub delay_ms: u64,
}

impl MockRoute {
    pub fn new(method: Option<&str>, path: &str, status: u16, body: &str) -> Self {
        MockRoute {
            method: method.map(str::to_string),
            path: path.to_string(),
            status,
            headers: Vec::new(),
            body: body.to_string(),
            delay_ms: 0,
        }
    }

    pub fn with_header(mut self, name: &str, value: &str) -> Self {
        self.headers.push((name.to_string(), value.to_string()));
        self
    }

    pub fn with_delay(mut self, ms: u64) -> Self {
        self.delay_ms = ms;
        self
    }

    fn matches(&self, method: &str, target: &str) -> bool {
        if self.method.as_deref().is_some_and(|m| !m.eq_ignore_ascii_case(method)) {
            return false;
        }
        let subject = if self.path.contains('?') {
            target
        } else {
            target.split('?').next().unwrap_or("")
        };
        match self.path.strip_suffix('*') {
            Some(prefix) => subject.starts_with(prefix),
            None => subject == self.path,
        }
    }
}

impl MockScript {
    pub fn new(routes: Vec<MockRoute>) -> Self {
        MockScript { routes }
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }

    /// First route matching `method` and the origin-form `target`.
    pub fn route(&self, method: &str, target: &str) -> Option<&MockRoute> {
        self.routes.iter().find(|r| r.matches(method, target))
    }
}

/// Origin-form target of an absolute-form one.
fn origin_form(target: &str) -> &str {
    match target.split_once("://") {
        Some((_, rest)) => rest.find('/').map_or("/", |i| &rest[i..]),
        None => target,
    }
}

/// Answers plans from a script without touching the network.
///
/// A route delay at or beyond the plan's timeout yields
/// [`TransportError::Timeout`] after waiting out the timeout.
#[derive(Debug, Default)]
pub struct ScriptedTransport {
    script: MockScript,
    sent: Mutex<Vec<RequestPlan>>,
}

impl ScriptedTransport {
    pub fn new(script: MockScript) -> Self {
        ScriptedTransport {
            script,
            sent: Mutex::new(Vec::new()),
        }
    }

    /// Plans sent so far, in order.
    pub fn sent(&self) -> Vec<RequestPlan> {
        self.sent.lock().unwrap().clone()
    }
}

impl Transport for ScriptedTransport {
    fn send(&self, plan: &RequestPlan) -> Result<RawResponse, TransportError> {
        self.sent.lock().unwrap().push(plan.clone());
        if let PlanBody::Stream(path) = &plan.body {
            std::fs::metadata(path).map_err(|e| TransportError::FileNotReadable {
                path: path.display().to_string(),
                reason: e.to_string(),
            })?;
        }
        let Some(route) = self.script.route(plan.method.as_str(), &plan.request_target) else {
            return Ok(RawResponse {
                status: 404,
                ..RawResponse::default()
            });
        };
        if route.delay_ms >= plan.timeout_ms {
            thread::sleep(Duration::from_millis(plan.timeout_ms));
            return Err(TransportError::Timeout {
                timeout_ms: plan.timeout_ms,
            });
        }
        thread::sleep(Duration::from_millis(route.delay_ms));
        Ok(RawResponse {
            status: route.status,
            headers: route.headers.clone(),
            body: route.body.clone().into_bytes(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecordedRequest {
    pub method: String,
    /// The request target as received: origin-form, absolute-form for proxied
    /// requests, or `host:port` for `CONNECT`.
    pub target: String,
    pub headers: Vec<(String, String)>,
    pub body: Vec<u8>,
}

impl RecordedRequest {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }
}

/// A scripted HTTP/1.1 server on an ephemeral local port. Stops on drop.
pub struct MockServer {
    addr: SocketAddr,
    requests: Arc<Mutex<Vec<RecordedRequest>>>,
    shutdown: Arc<AtomicBool>,
    accept: Option<JoinHandle<()>>,
}

impl MockServer {
    pub fn start(script: MockScript) -> io::Result<Self> {
        let listener = TcpListener::bind("127.0.0.1:0")?;
        let addr = listener.local_addr()?;
        let requests = Arc::new(Mutex::new(Vec::new()));
        let shutdown = Arc::new(AtomicBool::new(false));
        let script = Arc::new(script);
        let accept = {
            let requests = Arc::clone(&requests);
            let shutdown = Arc::clone(&shutdown);
            thread::spawn(move || {
                for conn in listener.incoming() {
                    if shutdown.load(Ordering::SeqCst) {
                        break;
                    }
                    let Ok(conn) = conn else { continue };
                    let script = Arc::clone(&script);
                    let requests = Arc::clone(&requests);
                    thread::spawn(move || {
                        if let Err(e) = serve(conn, &script, &requests) {
                            log::debug!("mock connection ended: {e}");
                        }
                    });
                }
            })
        };
        Ok(MockServer {
            addr,
            requests,
            shutdown,
            accept: Some(accept),
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// `http://127.0.0.1:PORT`
    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn requests(&self) -> Vec<RecordedRequest> {
        self.requests.lock().unwrap().clone()
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.shutdown.store(true, Ordering::SeqCst);
        let _ = TcpStream::connect(self.addr);
        if let Some(h) = self.accept.take() {
            let _ = h.join();
        }
    }
}

fn serve(
    conn: TcpStream,
    script: &MockScript,
    requests: &Mutex<Vec<RecordedRequest>>,
) -> io::Result<()> {
    let mut writer = conn.try_clone()?;
    let mut reader = BufReader::new(conn);
    loop {
        let Some(head) = http1::read_head(&mut reader)? else {
            return Ok(());
        };
        let mut parts = head.start_line.split_whitespace();
        let method = parts.next().unwrap_or("").to_string();
        let target = parts.next().unwrap_or("").to_string();
        let body = if head.is_chunked() {
            http1::read_chunked(&mut reader)?
        } else {
            http1::read_exact_len(&mut reader, head.content_length()?.unwrap_or(0))?
        };
        requests.lock().unwrap().push(RecordedRequest {
            method: method.clone(),
            target: target.clone(),
            headers: head.headers.clone(),
            body,
        });

        if method == "CONNECT" {
            writer.write_all(b"HTTP/1.1 200 Connection Established\r\n\r\n")?;
            // No TLS here: a handshake record inside the tunnel ends the connection.
            if reader.fill_buf()?.first() == Some(&0x16) {
                return Ok(());
            }
            continue;
        }
        let route = script.route(&method, origin_form(&target));
        let (status, headers, body) = match route {
            Some(r) => {
                thread::sleep(Duration::from_millis(r.delay_ms));
                (r.status, r.headers.as_slice(), r.body.as_bytes())
            }
            None => (404, &[][..], &b""[..]),
        };
        writer.write_all(&response_bytes(status, headers, body))?;
        writer.flush()?;
        return Ok(());
    }
}

fn response_bytes(status: u16, headers: &[(String, String)], body: &[u8]) -> Vec<u8> {
    let mut out = format!("HTTP/1.1 {status} {}\r\n", reason(status));
    for (k, v) in headers {
        out.push_str(&format!("{k}: {v}\r\n"));
    }
    let bodiless = (100..200).contains(&status) || status == 204 || status == 304;
    let has_length = headers
        .iter()
        .any(|(k, _)| k.eq_ignore_ascii_case("content-length") || k.eq_ignore_ascii_case("transfer-encoding"));
    if !bodiless && !has_length {
        out.push_str(&format!("Content-Length: {}\r\n", body.len()));
    }
    if !bodiless {
        out.push_str("Connection: close\r\n");
    }
    out.push_str("\r\n");
    let mut bytes = out.into_bytes();
    if !bodiless {
        bytes.extend_from_slice(body);
    }
    bytes
}

fn reason(status: u16) -> &'static str {
    match status {
        100 => "Continue",
        200 => "OK",
        201 => "Created",
        204 => "No Content",
        301 => "Moved Permanently",
        302 => "Found",
        304 => "Not Modified",
        400 => "Bad Request",
        404 => "Not Found",
        408 => "Request Timeout",
        429 => "Too Many Requests",
        500 => "Internal Server Error",
        503 => "Service Unavailable",
        _ => "Status",
    }
}
