use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpStream, ToSocketAddrs};
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use rustls::pki_types::ServerName;
use rustls::{ClientConfig, ClientConnection, RootCertStore, StreamOwned};

use super::http1::{self, is_timeout, DeadlineStream};
use super::{PlanBody, RequestPlan};
use crate::url::Scheme;

/// Something that can carry a [`RequestPlan`] to a server and bring back the
/// final response.
pub trait Transport: Send + Sync {
    fn send(&self, plan: &RequestPlan) -> Result<RawResponse, TransportError>;
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawResponse {
    pub status: u16,
    pub headers: Vec<(String, String)>,
    pub body: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TransportError {
    #[error("request timed out after {timeout_ms} ms")]
    Timeout { timeout_ms: u64 },
    #[error("connection to {target} failed: {reason}")]
    ConnectionFailed { target: String, reason: String },
    #[error("proxy {proxy} is unreachable: {reason}")]
    ProxyUnreachable { proxy: String, reason: String },
    #[error("cannot read payload file `{path}`: {reason}")]
    FileNotReadable { path: String, reason: String },
}

/// HTTP/1.1 over TCP, with TLS for `https` servers.
///
/// One connection per request, `Connection: close`. The plan's timeout is a
/// single deadline covering connect, TLS handshake, write and read.
#[derive(Clone, Default)]
pub struct TcpTransport {
    tls: Option<Arc<ClientConfig>>,
}

impl std::fmt::Debug for TcpTransport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TcpTransport")
            .field("custom_tls", &self.tls.is_some())
            .finish()
    }
}

fn default_tls_config() -> Arc<ClientConfig> {
    static CONFIG: OnceLock<Arc<ClientConfig>> = OnceLock::new();
    CONFIG
        .get_or_init(|| {
            let roots = RootCertStore {
                roots: webpki_roots::TLS_SERVER_ROOTS.to_vec(),
            };
            let provider = Arc::new(rustls::crypto::ring::default_provider());
            let config = ClientConfig::builder_with_provider(provider)
                .with_safe_default_protocol_versions()
                .expect("ring supports the default protocol versions")
                .with_root_certificates(roots)
                .with_no_client_auth();
            Arc::new(config)
        })
        .clone()
}

impl TcpTransport {
    pub fn new() -> Self {
        TcpTransport { tls: None }
    }

    /// Uses `config` instead of the bundled web PKI roots.
    pub fn with_tls_config(config: Arc<ClientConfig>) -> Self {
        TcpTransport { tls: Some(config) }
    }

    fn tls_config(&self) -> Arc<ClientConfig> {
        self.tls.clone().unwrap_or_else(default_tls_config)
    }
}

impl Transport for TcpTransport {
    fn send(&self, plan: &RequestPlan) -> Result<RawResponse, TransportError> {
        let deadline = Instant::now() + Duration::from_millis(plan.timeout_ms);
        let target = plan.server.authority();
        let timeout = || TransportError::Timeout {
            timeout_ms: plan.timeout_ms,
        };
        let failed = |e: io::Error| {
            if is_timeout(&e) {
                timeout()
            } else {
                TransportError::ConnectionFailed {
                    target: target.clone(),
                    reason: e.to_string(),
                }
            }
        };

        let socket = match &plan.proxy {
            Some((host, port)) => connect(host, *port, deadline).map_err(|e| {
                TransportError::ProxyUnreachable {
                    proxy: format!("{host}:{port}"),
                    reason: e.to_string(),
                }
            })?,
            None => connect(
                &plan.server.connect_host(),
                plan.server.effective_port(),
                deadline,
            )
            .map_err(failed)?,
        };
        let handle = socket.try_clone().map_err(failed)?;
        let mut base = DeadlineStream::new(socket, handle, deadline);

        let stream_file = match &plan.body {
            PlanBody::Stream(path) => Some(File::open(path).map_err(|e| {
                TransportError::FileNotReadable {
                    path: path.display().to_string(),
                    reason: e.to_string(),
                }
            })?),
            _ => None,
        };

        if plan.server.scheme == Scheme::Https {
            if plan.proxy.is_some() {
                open_tunnel(&mut base, plan).map_err(failed)?;
            }
            let name = ServerName::try_from(plan.server.connect_host()).map_err(|e| {
                TransportError::ConnectionFailed {
                    target: target.clone(),
                    reason: format!("invalid TLS server name: {e}"),
                }
            })?;
            let conn = ClientConnection::new(self.tls_config(), name).map_err(|e| {
                TransportError::ConnectionFailed {
                    target: target.clone(),
                    reason: format!("tls: {e}"),
                }
            })?;
            let mut tls = StreamOwned::new(conn, base);
            exchange(&mut tls, plan, &plan.request_target, stream_file).map_err(failed)
        } else {
            let request_target = if plan.proxy.is_some() {
                plan.absolute_form()
            } else {
                plan.request_target.clone()
            };
            exchange(&mut base, plan, &request_target, stream_file).map_err(failed)
        }
    }
}

fn connect(host: &str, port: u16, deadline: Instant) -> io::Result<TcpStream> {
    let addrs: Vec<SocketAddr> = (host, port).to_socket_addrs()?.collect();
    let mut last = io::Error::new(
        io::ErrorKind::NotFound,
        format!("no addresses found for {host}"),
    );
    for addr in addrs {
        let remaining = deadline.saturating_duration_since(Instant::now());
        if remaining.is_zero() {
            return Err(io::Error::new(io::ErrorKind::TimedOut, "connect timed out"));
        }
        match TcpStream::connect_timeout(&addr, remaining) {
            Ok(s) => {
                let _ = s.set_nodelay(true);
                return Ok(s);
            }
            Err(e) => last = e,
        }
    }
    Err(last)
}

fn open_tunnel<S: Read + Write>(stream: &mut S, plan: &RequestPlan) -> io::Result<()> {
    let authority = format!("{}:{}", plan.server.host, plan.server.effective_port());
    write!(
        stream,
        "CONNECT {authority} HTTP/1.1\r\nHost: {authority}\r\n\r\n"
    )?;
    stream.flush()?;
    // The server sends nothing after the 2xx until the client speaks, so a
    // throwaway buffered reader cannot swallow tunnel bytes.
    let mut reader = BufReader::new(stream);
    let head = http1::read_head(&mut reader)?
        .ok_or_else(|| http1::invalid("proxy closed the connection during CONNECT"))?;
    let status = head.status()?;
    if !(200..300).contains(&status) {
        return Err(io::Error::new(
            io::ErrorKind::ConnectionRefused,
            format!("proxy refused CONNECT with status {status}"),
        ));
    }
    Ok(())
}

fn request_head(plan: &RequestPlan, request_target: &str) -> String {
    let mut head = format!("{} {request_target} HTTP/1.1\r\n", plan.method);
    if plan.header("host").is_none() {
        head.push_str(&format!("Host: {}\r\n", plan.server.authority()));
    }
    for (k, v) in &plan.headers {
        head.push_str(&format!("{k}: {v}\r\n"));
    }
    match &plan.body {
        PlanBody::Bytes(b) if plan.header("content-length").is_none() => {
            head.push_str(&format!("Content-Length: {}\r\n", b.len()));
        }
        PlanBody::Empty if plan.method.allows_body() && plan.header("content-length").is_none() => {
            head.push_str("Content-Length: 0\r\n");
        }
        PlanBody::Stream(_) => head.push_str("Transfer-Encoding: chunked\r\n"),
        _ => {}
    }
    if plan.header("connection").is_none() {
        head.push_str("Connection: close\r\n");
    }
    head.push_str("\r\n");
    head
}

fn exchange<S: Read + Write>(
    stream: &mut S,
    plan: &RequestPlan,
    request_target: &str,
    stream_file: Option<File>,
) -> io::Result<RawResponse> {
    stream.write_all(request_head(plan, request_target).as_bytes())?;
    match (&plan.body, stream_file) {
        (PlanBody::Bytes(b), _) => stream.write_all(b)?,
        (PlanBody::Stream(_), Some(mut file)) => {
            let mut buf = vec![0u8; 16 * 1024];
            loop {
                let n = file.read(&mut buf)?;
                if n == 0 {
                    break;
                }
                http1::write_chunk(stream, &buf[..n])?;
            }
            stream.write_all(b"0\r\n\r\n")?;
        }
        _ => {}
    }
    stream.flush()?;
    read_response(&mut BufReader::new(stream))
}

fn read_response<R: BufRead>(reader: &mut R) -> io::Result<RawResponse> {
    loop {
        let head = http1::read_head(reader)?.ok_or_else(|| {
            io::Error::new(
                io::ErrorKind::UnexpectedEof,
                "server closed the connection without responding",
            )
        })?;
        let status = head.status()?;
        if (100..200).contains(&status) && status != 101 {
            // An interim response; the final one follows unless the server
            // hangs up, in which case the interim response is all there is.
            if reader.fill_buf()?.is_empty() {
                return Ok(RawResponse {
                    status,
                    headers: head.headers,
                    body: Vec::new(),
                });
            }
            continue;
        }
        let body = if (100..200).contains(&status) || status == 204 || status == 304 {
            Vec::new()
        } else if head.is_chunked() {
            http1::read_chunked(reader)?
        } else if let Some(len) = head.content_length()? {
            http1::read_exact_len(reader, len)?
        } else {
            read_until_close(reader)?
        };
        return Ok(RawResponse {
            status,
            headers: head.headers,
            body,
        });
    }
}

/// Reads to EOF. A TLS peer that closes without `close_notify` surfaces as
/// `UnexpectedEof`; for a close-delimited body that is still the end.
fn read_until_close<R: Read>(reader: &mut R) -> io::Result<Vec<u8>> {
    let mut body = Vec::new();
    match reader.read_to_end(&mut body) {
        Ok(_) => Ok(body),
        Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => Ok(body),
        Err(e) => Err(e),
    }
}
