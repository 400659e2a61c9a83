//! Minimal HTTP/1.1 framing used by the client transport and the mock server.

use std::io::{self, BufRead, Read, Write};
use std::net::TcpStream;
use std::time::Instant;

const MAX_HEAD_BYTES: usize = 64 * 1024;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Head {
    pub start_line: String,
    pub headers: Vec<(String, String)>,
}

impl Head {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }

    pub fn is_chunked(&self) -> bool {
        self.header("transfer-encoding")
            .is_some_and(|v| v.to_ascii_lowercase().contains("chunked"))
    }

    pub fn content_length(&self) -> io::Result<Option<u64>> {
        match self.header("content-length") {
            None => Ok(None),
            Some(v) => v
                .trim()
                .parse()
                .map(Some)
                .map_err(|_| invalid(format!("bad Content-Length `{v}`"))),
        }
    }

    /// Status code from a response start line.
    pub fn status(&self) -> io::Result<u16> {
        let mut parts = self.start_line.splitn(3, ' ');
        let version = parts.next().unwrap_or("");
        let code = parts.next().unwrap_or("");
        if !version.starts_with("HTTP/") || code.len() != 3 {
            return Err(invalid(format!("bad status line `{}`", self.start_line)));
        }
        code.parse()
            .map_err(|_| invalid(format!("bad status line `{}`", self.start_line)))
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

/// Reads a start line and header block. `Ok(None)` on EOF before any byte.
pub(crate) fn read_head<R: BufRead>(r: &mut R) -> io::Result<Option<Head>> {
    let mut total = 0;
    let mut start_line = None;
    let mut headers = Vec::new();
    loop {
        let mut raw = Vec::new();
        let n = r.read_until(b'\n', &mut raw)?;
        total += n;
        if total > MAX_HEAD_BYTES {
            return Err(invalid("header block too large"));
        }
        if n == 0 {
            return if start_line.is_none() && total == 0 {
                Ok(None)
            } else {
                Err(io::Error::new(
                    io::ErrorKind::UnexpectedEof,
                    "connection closed inside header block",
                ))
            };
        }
        let line = String::from_utf8_lossy(&raw);
        let line = line.trim_end_matches(['\r', '\n']);
        match &start_line {
            None if line.is_empty() => continue, // tolerate stray CRLF between messages
            None => start_line = Some(line.to_string()),
            Some(_) if line.is_empty() => break,
            Some(_) => {
                let (k, v) = line
                    .split_once(':')
                    .ok_or_else(|| invalid(format!("bad header line `{line}`")))?;
                headers.push((k.trim().to_string(), v.trim().to_string()));
            }
        }
    }
    Ok(Some(Head {
        start_line: start_line.unwrap_or_default(),
        headers,
    }))
}

pub(crate) fn read_exact_len<R: Read>(r: &mut R, len: u64) -> io::Result<Vec<u8>> {
    let mut buf = Vec::new();
    r.take(len).read_to_end(&mut buf)?;
    if (buf.len() as u64) < len {
        return Err(io::Error::new(
            io::ErrorKind::UnexpectedEof,
            format!("body ended after {} of {len} bytes", buf.len()),
        ));
    }
    Ok(buf)
}

pub(crate) fn read_chunked<R: BufRead>(r: &mut R) -> io::Result<Vec<u8>> {
    let mut body = Vec::new();
    loop {
        let mut line = String::new();
        if r.read_line(&mut line)? == 0 {
            return Err(io::Error::new(io::ErrorKind::UnexpectedEof, "truncated chunked body"));
        }
        let size_text = line.trim().split(';').next().unwrap_or("").trim();
        let size = u64::from_str_radix(size_text, 16)
            .map_err(|_| invalid(format!("bad chunk size `{size_text}`")))?;
        if size == 0 {
            // Trailers, up to the terminating empty line.
            loop {
                let mut t = String::new();
                if r.read_line(&mut t)? == 0 || t.trim().is_empty() {
                    return Ok(body);
                }
            }
        }
        body.extend(read_exact_len(r, size)?);
        let mut crlf = String::new();
        r.read_line(&mut crlf)?;
    }
}

pub(crate) fn write_chunk<W: Write>(w: &mut W, data: &[u8]) -> io::Result<()> {
    write!(w, "{:x}\r\n", data.len())?;
    w.write_all(data)?;
    w.write_all(b"\r\n")
}

/// A stream whose reads and writes all share one deadline. The socket handle
/// is a clone of the one underneath `inner`, used only to set timeouts.
pub(crate) struct DeadlineStream<S> {
    pub inner: S,
    socket: TcpStream,
    deadline: Instant,
}

impl<S> DeadlineStream<S> {
    pub fn new(inner: S, socket: TcpStream, deadline: Instant) -> Self {
        DeadlineStream {
            inner,
            socket,
            deadline,
        }
    }

    fn remaining(&self) -> io::Result<std::time::Duration> {
        let rem = self.deadline.saturating_duration_since(Instant::now());
        if rem.is_zero() {
            Err(io::Error::new(io::ErrorKind::TimedOut, "deadline elapsed"))
        } else {
            Ok(rem)
        }
    }
}

impl<S: Read> Read for DeadlineStream<S> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let rem = self.remaining()?;
        self.socket.set_read_timeout(Some(rem))?;
        self.inner.read(buf)
    }
}

impl<S: Write> Write for DeadlineStream<S> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let rem = self.remaining()?;
        self.socket.set_write_timeout(Some(rem))?;
        self.inner.write(buf)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

pub(crate) fn is_timeout(e: &io::Error) -> bool {
    matches!(e.kind(), io::ErrorKind::TimedOut | io::ErrorKind::WouldBlock)
}
