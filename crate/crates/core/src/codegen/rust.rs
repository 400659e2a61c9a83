//! The built-in Rust dialect.
//!
//! Generated projects are ordinary Cargo library crates built on `ureq`.
//! A build script discovers `src/clients/*.rs`, so adding a message adds
//! exactly one file and leaves every other file byte-identical.

use std::fmt::Write;

use super::{Dialect, FileRole, FileSpec, PROJECT_NAME, PROJECT_VERSION};
use crate::binder::collect_input_variables;
use crate::model::*;

#[derive(Clone, Copy, Debug, Default)]
pub struct RustDialect;

const DEPENDENCIES: &[(&str, &str)] = &[("base64", "0.22"), ("ureq", "2")];

const KEYWORDS: &[&str] = &[
    "as", "async", "await", "break", "const", "continue", "crate", "dyn", "else", "enum",
    "extern", "false", "fn", "for", "if", "impl", "in", "let", "loop", "match", "mod", "move",
    "mut", "pub", "ref", "return", "self", "Self", "static", "struct", "super", "trait", "true",
    "type", "unsafe", "use", "where", "while", "abstract", "become", "box", "do", "final", "gen",
    "macro", "override", "priv", "try", "typeof", "unsized", "virtual", "yield",
];

/// Keywords that cannot be written as raw identifiers.
const NOT_RAW: &[&str] = &["crate", "self", "Self", "super"];

impl Dialect for RustDialect {
    fn id(&self) -> &'static str {
        "rust"
    }

    fn dependencies(&self) -> Vec<(&'static str, &'static str)> {
        DEPENDENCIES.to_vec()
    }

    fn fixed_files(&self) -> Vec<FileSpec> {
        vec![
            FileSpec::text("Cargo.toml", cargo_toml(), FileRole::NativeManifest),
            FileSpec::text("build.rs", build_rs(), FileRole::Scaffold),
            FileSpec::text("src/lib.rs", LIB_RS, FileRole::Scaffold),
            FileSpec::text("src/runtime.rs", RUNTIME_RS, FileRole::Scaffold),
            FileSpec::text("src/request_type.rs", REQUEST_TYPE_RS, FileRole::Support),
            FileSpec::text("src/response_object.rs", RESPONSE_OBJECT_RS, FileRole::Support),
            FileSpec::text("src/response_handler.rs", RESPONSE_HANDLER_RS, FileRole::Support),
        ]
    }

    fn client_path(&self, message: &HttpMessage) -> String {
        format!("src/clients/{}.rs", message.name)
    }

    fn render_client_unit(&self, message: &HttpMessage) -> String {
        render(message)
    }
}

fn cargo_toml() -> String {
    let mut out = format!(
        "[package]\nname = \"{PROJECT_NAME}\"\nversion = \"{PROJECT_VERSION}\"\nedition = \"2021\"\npublish = false\n\n[dependencies]\n"
    );
    for (name, version) in DEPENDENCIES {
        let _ = writeln!(out, "{name} = \"{version}\"");
    }
    // Stand-alone even when emitted inside another workspace.
    out.push_str("\n[workspace]\n");
    out
}

fn build_rs() -> String {
    let keywords = KEYWORDS
        .iter()
        .map(|k| format!("{k:?}"))
        .collect::<Vec<_>>()
        .join(", ");
    BUILD_RS.replace("@KEYWORDS@", &keywords)
}

/// A Rust identifier for an input variable name.
pub(crate) fn rust_ident(name: &str) -> String {
    if NOT_RAW.contains(&name) {
        format!("{name}_")
    } else if KEYWORDS.contains(&name) {
        format!("r#{name}")
    } else {
        name.to_string()
    }
}

/// Parameter identifiers, made unique after keyword escaping.
fn parameter_idents(names: &[String]) -> Vec<String> {
    let mut used: Vec<String> = Vec::new();
    for name in names {
        let mut ident = rust_ident(name);
        while used.contains(&ident) {
            ident.push('_');
        }
        used.push(ident);
    }
    used
}

struct Exprs {
    params: Vec<(String, String)>,
}

impl Exprs {
    fn value(&self, v: &Value) -> String {
        match v {
            Value::Literal(s) => format!("String::from({s:?})"),
            Value::Variable(var) => self.variable(var),
        }
    }

    fn variable(&self, var: &VariableRef) -> String {
        match var.kind {
            VariableKind::Input => {
                let ident = self
                    .params
                    .iter()
                    .find(|(n, _)| *n == var.name)
                    .map(|(_, i)| i.clone())
                    .unwrap_or_else(|| rust_ident(&var.name));
                format!("{ident}.to_string()")
            }
            VariableKind::Environment => format!("runtime::env({:?})?", var.name),
        }
    }

    fn header_key(&self, k: &HeaderKey) -> String {
        match k {
            HeaderKey::WellKnown(h) => format!("String::from({:?})", h.as_str()),
            HeaderKey::Custom(s) => format!("String::from({s:?})"),
            HeaderKey::Variable(v) => self.variable(v),
        }
    }

    fn content_type(&self, c: &ContentTypeSpec) -> String {
        match c {
            ContentTypeSpec::WellKnown(m) => format!("String::from({:?})", m.as_str()),
            ContentTypeSpec::Custom(s) => format!("String::from({s:?})"),
            ContentTypeSpec::Variable(v) => self.variable(v),
        }
    }
}

fn render(m: &HttpMessage) -> String {
    let names = collect_input_variables(m);
    let idents = parameter_idents(&names);
    let x = Exprs {
        params: names.iter().cloned().zip(idents.iter().cloned()).collect(),
    };
    let signature = idents
        .iter()
        .map(|i| format!("{i}: &str"))
        .collect::<Vec<_>>()
        .join(", ");
    let timeout = m
        .customization
        .as_ref()
        .and_then(|c| c.timeout_ms)
        .unwrap_or(DEFAULT_TIMEOUT_MS);

    let mut o = String::new();
    let _ = writeln!(o, "//! `{}`: generated client. Regenerate instead of editing.", m.name);
    o.push_str("\nuse std::time::Duration;\n\n");
    o.push_str("use crate::request_type::RequestType;\nuse crate::response_handler;\nuse crate::response_object::ResponseObject;\nuse crate::runtime;\n\n");
    let _ = writeln!(o, "/// Sends `{}` once; no redirects are followed and nothing is retried.", m.name);
    o.push_str("#[allow(non_snake_case, unused_mut, clippy::all)]\n");
    let _ = writeln!(o, "pub fn send_request({signature}) -> Result<ResponseObject, String> {{");

    // Request assembly.
    let _ = writeln!(o, "    let __server = runtime::normalize_server(&{})?;", x.value(&m.url.server));
    let _ = writeln!(o, "    let __path = {};", x.value(&m.url.path));
    o.push_str("    let mut __query: Vec<(String, String)> = Vec::new();\n");
    for p in &m.query {
        let _ = writeln!(o, "    __query.push(({}, {}));", x.value(&p.key), x.value(&p.value));
    }
    o.push_str("    let __url = runtime::build_url(&__server, &__path, &__query);\n\n");

    // Client configuration.
    o.push_str("    let mut __builder = ureq::AgentBuilder::new()\n        .redirects(0)\n");
    let _ = writeln!(o, "        .timeout(Duration::from_millis({timeout}));");
    if let Some(p) = m.customization.as_ref().and_then(|c| c.proxy.as_ref()) {
        o.push_str("    // proxy\n");
        let _ = writeln!(
            o,
            "    __builder = __builder.proxy(runtime::proxy(&{}, &{})?);",
            x.value(&p.host),
            x.value(&p.port)
        );
    }
    o.push_str("    let __agent = __builder.build();\n\n");

    let _ = writeln!(o, "    let mut __request = __agent.request({:?}, &__url);", m.method.as_str());
    for h in &m.headers {
        let _ = writeln!(
            o,
            "    __request = __request.set(&{}, &{});",
            x.header_key(&h.key),
            x.value(&h.value)
        );
    }
    if let Some(b) = &m.body {
        let _ = writeln!(
            o,
            "    __request = __request.set(\"Content-Type\", &{});",
            x.content_type(&b.content_type)
        );
    }
    if let Some(a) = m.customization.as_ref().and_then(|c| c.basic_auth.as_ref()) {
        let _ = writeln!(
            o,
            "    __request = __request.set(\"Authorization\", &runtime::basic_auth(&{}, &{}));",
            x.value(&a.username),
            x.value(&a.password)
        );
    }

    // Send.
    let send = match &m.body {
        None => "__request.call()".to_string(),
        Some(b) => {
            let payload = x.value(&b.payload);
            match b.entity_type {
                EntityKind::Text => format!("__request.send_string(&{payload})"),
                EntityKind::File => format!("__request.send_bytes(&runtime::read_file(&{payload})?)"),
                EntityKind::Bytes => {
                    format!("__request.send_bytes(&runtime::decode_base64(&{payload})?)")
                }
                EntityKind::Stream => format!("__request.send(runtime::open_file(&{payload})?)"),
            }
        }
    };
    let _ = writeln!(o, "    let __result = {send};");

    // Response handling.
    let _ = writeln!(
        o,
        "    response_handler::handle(__result, RequestType::{})",
        m.method.as_str()
    );
    o.push_str("}\n");
    o
}

const LIB_RS: &str = r##"//! Generated HTTP clients. Regenerate instead of editing.

pub mod request_type;
pub mod response_handler;
pub mod response_object;
pub mod runtime;

/// One module per message, each exposing `send_request`.
pub mod clients {
    include!(concat!(env!("OUT_DIR"), "/clients.rs"));
}

pub use request_type::RequestType;
pub use response_object::ResponseObject;
"##;

const BUILD_RS: &str = r##"//! Declares one module per file in `src/clients`.

use std::env;
use std::fmt::Write;
use std::fs;
use std::path::{Path, PathBuf};

const KEYWORDS: &[&str] = &[@KEYWORDS@];

fn main() {
    let root = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    let dir = root.join("src").join("clients");
    println!("cargo:rerun-if-changed={}", dir.display());

    let mut names: Vec<String> = fs::read_dir(&dir)
        .map(|entries| {
            entries
                .filter_map(Result::ok)
                .map(|e| e.path())
                .filter(|p| p.extension().is_some_and(|x| x == "rs"))
                .filter_map(|p| p.file_stem().and_then(|s| s.to_str()).map(String::from))
                .collect()
        })
        .unwrap_or_default();
    names.sort();

    let mut out = String::new();
    for name in &names {
        let ident = if ["crate", "self", "Self", "super"].contains(&name.as_str()) {
            format!("{name}_")
        } else if KEYWORDS.contains(&name.as_str()) {
            format!("r#{name}")
        } else {
            name.clone()
        };
        let path = dir.join(format!("{name}.rs"));
        writeln!(out, "#[path = {:?}]", path.display().to_string()).unwrap();
        writeln!(out, "#[allow(non_snake_case)]").unwrap();
        writeln!(out, "pub mod {ident};").unwrap();
    }
    let out_dir = PathBuf::from(env::var("OUT_DIR").unwrap());
    fs::write(Path::new(&out_dir).join("clients.rs"), out).unwrap();
}
"##;

const RUNTIME_RS: &str = r##"//! Helpers shared by the generated clients.

use base64::Engine;

pub fn env(name: &str) -> Result<String, String> {
    std::env::var(name).map_err(|_| format!("environment variable `{name}` is not set"))
}

/// `scheme://authority`, defaulting to `http` and without a trailing `/`.
pub fn normalize_server(text: &str) -> Result<String, String> {
    let (scheme, rest) = match text.find("://") {
        Some(i) => (text[..i].to_ascii_lowercase(), &text[i + 3..]),
        None => ("http".to_string(), text),
    };
    if scheme != "http" && scheme != "https" {
        return Err(format!("unsupported scheme `{scheme}`"));
    }
    let rest = rest.strip_suffix('/').unwrap_or(rest);
    Ok(format!("{scheme}://{rest}"))
}

/// Percent-encodes everything outside `ALPHA / DIGIT / - . _ ~`.
pub fn encode_component(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for b in s.bytes() {
        if b.is_ascii_alphanumeric() || matches!(b, b'-' | b'.' | b'_' | b'~') {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}

pub fn build_url(server: &str, path: &str, query: &[(String, String)]) -> String {
    let path = path.strip_prefix('/').unwrap_or(path);
    let mut url = format!("{server}/{path}");
    for (i, (k, v)) in query.iter().enumerate() {
        url.push(if i == 0 { '?' } else { '&' });
        url.push_str(&encode_component(k));
        url.push('=');
        url.push_str(&encode_component(v));
    }
    url
}

pub fn basic_auth(user: &str, password: &str) -> String {
    let token = base64::engine::general_purpose::STANDARD.encode(format!("{user}:{password}"));
    format!("Basic {token}")
}

pub fn proxy(host: &str, port: &str) -> Result<ureq::Proxy, String> {
    ureq::Proxy::new(format!("http://{host}:{port}")).map_err(|e| e.to_string())
}

pub fn read_file(path: &str) -> Result<Vec<u8>, String> {
    std::fs::read(path).map_err(|e| format!("cannot read payload file `{path}`: {e}"))
}

pub fn open_file(path: &str) -> Result<std::fs::File, String> {
    std::fs::File::open(path).map_err(|e| format!("cannot read payload file `{path}`: {e}"))
}

pub fn decode_base64(text: &str) -> Result<Vec<u8>, String> {
    base64::engine::general_purpose::STANDARD
        .decode(text.trim())
        .map_err(|e| format!("BYTES payload is not valid base64: {e}"))
}
"##;

const REQUEST_TYPE_RS: &str = r##"#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RequestType {
    GET,
    POST,
    PUT,
    DELETE,
}

impl RequestType {
    pub fn as_str(self) -> &'static str {
        match self {
            RequestType::GET => "GET",
            RequestType::POST => "POST",
            RequestType::PUT => "PUT",
            RequestType::DELETE => "DELETE",
        }
    }
}
"##;

const RESPONSE_OBJECT_RS: &str = r##"use crate::request_type::RequestType;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResponseObject {
    pub payload: String,
    pub statuscode: u16,
    pub succeeded: bool,
    pub try_again: bool,
    pub next_uri: Option<String>,
    pub request_type: RequestType,
}

impl ResponseObject {
    /// `{"payload":…,"statuscode":…,"succeeded":…,"tryAgain":…,"nextUri":…,"requestType":…}`
    pub fn to_json(&self) -> String {
        let next_uri = match &self.next_uri {
            Some(u) => json_string(u),
            None => "null".to_string(),
        };
        format!(
            "{{\"payload\":{},\"statuscode\":{},\"succeeded\":{},\"tryAgain\":{},\"nextUri\":{},\"requestType\":{}}}",
            json_string(&self.payload),
            self.statuscode,
            self.succeeded,
            self.try_again,
            next_uri,
            json_string(self.request_type.as_str()),
        )
    }
}

fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
"##;

const RESPONSE_HANDLER_RS: &str = r##"use std::io::Read;

use crate::request_type::RequestType;
use crate::response_object::ResponseObject;

/// Turns a send result into a response object. Error statuses are responses
/// too; only transport failures are errors.
pub fn handle(
    result: Result<ureq::Response, ureq::Error>,
    request_type: RequestType,
) -> Result<ResponseObject, String> {
    let response = match result {
        Ok(r) => r,
        Err(ureq::Error::Status(_, r)) => r,
        Err(e) => return Err(e.to_string()),
    };
    let status = response.status();
    let location = response.header("Location").map(str::to_string);
    let mut body = Vec::new();
    response
        .into_reader()
        .read_to_end(&mut body)
        .map_err(|e| e.to_string())?;
    Ok(handle_response(status, location, &body, request_type))
}

pub fn handle_response(
    status: u16,
    location: Option<String>,
    body: &[u8],
    request_type: RequestType,
) -> ResponseObject {
    ResponseObject {
        payload: String::from_utf8_lossy(body).into_owned(),
        statuscode: status,
        succeeded: (200..=299).contains(&status),
        try_again: matches!(status, 408 | 429 | 500..=599),
        next_uri: if (300..=399).contains(&status) { location } else { None },
        request_type,
    }
}
"##;
