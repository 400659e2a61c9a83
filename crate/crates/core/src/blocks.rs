//! Workflow block descriptors derived from messages, and palettes of them.
//!
//! A block has one TEXT input port per input variable and two branches,
//! Success and Failure. Environment variables never become ports: they are
//! bound when the workflow is deployed, not when it is modelled.
//!
//! Palettes serialize to a line-oriented `.palette` manifest:
//!
//! ```text
//! # httpdsl palette v1
//! palette Weather
//! block WeatherLocation
//!   label WeatherLocation
//!   source weather.http
//!   port apiKeyParam TEXT
//!   port city TEXT
//!   branch Success response TEXT
//!   branch Failure response TEXT
//! end
//! ```

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use crate::binder::collect_input_variables;
use crate::model::{HttpMessage, RequestDocument, ReturnForm};
use crate::parser::parse_document;

pub const MANIFEST_HEADER: &str = "# httpdsl palette v1";
pub const REST_PRELUDE_SOURCE: &str = "builtin:rest.http";
const REST_HTTP: &str = include_str!("../assets/rest.http");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PortType {
    Text,
}

impl PortType {
    pub fn as_str(self) -> &'static str {
        "TEXT"
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Port {
    pub name: String,
    pub port_type: PortType,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BranchName {
    Success,
    Failure,
}

impl BranchName {
    pub fn as_str(self) -> &'static str {
        match self {
            BranchName::Success => "Success",
            BranchName::Failure => "Failure",
        }
    }
}

/// What a branch hands on: the payload text, or the full response record.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OutputType {
    Text,
    Full,
}

impl OutputType {
    pub fn as_str(self) -> &'static str {
        match self {
            OutputType::Text => "TEXT",
            OutputType::Full => "FULL",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchSpec {
    pub name: BranchName,
    pub output_name: String,
    pub output_type: OutputType,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockDescriptor {
    pub name: String,
    pub label: String,
    pub input_ports: Vec<Port>,
    pub branches: Vec<BranchSpec>,
}

impl BlockDescriptor {
    pub fn port_names(&self) -> Vec<&str> {
        self.input_ports.iter().map(|p| p.name.as_str()).collect()
    }
}

pub fn derive_block(message: &HttpMessage) -> BlockDescriptor {
    let output_type = match message.return_form() {
        ReturnForm::PayloadText => OutputType::Text,
        ReturnForm::FullResponse => OutputType::Full,
    };
    let branch = |name| BranchSpec {
        name,
        output_name: "response".to_string(),
        output_type,
    };
    BlockDescriptor {
        name: message.name.clone(),
        label: message.name.clone(),
        input_ports: collect_input_variables(message)
            .into_iter()
            .map(|name| Port {
                name,
                port_type: PortType::Text,
            })
            .collect(),
        branches: vec![branch(BranchName::Success), branch(BranchName::Failure)],
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PaletteEntry {
    pub block: BlockDescriptor,
    /// The description file the block came from.
    pub source: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Palette {
    pub name: String,
    pub entries: Vec<PaletteEntry>,
}

impl Palette {
    pub fn new(name: impl Into<String>) -> Self {
        Palette {
            name: name.into(),
            entries: Vec::new(),
        }
    }

    pub fn blocks(&self) -> impl Iterator<Item = &BlockDescriptor> {
        self.entries.iter().map(|e| &e.block)
    }

    pub fn block(&self, name: &str) -> Option<&BlockDescriptor> {
        self.blocks().find(|b| b.name == name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Appends `other`'s entries, rejecting names already present.
    pub fn extend(&mut self, other: Palette) -> Result<(), PaletteError> {
        let mut seen: HashMap<String, String> = self
            .entries
            .iter()
            .map(|e| (e.block.name.clone(), e.source.clone()))
            .collect();
        let mut collisions = Vec::new();
        for e in &other.entries {
            if let Some(first) = seen.get(&e.block.name) {
                collisions.push(DuplicateBlockName {
                    name: e.block.name.clone(),
                    first: first.clone(),
                    second: e.source.clone(),
                });
            } else {
                seen.insert(e.block.name.clone(), e.source.clone());
            }
        }
        if !collisions.is_empty() {
            return Err(PaletteError { collisions });
        }
        self.entries.extend(other.entries);
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("duplicate block name `{name}` in {first} and {second}")]
pub struct DuplicateBlockName {
    pub name: String,
    pub first: String,
    pub second: String,
}

/// Every name collision found while building a palette.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PaletteError {
    pub collisions: Vec<DuplicateBlockName>,
}

impl fmt::Display for PaletteError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.collisions.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl std::error::Error for PaletteError {}

/// One block per message across `documents`, in document order. Every name
/// collision is reported, not just the first.
pub fn build_palette(documents: &[RequestDocument], name: &str) -> Result<Palette, PaletteError> {
    let mut palette = Palette::new(name);
    let mut first_source: HashMap<&str, &str> = HashMap::new();
    let mut collisions = Vec::new();
    for doc in documents {
        for m in &doc.messages {
            match first_source.get(m.name.as_str()) {
                Some(first) => collisions.push(DuplicateBlockName {
                    name: m.name.clone(),
                    first: first.to_string(),
                    second: doc.source_name.clone(),
                }),
                None => {
                    first_source.insert(&m.name, &doc.source_name);
                    palette.entries.push(PaletteEntry {
                        block: derive_block(m),
                        source: doc.source_name.clone(),
                    });
                }
            }
        }
    }
    if collisions.is_empty() {
        Ok(palette)
    } else {
        Err(PaletteError { collisions })
    }
}

fn rest_document() -> &'static RequestDocument {
    static DOC: OnceLock<RequestDocument> = OnceLock::new();
    DOC.get_or_init(|| {
        parse_document(REST_HTTP, REST_PRELUDE_SOURCE)
            .expect("bundled rest.http parses; covered by tests")
    })
}

/// The four generic GET/POST/PUT/DELETE blocks.
pub fn rest_prelude() -> Palette {
    build_palette(std::slice::from_ref(rest_document()), "REST")
        .expect("bundled rest.http has unique names")
}

/// Messages behind [`rest_prelude`], for running or generating them.
pub fn rest_prelude_document() -> &'static RequestDocument {
    rest_document()
}

pub fn export_palette(palette: &Palette) -> String {
    let mut out = String::new();
    out.push_str(MANIFEST_HEADER);
    out.push('\n');
    out.push_str(&format!("palette {}\n", palette.name));
    for e in &palette.entries {
        let b = &e.block;
        out.push_str(&format!("block {}\n", b.name));
        out.push_str(&format!("  label {}\n", b.label));
        out.push_str(&format!("  source {}\n", e.source));
        for p in &b.input_ports {
            out.push_str(&format!("  port {} {}\n", p.name, p.port_type.as_str()));
        }
        for br in &b.branches {
            out.push_str(&format!(
                "  branch {} {} {}\n",
                br.name.as_str(),
                br.output_name,
                br.output_type.as_str()
            ));
        }
        out.push_str("end\n");
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("palette manifest line {line}: {message}")]
pub struct ManifestError {
    pub line: usize,
    pub message: String,
}

pub fn parse_manifest(text: &str) -> Result<Palette, ManifestError> {
    let err = |line: usize, message: String| ManifestError { line, message };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

    match lines.next() {
        Some((_, l)) if l == MANIFEST_HEADER => {}
        _ => return Err(err(1, format!("expected header `{MANIFEST_HEADER}`"))),
    }
    let mut palette = match lines.next() {
        Some((_, l)) if l.starts_with("palette ") => Palette::new(&l["palette ".len()..]),
        Some((n, _)) => return Err(err(n, "expected `palette NAME`".into())),
        None => return Err(err(2, "expected `palette NAME`".into())),
    };

    let mut current: Option<PaletteEntry> = None;
    for (n, raw) in lines {
        if raw.is_empty() {
            continue;
        }
        let (key, rest) = raw.trim_start().split_once(' ').unwrap_or((raw.trim_start(), ""));
        match (key, current.as_mut()) {
            ("block", None) => {
                current = Some(PaletteEntry {
                    block: BlockDescriptor {
                        name: rest.to_string(),
                        label: String::new(),
                        input_ports: Vec::new(),
                        branches: Vec::new(),
                    },
                    source: String::new(),
                });
            }
            ("end", Some(_)) => palette.entries.push(current.take().unwrap()),
            ("label", Some(e)) => e.block.label = rest.to_string(),
            ("source", Some(e)) => e.source = rest.to_string(),
            ("port", Some(e)) => {
                let (name, ty) = rest
                    .split_once(' ')
                    .ok_or_else(|| err(n, "expected `port NAME TYPE`".into()))?;
                if ty != "TEXT" {
                    return Err(err(n, format!("unknown port type `{ty}`")));
                }
                e.block.input_ports.push(Port {
                    name: name.to_string(),
                    port_type: PortType::Text,
                });
            }
            ("branch", Some(e)) => {
                let parts: Vec<&str> = rest.split(' ').collect();
                let [name, output, ty] = parts[..] else {
                    return Err(err(n, "expected `branch NAME OUTPUT TYPE`".into()));
                };
                let name = match name {
                    "Success" => BranchName::Success,
                    "Failure" => BranchName::Failure,
                    other => return Err(err(n, format!("unknown branch `{other}`"))),
                };
                let output_type = match ty {
                    "TEXT" => OutputType::Text,
                    "FULL" => OutputType::Full,
                    other => return Err(err(n, format!("unknown output type `{other}`"))),
                };
                e.block.branches.push(BranchSpec {
                    name,
                    output_name: output.to_string(),
                    output_type,
                });
            }
            ("block", Some(_)) => return Err(err(n, "`block` inside a block; missing `end`".into())),
            (other, None) => return Err(err(n, format!("`{other}` outside a block"))),
            (other, Some(_)) => return Err(err(n, format!("unknown block field `{other}`"))),
        }
    }
    if current.is_some() {
        return Err(err(text.lines().count(), "unterminated block; missing `end`".into()));
    }
    Ok(palette)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(src: &str, name: &str) -> RequestDocument {
        parse_document(src, name).unwrap()
    }

    #[test]
    fn derived_ports_skip_environment_variables() {
        let d = doc(
            "http { name A url server environment HOST path input $p type GET param k: input $v param e: environment KEY }",
            "a.http",
        );
        let b = derive_block(&d.messages[0]);
        assert_eq!(b.port_names(), ["p", "v"]);
        assert_eq!(b.name, b.label);
        assert_eq!(b.branches.len(), 2);
    }

    #[test]
    fn full_response_blocks() {
        let d = doc(
            "http { name A url server a.example type GET returns { expect application/json as FULL_RESPONSE } }",
            "a.http",
        );
        let b = derive_block(&d.messages[0]);
        assert!(b.branches.iter().all(|br| br.output_type == OutputType::Full));
    }

    #[test]
    fn prelude_shape() {
        let p = rest_prelude();
        let names: Vec<_> = p.blocks().map(|b| b.name.as_str()).collect();
        assert_eq!(names, ["GetRequest", "PostRequest", "PutRequest", "DeleteRequest"]);
        let get = p.block("GetRequest").unwrap().port_names();
        assert_eq!(get, ["url", "path", "paramKey", "paramValue", "headerKey", "headerValue"]);
        assert_eq!(p.block("DeleteRequest").unwrap().port_names(), get);
        for name in ["PostRequest", "PutRequest"] {
            let ports = p.block(name).unwrap().port_names();
            assert_eq!(ports.len(), get.len() + 1);
            assert_eq!(ports.last(), Some(&"payload"));
        }
    }

    #[test]
    fn collisions_are_all_reported() {
        let a = doc("http { name Ping url server a.example type GET } http { name Pong url server a.example type GET }", "a.http");
        let b = doc("http { name Ping url server b.example type GET }", "b.http");
        let c = doc("http { name Pong url server c.example type GET }", "c.http");
        let e = build_palette(&[a, b, c], "P").unwrap_err();
        assert_eq!(e.collisions.len(), 2);
        assert_eq!(e.collisions[0].to_string(), "duplicate block name `Ping` in a.http and b.http");
        assert_eq!(e.collisions[1].second, "c.http");
    }

    #[test]
    fn manifest_round_trip() {
        let p = rest_prelude();
        let text = export_palette(&p);
        assert_eq!(parse_manifest(&text).unwrap(), p);
        assert_eq!(export_palette(&parse_manifest(&text).unwrap()), text);
        let empty = export_palette(&Palette::new("Empty"));
        assert_eq!(empty, "# httpdsl palette v1\npalette Empty\n");
        assert!(parse_manifest(&empty).unwrap().is_empty());
    }

    #[test]
    fn manifest_errors() {
        assert_eq!(parse_manifest("nope").unwrap_err().line, 1);
        let bad = "# httpdsl palette v1\npalette P\nblock A\n  port x INT\nend\n";
        assert_eq!(parse_manifest(bad).unwrap_err().line, 4);
        let open = "# httpdsl palette v1\npalette P\nblock A\n";
        assert!(parse_manifest(open).is_err());
    }
}
