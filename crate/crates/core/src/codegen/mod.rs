//! Client project generation.
//!
//! [`plan_project`] is a pure function from messages to a [`ProjectTree`];
//! [`emit`] writes a tree to disk. Emission only ever writes paths in the
//! tree. Files it does not know about, including clients of messages that
//! have since been removed, are left alone and reported as stale.

mod rust;

use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::io;
use std::path::{Component, Path};

use crate::binder::collect_input_variables;
use crate::model::HttpMessage;

pub use rust::RustDialect;

pub const DEFAULT_ROOT: &str = "httpLib";
pub const MANIFEST_FILE: &str = "httplib.manifest";
pub const PROJECT_NAME: &str = "httplib";
pub const PROJECT_VERSION: &str = "0.1.0";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OverwritePolicy {
    Always,
    IfAbsent,
}

/// What a generated file is for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FileRole {
    /// The dialect-neutral manifest: name, version, dependencies.
    Manifest,
    /// The dialect's own build manifest.
    NativeManifest,
    /// Response handler, response object, request type.
    Support,
    /// Crate roots, build scripts and shared runtime helpers.
    Scaffold,
    /// One per message.
    Client,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FileSpec {
    /// Relative, `/`-separated.
    pub path: String,
    pub content: Vec<u8>,
    pub policy: OverwritePolicy,
    pub role: FileRole,
}

impl FileSpec {
    pub fn text(path: impl Into<String>, content: impl Into<String>, role: FileRole) -> Self {
        FileSpec {
            path: path.into(),
            content: content.into().into_bytes(),
            policy: OverwritePolicy::Always,
            role,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectTree {
    pub root: String,
    pub files: Vec<FileSpec>,
}

impl ProjectTree {
    pub fn file(&self, path: &str) -> Option<&FileSpec> {
        self.files.iter().find(|f| f.path == path)
    }

    pub fn count(&self, role: FileRole) -> usize {
        self.files.iter().filter(|f| f.role == role).count()
    }

    pub fn with_root(mut self, root: impl Into<String>) -> Self {
        self.root = root.into();
        self
    }

    /// Unique relative paths that stay inside the root.
    pub fn check(&self) -> Result<(), CodegenError> {
        let mut seen = HashSet::new();
        for f in &self.files {
            if !is_contained(&f.path) {
                return Err(CodegenError::InvalidPath(f.path.clone()));
            }
            if !seen.insert(f.path.as_str()) {
                return Err(CodegenError::DuplicatePath(f.path.clone()));
            }
        }
        if !is_contained(&self.root) {
            return Err(CodegenError::InvalidPath(self.root.clone()));
        }
        Ok(())
    }
}

fn is_contained(path: &str) -> bool {
    !path.is_empty()
        && Path::new(path)
            .components()
            .all(|c| matches!(c, Component::Normal(_)))
}

#[derive(Debug, thiserror::Error)]
pub enum CodegenError {
    #[error("unknown dialect `{0}`; available: rust")]
    UnknownDialect(String),
    #[error("duplicate message name `{0}`")]
    DuplicateMessageName(String),
    #[error("path `{0}` escapes the project root")]
    InvalidPath(String),
    #[error("path `{0}` appears twice in the project tree")]
    DuplicatePath(String),
    #[error("cannot write `{path}`: {reason}")]
    Io { path: String, reason: String },
}

/// A code generation target.
pub trait Dialect: Sync {
    fn id(&self) -> &'static str;
    /// `(name, version requirement)` pairs for the neutral manifest.
    fn dependencies(&self) -> Vec<(&'static str, &'static str)>;
    /// Native manifest, scaffold and support files; independent of messages.
    fn fixed_files(&self) -> Vec<FileSpec>;
    fn client_path(&self, message: &HttpMessage) -> String;
    fn render_client_unit(&self, message: &HttpMessage) -> String;
}

static RUST: RustDialect = RustDialect;

pub fn dialect(id: &str) -> Result<&'static dyn Dialect, CodegenError> {
    match id {
        "rust" => Ok(&RUST),
        other => Err(CodegenError::UnknownDialect(other.to_string())),
    }
}

pub fn plan_project(messages: &[HttpMessage], dialect_id: &str) -> Result<ProjectTree, CodegenError> {
    let d = dialect(dialect_id)?;
    let mut names = HashSet::new();
    for m in messages {
        if !names.insert(m.name.as_str()) {
            return Err(CodegenError::DuplicateMessageName(m.name.clone()));
        }
    }

    let mut files = vec![FileSpec::text(MANIFEST_FILE, neutral_manifest(d), FileRole::Manifest)];
    files.extend(d.fixed_files());
    for m in messages {
        files.push(FileSpec::text(
            d.client_path(m),
            d.render_client_unit(m),
            FileRole::Client,
        ));
    }
    let tree = ProjectTree {
        root: DEFAULT_ROOT.to_string(),
        files,
    };
    tree.check()?;
    Ok(tree)
}

pub fn render_client_unit(message: &HttpMessage, dialect_id: &str) -> Result<String, CodegenError> {
    Ok(dialect(dialect_id)?.render_client_unit(message))
}

/// Parameter names of a message's entry routine, before any dialect-specific
/// escaping.
pub fn entry_parameters(message: &HttpMessage) -> Vec<String> {
    collect_input_variables(message)
}

fn neutral_manifest(d: &dyn Dialect) -> String {
    let mut out = String::from("# httpdsl generated project\n");
    out.push_str(&format!("name {PROJECT_NAME}\n"));
    out.push_str(&format!("version {PROJECT_VERSION}\n"));
    out.push_str(&format!("dialect {}\n", d.id()));
    for (name, version) in d.dependencies() {
        out.push_str(&format!("dependency {name} {version}\n"));
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EmitReport {
    pub created: Vec<String>,
    pub skipped: Vec<String>,
    /// Existing files rewritten under the `Always` policy, whether or not
    /// their content changed.
    pub overwritten: Vec<String>,
    /// Files next to generated clients that the tree no longer mentions.
    pub stale: Vec<String>,
}

/// Writes `tree` under `out_dir/<root>`.
pub fn emit(tree: &ProjectTree, out_dir: &Path) -> Result<EmitReport, CodegenError> {
    tree.check()?;
    let root = out_dir.join(&tree.root);
    let io_err = |path: &Path, e: io::Error| CodegenError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    };

    let mut report = EmitReport::default();
    for f in &tree.files {
        let path = root.join(&f.path);
        let existing = match fs::read(&path) {
            Ok(bytes) => Some(bytes),
            Err(e) if e.kind() == io::ErrorKind::NotFound => None,
            Err(e) => return Err(io_err(&path, e)),
        };
        match (existing, f.policy) {
            (None, _) => {
                if let Some(parent) = path.parent() {
                    fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
                }
                fs::write(&path, &f.content).map_err(|e| io_err(&path, e))?;
                report.created.push(f.path.clone());
            }
            (Some(_), OverwritePolicy::IfAbsent) => report.skipped.push(f.path.clone()),
            (Some(old), OverwritePolicy::Always) => {
                // Identical content is left untouched so timestamps and
                // incremental builds survive regeneration.
                if old != f.content {
                    fs::write(&path, &f.content).map_err(|e| io_err(&path, e))?;
                }
                report.overwritten.push(f.path.clone());
            }
        }
    }

    let known: HashSet<&str> = tree.files.iter().map(|f| f.path.as_str()).collect();
    let client_dirs: BTreeSet<&str> = tree
        .files
        .iter()
        .filter(|f| f.role == FileRole::Client)
        .filter_map(|f| f.path.rsplit_once('/').map(|(dir, _)| dir))
        .collect();
    for dir in client_dirs {
        let Ok(entries) = fs::read_dir(root.join(dir)) else { continue };
        let mut stale: Vec<String> = entries
            .filter_map(Result::ok)
            .filter(|e| e.path().is_file())
            .map(|e| format!("{dir}/{}", e.file_name().to_string_lossy()))
            .filter(|p| !known.contains(p.as_str()))
            .collect();
        stale.sort();
        for p in &stale {
            log::warn!("stale generated file left in place: {p}");
        }
        report.stale.extend(stale);
    }
    Ok(report)
}
