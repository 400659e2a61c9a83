use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use httpdsl::binder::{resolve, BindingSet, ResolveError};
use httpdsl::blocks::{build_palette, export_palette, rest_prelude, Palette};
use httpdsl::codegen::{emit, plan_project, FileRole};
use httpdsl::executor::{build_plan, execute, TcpTransport, Transport, TransportError};
use httpdsl::mock::{MockScript, ScriptedTransport};
use httpdsl::parser::{format_source, http_files, parse_document};
use httpdsl::validate::validate_document;
use httpdsl::{Diagnostic, RequestDocument, ReturnForm};

pub const OK: u8 = 0;
pub const FAILURE: u8 = 1;
pub const USAGE: u8 = 2;
pub const TRANSPORT: u8 = 3;

pub const TIMEOUT_ENV: &str = "HTTPDSL_TIMEOUT_MS";

fn fail(code: u8, message: impl std::fmt::Display) -> u8 {
    eprintln!("error: {message}");
    code
}

/// Expands directories to the `.http` files inside them.
fn expand(paths: &[PathBuf]) -> Result<Vec<PathBuf>, String> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            files.extend(http_files(p).map_err(|e| format!("{}: {e}", p.display()))?);
        } else if p.is_file() {
            files.push(p.clone());
        } else {
            return Err(format!("{}: no such file or directory", p.display()));
        }
    }
    Ok(files)
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn print_diagnostics(file: &str, diags: &[Diagnostic]) {
    for d in diags {
        eprintln!("{}", d.render(file));
    }
}

/// Parses and validates; any error diagnostic aborts with exit code 2.
fn load_documents(paths: &[PathBuf]) -> Result<Vec<RequestDocument>, u8> {
    let files = expand(paths).map_err(|e| fail(USAGE, e))?;
    let mut docs = Vec::new();
    let mut broken = false;
    for path in files {
        let text = read(&path).map_err(|e| fail(USAGE, e))?;
        let name = path.display().to_string();
        match parse_document(&text, &name) {
            Ok(doc) => {
                let diags = validate_document(&doc);
                print_diagnostics(&name, &diags);
                broken |= diags.iter().any(Diagnostic::is_error);
                docs.push(doc);
            }
            Err(diags) => {
                print_diagnostics(&name, &diags);
                broken = true;
            }
        }
    }
    if broken {
        Err(USAGE)
    } else {
        Ok(docs)
    }
}

pub fn validate(paths: &[PathBuf]) -> u8 {
    let files = match expand(paths) {
        Ok(f) => f,
        Err(e) => return fail(USAGE, e),
    };
    let mut errors = 0;
    for path in files {
        let text = match read(&path) {
            Ok(t) => t,
            Err(e) => return fail(USAGE, e),
        };
        let name = path.display().to_string();
        let diags = match parse_document(&text, &name) {
            Ok(doc) => validate_document(&doc),
            Err(diags) => diags,
        };
        for d in &diags {
            println!("{}", d.render(&name));
        }
        errors += diags.iter().filter(|d| d.is_error()).count();
    }
    if errors > 0 {
        FAILURE
    } else {
        OK
    }
}

pub struct RunOptions {
    pub file: PathBuf,
    pub message: String,
    pub inputs: Vec<(String, String)>,
    pub env: Vec<(String, String)>,
    pub transport: String,
    pub json: bool,
}

fn default_timeout() -> Result<u64, String> {
    match std::env::var(TIMEOUT_ENV) {
        Err(_) => Ok(httpdsl::DEFAULT_TIMEOUT_MS),
        Ok(v) => v
            .trim()
            .parse::<u64>()
            .ok()
            .filter(|&ms| ms > 0)
            .ok_or_else(|| format!("{TIMEOUT_ENV} must be a positive number of milliseconds, got `{v}`")),
    }
}

fn transport(spec: &str) -> Result<Box<dyn Transport>, String> {
    if spec == "tcp" {
        return Ok(Box::new(TcpTransport::new()));
    }
    match spec.strip_prefix("mock:") {
        Some(path) => {
            let script = MockScript::load(Path::new(path))
                .map_err(|e| format!("cannot load mock script `{path}`: {e}"))?;
            Ok(Box::new(ScriptedTransport::new(script)))
        }
        None => Err(format!("unknown transport `{spec}`; expected `tcp` or `mock:<file>`")),
    }
}

pub fn run(opts: RunOptions) -> u8 {
    let docs = match load_documents(std::slice::from_ref(&opts.file)) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let Some(message) = docs.iter().find_map(|d| d.message(&opts.message)) else {
        let available: Vec<_> = docs
            .iter()
            .flat_map(|d| d.messages.iter().map(|m| m.name.as_str()))
            .collect();
        return fail(
            USAGE,
            format!(
                "no message named `{}` in {}; available: {}",
                opts.message,
                opts.file.display(),
                available.join(", ")
            ),
        );
    };

    let timeout = match default_timeout() {
        Ok(t) => t,
        Err(e) => return fail(USAGE, e),
    };
    let overrides: BTreeMap<String, String> = opts.env.into_iter().collect();
    let mut bindings = BindingSet::new()
        .with_default_timeout(timeout)
        .with_environment(move |name| {
            overrides
                .get(name)
                .cloned()
                .or_else(|| std::env::var(name).ok())
        });
    for (k, v) in opts.inputs {
        bindings = bindings.with_input(k, v);
    }

    let transport = match transport(&opts.transport) {
        Ok(t) => t,
        Err(e) => return fail(USAGE, e),
    };
    let resolved = match resolve(message, &bindings) {
        Ok(r) => r,
        Err(ResolveError::MissingInput(name)) => {
            return fail(
                USAGE,
                format!("missing value for input variable `{name}`; pass --input {name}=VALUE"),
            )
        }
        Err(e) => return fail(USAGE, e),
    };
    let plan = match build_plan(&resolved) {
        Ok(p) => p,
        Err(e) => return fail(USAGE, e),
    };
    let response = match execute(&plan, transport.as_ref()) {
        Ok(r) => r,
        Err(e @ TransportError::FileNotReadable { .. }) => return fail(USAGE, e),
        Err(e) => return fail(TRANSPORT, e),
    };

    if opts.json {
        println!("{}", serde_json::to_string(&response).expect("response serializes"));
    } else {
        match plan.return_form {
            ReturnForm::PayloadText => println!("{}", response.payload),
            ReturnForm::FullResponse => println!(
                "{}",
                serde_json::to_string_pretty(&response).expect("response serializes")
            ),
        }
    }
    if response.succeeded {
        OK
    } else {
        FAILURE
    }
}

pub fn generate(paths: &[PathBuf], out: &Path, dialect: &str, json: bool) -> u8 {
    if let Err(e) = httpdsl::codegen::dialect(dialect) {
        return fail(USAGE, e);
    }
    let docs = match load_documents(paths) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let messages: Vec<_> = docs.into_iter().flat_map(|d| d.messages).collect();
    let tree = match plan_project(&messages, dialect) {
        Ok(t) => t,
        Err(e) => return fail(USAGE, e),
    };
    let report = match emit(&tree, out) {
        Ok(r) => r,
        Err(e) => return fail(USAGE, e),
    };
    for p in &report.stale {
        eprintln!("warning: stale file left in place: {p}");
    }
    if json {
        let value = serde_json::json!({
            "root": out.join(&tree.root).display().to_string(),
            "created": report.created,
            "skipped": report.skipped,
            "overwritten": report.overwritten,
            "stale": report.stale,
        });
        println!("{}", serde_json::to_string_pretty(&value).expect("report serializes"));
    } else {
        println!("created: {}", report.created.len());
        println!("skipped: {}", report.skipped.len());
        println!("overwritten: {}", report.overwritten.len());
        println!(
            "project: {} ({} clients, {} support units, 1 manifest, {} {dialect} build files)",
            out.join(&tree.root).display(),
            tree.count(FileRole::Client),
            tree.count(FileRole::Support),
            tree.count(FileRole::NativeManifest) + tree.count(FileRole::Scaffold),
        );
    }
    OK
}

pub fn blocks(paths: &[PathBuf], out: Option<&Path>, name: Option<String>, prelude: bool) -> u8 {
    if paths.is_empty() && !prelude {
        return fail(USAGE, "no input files; pass paths or --with-rest-prelude");
    }
    let docs = match load_documents(paths) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let name = name.unwrap_or_else(|| {
        out.and_then(|p| p.file_stem())
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "palette".to_string())
    });
    let mut palette = Palette::new(&name);
    if prelude {
        palette.entries = rest_prelude().entries;
    }
    let collisions = match build_palette(&docs, &name) {
        Ok(p) => palette.extend(p).err(),
        Err(e) => Some(e),
    };
    if let Some(e) = collisions {
        for c in &e.collisions {
            eprintln!("error: {c}");
        }
        return FAILURE;
    }

    let text = export_palette(&palette);
    match out {
        Some(path) => {
            if let Err(e) = fs::write(path, &text) {
                return fail(USAGE, format!("{}: {e}", path.display()));
            }
            println!("wrote {} blocks to {}", palette.len(), path.display());
        }
        None => print!("{text}"),
    }
    OK
}

pub fn fmt(paths: &[PathBuf], check: bool) -> u8 {
    let files = match expand(paths) {
        Ok(f) => f,
        Err(e) => return fail(USAGE, e),
    };
    let mut pending = Vec::new();
    let mut broken = false;
    for path in files {
        let text = match read(&path) {
            Ok(t) => t,
            Err(e) => return fail(USAGE, e),
        };
        let name = path.display().to_string();
        match format_source(&text, &name) {
            Ok(formatted) if formatted != text => pending.push((path, formatted)),
            Ok(_) => {}
            Err(diags) => {
                print_diagnostics(&name, &diags);
                broken = true;
            }
        }
    }
    if broken {
        return USAGE;
    }
    if check {
        for (path, _) in &pending {
            println!("{}: not canonically formatted", path.display());
        }
        return if pending.is_empty() { OK } else { FAILURE };
    }
    for (path, formatted) in pending {
        if let Err(e) = fs::write(&path, formatted) {
            return fail(USAGE, format!("{}: {e}", path.display()));
        }
        println!("formatted {}", path.display());
    }
    OK
}
