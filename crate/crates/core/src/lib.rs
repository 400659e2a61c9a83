//! Toolkit for `.http` request description files.
//!
//! A description file declares named HTTP messages in a small DSL. This crate
//! parses and validates those files, binds their input and environment
//! variables, executes the resulting requests, generates standalone client
//! projects from them and derives workflow block descriptors.
//!
//! ```
//! use httpdsl::parser::parse_document;
//!
//! let doc = parse_document(
//!     "http {\n    name Ping\n    url server localhost:8080\n    type GET\n}\n",
//!     "ping.http",
//! )
//! .unwrap();
//! assert_eq!(doc.messages[0].name, "Ping");
//! ```

pub mod binder;
pub mod blocks;
pub mod codegen;
pub mod diagnostic;
pub mod executor;
pub mod mock;
pub mod model;
pub mod parser;
pub mod url;
pub mod validate;

pub use diagnostic::{Diagnostic, Severity, Span};
pub use model::*;
