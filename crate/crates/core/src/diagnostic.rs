use std::fmt;

/// A region of source text: byte offset and length plus the 1-based line and
/// column of its first character.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Span {
    pub offset: usize,
    pub len: usize,
    pub line: u32,
    pub column: u32,
}

impl Span {
    pub fn new(offset: usize, len: usize, line: u32, column: u32) -> Self {
        Span {
            offset,
            len,
            line,
            column,
        }
    }

    pub fn end(&self) -> usize {
        self.offset + self.len
    }

    /// Smallest span covering both; `self` must start first.
    pub fn to(self, other: Span) -> Span {
        Span {
            len: other.end().saturating_sub(self.offset),
            ..self
        }
    }

    /// A sub-span of `len` bytes starting `delta` bytes in, assuming the
    /// span lies on one line.
    pub fn narrow(self, delta: usize, len: usize) -> Span {
        Span {
            offset: self.offset + delta,
            len,
            line: self.line,
            column: self.column + delta as u32,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub span: Span,
    pub message: String,
}

impl Diagnostic {
    pub fn error(span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            span,
            message: message.into(),
        }
    }

    pub fn warning(span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            span,
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// `file:line:col: severity: message`
    pub fn render(&self, file: &str) -> String {
        format!(
            "{}:{}:{}: {}: {}",
            file,
            self.span.line.max(1),
            self.span.column.max(1),
            self.severity,
            self.message
        )
    }
}

pub fn has_errors(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(Diagnostic::is_error)
}
