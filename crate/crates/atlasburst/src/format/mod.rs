//! Input files (anatomy JSON, annotation NDJSON, palette JSON) and the JSON
//! documents served and written by the tools.

use atlasburst_core::{AnatomyError, ExpressionError, IdError};
use thiserror::Error;

pub mod anatomy;
pub mod annotations;
pub mod docs;
pub mod palette;

pub use anatomy::{parse_anatomy, write_anatomy, ParsedAnatomy, ANATOMY_FORMAT};
pub use annotations::{parse_annotations, write_annotations, ParsedAnnotations};
pub use palette::parse_palette;

/// How unknown keys in input files are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    #[default]
    Strict,
    /// Unknown keys become warnings.
    Lenient,
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unsupported format tag {0:?}")]
    FormatTag(String),
    #[error("unknown key {key:?} in {context}")]
    UnknownKey { context: String, key: String },
    #[error("{context}: {source}")]
    Id { context: String, source: IdError },
    #[error(transparent)]
    Anatomy(#[from] AnatomyError),
    #[error("line {line}: {source}")]
    Annotation { line: usize, source: ExpressionError },
    #[error("palette: {0}")]
    Palette(String),
}

impl FormatError {
    fn syntax(err: serde_json::Error, line_offset: usize) -> FormatError {
        FormatError::Syntax { line: err.line() + line_offset, column: err.column(), message: err.to_string() }
    }
}

/// Handles unknown keys found while reading a record.
fn check_unknown_keys<'a>(
    keys: impl Iterator<Item = &'a String>,
    context: impl Fn() -> String,
    mode: ParseMode,
    warnings: &mut Vec<String>,
) -> Result<(), FormatError> {
    for key in keys {
        match mode {
            ParseMode::Strict => return Err(FormatError::UnknownKey { context: context(), key: key.clone() }),
            ParseMode::Lenient => warnings.push(format!("ignored unknown key {key:?} in {}", context())),
        }
    }
    Ok(())
}
