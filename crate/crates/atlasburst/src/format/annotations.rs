//! The annotation file: newline-delimited JSON objects
//! `{"gene":"Bmp4","structure":"EMAPA:16894","stage":15,"level":"strong","ref":"EMAGE:1"}`.
//! Blank lines and lines starting with `#` are skipped.

use std::collections::BTreeMap;
use std::io::BufRead;

use atlasburst_core::{Anatomy, Annotation, AnnotationStore, Conflict, ExpressionError, StageNumber};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{check_unknown_keys, FormatError, ParseMode};

#[derive(Deserialize)]
struct Record {
    gene: String,
    structure: String,
    stage: i64,
    level: String,
    #[serde(rename = "ref")]
    source_ref: Option<String>,
    #[serde(flatten)]
    extra: BTreeMap<String, Value>,
}

#[derive(Serialize)]
struct RecordOut<'a> {
    gene: &'a str,
    structure: String,
    stage: u8,
    level: &'a str,
    #[serde(rename = "ref", skip_serializing_if = "Option::is_none")]
    source_ref: Option<&'a str>,
}

#[derive(Debug, Clone)]
pub struct ParsedAnnotations {
    pub store: AnnotationStore,
    /// Losing records, with `record` rewritten to the 1-based line number.
    pub conflicts: Vec<Conflict>,
    pub warnings: Vec<String>,
}

pub fn parse_annotations(source: impl BufRead, anatomy: &Anatomy, mode: ParseMode) -> Result<ParsedAnnotations, FormatError> {
    let mut records = Vec::new();
    let mut lines = Vec::new();
    let mut warnings = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let rec: Record = serde_json::from_str(trimmed).map_err(|e| FormatError::syntax(e, i))?;
        check_unknown_keys(rec.extra.keys(), || format!("line {line_no}"), mode, &mut warnings)?;
        let fail = |source: ExpressionError| FormatError::Annotation { line: line_no, source };
        let structure = rec
            .structure
            .parse()
            .map_err(|source| FormatError::Id { context: format!("line {line_no}"), source })?;
        let stage = StageNumber::new(rec.stage)
            .map_err(|source| FormatError::Id { context: format!("line {line_no}"), source })?;
        records.push(Annotation {
            gene: rec.gene.parse().map_err(fail)?,
            structure,
            stage,
            level: rec.level.parse().map_err(fail)?,
            source_ref: rec.source_ref,
        });
        lines.push(line_no);
    }
    let (store, mut conflicts) = AnnotationStore::build(anatomy, records).map_err(|e| {
        let line = match &e {
            ExpressionError::UnknownStructure { record, .. } | ExpressionError::AbsentAtStage { record, .. } => lines[*record],
            _ => 0,
        };
        FormatError::Annotation { line, source: e }
    })?;
    for c in &mut conflicts {
        c.record = lines[c.record];
    }
    Ok(ParsedAnnotations { store, conflicts, warnings })
}

/// One record per line.
pub fn write_annotations<'a>(records: impl IntoIterator<Item = &'a Annotation>) -> String {
    let mut out = String::new();
    for a in records {
        let rec = RecordOut {
            gene: a.gene.as_str(),
            structure: a.structure.to_string(),
            stage: a.stage.get(),
            level: a.level.token(),
            source_ref: a.source_ref.as_deref(),
        };
        out.push_str(&serde_json::to_string(&rec).expect("record serializes"));
        out.push('\n');
    }
    out
}
