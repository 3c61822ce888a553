//! The anatomy file: UTF-8 JSON.
//!
//! ```json
//! {"format":"atlasburst-anatomy/1","root":"EMAPA:1","structures":[
//! {"id":"EMAPA:16105","name":"heart","parent":"EMAPA:1","stages":["10-26"],
//!  "aliases":{"12":"EMAP:315","17":"EMAP:2411"},"major_system":true}
//! ]}
//! ```
//!
//! Stages are integers or inclusive `"a-b"` interval strings.

use std::collections::BTreeMap;
use std::io::Read;

use atlasburst_core::{Anatomy, StageNumber, StageSet, Structure, StructureId, ValidationReport};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{check_unknown_keys, FormatError, ParseMode};

pub const ANATOMY_FORMAT: &str = "atlasburst-anatomy/1";

#[derive(Deserialize)]
struct AnatomyFile {
    format: String,
    root: String,
    structures: Vec<StructureEntry>,
    #[serde(flatten)]
    extra: BTreeMap<String, Value>,
}

#[derive(Deserialize, Serialize)]
#[serde(untagged)]
enum StageToken {
    Single(i64),
    Interval(String),
}

#[derive(Deserialize)]
struct StructureEntry {
    id: String,
    name: String,
    abbr: Option<String>,
    parent: Option<String>,
    stages: Vec<StageToken>,
    #[serde(default)]
    aliases: BTreeMap<String, String>,
    major_system: Option<bool>,
    isa: Option<Vec<String>>,
    #[serde(flatten)]
    extra: BTreeMap<String, Value>,
}

/// A validated anatomy plus the warnings met on the way (lenient-mode
/// unknown keys and warning-severity findings).
#[derive(Debug, Clone)]
pub struct ParsedAnatomy {
    pub anatomy: Anatomy,
    pub report: ValidationReport,
    pub warnings: Vec<String>,
}

fn id(text: &str, context: impl Fn() -> String) -> Result<StructureId, FormatError> {
    text.parse().map_err(|source| FormatError::Id { context: context(), source })
}

fn stage_set(tokens: &[StageToken], context: impl Fn() -> String) -> Result<StageSet, FormatError> {
    let mut set = StageSet::EMPTY;
    for token in tokens {
        let part = match token {
            StageToken::Single(n) => StageNumber::new(*n).map(|s| std::iter::once(s).collect()),
            StageToken::Interval(text) => StageSet::parse_token(text),
        };
        set = set.union(&part.map_err(|source| FormatError::Id { context: context(), source })?);
    }
    Ok(set)
}

/// Reads, assembles and validates an anatomy. Error-severity findings
/// reject the file with [`atlasburst_core::AnatomyError::Invalid`].
pub fn parse_anatomy(mut source: impl Read, mode: ParseMode) -> Result<ParsedAnatomy, FormatError> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    let file: AnatomyFile = serde_json::from_slice(&bytes).map_err(|e| FormatError::syntax(e, 0))?;
    if file.format != ANATOMY_FORMAT {
        return Err(FormatError::FormatTag(file.format));
    }
    let mut warnings = Vec::new();
    check_unknown_keys(file.extra.keys(), || "anatomy file".into(), mode, &mut warnings)?;
    let root = id(&file.root, || "root".into())?;

    let mut structures = Vec::with_capacity(file.structures.len());
    for (i, entry) in file.structures.into_iter().enumerate() {
        let raw_id = entry.id.clone();
        let ctx = || format!("structure #{i} ({raw_id})");
        check_unknown_keys(entry.extra.keys(), ctx, mode, &mut warnings)?;
        let sid = id(&raw_id, ctx)?;
        let parent = entry.parent.as_deref().map(|p| id(p, ctx)).transpose()?;
        let mut s = Structure::new(sid, entry.name, parent, stage_set(&entry.stages, ctx)?);
        s.abbreviation = entry.abbr;
        s.is_major_system = entry.major_system.unwrap_or(false);
        for (stage, staged) in &entry.aliases {
            let stage: StageNumber = stage.parse().map_err(|source| FormatError::Id { context: ctx(), source })?;
            s.aliases.insert(stage, id(staged, ctx)?);
        }
        for target in entry.isa.iter().flatten() {
            s.isa.push(id(target, ctx)?);
        }
        structures.push(s);
    }
    let (anatomy, report) = Anatomy::from_structures(root, structures)?;
    Ok(ParsedAnatomy { anatomy, report, warnings })
}

#[derive(Serialize)]
struct StructureOut<'a> {
    id: String,
    name: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    abbr: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    parent: Option<String>,
    stages: Vec<StageToken>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    aliases: BTreeMap<u8, String>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    major_system: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    isa: Vec<String>,
}

/// Contiguous runs as `"a-b"`, lone stages as integers.
fn stage_tokens(set: &StageSet) -> Vec<StageToken> {
    let mut runs: Vec<(u8, u8)> = Vec::new();
    for s in set.iter().map(StageNumber::get) {
        match runs.last_mut() {
            Some((_, end)) if *end + 1 == s => *end = s,
            _ => runs.push((s, s)),
        }
    }
    runs.into_iter()
        .map(|(a, b)| if a == b { StageToken::Single(a.into()) } else { StageToken::Interval(format!("{a}-{b}")) })
        .collect()
}

/// Serializes an anatomy, one structure per line, in abstract preorder.
pub fn write_anatomy(anatomy: &Anatomy) -> String {
    let mut out = format!("{{\"format\":\"{ANATOMY_FORMAT}\",\"root\":\"{}\",\"structures\":[\n", anatomy.root());
    let lines: Vec<String> = anatomy
        .structures()
        .iter()
        .map(|s| {
            let rec = StructureOut {
                id: s.id.to_string(),
                name: &s.name,
                abbr: s.abbreviation.as_deref(),
                parent: s.parent.map(|p| p.to_string()),
                stages: stage_tokens(&s.stages),
                aliases: s.aliases.iter().map(|(k, v)| (k.get(), v.to_string())).collect(),
                major_system: s.is_major_system,
                isa: s.isa.iter().map(ToString::to_string).collect(),
            };
            serde_json::to_string(&rec).expect("structure serializes")
        })
        .collect();
    out.push_str(&lines.join(",\n"));
    out.push_str("\n]}\n");
    out
}
